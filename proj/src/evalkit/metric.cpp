#include "dsm/evalkit/metric.hpp"

#include <algorithm>
#include <cmath>

#include "dsm/core/error.hpp"

namespace dsm::eval {

TokenSet normalize_tokens(std::string_view s) {
  TokenSet tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.insert(std::move(current));
    current.clear();
  };
  for (unsigned char c : s) {
    if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      current.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

double jaccard(const TokenSet& a, const TokenSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& t : a) common += b.contains(t) ? 1 : 0;
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

double jaccard(std::string_view a, std::string_view b) {
  return jaccard(normalize_tokens(a), normalize_tokens(b));
}

void MatchConfig::validate() const {
  if (!(jaccard_threshold >= 0.0 && jaccard_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "jaccard_threshold must lie in [0,1]");
  }
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidSpec, "beta must be positive");
}

MatchResult match_mentions(std::span<const std::string> predicted,
                           std::span<const std::string> gold, const MatchConfig& cfg) {
  cfg.validate();
  std::vector<TokenSet> gold_tokens;
  std::vector<TokenSet> pred_tokens;
  for (const auto& g : gold) gold_tokens.push_back(normalize_tokens(g));
  for (const auto& p : predicted) pred_tokens.push_back(normalize_tokens(p));

  std::vector<MatchPair> candidates;
  for (std::size_t gi = 0; gi < gold.size(); ++gi) {
    for (std::size_t pi = 0; pi < predicted.size(); ++pi) {
      const double j = jaccard(gold_tokens[gi], pred_tokens[pi]);
      if (j > cfg.jaccard_threshold) candidates.push_back({gi, pi, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const MatchPair& a, const MatchPair& b) {
    if (a.jaccard != b.jaccard) return a.jaccard > b.jaccard;
    if (a.gold != b.gold) return a.gold < b.gold;
    return a.prediction < b.prediction;
  });

  MatchResult result;
  std::vector<bool> gold_used(gold.size(), false);
  std::vector<bool> pred_used(predicted.size(), false);
  for (const auto& c : candidates) {
    if (gold_used[c.gold] || pred_used[c.prediction]) continue;
    gold_used[c.gold] = true;
    pred_used[c.prediction] = true;
    result.pairs.push_back(c);
  }
  result.tp = result.pairs.size();
  result.fp = predicted.size() - result.tp;
  result.fn = gold.size() - result.tp;
  return result;
}

double precision_from(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp + fp == 0) return fn == 0 ? 1.0 : 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double recall_from(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp + fn == 0) return fp == 0 ? 1.0 : 0.0;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double f_beta(double precision, double recall, double beta) {
  if (precision + recall <= 0.0) return 0.0;
  const double b2 = beta * beta;
  return (1.0 + b2) * precision * recall / (b2 * precision + recall);
}

ScoreReport score_counts(std::size_t tp, std::size_t fp, std::size_t fn, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidSpec, "beta must be positive");
  ScoreReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.beta = beta;
  r.precision = precision_from(tp, fp, fn);
  r.recall = recall_from(tp, fp, fn);
  r.f_beta = f_beta(r.precision, r.recall, beta);
  return r;
}

ScoreReport score(std::span<const MatchResult> results, double beta, Aggregation aggregation) {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (const auto& r : results) {
    tp += r.tp;
    fp += r.fp;
    fn += r.fn;
  }
  ScoreReport report = score_counts(tp, fp, fn, beta);
  report.aggregation = aggregation;
  if (aggregation == Aggregation::macro && !results.empty()) {
    double p = 0.0;
    double rc = 0.0;
    double f = 0.0;
    for (const auto& r : results) {
      const auto page = score_counts(r.tp, r.fp, r.fn, beta);
      p += page.precision;
      rc += page.recall;
      f += page.f_beta;
    }
    const auto n = static_cast<double>(results.size());
    report.precision = p / n;
    report.recall = rc / n;
    report.f_beta = f / n;
  }
  return report;
}

double to_percent(double ratio) { return std::round(ratio * 100.0 * 100.0) / 100.0; }

}  // namespace dsm::eval
