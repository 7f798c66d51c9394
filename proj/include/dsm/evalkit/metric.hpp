#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsm::eval {

/// Unique lowercase ASCII-alphanumeric tokens of a string.
using TokenSet = std::set<std::string>;

/// Lowercases, treats every non [a-z0-9] byte as a separator, drops empty
/// tokens and collapses duplicates.
TokenSet normalize_tokens(std::string_view s);

/// |A ∩ B| / |A ∪ B| over token sets; 0 when both are empty.
double jaccard(const TokenSet& a, const TokenSet& b);
double jaccard(std::string_view a, std::string_view b);

struct MatchConfig {
  double jaccard_threshold = 0.5;  // a pair matches when J > threshold
  double beta = 0.5;

  /// Throws Error{InvalidSpec} outside threshold ∈ [0,1], beta > 0.
  void validate() const;
};

struct MatchPair {
  std::size_t gold = 0;
  std::size_t prediction = 0;
  double jaccard = 0.0;
  bool operator==(const MatchPair&) const = default;
};

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<MatchPair> pairs;
};

/// Greedy one-to-one pairing: every (gold, prediction) Jaccard is computed,
/// candidates are taken in descending Jaccard order (ties by gold index, then
/// prediction index) and accepted when J > threshold and both sides are free.
MatchResult match_mentions(std::span<const std::string> predicted,
                           std::span<const std::string> gold, const MatchConfig& cfg = {});

enum class Aggregation { micro, macro };

struct ScoreReport {
  double precision = 0.0;
  double recall = 0.0;
  double f_beta = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double beta = 0.5;
  Aggregation aggregation = Aggregation::micro;
};

// Degenerate denominators: with no predictions precision is 1 when nothing
// was missed and 0 otherwise; recall mirrors this; F is 0 when P + R = 0.
double precision_from(std::size_t tp, std::size_t fp, std::size_t fn);
double recall_from(std::size_t tp, std::size_t fp, std::size_t fn);
double f_beta(double precision, double recall, double beta);

ScoreReport score_counts(std::size_t tp, std::size_t fp, std::size_t fn, double beta);

/// Micro: sum counts then compute P/R/F. Macro: mean of per-result P, R and F.
/// Throws Error{InvalidSpec} when beta <= 0.
ScoreReport score(std::span<const MatchResult> results, double beta,
                  Aggregation aggregation = Aggregation::micro);

/// Percent scale rounded to two decimals, as reported in result tables.
double to_percent(double ratio);

}  // namespace dsm::eval
