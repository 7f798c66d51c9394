#include "dsm/evalkit/corpus_score.hpp"

#include <iomanip>
#include <map>
#include <sstream>

#include "dsm/core/error.hpp"
#include "dsm/core/jsonl.hpp"

namespace dsm::eval {

PredictionAdapter parse_prediction_adapter(std::string_view name) {
  if (name == "canonical") return PredictionAdapter::canonical;
  if (name == "nuextract_template" || name == "nuextract") {
    return PredictionAdapter::nuextract_template;
  }
  throw Error(ErrorCode::UnknownAdapter, std::string(name));
}

std::vector<std::string> flatten_nuextract(const Json& filled) {
  if (!filled.is_object()) throw Error(ErrorCode::ParseError, "template must be an object");
  std::vector<std::string> names;
  auto groups = filled.find("data_mentions");
  if (groups == filled.end() || groups->is_null()) return names;
  if (!groups->is_array()) throw Error(ErrorCode::ParseError, "data_mentions must be a list");
  for (const auto& g : *groups) {
    if (!g.is_object()) throw Error(ErrorCode::ParseError, "data_mentions entry must be an object");
    auto datasets = g.find("datasets");
    if (datasets == g.end() || datasets->is_null()) continue;
    if (!datasets->is_array()) throw Error(ErrorCode::ParseError, "datasets must be a list");
    for (const auto& d : *datasets) {
      if (!d.is_object()) continue;
      auto raw = optional_text(d, "raw_name");
      if (raw && raw->find_first_not_of(" \t\r\n") != std::string::npos) names.push_back(*raw);
    }
  }
  return names;
}

std::vector<PredictionRecord> import_predictions(const std::filesystem::path& file,
                                                 PredictionAdapter adapter) {
  std::vector<PredictionRecord> out;
  for_each_jsonl(file, [&](const Json& j, std::size_t line) {
    try {
      if (adapter == PredictionAdapter::canonical) {
        out.push_back(decode<PredictionRecord>(j));
        return;
      }
      if (!j.is_object()) throw Error(ErrorCode::ParseError, "line must be an object");
      PredictionRecord p;
      p.doc_id = DocId::parse(j.value("doc_id", std::string{}));
      if (!j.contains("page_number") || !j["page_number"].is_number_integer() ||
          j["page_number"].get<int>() < 1) {
        throw Error(ErrorCode::ParseError, "page_number must be an integer >= 1");
      }
      p.page_number = j["page_number"].get<int>();
      if (auto pred = j.find("prediction"); pred != j.end()) {
        p.predicted_names = flatten_nuextract(pred->is_string() ? Json::parse(pred->get<std::string>())
                                                                : *pred);
      } else {
        p.predicted_names = flatten_nuextract(j);
      }
      out.push_back(std::move(p));
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::ParseError, file.string() + ":" + std::to_string(line) + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ParseError) throw;
      throw Error(ErrorCode::ParseError, file.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

CorpusScore score_corpus(const std::vector<PredictionRecord>& predictions,
                         const std::vector<GroundTruthRecord>& gold, const MatchConfig& cfg,
                         Aggregation aggregation) {
  cfg.validate();
  CorpusScore out;
  std::map<PageKey, std::vector<std::string>> pred_by_page;
  std::map<PageKey, std::vector<std::string>> gold_by_page;
  for (const auto& p : predictions) {
    auto& names = pred_by_page[p.key()];
    names.insert(names.end(), p.predicted_names.begin(), p.predicted_names.end());
  }
  for (const auto& g : gold) {
    auto& names = gold_by_page[g.key()];
    names.insert(names.end(), g.gold_names.begin(), g.gold_names.end());
  }
  for (const auto& [key, _] : pred_by_page) {
    if (!gold_by_page.contains(key)) {
      out.warnings.push_back("prediction for " + key.doc_id.str() + " page " +
                             std::to_string(key.page_number) + " has no gold record");
    }
  }

  std::map<PageKey, bool> keys;
  for (const auto& [k, _] : pred_by_page) keys[k] = true;
  for (const auto& [k, _] : gold_by_page) keys[k] = true;

  static const std::vector<std::string> kNone;
  std::vector<MatchResult> results;
  for (const auto& [key, _] : keys) {
    auto p = pred_by_page.find(key);
    auto g = gold_by_page.find(key);
    MatchResult m = match_mentions(p == pred_by_page.end() ? kNone : p->second,
                                   g == gold_by_page.end() ? kNone : g->second, cfg);
    results.push_back(m);
    out.pages.push_back(PageScore{key, std::move(m)});
  }
  out.report = score(results, cfg.beta, aggregation);
  return out;
}

Json report_json(const ScoreReport& r) {
  return Json{{"precision", to_percent(r.precision)},
              {"recall", to_percent(r.recall)},
              {"f_beta", to_percent(r.f_beta)},
              {"beta", r.beta},
              {"tp", r.tp},
              {"fp", r.fp},
              {"fn", r.fn},
              {"aggregation", r.aggregation == Aggregation::micro ? "micro" : "macro"}};
}

std::string report_table(const ScoreReport& r) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(2);
  ss << "Precision  Recall  F" << r.beta << "-score    TP    FP    FN\n";
  ss << std::setw(9) << to_percent(r.precision) << "  " << std::setw(6) << to_percent(r.recall)
     << "  " << std::setw(10) << to_percent(r.f_beta) << "  " << std::setw(4) << r.tp << "  "
     << std::setw(4) << r.fp << "  " << std::setw(4) << r.fn << '\n';
  return ss.str();
}

}  // namespace dsm::eval
