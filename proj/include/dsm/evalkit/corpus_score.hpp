#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dsm/core/serialize.hpp"
#include "dsm/core/types.hpp"
#include "dsm/evalkit/metric.hpp"

namespace dsm::eval {

enum class PredictionAdapter { canonical, nuextract_template };

/// Throws Error{UnknownAdapter}.
PredictionAdapter parse_prediction_adapter(std::string_view name);

/// Reads predictions. `canonical` lines are PredictionRecords. A
/// `nuextract_template` line carries doc_id, page_number and the filled
/// template, either inline (`data_mentions`) or under `prediction` (object or
/// JSON text); every non-empty `data_mentions[].datasets[].raw_name` becomes a
/// predicted name.
std::vector<PredictionRecord> import_predictions(const std::filesystem::path& file,
                                                 PredictionAdapter adapter);

/// Flattens one filled NuExtract template.
std::vector<std::string> flatten_nuextract(const Json& filled_template);

struct PageScore {
  PageKey key;
  MatchResult match;
};

struct CorpusScore {
  ScoreReport report;
  std::vector<PageScore> pages;  // sorted by page key
  Warnings warnings;
};

/// Joins predictions and gold per page and scores them. Gold pages without a
/// prediction count all gold names as misses; predicted pages without gold
/// count all names as false positives (with a warning).
CorpusScore score_corpus(const std::vector<PredictionRecord>& predictions,
                         const std::vector<GroundTruthRecord>& gold, const MatchConfig& cfg,
                         Aggregation aggregation = Aggregation::micro);

/// Machine-readable report: precision / recall / f_beta on the 0-100 scale
/// rounded to two decimals, plus raw counts.
Json report_json(const ScoreReport& r);

/// Fixed-width table for terminals.
std::string report_table(const ScoreReport& r);

}  // namespace dsm::eval
