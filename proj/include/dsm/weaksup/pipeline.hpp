#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsm/core/serialize.hpp"
#include "dsm/core/types.hpp"
#include "dsm/weaksup/stages.hpp"

namespace dsm::weaksup {

enum class Stage { extract, judge, reason };

std::string_view to_string(Stage s);
/// Throws Error{ConfigError}.
Stage parse_stage(std::string_view name);

/// Completed item keys of one stage plus the stage output offset at the last
/// commit. Persisted as `checkpoints/<stage>.jsonl`, one commit per line.
/// Keys only grow; a committed key is never processed again.
class StageCheckpoint {
 public:
  StageCheckpoint(Stage stage, std::filesystem::path file);

  [[nodiscard]] bool completed(const std::string& key) const { return keys_.contains(key); }
  void commit(const std::string& key, std::uint64_t output_offset, bool quarantined);

  [[nodiscard]] Stage stage() const noexcept { return stage_; }
  [[nodiscard]] std::uint64_t output_offset() const noexcept { return output_offset_; }
  [[nodiscard]] std::size_t size() const noexcept { return keys_.size(); }
  [[nodiscard]] std::size_t quarantined() const noexcept { return quarantined_; }
  [[nodiscard]] bool exists() const { return std::filesystem::exists(file_); }

 private:
  Stage stage_;
  std::filesystem::path file_;
  std::set<std::string> keys_;
  std::uint64_t output_offset_ = 0;
  std::size_t quarantined_ = 0;
};

struct PipelineConfig {
  std::filesystem::path output_dir;
  std::vector<Stage> stages{Stage::extract, Stage::judge, Stage::reason};
  /// Items processed concurrently within a stage.
  std::size_t width = 1;
  /// Attempts per item before it is quarantined to the dead-letter file.
  int item_attempts = 3;
};

struct PipelineStats {
  std::size_t pages_processed = 0;
  std::size_t blocks_extracted = 0;
  std::size_t mentions_extracted = 0;
  std::size_t mentions_judged_valid = 0;
  std::size_t mentions_agent_valid = 0;
  /// agent-valid / judge-valid; absent before the reasoning stage has run or
  /// when nothing passed the judge.
  std::optional<double> retention_after_agent;
  std::size_t items_quarantined = 0;
  std::size_t backend_items = 0;  // items sent to a backend during this run

  bool operator==(const PipelineStats&) const = default;
};

Json encode(const PipelineStats& s);

/// Output file names inside PipelineConfig::output_dir.
struct RunFiles {
  std::filesystem::path dir;
  [[nodiscard]] std::filesystem::path extracted() const { return dir / "extracted.jsonl"; }
  [[nodiscard]] std::filesystem::path judged() const { return dir / "judged.jsonl"; }
  [[nodiscard]] std::filesystem::path assessed() const { return dir / "assessed.jsonl"; }
  [[nodiscard]] std::filesystem::path deadletter() const { return dir / "deadletter.jsonl"; }
  [[nodiscard]] std::filesystem::path warnings() const { return dir / "warnings.jsonl"; }
  [[nodiscard]] std::filesystem::path stats() const { return dir / "stats.json"; }
  [[nodiscard]] std::filesystem::path checkpoint(Stage s) const {
    return dir / "checkpoints" / (std::string(to_string(s)) + ".jsonl");
  }
};

/// Runs the requested stages in order extract → judge → reason over `pages`,
/// appending to the stage files and checkpointing every item. Only
/// judge-valid mentions reach the reasoner. Rerunning skips committed items,
/// so an interrupted run resumes where it stopped. An item failing
/// `item_attempts` times goes to deadletter.jsonl and the run continues.
/// Stats (recomputed from the files) are also written to stats.json.
PipelineStats run_pipeline(std::span<const PageRecord> pages, const StageClient& client,
                           const PipelineConfig& config);

/// Stats derived from an output directory.
PipelineStats compute_stats(const std::filesystem::path& output_dir);

/// Items each requested stage would still send to the backend, as far as
/// known from existing outputs (later stages depend on earlier results).
struct PipelinePlan {
  std::size_t extract_pending = 0;
  std::size_t extract_calls = 0;  // pending pages with text
  std::size_t judge_pending = 0;
  std::size_t reason_pending = 0;
};

PipelinePlan plan_pipeline(std::span<const PageRecord> pages, const PipelineConfig& config);

/// Framing line placed before the page text in fine-tuning instructions.
inline constexpr std::string_view kFinetuneInstruction =
    "Extract every dataset mention from the page text below. For each mention return raw_name, "
    "harmonized_name, acronym, mentioned_in, context, specificity, relevance, producer, data_type "
    "and year as a JSON list.";

/// One instruction/response record per page: the response is the canonical
/// JSON list of agent-valid mentions (labels from the agent), `[]` when none.
std::vector<Json> export_finetune_records(std::span<const PageRecord> pages,
                                          std::span<const AssessedBlock> assessed,
                                          std::string_view split_tag);

}  // namespace dsm::weaksup
