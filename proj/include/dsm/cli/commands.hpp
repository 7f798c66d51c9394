#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsm/cli/config.hpp"
#include "dsm/core/error.hpp"
#include "dsm/core/serialize.hpp"
#include "dsm/dataset/split.hpp"
#include "dsm/evalkit/corpus_score.hpp"
#include "dsm/weaksup/pipeline.hpp"

namespace dsm::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitConfig = 2,
  kExitInput = 3,
  kExitBackend = 4,
  kExitPartial = 5,
};

int exit_code_for(ErrorCode code);

/// What a command did (or, under dry-run, would do). `partial` marks a run
/// that finished with quarantined or failed items and can be resumed.
struct CommandResult {
  Json summary = Json::object();
  bool partial = false;
  [[nodiscard]] int exit_code() const { return partial ? kExitPartial : kExitOk; }
};

/// Exclusive advisory lock on `dir/.dsm.lock`, held for the object's lifetime.
/// Throws Error{PreconditionViolated} when another process holds it.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir);
  ~DirLock();
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
};

struct SearchOptions {
  std::filesystem::path titles_file;
  std::filesystem::path out_file;  // empty: <output>/documents.jsonl
  SourceCorpus corpus = SourceCorpus::other;
  bool dry_run = false;
};
CommandResult cmd_search(const AppConfig& cfg, const SearchOptions& opts);

struct FetchCmdOptions {
  bool dry_run = false;
};
CommandResult cmd_fetch(const AppConfig& cfg, const FetchCmdOptions& opts);

struct IngestOptions {
  std::filesystem::path input;  // pages JSONL file, or a directory of <doc_id>.pdf
  bool dry_run = false;
};
CommandResult cmd_ingest(const AppConfig& cfg, const IngestOptions& opts);

struct GateOptions {
  std::optional<std::filesystem::path> pages;  // default: corpus store
  bool dry_run = false;
};
/// Writes <output>/gate/decisions.jsonl and <output>/gate/passed.jsonl.
CommandResult cmd_gate(const AppConfig& cfg, const GateOptions& opts);

struct GenerateOptions {
  std::vector<weaksup::Stage> stages{weaksup::Stage::extract, weaksup::Stage::judge,
                                     weaksup::Stage::reason};
  std::optional<std::filesystem::path> pages;  // default: corpus store
  bool dry_run = false;
};
/// Runs the weak-supervision stages into <output>/generate.
CommandResult cmd_generate(const AppConfig& cfg, const GenerateOptions& opts,
                           llm::ChatBackend* backend = nullptr);

struct SampleOptions {
  std::size_t n = 0;
  std::optional<std::filesystem::path> pages;
  std::filesystem::path out_file;  // empty: <output>/sample.jsonl
  bool dry_run = false;
};
CommandResult cmd_sample(const AppConfig& cfg, const SampleOptions& opts);

struct SplitOptions {
  std::filesystem::path input;
  std::optional<dataset::SplitCounts> counts;
  std::optional<dataset::SplitRatios> ratios;
  bool group_by_document = false;
  std::filesystem::path out_dir;  // empty: <output>/split
  bool dry_run = false;
};
/// Writes train/val/test/leftover.jsonl; records keep their original bytes.
CommandResult cmd_split(const AppConfig& cfg, const SplitOptions& opts);

struct ExportOptions {
  std::filesystem::path pages;
  std::optional<std::filesystem::path> assessed;  // default: <output>/generate/assessed.jsonl
  std::string split_tag = "train";
  std::filesystem::path out_file;  // empty: <output>/finetune_<split>.jsonl
  bool dry_run = false;
};
CommandResult cmd_export_finetune(const AppConfig& cfg, const ExportOptions& opts);

struct InferOptions {
  std::optional<std::filesystem::path> pages;
  std::filesystem::path out_file;  // empty: <output>/predictions.jsonl
  bool dry_run = false;
};
/// Gate then extract; one prediction per input page (empty when gated out).
CommandResult cmd_infer(const AppConfig& cfg, const InferOptions& opts,
                        llm::ChatBackend* backend = nullptr);

struct ScoreOptions {
  std::filesystem::path predictions;
  std::filesystem::path gold;
  std::string adapter = "canonical";
  std::string gold_format = "canonical";
  std::optional<double> beta;
  std::string aggregation = "micro";
};
CommandResult cmd_score(const AppConfig& cfg, const ScoreOptions& opts);

}  // namespace dsm::cli
