#include "dsm/cli/commands.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

#include "dsm/core/jsonl.hpp"
#include "dsm/corpus/acquire.hpp"
#include "dsm/corpus/store.hpp"
#include "dsm/dataset/annotations.hpp"
#include "dsm/gate/gate.hpp"
#include "dsm/llm/prompts.hpp"

namespace dsm::cli {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidSpec:
    case ErrorCode::UnknownTemplate:
    case ErrorCode::UnknownAdapter:
    case ErrorCode::UnknownFormat:
      return kExitConfig;
    case ErrorCode::NetworkError:
    case ErrorCode::RateLimited:
    case ErrorCode::MalformedResponse:
    case ErrorCode::Timeout:
    case ErrorCode::BackendError:
    case ErrorCode::RetriesExhausted:
    case ErrorCode::UnscriptedInput:
    case ErrorCode::MalformedScore:
      return kExitBackend;
    default:
      return kExitInput;
  }
}

DirLock::DirLock(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto file = dir / ".dsm.lock";
  fd_ = ::open(file.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::Io, "cannot open lock file " + file.string());
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::PreconditionViolated,
                "another dsm process is using " + dir.string());
  }
}

DirLock::~DirLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

namespace {

void require_file(const std::filesystem::path& p, std::string_view what) {
  if (!std::filesystem::is_regular_file(p)) {
    throw Error(ErrorCode::PreconditionViolated, std::string(what) + " not found: " + p.string());
  }
}

std::vector<PageRecord> load_pages(const AppConfig& cfg,
                                   const std::optional<std::filesystem::path>& file) {
  if (file) {
    require_file(*file, "pages file");
    return read_records<PageRecord>(*file);
  }
  return corpus::CorpusStore(cfg.paths.corpus).pages();
}

std::filesystem::path or_default(const std::filesystem::path& p, const std::filesystem::path& d) {
  return p.empty() ? d : p;
}

void ensure_parent(const std::filesystem::path& file) {
  std::error_code ec;
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
}

weaksup::LlmSettings llm_settings(const AppConfig& cfg) {
  weaksup::LlmSettings s;
  s.model = cfg.llm.model;
  s.temperature = cfg.llm.temperature;
  s.max_output_tokens = cfg.llm.max_output_tokens;
  s.retry = cfg.retry;
  return s;
}

Json plan_json(const weaksup::PipelinePlan& p) {
  return Json{{"extract_pending", p.extract_pending},
              {"extract_calls", p.extract_calls},
              {"judge_pending", p.judge_pending},
              {"reason_pending", p.reason_pending},
              {"backend_calls_known", p.extract_calls + p.judge_pending + p.reason_pending}};
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + p.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines) {
  ensure_parent(p);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw Error(ErrorCode::StoreWriteError, "cannot write " + p.string());
}

std::string trimmed(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

// ---------------------------------------------------------------------------

CommandResult cmd_search(const AppConfig& cfg, const SearchOptions& opts) {
  require_file(opts.titles_file, "titles file");
  std::vector<std::string> titles;
  for (auto& l : read_lines(opts.titles_file)) {
    if (auto t = trimmed(l); !t.empty()) titles.push_back(std::move(t));
  }
  const auto out_file = or_default(opts.out_file, cfg.paths.output / "documents.jsonl");
  CommandResult r;
  if (opts.dry_run) {
    r.summary = {{"titles", titles.size()}, {"backend_calls", titles.size()},
                 {"output", out_file.string()}};
    return r;
  }
  DirLock lock(cfg.paths.corpus);
  corpus::MetadataIndexConfig mc;
  mc.base_url = cfg.metadata.base_url;
  if (const char* key = std::getenv(cfg.metadata.api_key_env.c_str())) mc.api_key = key;
  mc.timeout = std::chrono::milliseconds(cfg.metadata.timeout_ms);
  mc.retry = cfg.retry;
  corpus::MetadataIndexClient client(mc);
  corpus::CorpusStore store(cfg.paths.corpus);

  std::vector<DocumentRecord> found;
  Json missing = Json::array();
  Json failed = Json::array();
  for (const auto& t : titles) {
    try {
      if (auto doc = corpus::search_paper_by_title(t, client, opts.corpus)) {
        store.add_document(*doc);
        found.push_back(*doc);
      } else {
        missing.push_back(t);
      }
    } catch (const Error& e) {
      if (exit_code_for(e.code()) != kExitBackend) throw;
      failed.push_back(Json{{"title", t}, {"error", e.what()}});
    }
  }
  ensure_parent(out_file);
  write_records(out_file, found);
  r.summary = {{"titles", titles.size()}, {"found", found.size()}, {"not_found", missing},
               {"failed", failed}, {"output", out_file.string()}};
  r.partial = !failed.empty();
  return r;
}

CommandResult cmd_fetch(const AppConfig& cfg, const FetchCmdOptions& opts) {
  corpus::CorpusStore store(cfg.paths.corpus);
  std::vector<DocumentRecord> todo;
  std::size_t present = 0;
  std::size_t no_url = 0;
  for (const auto& d : store.documents()) {
    if (std::filesystem::exists(cfg.paths.pdf_dir / (d.doc_id.str() + ".pdf"))) {
      ++present;
    } else if (!d.pdf_url) {
      ++no_url;
    } else {
      todo.push_back(d);
    }
  }
  CommandResult r;
  if (opts.dry_run) {
    r.summary = {{"already_present", present}, {"without_pdf_url", no_url},
                 {"downloads", todo.size()}, {"pdf_dir", cfg.paths.pdf_dir.string()}};
    return r;
  }
  DirLock lock(cfg.paths.pdf_dir);
  corpus::FetchOptions fo;
  fo.retry = cfg.retry;
  std::size_t fetched = 0;
  Json failed = Json::array();
  for (const auto& d : todo) {
    try {
      corpus::fetch_pdf(d, cfg.paths.pdf_dir, fo);
      ++fetched;
    } catch (const Error& e) {
      failed.push_back(Json{{"doc_id", d.doc_id.str()}, {"error", e.what()}});
    }
  }
  r.summary = {{"already_present", present}, {"without_pdf_url", no_url},
               {"fetched", fetched}, {"failed", failed}};
  r.partial = !failed.empty();
  return r;
}

CommandResult cmd_ingest(const AppConfig& cfg, const IngestOptions& opts) {
  CommandResult r;
  std::vector<PageRecord> pages;
  Json failed = Json::array();
  if (std::filesystem::is_directory(opts.input)) {
    std::vector<std::filesystem::path> pdfs;
    for (const auto& e : std::filesystem::directory_iterator(opts.input)) {
      if (e.is_regular_file() && e.path().extension() == ".pdf") pdfs.push_back(e.path());
    }
    std::sort(pdfs.begin(), pdfs.end());
    if (opts.dry_run) {
      r.summary = {{"pdfs", pdfs.size()}, {"converter", cfg.converter}};
      return r;
    }
    for (const auto& pdf : pdfs) {
      try {
        auto converted = corpus::convert_pdf_to_pages(DocId::parse(pdf.stem().string()), pdf,
                                                      corpus::ConverterSpec{cfg.converter});
        pages.insert(pages.end(), converted.begin(), converted.end());
      } catch (const Error& e) {
        failed.push_back(Json{{"file", pdf.string()}, {"error", e.what()}});
      }
    }
  } else {
    require_file(opts.input, "pages file");
    pages = read_records<PageRecord>(opts.input);
    if (opts.dry_run) {
      r.summary = {{"pages", pages.size()}};
      return r;
    }
  }
  DirLock lock(cfg.paths.corpus);
  corpus::CorpusStore store(cfg.paths.corpus);
  const auto s = store.ingest_pages(pages);
  r.summary = {{"added", s.added}, {"skipped", s.skipped}, {"failed", failed},
               {"total_pages", store.page_count()}};
  r.partial = !failed.empty();
  return r;
}

CommandResult cmd_gate(const AppConfig& cfg, const GateOptions& opts) {
  const auto pages = load_pages(cfg, opts.pages);
  const auto dir = cfg.paths.output / "gate";
  CommandResult r;
  if (opts.dry_run) {
    r.summary = {{"pages", pages.size()}, {"gate", cfg.gate.kind},
                 {"threshold", cfg.gate.threshold}, {"output", dir.string()}};
    return r;
  }
  DirLock lock(cfg.paths.output);
  const auto g = gate::make_gate(cfg.gate.kind, cfg.gate.triggers_file, cfg.gate.endpoint);
  const auto res = gate::filter_pages(pages, *g, cfg.gate.threshold, cfg.concurrency);
  std::vector<Json> decisions;
  std::size_t errors = 0;
  for (const auto& d : res.decisions) {
    decisions.push_back(gate::encode(d));
    errors += d.error ? 1 : 0;
  }
  std::filesystem::create_directories(dir);
  write_jsonl(dir / "decisions.jsonl", decisions);
  write_records(dir / "passed.jsonl", res.passed);
  r.summary = {{"pages", pages.size()}, {"passed", res.passed.size()}, {"gate", g->name()},
               {"threshold", cfg.gate.threshold}, {"scoring_errors", errors}};
  r.partial = errors > 0;
  return r;
}

CommandResult cmd_generate(const AppConfig& cfg, const GenerateOptions& opts,
                           llm::ChatBackend* backend) {
  const auto pages = load_pages(cfg, opts.pages);
  weaksup::PipelineConfig pc;
  pc.output_dir = cfg.paths.output / "generate";
  pc.stages = opts.stages;
  pc.width = cfg.concurrency;
  pc.item_attempts = cfg.item_attempts;
  CommandResult r;
  if (opts.dry_run) {
    r.summary = plan_json(weaksup::plan_pipeline(pages, pc));
    r.summary["pages"] = pages.size();
    return r;
  }
  DirLock lock(cfg.paths.output);
  std::unique_ptr<llm::ChatBackend> owned;
  if (backend == nullptr) {
    owned = make_backend(cfg);
    backend = owned.get();
  }
  const auto prompts = llm::PromptLibrary::load(cfg.paths.prompts);
  const weaksup::StageClient client(*backend, prompts, llm_settings(cfg));
  const auto stats = weaksup::run_pipeline(pages, client, pc);
  r.summary = weaksup::encode(stats);
  r.summary["output"] = pc.output_dir.string();
  r.partial = stats.items_quarantined > 0;
  return r;
}

CommandResult cmd_sample(const AppConfig& cfg, const SampleOptions& opts) {
  const auto pages = load_pages(cfg, opts.pages);
  const auto out_file = or_default(opts.out_file, cfg.paths.output / "sample.jsonl");
  CommandResult r;
  if (opts.dry_run) {
    r.summary = {{"population", pages.size()}, {"n", opts.n}, {"seed", cfg.seed},
                 {"output", out_file.string()}};
    return r;
  }
  const auto sample = dataset::sample_pages(pages, opts.n, cfg.seed);
  ensure_parent(out_file);
  write_records(out_file, sample);
  r.summary = {{"population", pages.size()}, {"sampled", sample.size()}, {"seed", cfg.seed},
               {"output", out_file.string()}};
  return r;
}

CommandResult cmd_split(const AppConfig& cfg, const SplitOptions& opts) {
  require_file(opts.input, "split input");
  if (opts.counts.has_value() == opts.ratios.has_value()) {
    throw Error(ErrorCode::InvalidSpec, "give exactly one of counts or ratios");
  }
  std::vector<std::string> lines;
  std::vector<std::string> groups;
  std::size_t lineno = 0;
  for (auto& l : read_lines(opts.input)) {
    ++lineno;
    if (l.find_first_not_of(" \t") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(l);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::ParseError,
                  opts.input.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    std::string g;
    for (const char* k : {"doc_id", "source"}) {
      if (j.is_object() && j.contains(k) && j[k].is_string()) {
        g = j[k].get<std::string>();
        break;
      }
    }
    if (opts.group_by_document && g.empty()) {
      throw Error(ErrorCode::InvalidRecord, opts.input.string() + ":" + std::to_string(lineno) +
                                                ": no doc_id for document grouping");
    }
    groups.push_back(std::move(g));
    lines.push_back(std::move(l));
  }
  dataset::SplitSpec spec;
  if (opts.counts) {
    spec.sizes = *opts.counts;
  } else {
    spec.sizes = *opts.ratios;
  }
  spec.seed = cfg.seed;
  spec.group_by_document = opts.group_by_document;
  const auto counts = dataset::resolve_counts(spec, lines.size());
  const auto dir = or_default(opts.out_dir, cfg.paths.output / "split");
  CommandResult r;
  if (opts.dry_run) {
    r.summary = {{"records", lines.size()}, {"train", counts.train}, {"val", counts.val},
                 {"test", counts.test},
                 {"leftover", lines.size() - counts.train - counts.val - counts.test},
                 {"output", dir.string()}};
    return r;
  }
  const auto parts = dataset::split(lines, spec,
                                    opts.group_by_document ? std::span<const std::string>(groups)
                                                           : std::span<const std::string>());
  write_lines(dir / "train.jsonl", parts.train);
  write_lines(dir / "val.jsonl", parts.val);
  write_lines(dir / "test.jsonl", parts.test);
  write_lines(dir / "leftover.jsonl", parts.leftover);
  r.summary = {{"records", lines.size()}, {"train", parts.train.size()},
               {"val", parts.val.size()}, {"test", parts.test.size()},
               {"leftover", parts.leftover.size()}, {"seed", cfg.seed},
               {"output", dir.string()}};
  return r;
}

CommandResult cmd_export_finetune(const AppConfig& cfg, const ExportOptions& opts) {
  require_file(opts.pages, "pages file");
  const auto assessed_file =
      opts.assessed.value_or(weaksup::RunFiles{cfg.paths.output / "generate"}.assessed());
  require_file(assessed_file, "assessed file");
  const auto out_file =
      or_default(opts.out_file, cfg.paths.output / ("finetune_" + opts.split_tag + ".jsonl"));
  const auto pages = read_records<PageRecord>(opts.pages);
  const auto assessed = read_records<AssessedBlock>(assessed_file);
  CommandResult r;
  if (opts.dry_run) {
    r.summary = {{"pages", pages.size()}, {"assessed_blocks", assessed.size()},
                 {"output", out_file.string()}};
    return r;
  }
  const auto records = weaksup::export_finetune_records(pages, assessed, opts.split_tag);
  ensure_parent(out_file);
  write_jsonl(out_file, records);
  r.summary = {{"records", records.size()}, {"split", opts.split_tag},
               {"output", out_file.string()}};
  return r;
}

CommandResult cmd_infer(const AppConfig& cfg, const InferOptions& opts,
                        llm::ChatBackend* backend) {
  const auto pages = load_pages(cfg, opts.pages);
  const auto out_file = or_default(opts.out_file, cfg.paths.output / "predictions.jsonl");
  const auto g = gate::make_gate(cfg.gate.kind, cfg.gate.triggers_file, cfg.gate.endpoint);
  weaksup::PipelineConfig pc;
  pc.output_dir = cfg.paths.output / "infer";
  pc.stages = {weaksup::Stage::extract};
  pc.width = cfg.concurrency;
  pc.item_attempts = cfg.item_attempts;

  CommandResult r;
  if (opts.dry_run) {
    // Gating a remote endpoint would already be network traffic.
    std::vector<PageRecord> candidates = pages;
    if (cfg.gate.kind != "remote") {
      candidates = gate::filter_pages(pages, *g, cfg.gate.threshold).passed;
    }
    r.summary = plan_json(weaksup::plan_pipeline(candidates, pc));
    r.summary["pages"] = pages.size();
    r.summary["after_gate"] = candidates.size();
    return r;
  }
  DirLock lock(cfg.paths.output);
  const auto gated = gate::filter_pages(pages, *g, cfg.gate.threshold, cfg.concurrency);
  std::unique_ptr<llm::ChatBackend> owned;
  if (backend == nullptr) {
    owned = make_backend(cfg);
    backend = owned.get();
  }
  const auto prompts = llm::PromptLibrary::load(cfg.paths.prompts);
  const weaksup::StageClient client(*backend, prompts, llm_settings(cfg));
  const auto stats = weaksup::run_pipeline(gated.passed, client, pc);

  std::map<PageKey, std::vector<std::string>> names;
  for (const auto& b : read_records<MentionBlock>(weaksup::RunFiles{pc.output_dir}.extracted())) {
    auto& list = names[PageKey{b.source, b.page}];
    for (const auto& m : b.datasets) list.push_back(m.raw_name);
  }
  std::vector<PredictionRecord> preds;
  std::set<PageKey> seen;
  for (const auto& p : pages) {
    if (!seen.insert(p.key()).second) continue;
    PredictionRecord pr{p.doc_id, p.page_number, {}};
    if (auto it = names.find(p.key()); it != names.end()) pr.predicted_names = it->second;
    preds.push_back(std::move(pr));
  }
  ensure_parent(out_file);
  write_records(out_file, preds);
  r.summary = {{"pages", pages.size()}, {"after_gate", gated.passed.size()},
               {"mentions", stats.mentions_extracted},
               {"quarantined", stats.items_quarantined}, {"output", out_file.string()}};
  r.partial = stats.items_quarantined > 0;
  return r;
}

CommandResult cmd_score(const AppConfig& cfg, const ScoreOptions& opts) {
  require_file(opts.predictions, "predictions file");
  require_file(opts.gold, "gold file");
  eval::MatchConfig mc{cfg.match.jaccard_threshold, opts.beta.value_or(cfg.match.beta)};
  mc.validate();
  eval::Aggregation agg;
  if (opts.aggregation == "micro") {
    agg = eval::Aggregation::micro;
  } else if (opts.aggregation == "macro") {
    agg = eval::Aggregation::macro;
  } else {
    throw Error(ErrorCode::ConfigError, "aggregation must be micro or macro");
  }
  const auto preds =
      eval::import_predictions(opts.predictions, eval::parse_prediction_adapter(opts.adapter));
  auto gold = dataset::import_annotations(opts.gold, dataset::parse_annotation_format(opts.gold_format));
  const auto scored = eval::score_corpus(preds, gold.records, mc, agg);
  CommandResult r;
  r.summary = {{"report", eval::report_json(scored.report)},
               {"table", eval::report_table(scored.report)}};
  Json warnings = gold.warnings;
  for (const auto& w : scored.warnings) warnings.push_back(w);
  r.summary["warnings"] = warnings;
  return r;
}

}  // namespace dsm::cli
