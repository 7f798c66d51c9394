// dsm: command-line driver for the dataset-mention pipeline.

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "dsm/cli/commands.hpp"

#ifndef DSM_DEFAULT_PROMPTS_DIR
#define DSM_DEFAULT_PROMPTS_DIR "prompts"
#endif

namespace {

using namespace dsm;
using namespace dsm::cli;

std::vector<weaksup::Stage> stages_for(const std::string& s) {
  if (s == "all") return {weaksup::Stage::extract, weaksup::Stage::judge, weaksup::Stage::reason};
  return {weaksup::parse_stage(s)};
}

/// "864/40/20" → counts; "0.8/0.1/0.1" → ratios.
void parse_sizes(const std::string& s, SplitOptions& opts) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, '/');) parts.push_back(p);
  if (parts.size() != 3) throw Error(ErrorCode::InvalidSpec, "expected train/val/test, got '" + s + "'");
  try {
    if (s.find('.') == std::string::npos) {
      opts.counts = dataset::SplitCounts{std::stoul(parts[0]), std::stoul(parts[1]),
                                         std::stoul(parts[2])};
    } else {
      opts.ratios = dataset::SplitRatios{std::stod(parts[0]), std::stod(parts[1]),
                                         std::stod(parts[2])};
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidSpec, "bad split sizes '" + s + "'");
  }
}

void print(const CommandResult& r, bool json, bool is_score) {
  if (json) {
    std::cout << (is_score ? r.summary["report"] : r.summary).dump(2) << '\n';
    return;
  }
  if (is_score) {
    std::cout << r.summary["table"].get<std::string>();
    for (const auto& w : r.summary["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
    return;
  }
  for (const auto& [k, v] : r.summary.items()) {
    std::cout << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dataset mention extraction pipeline"};
  app.require_subcommand(1);
  std::string config_path;
  bool dry_run = false;
  std::string format = "text";
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_flag("--dry-run", dry_run, "Print the plan and backend-call count without running");
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

  SearchOptions search;
  std::string corpus_tag = "other";
  auto* c_search = app.add_subcommand("search", "Resolve paper titles to documents");
  c_search->add_option("titles", search.titles_file, "One title per line")->required();
  c_search->add_option("-o,--out", search.out_file, "Documents JSONL");
  c_search->add_option("--corpus", corpus_tag, "Source corpus tag")
      ->check(CLI::IsMember({"one_earth", "prwp", "other"}));

  FetchCmdOptions fetch;
  auto* c_fetch = app.add_subcommand("fetch", "Download open-access PDFs for stored documents");

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Add pages to the corpus store");
  c_ingest->add_option("input", ingest.input, "Pages JSONL or directory of <doc_id>.pdf")
      ->required();

  GateOptions gate_opts;
  std::string gate_pages;
  std::string gate_kind;
  double gate_threshold = -1;
  auto* c_gate = app.add_subcommand("gate", "Score pages with the gate and keep those above threshold");
  c_gate->add_option("--pages", gate_pages, "Pages JSONL (default: corpus store)");
  c_gate->add_option("--kind", gate_kind, "Gate kind")
      ->check(CLI::IsMember({"always_pass", "keyword", "remote"}));
  c_gate->add_option("--threshold", gate_threshold, "Gate threshold")->check(CLI::Range(0.0, 1.0));

  GenerateOptions gen;
  std::string stage = "all";
  std::string gen_pages;
  auto* c_gen = app.add_subcommand("generate", "Run weak-supervision stages");
  c_gen->add_option("--stage", stage, "extract|judge|reason|all")
      ->check(CLI::IsMember({"extract", "judge", "reason", "all"}));
  c_gen->add_option("--pages", gen_pages, "Pages JSONL (default: corpus store)");

  SampleOptions sample;
  std::string sample_pages;
  auto* c_sample = app.add_subcommand("sample", "Sample pages without replacement");
  c_sample->add_option("-n", sample.n, "Sample size")->required();
  c_sample->add_option("--pages", sample_pages, "Pages JSONL (default: corpus store)");
  c_sample->add_option("-o,--out", sample.out_file, "Output JSONL");

  SplitOptions split;
  std::string sizes;
  auto* c_split = app.add_subcommand("split", "Partition a JSONL file into train/val/test");
  c_split->add_option("input", split.input, "Input JSONL")->required();
  c_split->add_option("--sizes", sizes, "Counts (864/40/20) or ratios (0.8/0.1/0.1)")->required();
  c_split->add_flag("--group-by-document", split.group_by_document, "Keep a document's records together");
  c_split->add_option("-o,--out-dir", split.out_dir, "Output directory");

  ExportOptions exp;
  std::string assessed_file;
  auto* c_export = app.add_subcommand("export-finetune", "Write instruction/response records");
  c_export->add_option("pages", exp.pages, "Pages JSONL")->required();
  c_export->add_option("--assessed", assessed_file, "Reasoner output (default: generate run)");
  c_export->add_option("--split", exp.split_tag, "Split tag");
  c_export->add_option("-o,--out", exp.out_file, "Output JSONL");

  InferOptions infer;
  std::string infer_pages;
  auto* c_infer = app.add_subcommand("infer", "Gate then extract mentions from new pages");
  c_infer->add_option("--pages", infer_pages, "Pages JSONL (default: corpus store)");
  c_infer->add_option("-o,--out", infer.out_file, "Predictions JSONL");

  ScoreOptions score;
  double beta = -1;
  auto* c_score = app.add_subcommand("score", "Jaccard F-beta against gold annotations");
  c_score->add_option("predictions", score.predictions, "Predictions JSONL")->required();
  c_score->add_option("gold", score.gold, "Gold JSONL")->required();
  c_score->add_option("--adapter", score.adapter, "canonical|nuextract_template");
  c_score->add_option("--gold-format", score.gold_format, "canonical|doccano_export");
  c_score->add_option("--beta", beta, "Override beta");
  c_score->add_option("--aggregation", score.aggregation, "micro|macro");

  CLI11_PARSE(app, argc, argv);

  try {
    AppConfig cfg = load_config(config_path.empty() ? std::nullopt
                                                    : std::optional<std::filesystem::path>(config_path),
                                DSM_DEFAULT_PROMPTS_DIR);
    CommandResult r;
    bool is_score = false;
    if (*c_search) {
      search.corpus = *parse_source_corpus(corpus_tag);
      search.dry_run = dry_run;
      r = cmd_search(cfg, search);
    } else if (*c_fetch) {
      fetch.dry_run = dry_run;
      r = cmd_fetch(cfg, fetch);
    } else if (*c_ingest) {
      ingest.dry_run = dry_run;
      r = cmd_ingest(cfg, ingest);
    } else if (*c_gate) {
      if (!gate_kind.empty()) cfg.gate.kind = gate_kind;
      if (gate_threshold >= 0) cfg.gate.threshold = gate_threshold;
      if (!gate_pages.empty()) gate_opts.pages = gate_pages;
      gate_opts.dry_run = dry_run;
      r = cmd_gate(cfg, gate_opts);
    } else if (*c_gen) {
      gen.stages = stages_for(stage);
      if (!gen_pages.empty()) gen.pages = gen_pages;
      gen.dry_run = dry_run;
      r = cmd_generate(cfg, gen);
    } else if (*c_sample) {
      if (!sample_pages.empty()) sample.pages = sample_pages;
      sample.dry_run = dry_run;
      r = cmd_sample(cfg, sample);
    } else if (*c_split) {
      parse_sizes(sizes, split);
      split.dry_run = dry_run;
      r = cmd_split(cfg, split);
    } else if (*c_export) {
      if (!assessed_file.empty()) exp.assessed = assessed_file;
      exp.dry_run = dry_run;
      r = cmd_export_finetune(cfg, exp);
    } else if (*c_infer) {
      if (!infer_pages.empty()) infer.pages = infer_pages;
      infer.dry_run = dry_run;
      r = cmd_infer(cfg, infer);
    } else if (*c_score) {
      if (beta > 0) score.beta = beta;
      is_score = true;
      r = cmd_score(cfg, score);
    }
    print(r, format == "json", is_score);
    return r.exit_code();
  } catch (const Error& e) {
    std::cerr << "dsm: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "dsm: unexpected error: " << e.what() << '\n';
    return kExitUnexpected;
  }
}
