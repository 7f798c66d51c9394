#include "dsm/weaksup/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <future>
#include <map>

#include "dsm/core/digest.hpp"
#include "dsm/core/error.hpp"
#include "dsm/core/jsonl.hpp"

namespace dsm::weaksup {

using llm::TemplateId;

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::extract: return "extract";
    case Stage::judge: return "judge";
    case Stage::reason: return "reason";
  }
  return "?";
}

Stage parse_stage(std::string_view name) {
  if (name == "extract") return Stage::extract;
  if (name == "judge") return Stage::judge;
  if (name == "reason") return Stage::reason;
  throw Error(ErrorCode::ConfigError, "unknown stage '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// checkpoint

StageCheckpoint::StageCheckpoint(Stage stage, std::filesystem::path file)
    : stage_(stage), file_(std::move(file)) {
  if (!std::filesystem::exists(file_)) return;
  for_each_jsonl(file_, [&](const Json& j, std::size_t) {
    keys_.insert(j.at("key").get<std::string>());
    output_offset_ = j.at("offset").get<std::uint64_t>();
    if (j.value("quarantined", false)) ++quarantined_;
  });
}

void StageCheckpoint::commit(const std::string& key, std::uint64_t output_offset,
                             bool quarantined) {
  if (!keys_.insert(key).second) return;
  JsonlAppender out(file_);
  Json line{{"key", key}, {"offset", output_offset}};
  if (quarantined) line["quarantined"] = true;
  out.append(line);
  out.flush();
  output_offset_ = output_offset;
  if (quarantined) ++quarantined_;
}

namespace {

/// Append-only log where each item key is written at most once, so replays
/// after an interruption do not duplicate entries.
class KeyedLog {
 public:
  explicit KeyedLog(std::filesystem::path path) : path_(std::move(path)) {
    if (!std::filesystem::exists(path_)) return;
    for_each_jsonl(path_, [&](const Json& j, std::size_t) {
      if (j.contains("key")) keys_.insert(j["key"].get<std::string>());
    });
  }

  void write(const std::string& key, Json entry) {
    if (keys_.contains(key)) return;
    entry["key"] = key;
    JsonlAppender out(path_);
    out.append(entry);
    out.flush();
    keys_.insert(key);
  }

 private:
  std::filesystem::path path_;
  std::set<std::string> keys_;
};

struct WorkItem {
  std::string key;
  DocId source;
  int page = 0;
  bool needs_backend = true;
};

struct ItemOutcome {
  std::vector<Json> lines;
  Warnings warnings;
  std::optional<std::string> error;
  int attempts = 0;
};

/// Runs one stage: pending items are processed `width` at a time, outcomes
/// are written in item order, then checkpointed.
class StageRunner {
 public:
  StageRunner(Stage stage, const RunFiles& files, const PipelineConfig& config)
      : stage_(stage),
        config_(config),
        checkpoint_(stage, files.checkpoint(stage)),
        output_(stage == Stage::extract ? files.extracted()
                : stage == Stage::judge ? files.judged()
                                        : files.assessed()),
        deadletter_(files.deadletter()),
        warnings_(files.warnings()) {
    // Bytes past the last commit belong to an interrupted item.
    output_.truncate_to(checkpoint_.output_offset());
  }

  [[nodiscard]] bool completed(const std::string& key) const { return checkpoint_.completed(key); }

  std::size_t run(const std::vector<WorkItem>& items,
                  const std::function<std::vector<Json>(std::size_t, Warnings&)>& work) {
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!checkpoint_.completed(items[i].key)) pending.push_back(i);
    }
    std::size_t sent = 0;
    const std::size_t width = std::max<std::size_t>(1, config_.width);
    for (std::size_t start = 0; start < pending.size(); start += width) {
      const auto end = std::min(pending.size(), start + width);
      std::vector<ItemOutcome> outcomes(end - start);
      auto attempt = [&](std::size_t slot) {
        const std::size_t idx = pending[start + slot];
        ItemOutcome& o = outcomes[slot];
        for (o.attempts = 1;; ++o.attempts) {
          Warnings w;
          try {
            o.lines = work(idx, w);
            o.warnings = std::move(w);
            o.error.reset();
            return;
          } catch (const std::exception& e) {
            o.error = e.what();
            if (o.attempts >= std::max(1, config_.item_attempts)) return;
          }
        }
      };
      if (width == 1) {
        attempt(0);
      } else {
        std::vector<std::future<void>> inflight;
        for (std::size_t slot = 0; slot < outcomes.size(); ++slot) {
          inflight.push_back(std::async(std::launch::async, attempt, slot));
        }
        for (auto& f : inflight) f.get();
      }
      for (std::size_t slot = 0; slot < outcomes.size(); ++slot) {
        const WorkItem& item = items[pending[start + slot]];
        sent += item.needs_backend ? 1 : 0;
        commit(item, outcomes[slot]);
      }
    }
    return sent;
  }

 private:
  void commit(const WorkItem& item, const ItemOutcome& o) {
    for (const auto& w : o.warnings) {
      (void)w;
    }
    if (!o.warnings.empty()) {
      warnings_.write(item.key, Json{{"stage", to_string(stage_)},
                                     {"source", item.source.str()},
                                     {"page", item.page},
                                     {"warnings", o.warnings}});
    }
    if (o.error) {
      deadletter_.write(item.key, Json{{"stage", to_string(stage_)},
                                       {"source", item.source.str()},
                                       {"page", item.page},
                                       {"attempts", o.attempts},
                                       {"error", *o.error}});
      checkpoint_.commit(item.key, output_.offset(), true);
      return;
    }
    for (const auto& line : o.lines) output_.append(line);
    output_.flush();
    checkpoint_.commit(item.key, output_.offset(), false);
  }

  Stage stage_;
  const PipelineConfig& config_;
  StageCheckpoint checkpoint_;
  JsonlAppender output_;
  KeyedLog deadletter_;
  KeyedLog warnings_;
};

std::string item_key(Stage stage, const DocId& source, int page, const std::string& digest) {
  return sha256_hex(std::string(to_string(stage)) + '|' + source.str() + '|' +
                    std::to_string(page) + '|' + digest);
}

std::vector<PageRecord> ordered_pages(std::span<const PageRecord> pages) {
  std::map<PageKey, const PageRecord*> unique;
  for (const auto& p : pages) unique.try_emplace(p.key(), &p);
  std::vector<PageRecord> out;
  out.reserve(unique.size());
  for (const auto& [_, p] : unique) out.push_back(*p);
  return out;
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos; }

std::vector<MentionBlock> load_blocks(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return read_records<MentionBlock>(path);
}

std::vector<JudgedBlock> load_judged(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return read_records<JudgedBlock>(path);
}

/// Block restricted to the mentions the judge accepted.
MentionBlock judge_valid_part(const JudgedBlock& jb) {
  MentionBlock b = jb.block;
  b.datasets.clear();
  for (std::size_t i = 0; i < jb.block.datasets.size(); ++i) {
    if (jb.verdicts[i].valid) b.datasets.push_back(jb.block.datasets[i]);
  }
  return b;
}

std::vector<WorkItem> extract_items(const std::vector<PageRecord>& pages) {
  std::vector<WorkItem> items;
  for (const auto& p : pages) {
    const bool needs = !blank(p.text);
    const std::string digest = needs ? llm::request_digest(TemplateId::extractor, p.text) : "";
    items.push_back({item_key(Stage::extract, p.doc_id, p.page_number, digest), p.doc_id,
                     p.page_number, needs});
  }
  return items;
}

WorkItem block_item(Stage stage, const MentionBlock& b) {
  const auto id = stage == Stage::judge ? TemplateId::judge : TemplateId::reasoner;
  return {item_key(stage, b.source, b.page, llm::request_digest(id, block_user_content(b))),
          b.source, b.page, true};
}

void write_stats(const RunFiles& files, const PipelineStats& stats) {
  Json j = encode(stats);
  j.erase("backend_items");
  std::ofstream out(files.stats(), std::ios::binary | std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::Io, "cannot write " + files.stats().string());
}

}  // namespace

Json encode(const PipelineStats& s) {
  Json j{{"pages_processed", s.pages_processed},
         {"blocks_extracted", s.blocks_extracted},
         {"mentions_extracted", s.mentions_extracted},
         {"mentions_judged_valid", s.mentions_judged_valid},
         {"mentions_agent_valid", s.mentions_agent_valid},
         {"retention_after_agent", nullptr},
         {"items_quarantined", s.items_quarantined},
         {"backend_items", s.backend_items}};
  if (s.retention_after_agent) j["retention_after_agent"] = *s.retention_after_agent;
  return j;
}

PipelineStats compute_stats(const std::filesystem::path& output_dir) {
  const RunFiles files{output_dir};
  PipelineStats s;
  const StageCheckpoint extract(Stage::extract, files.checkpoint(Stage::extract));
  const StageCheckpoint judge(Stage::judge, files.checkpoint(Stage::judge));
  const StageCheckpoint reason(Stage::reason, files.checkpoint(Stage::reason));
  s.pages_processed = extract.size();
  s.items_quarantined = extract.quarantined() + judge.quarantined() + reason.quarantined();

  for (const auto& b : load_blocks(files.extracted())) {
    ++s.blocks_extracted;
    s.mentions_extracted += b.datasets.size();
  }
  for (const auto& jb : load_judged(files.judged())) {
    for (const auto& v : jb.verdicts) s.mentions_judged_valid += v.valid ? 1 : 0;
  }
  if (std::filesystem::exists(files.assessed())) {
    for (const auto& ab : read_records<AssessedBlock>(files.assessed())) {
      for (const auto& a : ab.assessments) s.mentions_agent_valid += a.valid() ? 1 : 0;
    }
  }
  if (reason.exists() && s.mentions_judged_valid > 0) {
    s.retention_after_agent = static_cast<double>(s.mentions_agent_valid) /
                              static_cast<double>(s.mentions_judged_valid);
  }
  return s;
}

PipelineStats run_pipeline(std::span<const PageRecord> pages, const StageClient& client,
                           const PipelineConfig& config) {
  if (config.output_dir.empty()) throw Error(ErrorCode::ConfigError, "no output directory");
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir / "checkpoints", ec);
  if (ec) throw Error(ErrorCode::StoreWriteError, "cannot create " + config.output_dir.string());
  const RunFiles files{config.output_dir};
  auto wants = [&](Stage s) {
    return std::find(config.stages.begin(), config.stages.end(), s) != config.stages.end();
  };

  std::size_t sent = 0;

  if (wants(Stage::extract)) {
    const auto ordered = ordered_pages(pages);
    const auto items = extract_items(ordered);
    StageRunner runner(Stage::extract, files, config);
    sent += runner.run(items, [&](std::size_t i, Warnings& w) {
      std::vector<Json> lines;
      for (const auto& b : extract_mentions(ordered[i], client, &w)) lines.push_back(encode(b));
      return lines;
    });
  }

  if (wants(Stage::judge)) {
    const auto blocks = load_blocks(files.extracted());
    std::vector<WorkItem> items;
    for (const auto& b : blocks) items.push_back(block_item(Stage::judge, b));
    StageRunner runner(Stage::judge, files, config);
    sent += runner.run(items, [&](std::size_t i, Warnings& w) {
      JudgedBlock jb{blocks[i], judge_mentions(blocks[i], client, &w)};
      return std::vector<Json>{encode(jb)};
    });
  }

  if (wants(Stage::reason)) {
    std::vector<MentionBlock> blocks;
    for (const auto& jb : load_judged(files.judged())) {
      auto b = judge_valid_part(jb);
      if (!b.datasets.empty()) blocks.push_back(std::move(b));
    }
    std::vector<WorkItem> items;
    for (const auto& b : blocks) items.push_back(block_item(Stage::reason, b));
    StageRunner runner(Stage::reason, files, config);
    // Touch the checkpoint so an empty reasoning stage still counts as run.
    if (!std::filesystem::exists(files.checkpoint(Stage::reason))) {
      std::ofstream(files.checkpoint(Stage::reason), std::ios::binary);
    }
    sent += runner.run(items, [&](std::size_t i, Warnings& w) {
      AssessedBlock ab{blocks[i].source, blocks[i].page, blocks[i].mentioned_in,
                       reason_mentions(blocks[i], client, &w)};
      return std::vector<Json>{encode(ab)};
    });
  }

  PipelineStats stats = compute_stats(config.output_dir);
  write_stats(files, stats);
  stats.backend_items = sent;
  return stats;
}

PipelinePlan plan_pipeline(std::span<const PageRecord> pages, const PipelineConfig& config) {
  const RunFiles files{config.output_dir};
  PipelinePlan plan;
  const auto ordered = ordered_pages(pages);
  const StageCheckpoint extract(Stage::extract, files.checkpoint(Stage::extract));
  for (const auto& item : extract_items(ordered)) {
    if (extract.completed(item.key)) continue;
    ++plan.extract_pending;
    plan.extract_calls += item.needs_backend ? 1 : 0;
  }
  const StageCheckpoint judge(Stage::judge, files.checkpoint(Stage::judge));
  for (const auto& b : load_blocks(files.extracted())) {
    plan.judge_pending += judge.completed(block_item(Stage::judge, b).key) ? 0 : 1;
  }
  const StageCheckpoint reason(Stage::reason, files.checkpoint(Stage::reason));
  for (const auto& jb : load_judged(files.judged())) {
    auto b = judge_valid_part(jb);
    if (b.datasets.empty()) continue;
    plan.reason_pending += reason.completed(block_item(Stage::reason, b).key) ? 0 : 1;
  }
  return plan;
}

std::vector<Json> export_finetune_records(std::span<const PageRecord> pages,
                                          std::span<const AssessedBlock> assessed,
                                          std::string_view split_tag) {
  std::map<PageKey, Json> responses;
  for (const auto& ab : assessed) {
    auto& list = responses.try_emplace(PageKey{ab.source, ab.page}, Json::array()).first->second;
    for (const auto& a : ab.assessments) {
      if (!a.valid()) continue;
      DatasetMention m = a.mention();
      m.specificity = a.specificity();
      m.context = a.context();
      list.push_back(encode(m));
    }
  }
  std::vector<Json> out;
  out.reserve(pages.size());
  for (const auto& p : pages) {
    auto it = responses.find(p.key());
    const Json response = it == responses.end() ? Json::array() : it->second;
    out.push_back(Json{{"instruction", std::string(kFinetuneInstruction) + "\n\n" + p.text},
                       {"response", canonical_dump(response)},
                       {"source", p.doc_id.str()},
                       {"page", p.page_number},
                       {"split", std::string(split_tag)}});
  }
  return out;
}

}  // namespace dsm::weaksup
