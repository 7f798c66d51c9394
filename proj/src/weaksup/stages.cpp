#include "dsm/weaksup/stages.hpp"

#include <algorithm>
#include <iterator>
#include <set>
#include <utility>

#include "dsm/core/error.hpp"
#include "dsm/llm/payload.hpp"

namespace dsm::weaksup {

using llm::TemplateId;

namespace {

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos; }

void warn(Warnings* warnings, std::string message) {
  if (warnings != nullptr) warnings->push_back(std::move(message));
}

/// First array found under one of `keys`, or nullptr.
const Json* array_under(const Json& obj, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (obj.contains(k) && obj[k].is_array()) return &obj[k];
  }
  return nullptr;
}

bool read_flag(const Json& obj, const char* key, std::string_view what) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw Error(ErrorCode::ParseError, std::string(what) + " without '" + key + "'");
  }
  if (it->is_boolean()) return it->get<bool>();
  if (it->is_string()) {
    const auto& s = it->get_ref<const std::string&>();
    if (s == "true" || s == "True" || s == "valid") return true;
    if (s == "false" || s == "False" || s == "invalid") return false;
  }
  throw Error(ErrorCode::ParseError, std::string(what) + " has a non-boolean '" + key + "'");
}

std::optional<std::string> first_text(const Json& obj, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (auto v = optional_text(obj, k)) return v;
  }
  return std::nullopt;
}

template <class E, class Parser>
std::optional<E> nullable_label(const Json& obj, const char* key, Parser parse) {
  auto text = optional_text(obj, key);
  if (!text) return std::nullopt;
  auto v = parse(*text);
  if (!v) throw Error(ErrorCode::BadEnum, std::string(key) + ": unknown value '" + *text + "'");
  return v;
}

}  // namespace

llm::ChatRequest StageClient::request(TemplateId id, const std::string& user_content) const {
  const char* var = id == TemplateId::extractor ? "page_text" : "mention_block";
  const auto rendered = prompts_->render(id, {{var, user_content}});
  llm::ChatRequest req;
  req.model_name = settings_.model;
  req.system_prompt = rendered.system;
  req.user_content = rendered.user;
  req.temperature = settings_.temperature;
  req.max_output_tokens = settings_.max_output_tokens;
  req.template_id = id;
  return req;
}

std::string StageClient::ask(TemplateId id, const std::string& user_content) const {
  return llm::complete(request(id, user_content), *backend_, settings_.retry, nullptr,
                       settings_.sleep)
      .text;
}

std::string block_user_content(const MentionBlock& block) { return canonical_dump(encode(block)); }

// ---------------------------------------------------------------------------
// extraction

std::vector<MentionBlock> parse_extraction_reply(std::string_view reply, const PageRecord& page,
                                                 Warnings* warnings) {
  const Json payload = llm::extract_stage_payload(reply);

  // Normalize the accepted shapes to a list of {mentioned_in?, datasets} groups.
  Json groups = Json::array();
  if (payload.is_object() && payload.contains("data_mentions")) {
    if (!payload["data_mentions"].is_array()) {
      throw Error(ErrorCode::ParseError, "data_mentions must be a list");
    }
    groups = payload["data_mentions"];
  } else if (payload.is_object() && payload.contains("datasets")) {
    groups.push_back(payload);
  } else if (payload.is_array()) {
    const bool grouped = !payload.empty() && payload[0].is_object() && payload[0].contains("datasets");
    if (grouped) {
      groups = payload;
    } else {
      groups.push_back(Json{{"datasets", payload}});
    }
  } else if (!(payload.is_object() && payload.empty())) {
    throw Error(ErrorCode::ParseError, "reply is not interpretable as the extraction schema");
  }

  std::vector<MentionBlock> blocks;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& group : groups) {
    if (!group.is_object()) throw Error(ErrorCode::ParseError, "mention group must be an object");
    const auto group_sentence = optional_text(group, "mentioned_in");
    const Json* datasets = array_under(group, {"datasets"});
    if (datasets == nullptr) {
      if (group.contains("datasets") && !group["datasets"].is_null()) {
        throw Error(ErrorCode::ParseError, "datasets must be a list");
      }
      continue;
    }
    for (Json d : *datasets) {
      const auto violations = validate_mention(d);
      if (!violations.empty()) {
        warn(warnings, "dropped mention: " + violations.front().message);
        continue;
      }
      if (!optional_text(d, "mentioned_in")) {
        if (!group_sentence) {
          warn(warnings, "dropped mention without sentence: " + d["raw_name"].get<std::string>());
          continue;
        }
        d["mentioned_in"] = *group_sentence;
      }
      DatasetMention m = decode<DatasetMention>(d, warnings);
      if (!seen.emplace(m.raw_name, m.mentioned_in).second) {
        warn(warnings, "collapsed duplicate mention '" + m.raw_name + "'");
        continue;
      }
      auto block = std::find_if(blocks.begin(), blocks.end(), [&](const MentionBlock& b) {
        return b.mentioned_in == m.mentioned_in;
      });
      if (block == blocks.end()) {
        blocks.push_back(MentionBlock{m.mentioned_in, {}, page.doc_id, page.page_number});
        block = std::prev(blocks.end());
      }
      block->datasets.push_back(std::move(m));
    }
  }
  return blocks;
}

std::vector<MentionBlock> extract_mentions(const PageRecord& page, const StageClient& client,
                                           Warnings* warnings) {
  if (blank(page.text)) return {};
  return parse_extraction_reply(client.ask(TemplateId::extractor, page.text), page, warnings);
}

// ---------------------------------------------------------------------------
// judge

std::vector<JudgeVerdict> parse_judge_reply(std::string_view reply, const MentionBlock& block,
                                            Warnings* warnings) {
  const Json payload = llm::extract_stage_payload(reply);
  Json items;
  if (payload.is_array()) {
    items = payload;
  } else if (payload.is_object()) {
    if (const Json* list = array_under(payload, {"assessments", "verdicts", "datasets", "results"})) {
      items = *list;
    } else if (payload.contains("valid")) {
      items = Json::array({payload});
    }
  }
  if (!items.is_array()) throw Error(ErrorCode::ParseError, "judge reply holds no verdict list");
  if (items.size() != block.datasets.size()) {
    throw Error(ErrorCode::ArityMismatch, std::to_string(items.size()) + " verdicts for " +
                                              std::to_string(block.datasets.size()) + " datasets");
  }

  std::vector<JudgeVerdict> verdicts;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Json& item = items[i];
    if (!item.is_object()) throw Error(ErrorCode::ParseError, "verdict must be an object");
    const auto& expected = block.datasets[i].raw_name;
    JudgeVerdict v;
    v.raw_name = expected;
    if (auto said = optional_text(item, "raw_name"); said && *said != expected) {
      warn(warnings, "judge verdict " + std::to_string(i) + " names '" + *said + "', kept '" +
                         expected + "'");
    }
    // "Potentially valid - needs dataset name confirmation" counts as valid
    // and is kept as the reason.
    std::optional<std::string> uncertain;
    if (auto flag = optional_text(item, "valid"); flag && flag->starts_with("Potentially valid")) {
      uncertain = flag;
      v.valid = true;
    } else {
      v.valid = read_flag(item, "valid", "verdict");
    }
    v.reason = first_text(item, {"reason", "invalid_reason"}).value_or(uncertain.value_or(""));
    if (v.reason.empty()) {
      warn(warnings, "judge gave no reason for '" + expected + "'");
      v.reason = "(no reason given)";
    }
    v.inferred_year = first_text(item, {"inferred_year", "year"});
    v.inferred_producer = first_text(item, {"inferred_producer", "producer"});
    v.inferred_data_type = first_text(item, {"inferred_data_type", "data_type"});
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

std::vector<JudgeVerdict> judge_mentions(const MentionBlock& block, const StageClient& client,
                                         Warnings* warnings) {
  if (block.datasets.empty()) {
    throw Error(ErrorCode::PreconditionViolated, "judge needs at least one dataset");
  }
  return parse_judge_reply(client.ask(TemplateId::judge, block_user_content(block)), block,
                           warnings);
}

// ---------------------------------------------------------------------------
// reasoning agent

std::vector<AgentAssessment> parse_reasoner_reply(std::string_view reply,
                                                  const MentionBlock& block,
                                                  Warnings* warnings) {
  const Json payload = llm::extract_stage_payload(reply);
  const Json* items = nullptr;
  if (payload.is_object()) {
    items = array_under(payload, {"datasets"});
  } else if (payload.is_array()) {
    items = (!payload.empty() && payload[0].is_object() && payload[0].contains("datasets"))
                ? array_under(payload[0], {"datasets"})
                : &payload;
  }
  if (items == nullptr) throw Error(ErrorCode::ParseError, "reasoner reply holds no datasets list");
  if (items->size() != block.datasets.size()) {
    throw Error(ErrorCode::ArityMismatch, std::to_string(items->size()) + " assessments for " +
                                              std::to_string(block.datasets.size()) + " datasets");
  }

  std::vector<AgentAssessment> out;
  for (std::size_t i = 0; i < items->size(); ++i) {
    const Json& item = (*items)[i];
    if (!item.is_object()) throw Error(ErrorCode::ParseError, "assessment must be an object");
    DatasetMention mention = block.datasets[i];
    if (auto said = optional_text(item, "raw_name"); said && *said != mention.raw_name) {
      warn(warnings, "reasoner assessment " + std::to_string(i) + " names '" + *said +
                         "', kept '" + mention.raw_name + "'");
    }

    if (item.contains("harmonized_name")) mention.harmonized_name = optional_text(item, "harmonized_name");
    if (mention.harmonized_name &&
        mention.mentioned_in.find(*mention.harmonized_name) == std::string::npos) {
      warn(warnings, "removed harmonized_name '" + *mention.harmonized_name +
                         "' not found in mentioned_in");
      mention.harmonized_name.reset();
    }

    const bool valid = read_flag(item, "valid", "assessment");
    const auto specificity = nullable_label<Specificity>(item, "specificity", parse_specificity);
    const auto context = nullable_label<Context>(item, "context", parse_context);

    if (!valid) {
      if (specificity || context) {
        warn(warnings, "ValidityCouplingViolation: invalid '" + mention.raw_name +
                           "' carried labels; nulled");
      }
      auto reason = first_text(item, {"invalid_reason", "reason"});
      if (!reason || reason->empty()) {
        warn(warnings, "reasoner gave no reason for invalid '" + mention.raw_name + "'");
        reason = "(no reason given)";
      }
      out.push_back(AgentAssessment::make_invalid(std::move(mention), *reason));
      continue;
    }

    const auto final_specificity = specificity ? specificity : mention.specificity;
    const auto final_context = context ? context : mention.context;
    if (!final_specificity || !final_context) {
      throw Error(ErrorCode::ValidityCouplingViolation,
                  "valid '" + mention.raw_name + "' without specificity/context");
    }
    out.push_back(AgentAssessment::make_valid(std::move(mention), *final_specificity, *final_context));
  }
  return out;
}

std::vector<AgentAssessment> reason_mentions(const MentionBlock& block, const StageClient& client,
                                             Warnings* warnings) {
  if (block.datasets.empty()) {
    throw Error(ErrorCode::PreconditionViolated, "reasoner needs at least one dataset");
  }
  return parse_reasoner_reply(client.ask(TemplateId::reasoner, block_user_content(block)), block,
                              warnings);
}

}  // namespace dsm::weaksup
