#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dsm/core/retry.hpp"
#include "dsm/core/serialize.hpp"
#include "dsm/core/types.hpp"
#include "dsm/llm/chat.hpp"
#include "dsm/llm/prompts.hpp"

namespace dsm::weaksup {

struct LlmSettings {
  std::string model{llm::kDefaultModel};
  double temperature = 0.0;
  int max_output_tokens = 4096;
  RetryPolicy retry;
  Sleeper sleep = real_sleep;
};

/// Sends one stage prompt through a backend with the configured retry policy.
class StageClient {
 public:
  StageClient(llm::ChatBackend& backend, const llm::PromptLibrary& prompts, LlmSettings settings)
      : backend_(&backend), prompts_(&prompts), settings_(std::move(settings)) {}

  [[nodiscard]] llm::ChatRequest request(llm::TemplateId id, const std::string& user_content) const;
  [[nodiscard]] std::string ask(llm::TemplateId id, const std::string& user_content) const;

  [[nodiscard]] const LlmSettings& settings() const noexcept { return settings_; }

 private:
  llm::ChatBackend* backend_;
  const llm::PromptLibrary* prompts_;
  LlmSettings settings_;
};

/// User message sent to the judge and the reasoner for `block`.
std::string block_user_content(const MentionBlock& block);

/// Stage 1. Blank pages short-circuit to an empty list without a backend
/// call. Mentions failing validation are dropped with a warning; identical
/// (raw_name, mentioned_in) pairs collapse.
std::vector<MentionBlock> extract_mentions(const PageRecord& page, const StageClient& client,
                                           Warnings* warnings = nullptr);

/// Stage 2. One verdict per dataset, order-aligned (Error{ArityMismatch}).
std::vector<JudgeVerdict> judge_mentions(const MentionBlock& block, const StageClient& client,
                                         Warnings* warnings = nullptr);

/// Stage 3. One assessment per dataset. raw_name and mentioned_in always come
/// from `block`; a harmonized_name absent from mentioned_in is removed; an
/// invalid verdict that still carries labels has them nulled (warning).
std::vector<AgentAssessment> reason_mentions(const MentionBlock& block, const StageClient& client,
                                             Warnings* warnings = nullptr);

// Reply interpreters behind the three stages.
std::vector<MentionBlock> parse_extraction_reply(std::string_view reply, const PageRecord& page,
                                                 Warnings* warnings = nullptr);
std::vector<JudgeVerdict> parse_judge_reply(std::string_view reply, const MentionBlock& block,
                                            Warnings* warnings = nullptr);
std::vector<AgentAssessment> parse_reasoner_reply(std::string_view reply,
                                                  const MentionBlock& block,
                                                  Warnings* warnings = nullptr);

}  // namespace dsm::weaksup
