#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "dsm/core/retry.hpp"

namespace dsm::llm {

enum class TemplateId { extractor, judge, reasoner };

std::string_view to_string(TemplateId id);
/// Throws Error{UnknownTemplate}.
TemplateId parse_template_id(std::string_view name);

inline constexpr std::string_view kDefaultModel = "gpt-4o-mini-2024-07-18";

struct ChatRequest {
  std::string model_name{kDefaultModel};
  std::string system_prompt;
  std::string user_content;
  double temperature = 0.0;
  int max_output_tokens = 4096;
  /// Which prompt produced this request; used for digests, never sent.
  std::optional<TemplateId> template_id;
};

struct TokenUsage {
  long long prompt_tokens = 0;
  long long completion_tokens = 0;
};

struct ChatResponse {
  std::string text;
  std::optional<TokenUsage> token_usage;
  std::chrono::milliseconds latency{0};
};

/// Stable identity of a request: SHA-256 over (template id, user content).
std::string request_digest(TemplateId id, std::string_view user_content);
std::string request_digest(const ChatRequest& req);

/// One chat-completion transport. Implementations must be safe to call from
/// several threads. Failures are reported as dsm::Error with codes Timeout,
/// RateLimited (carrying retry-after when known), BackendError (carrying the
/// HTTP status) or UnscriptedInput.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse send(const ChatRequest& req) = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

/// Validates `req`, then sends it through `backend` under `policy`. Transient
/// failures are retried; 4xx other than 429 are not. A spent budget raises
/// Error{RetriesExhausted} wrapping the last failure.
ChatResponse complete(const ChatRequest& req, ChatBackend& backend, const RetryPolicy& policy,
                      RetryTelemetry* telemetry = nullptr, const Sleeper& sleep = real_sleep);

}  // namespace dsm::llm
