#pragma once

#include <chrono>
#include <string>

#include "dsm/llm/chat.hpp"

namespace dsm::llm {

struct OpenAIBackendConfig {
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string api_key;
  std::chrono::milliseconds timeout{120'000};
};

/// OpenAI-compatible chat-completions endpoint: system + user message,
/// non-streaming, plain-text reply taken from choices[0].message.content.
class OpenAIBackend final : public ChatBackend {
 public:
  explicit OpenAIBackend(OpenAIBackendConfig config) : config_(std::move(config)) {}

  ChatResponse send(const ChatRequest& req) override;
  [[nodiscard]] std::string name() const override { return "openai:" + config_.base_url; }

  /// Request body for `req`. Exposed for tests.
  static std::string build_body(const ChatRequest& req);

 private:
  OpenAIBackendConfig config_;
};

}  // namespace dsm::llm
