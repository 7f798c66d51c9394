#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dsm/llm/chat.hpp"

namespace dsm::llm {

/// Deterministic backend answering from a script keyed by
/// (template id, request digest). Unknown inputs fail fast with
/// Error{UnscriptedInput}. Thread-safe; records every call.
class MockBackend final : public ChatBackend {
 public:
  struct Entry {
    std::string response;
    /// When set, the call fails as an endpoint returning this status.
    std::optional<int> error_status;
  };

  MockBackend() = default;

  void script(TemplateId id, std::string digest, Entry entry);
  void script_input(TemplateId id, std::string_view user_content, std::string response);

  /// Loads a line-delimited script: {"stage": "extractor|judge|reasoner",
  /// "digest": "<hex>" or "input": "<user content>", "response": "...",
  /// optional "error_status": 500}.
  void load_script(const std::filesystem::path& path);

  ChatResponse send(const ChatRequest& req) override;
  [[nodiscard]] std::string name() const override { return "mock"; }

  [[nodiscard]] std::size_t call_count() const;
  [[nodiscard]] std::size_t calls_for(TemplateId id) const;
  /// Digests in call order.
  [[nodiscard]] std::vector<std::string> call_log() const;
  void reset_calls();

 private:
  mutable std::mutex mu_;
  std::map<std::pair<TemplateId, std::string>, Entry> script_;
  std::vector<std::pair<TemplateId, std::string>> calls_;
};

}  // namespace dsm::llm
