#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "dsm/llm/chat.hpp"

namespace dsm::llm {

struct PromptTemplate {
  TemplateId template_id;
  std::string body;
};

/// System prompt plus the per-item user message.
struct RenderedPrompt {
  std::string system;
  std::string user;
};

/// The three stage prompts, loaded from `<dir>/{extractor,judge,reasoner}.txt`.
class PromptLibrary {
 public:
  /// Throws Error{ConfigError} when a file is missing or empty.
  static PromptLibrary load(const std::filesystem::path& dir);

  /// Library with caller-supplied bodies (tests).
  static PromptLibrary from_bodies(std::map<TemplateId, std::string> bodies);

  [[nodiscard]] const PromptTemplate& get(TemplateId id) const;

  /// The system prompt is returned unchanged. The user message is
  /// `page_text` for the extractor and `mention_block` (a canonical
  /// serialized block) for the judge and reasoner. A missing variable raises
  /// Error{MissingField}.
  [[nodiscard]] RenderedPrompt render(TemplateId id,
                                      const std::map<std::string, std::string>& variables) const;

  /// Same, with the template named by text (Error{UnknownTemplate}).
  [[nodiscard]] RenderedPrompt render(std::string_view template_name,
                                      const std::map<std::string, std::string>& variables) const;

 private:
  std::map<TemplateId, PromptTemplate> templates_;
};

std::filesystem::path prompt_file(const std::filesystem::path& dir, TemplateId id);

}  // namespace dsm::llm
