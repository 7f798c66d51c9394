#include "dsm/llm/prompts.hpp"

#include <fstream>
#include <sstream>

#include "dsm/core/error.hpp"

namespace dsm::llm {

std::filesystem::path prompt_file(const std::filesystem::path& dir, TemplateId id) {
  return dir / (std::string(to_string(id)) + ".txt");
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  std::map<TemplateId, std::string> bodies;
  for (auto id : {TemplateId::extractor, TemplateId::judge, TemplateId::reasoner}) {
    const auto path = prompt_file(dir, id);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "missing prompt file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    bodies[id] = ss.str();
  }
  return from_bodies(std::move(bodies));
}

PromptLibrary PromptLibrary::from_bodies(std::map<TemplateId, std::string> bodies) {
  PromptLibrary lib;
  for (auto& [id, body] : bodies) {
    if (body.empty()) {
      throw Error(ErrorCode::ConfigError, "empty prompt for " + std::string(to_string(id)));
    }
    lib.templates_.emplace(id, PromptTemplate{id, std::move(body)});
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(TemplateId id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw Error(ErrorCode::UnknownTemplate, std::string(to_string(id)));
  return it->second;
}

RenderedPrompt PromptLibrary::render(TemplateId id,
                                     const std::map<std::string, std::string>& variables) const {
  const char* key = id == TemplateId::extractor ? "page_text" : "mention_block";
  auto it = variables.find(key);
  if (it == variables.end()) {
    throw Error(ErrorCode::MissingField, std::string(to_string(id)) + " prompt needs " + key);
  }
  return RenderedPrompt{get(id).body, it->second};
}

RenderedPrompt PromptLibrary::render(std::string_view template_name,
                                     const std::map<std::string, std::string>& variables) const {
  return render(parse_template_id(template_name), variables);
}

}  // namespace dsm::llm
