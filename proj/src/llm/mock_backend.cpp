#include "dsm/llm/mock_backend.hpp"

#include "dsm/core/error.hpp"
#include "dsm/core/jsonl.hpp"

namespace dsm::llm {

void MockBackend::script(TemplateId id, std::string digest, Entry entry) {
  std::lock_guard lock(mu_);
  script_[{id, std::move(digest)}] = std::move(entry);
}

void MockBackend::script_input(TemplateId id, std::string_view user_content,
                               std::string response) {
  script(id, request_digest(id, user_content), Entry{std::move(response), std::nullopt});
}

void MockBackend::load_script(const std::filesystem::path& path) {
  for_each_jsonl(path, [&](const Json& j, std::size_t line) {
    const auto where = path.string() + ":" + std::to_string(line);
    if (!j.is_object() || !j.contains("stage") || !j["stage"].is_string()) {
      throw Error(ErrorCode::InvalidRecord, where + ": script entry needs a stage");
    }
    const TemplateId id = parse_template_id(j["stage"].get<std::string>());
    std::string digest;
    if (j.contains("digest") && j["digest"].is_string()) {
      digest = j["digest"].get<std::string>();
    } else if (j.contains("input") && j["input"].is_string()) {
      digest = request_digest(id, j["input"].get<std::string>());
    } else {
      throw Error(ErrorCode::InvalidRecord, where + ": script entry needs digest or input");
    }
    Entry entry;
    if (auto r = j.find("response"); r != j.end()) {
      entry.response = r->is_string() ? r->get<std::string>() : canonical_dump(*r);
    }
    if (auto s = j.find("error_status"); s != j.end() && s->is_number_integer()) {
      entry.error_status = s->get<int>();
    }
    script(id, std::move(digest), std::move(entry));
  });
}

ChatResponse MockBackend::send(const ChatRequest& req) {
  const std::string digest = request_digest(req);
  Entry entry;
  {
    std::lock_guard lock(mu_);
    calls_.emplace_back(*req.template_id, digest);
    auto it = script_.find({*req.template_id, digest});
    if (it == script_.end()) {
      throw Error(ErrorCode::UnscriptedInput,
                  std::string(to_string(*req.template_id)) + " digest " + digest);
    }
    entry = it->second;
  }
  if (entry.error_status) {
    const int status = *entry.error_status;
    if (status == 429) {
      throw Error(ErrorCode::RateLimited, "scripted 429").with_http_status(429);
    }
    throw Error(ErrorCode::BackendError, "scripted status " + std::to_string(status))
        .with_http_status(status);
  }
  return ChatResponse{entry.response, std::nullopt, std::chrono::milliseconds{0}};
}

std::size_t MockBackend::call_count() const {
  std::lock_guard lock(mu_);
  return calls_.size();
}

std::size_t MockBackend::calls_for(TemplateId id) const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& c : calls_) n += c.first == id ? 1 : 0;
  return n;
}

std::vector<std::string> MockBackend::call_log() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  out.reserve(calls_.size());
  for (const auto& c : calls_) out.push_back(c.second);
  return out;
}

void MockBackend::reset_calls() {
  std::lock_guard lock(mu_);
  calls_.clear();
}

}  // namespace dsm::llm
