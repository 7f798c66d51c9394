#include "dsm/llm/openai_backend.hpp"

#include <nlohmann/json.hpp>

#include "dsm/core/error.hpp"
#include "dsm/core/http.hpp"

namespace dsm::llm {

using Json = nlohmann::json;

std::string OpenAIBackend::build_body(const ChatRequest& req) {
  Json body{{"model", req.model_name},
            {"temperature", req.temperature},
            {"max_tokens", req.max_output_tokens},
            {"messages",
             Json::array({Json{{"role", "system"}, {"content", req.system_prompt}},
                          Json{{"role", "user"}, {"content", req.user_content}}})}};
  return body.dump(-1, ' ', false, Json::error_handler_t::replace);
}

ChatResponse OpenAIBackend::send(const ChatRequest& req) {
  http::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto started = std::chrono::steady_clock::now();
  const auto r = http::post(config_.base_url + config_.path, build_body(req), "application/json",
                            headers, {.timeout = config_.timeout});
  const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);

  if (r.status == 429) {
    Error e(ErrorCode::RateLimited, "chat endpoint returned 429");
    e.with_http_status(429);
    if (auto s = http::retry_after_seconds(r); s >= 0) e.with_retry_after(std::chrono::seconds(s));
    throw e;
  }
  if (r.status < 200 || r.status >= 300) {
    throw Error(ErrorCode::BackendError,
                "chat endpoint returned " + std::to_string(r.status) + ": " + r.body.substr(0, 200))
        .with_http_status(r.status);
  }

  Json body;
  try {
    body = Json::parse(r.body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::BackendError, std::string("unreadable chat reply: ") + e.what())
        .with_http_status(r.status);
  }
  const Json* content = nullptr;
  if (body.contains("choices") && body["choices"].is_array() && !body["choices"].empty()) {
    const auto& choice = body["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content")) {
      content = &choice["message"]["content"];
    }
  }
  if (content == nullptr || !content->is_string()) {
    throw Error(ErrorCode::BackendError, "chat reply without choices[0].message.content")
        .with_http_status(r.status);
  }

  ChatResponse out;
  out.text = content->get<std::string>();
  out.latency = latency;
  if (auto usage = body.find("usage"); usage != body.end() && usage->is_object()) {
    out.token_usage = TokenUsage{usage->value("prompt_tokens", 0LL),
                                 usage->value("completion_tokens", 0LL)};
  }
  return out;
}

}  // namespace dsm::llm
