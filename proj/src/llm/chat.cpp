#include "dsm/llm/chat.hpp"

#include "dsm/core/digest.hpp"
#include "dsm/core/error.hpp"

namespace dsm::llm {

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::extractor: return "extractor";
    case TemplateId::judge: return "judge";
    case TemplateId::reasoner: return "reasoner";
  }
  return "?";
}

TemplateId parse_template_id(std::string_view name) {
  if (name == "extractor") return TemplateId::extractor;
  if (name == "judge") return TemplateId::judge;
  if (name == "reasoner") return TemplateId::reasoner;
  throw Error(ErrorCode::UnknownTemplate, std::string(name));
}

std::string request_digest(TemplateId id, std::string_view user_content) {
  std::string material(to_string(id));
  material.push_back('\0');
  material.append(user_content);
  return sha256_hex(material);
}

std::string request_digest(const ChatRequest& req) {
  if (!req.template_id) {
    throw Error(ErrorCode::PreconditionViolated, "request digest needs a template id");
  }
  return request_digest(*req.template_id, req.user_content);
}

ChatResponse complete(const ChatRequest& req, ChatBackend& backend, const RetryPolicy& policy,
                      RetryTelemetry* telemetry, const Sleeper& sleep) {
  if (req.temperature < 0) throw Error(ErrorCode::PreconditionViolated, "temperature < 0");
  if (req.max_output_tokens <= 0) {
    throw Error(ErrorCode::PreconditionViolated, "max_output_tokens must be positive");
  }
  if (req.system_prompt.empty() || req.user_content.empty()) {
    throw Error(ErrorCode::PreconditionViolated, "prompts must be non-empty");
  }
  try {
    return with_retry(policy, [&] { return backend.send(req); }, telemetry, sleep);
  } catch (const Error& e) {
    if (!is_transient(e)) throw;
    Error exhausted(ErrorCode::RetriesExhausted,
                    std::to_string(policy.max_attempts) + " attempts: " + e.what());
    exhausted.with_http_status(e.http_status());
    throw exhausted;
  }
}

}  // namespace dsm::llm
