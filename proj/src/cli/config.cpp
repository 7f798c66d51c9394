#include "dsm/cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "dsm/core/error.hpp"
#include "dsm/llm/mock_backend.hpp"
#include "dsm/llm/openai_backend.hpp"

namespace dsm::cli {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

void only_keys(const Json& j, std::string_view where, std::set<std::string> allowed) {
  if (!j.is_object()) bad(std::string(where) + " must be an object");
  for (const auto& [k, _] : j.items()) {
    if (!allowed.contains(k)) bad("unknown config key " + std::string(where) + "." + k);
  }
}

template <class T>
void take(const Json& j, const char* key, T& out, std::string_view where) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const Json::exception&) {
    bad(std::string(where) + "." + key + " has the wrong type");
  }
}

void take_path(const Json& j, const char* key, std::filesystem::path& out,
               const std::filesystem::path& base, std::string_view where) {
  std::string s;
  take(j, key, s, where);
  if (!s.empty()) out = s;
  if (!out.empty() && out.is_relative()) out = base / out;
}

void range(bool ok, const std::string& what) {
  if (!ok) bad(what + " out of range");
}

}  // namespace

AppConfig parse_config(const Json& j, const std::filesystem::path& base_dir,
                       const std::filesystem::path& default_prompts) {
  only_keys(j, "config",
            {"llm", "metadata", "concurrency", "retry", "item_attempts", "gate", "match", "paths",
             "converter", "seed"});
  AppConfig c;

  if (j.contains("llm")) {
    const Json& l = j["llm"];
    only_keys(l, "llm",
              {"backend", "base_url", "path", "model", "api_key_env", "mock_script",
               "temperature", "max_output_tokens", "timeout_ms"});
    take(l, "backend", c.llm.backend, "llm");
    take(l, "base_url", c.llm.base_url, "llm");
    take(l, "path", c.llm.path, "llm");
    take(l, "model", c.llm.model, "llm");
    take(l, "api_key_env", c.llm.api_key_env, "llm");
    take_path(l, "mock_script", c.llm.mock_script, base_dir, "llm");
    take(l, "temperature", c.llm.temperature, "llm");
    take(l, "max_output_tokens", c.llm.max_output_tokens, "llm");
    take(l, "timeout_ms", c.llm.timeout_ms, "llm");
  }
  if (c.llm.backend != "openai" && c.llm.backend != "mock") bad("llm.backend must be openai or mock");
  if (c.llm.backend == "mock" && c.llm.mock_script.empty()) bad("llm.mock_script required for mock backend");
  range(c.llm.temperature >= 0.0 && c.llm.temperature <= 2.0, "llm.temperature");
  range(c.llm.max_output_tokens > 0, "llm.max_output_tokens");
  range(c.llm.timeout_ms > 0, "llm.timeout_ms");

  if (j.contains("metadata")) {
    const Json& m = j["metadata"];
    only_keys(m, "metadata", {"base_url", "api_key_env", "timeout_ms"});
    take(m, "base_url", c.metadata.base_url, "metadata");
    take(m, "api_key_env", c.metadata.api_key_env, "metadata");
    take(m, "timeout_ms", c.metadata.timeout_ms, "metadata");
  }
  range(c.metadata.timeout_ms > 0, "metadata.timeout_ms");

  take(j, "concurrency", c.concurrency, "config");
  range(c.concurrency >= 1 && c.concurrency <= 256, "concurrency");
  take(j, "item_attempts", c.item_attempts, "config");
  range(c.item_attempts >= 1 && c.item_attempts <= 100, "item_attempts");

  if (j.contains("retry")) {
    const Json& r = j["retry"];
    only_keys(r, "retry", {"max_attempts", "base_delay_ms", "factor", "max_delay_ms"});
    long long base = c.retry.base_delay.count();
    long long max = c.retry.max_delay.count();
    take(r, "max_attempts", c.retry.max_attempts, "retry");
    take(r, "base_delay_ms", base, "retry");
    take(r, "factor", c.retry.factor, "retry");
    take(r, "max_delay_ms", max, "retry");
    c.retry.base_delay = std::chrono::milliseconds(base);
    c.retry.max_delay = std::chrono::milliseconds(max);
  }
  range(c.retry.max_attempts >= 1 && c.retry.max_attempts <= 20, "retry.max_attempts");
  range(c.retry.base_delay.count() >= 0, "retry.base_delay_ms");
  range(c.retry.factor >= 1.0, "retry.factor");
  range(c.retry.max_delay >= c.retry.base_delay, "retry.max_delay_ms");

  if (j.contains("gate")) {
    const Json& g = j["gate"];
    only_keys(g, "gate", {"kind", "threshold", "triggers_file", "endpoint"});
    take(g, "kind", c.gate.kind, "gate");
    take(g, "threshold", c.gate.threshold, "gate");
    take_path(g, "triggers_file", c.gate.triggers_file, base_dir, "gate");
    take(g, "endpoint", c.gate.endpoint, "gate");
  }
  if (c.gate.kind != "always_pass" && c.gate.kind != "keyword" && c.gate.kind != "remote") {
    bad("gate.kind must be always_pass, keyword or remote");
  }
  if (c.gate.kind == "remote" && c.gate.endpoint.empty()) bad("gate.endpoint required for remote gate");
  range(c.gate.threshold >= 0.0 && c.gate.threshold <= 1.0, "gate.threshold");

  if (j.contains("match")) {
    const Json& m = j["match"];
    only_keys(m, "match", {"jaccard_threshold", "beta"});
    take(m, "jaccard_threshold", c.match.jaccard_threshold, "match");
    take(m, "beta", c.match.beta, "match");
  }
  range(c.match.jaccard_threshold >= 0.0 && c.match.jaccard_threshold < 1.0, "match.jaccard_threshold");
  range(c.match.beta > 0.0, "match.beta");

  c.paths.corpus = base_dir / c.paths.corpus;
  c.paths.output = base_dir / c.paths.output;
  c.paths.pdf_dir = base_dir / c.paths.pdf_dir;
  c.paths.prompts = default_prompts;
  if (j.contains("paths")) {
    const Json& p = j["paths"];
    only_keys(p, "paths", {"corpus", "prompts", "output", "pdf_dir"});
    take_path(p, "corpus", c.paths.corpus, base_dir, "paths");
    take_path(p, "prompts", c.paths.prompts, base_dir, "paths");
    take_path(p, "output", c.paths.output, base_dir, "paths");
    take_path(p, "pdf_dir", c.paths.pdf_dir, base_dir, "paths");
  }
  if (c.paths.prompts.empty() || !std::filesystem::is_directory(c.paths.prompts)) {
    bad("prompts directory not found: " + c.paths.prompts.string());
  }
  if (c.llm.backend == "mock" && !std::filesystem::is_regular_file(c.llm.mock_script)) {
    bad("mock script not found: " + c.llm.mock_script.string());
  }
  if (!c.gate.triggers_file.empty() && !std::filesystem::is_regular_file(c.gate.triggers_file)) {
    bad("gate triggers file not found: " + c.gate.triggers_file.string());
  }

  take(j, "converter", c.converter, "config");
  if (c.converter.find("{input}") == std::string::npos) bad("converter must contain {input}");
  take(j, "seed", c.seed, "config");
  return c;
}

AppConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::filesystem::path& default_prompts) {
  if (!file) return parse_config(Json::object(), std::filesystem::current_path(), default_prompts);
  std::ifstream in(*file, std::ios::binary);
  if (!in) bad("cannot read config " + file->string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    bad("config " + file->string() + ": " + e.what());
  }
  auto base = std::filesystem::absolute(*file).parent_path();
  return parse_config(j, base, default_prompts);
}

Json describe(const AppConfig& c) {
  return Json{
      {"llm",
       {{"backend", c.llm.backend},
        {"base_url", c.llm.base_url},
        {"path", c.llm.path},
        {"model", c.llm.model},
        {"api_key_env", c.llm.api_key_env},
        {"mock_script", c.llm.mock_script.string()},
        {"temperature", c.llm.temperature},
        {"max_output_tokens", c.llm.max_output_tokens},
        {"timeout_ms", c.llm.timeout_ms}}},
      {"metadata",
       {{"base_url", c.metadata.base_url},
        {"api_key_env", c.metadata.api_key_env},
        {"timeout_ms", c.metadata.timeout_ms}}},
      {"concurrency", c.concurrency},
      {"retry",
       {{"max_attempts", c.retry.max_attempts},
        {"base_delay_ms", c.retry.base_delay.count()},
        {"factor", c.retry.factor},
        {"max_delay_ms", c.retry.max_delay.count()}}},
      {"item_attempts", c.item_attempts},
      {"gate",
       {{"kind", c.gate.kind},
        {"threshold", c.gate.threshold},
        {"triggers_file", c.gate.triggers_file.string()},
        {"endpoint", c.gate.endpoint}}},
      {"match", {{"jaccard_threshold", c.match.jaccard_threshold}, {"beta", c.match.beta}}},
      {"paths",
       {{"corpus", c.paths.corpus.string()},
        {"prompts", c.paths.prompts.string()},
        {"output", c.paths.output.string()},
        {"pdf_dir", c.paths.pdf_dir.string()}}},
      {"converter", c.converter},
      {"seed", c.seed}};
}

std::unique_ptr<llm::ChatBackend> make_backend(const AppConfig& cfg) {
  if (cfg.llm.backend == "mock") {
    auto mock = std::make_unique<llm::MockBackend>();
    mock->load_script(cfg.llm.mock_script);
    return mock;
  }
  const char* key = std::getenv(cfg.llm.api_key_env.c_str());
  if (key == nullptr || *key == '\0') bad("environment variable " + cfg.llm.api_key_env + " is not set");
  llm::OpenAIBackendConfig oc;
  oc.base_url = cfg.llm.base_url;
  oc.path = cfg.llm.path;
  oc.api_key = key;
  oc.timeout = std::chrono::milliseconds(cfg.llm.timeout_ms);
  return std::make_unique<llm::OpenAIBackend>(oc);
}

}  // namespace dsm::cli
