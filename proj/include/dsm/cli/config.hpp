#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "dsm/core/retry.hpp"
#include "dsm/core/serialize.hpp"
#include "dsm/llm/chat.hpp"

namespace dsm::cli {

struct LlmEndpoint {
  std::string backend = "openai";  // openai | mock
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string model{llm::kDefaultModel};
  std::string api_key_env = "OPENAI_API_KEY";
  std::filesystem::path mock_script;  // required for backend=mock
  double temperature = 0.0;
  int max_output_tokens = 4096;
  int timeout_ms = 120'000;
};

struct MetadataEndpoint {
  std::string base_url = "https://api.semanticscholar.org";
  std::string api_key_env = "S2_API_KEY";  // optional; unset means anonymous
  int timeout_ms = 30'000;
};

struct GateSettings {
  std::string kind = "keyword";  // always_pass | keyword | remote
  double threshold = 0.5;
  std::filesystem::path triggers_file;  // empty: built-in list
  std::string endpoint;                 // remote only
};

struct MatchSettings {
  double jaccard_threshold = 0.5;
  double beta = 0.5;
};

struct Paths {
  std::filesystem::path corpus = "corpus";
  std::filesystem::path prompts;
  std::filesystem::path output = "out";
  std::filesystem::path pdf_dir = "pdfs";
};

struct AppConfig {
  LlmEndpoint llm;
  MetadataEndpoint metadata;
  std::size_t concurrency = 1;
  RetryPolicy retry;
  int item_attempts = 3;
  GateSettings gate;
  MatchSettings match;
  Paths paths;
  std::string converter = "pdftotext -layout {input} -";
  std::uint64_t seed = 42;
};

/// Parses a configuration object. Relative paths resolve against `base_dir`.
/// Unknown keys and out-of-range values throw Error{ConfigError}.
AppConfig parse_config(const Json& j, const std::filesystem::path& base_dir,
                       const std::filesystem::path& default_prompts = {});

/// Reads a JSON config file; a missing path yields the defaults resolved
/// against the working directory.
AppConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::filesystem::path& default_prompts = {});

/// Effective config as JSON (secrets are never part of it).
Json describe(const AppConfig& cfg);

/// Backend selected by the config. Reads the API key from the configured
/// environment variable.
std::unique_ptr<llm::ChatBackend> make_backend(const AppConfig& cfg);

}  // namespace dsm::cli
