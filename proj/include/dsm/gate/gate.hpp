#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsm/core/serialize.hpp"
#include "dsm/core/types.hpp"

namespace dsm::gate {

/// Page-level mention-presence scorer. Implementations are stateless and
/// shareable across threads.
class PageGate {
 public:
  virtual ~PageGate() = default;
  /// Probability-like score in [0,1] that `text` mentions a dataset.
  [[nodiscard]] virtual double score_page(std::string_view text) const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

class AlwaysPassGate final : public PageGate {
 public:
  [[nodiscard]] double score_page(std::string_view) const override { return 1.0; }
  [[nodiscard]] std::string name() const override { return "always_pass"; }
};

/// 1.0 when any trigger term occurs as a whole-word sequence (case-insensitive),
/// else 0.0.
class KeywordGate final : public PageGate {
 public:
  explicit KeywordGate(std::vector<std::string> triggers);
  /// One trigger per line; blank lines and `#` comments ignored.
  static KeywordGate from_file(const std::filesystem::path& path);

  [[nodiscard]] double score_page(std::string_view text) const override;
  [[nodiscard]] std::string name() const override { return "keyword_heuristic"; }
  [[nodiscard]] const std::vector<std::string>& triggers() const noexcept { return triggers_; }

 private:
  std::vector<std::string> triggers_;
  std::vector<std::vector<std::string>> trigger_words_;
};

/// Terms shipped in config/gate_triggers.txt.
std::vector<std::string> default_triggers();

/// POSTs the page text (text/plain) and reads one score back: a bare number,
/// `[x]`, `{"score": x}` or `{"scores": [x]}`. Errors: NetworkError /
/// Timeout, MalformedScore.
class RemoteGate final : public PageGate {
 public:
  explicit RemoteGate(std::string url, std::chrono::milliseconds timeout = std::chrono::seconds(30))
      : url_(std::move(url)), timeout_(timeout) {}

  [[nodiscard]] double score_page(std::string_view text) const override;
  [[nodiscard]] std::string name() const override { return "remote_endpoint"; }

  /// Interprets a response body; exposed for tests.
  static double parse_score(std::string_view body);

 private:
  std::string url_;
  std::chrono::milliseconds timeout_;
};

struct GateDecision {
  DocId doc_id;
  int page_number = 1;
  double score = 0.0;
  double threshold = 0.5;
  bool passed = false;
  /// Set when the gate failed and the page was passed through (fail-open).
  std::optional<std::string> error;
  bool operator==(const GateDecision&) const = default;
};

Json encode(const GateDecision& d);
GateDecision decode_decision(const Json& j);

struct FilterResult {
  std::vector<PageRecord> passed;
  std::vector<GateDecision> decisions;  // one per input page, input order
};

/// Scores every page; passed = score >= threshold. A gate error passes the
/// page with score 1.0 and the error recorded. `width` bounds in-flight
/// scoring calls. Throws Error{InvalidSpec} for threshold outside [0,1].
FilterResult filter_pages(std::span<const PageRecord> pages, const PageGate& gate,
                          double threshold = 0.5, std::size_t width = 1);

struct GateMetrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Binary P/R/F1 on the has-mention class. Every decision needs a label in
/// `gold` (Error{MissingLabel}).
GateMetrics evaluate_gate(std::span<const GateDecision> decisions,
                          const std::map<PageKey, bool>& gold);

/// Builds the gate named by `kind` (always_pass | keyword_heuristic |
/// remote_endpoint). Throws Error{ConfigError}.
std::unique_ptr<PageGate> make_gate(std::string_view kind, const std::filesystem::path& triggers_file,
                                    const std::string& endpoint);

}  // namespace dsm::gate
