#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dsm {

// ---------------------------------------------------------------------------
// Label enumerations. Serialized with the exact snake_case spellings used by
// the extraction schema; parse_* returns nullopt for anything else.

enum class Context { primary, supporting, background };
enum class Specificity { properly_named, descriptive_but_unnamed, vague_generic };
enum class Relevance { directly_relevant, indirectly_relevant, not_relevant };
enum class SourceCorpus { one_earth, prwp, other };

std::string_view to_string(Context v);
std::string_view to_string(Specificity v);
std::string_view to_string(Relevance v);
std::string_view to_string(SourceCorpus v);

std::optional<Context> parse_context(std::string_view s);
std::optional<Specificity> parse_specificity(std::string_view s);
std::optional<Relevance> parse_relevance(std::string_view s);
std::optional<SourceCorpus> parse_source_corpus(std::string_view s);

/// 40-character lowercase hex identifier taken verbatim from the scholarly
/// index.
class DocId {
 public:
  DocId() = default;

  /// Throws Error{InvalidRecord} when `value` is not 40 lowercase hex chars.
  static DocId parse(std::string_view value);
  static bool is_valid(std::string_view value) noexcept;

  [[nodiscard]] const std::string& str() const noexcept { return value_; }
  [[nodiscard]] bool empty() const noexcept { return value_.empty(); }

  auto operator<=>(const DocId&) const = default;

 private:
  explicit DocId(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

/// (doc_id, page_number) identity of a page.
struct PageKey {
  DocId doc_id;
  int page_number = 0;
  auto operator<=>(const PageKey&) const = default;
};

struct DocumentRecord {
  DocId doc_id;
  std::string title;
  SourceCorpus source_corpus = SourceCorpus::other;
  std::optional<int> year;
  bool is_open_access = false;
  std::optional<std::string> pdf_url;
  std::optional<std::int64_t> citation_count;

  bool operator==(const DocumentRecord&) const = default;
};

struct PageRecord {
  DocId doc_id;
  int page_number = 1;
  std::string text;

  [[nodiscard]] PageKey key() const { return {doc_id, page_number}; }
  bool operator==(const PageRecord&) const = default;
};

struct DatasetMention {
  std::string raw_name;
  std::optional<std::string> harmonized_name;
  std::optional<std::string> acronym;
  std::string mentioned_in;
  std::optional<Context> context;
  std::optional<Specificity> specificity;
  std::optional<Relevance> relevance;
  std::optional<std::string> producer;
  std::optional<std::string> data_type;
  std::optional<std::string> year;

  bool operator==(const DatasetMention&) const = default;
};

struct MentionBlock {
  std::string mentioned_in;
  std::vector<DatasetMention> datasets;
  DocId source;
  int page = 1;

  bool operator==(const MentionBlock&) const = default;
};

struct JudgeVerdict {
  std::string raw_name;
  bool valid = false;
  std::string reason;
  std::optional<std::string> inferred_year;
  std::optional<std::string> inferred_producer;
  std::optional<std::string> inferred_data_type;

  bool operator==(const JudgeVerdict&) const = default;
};

/// A mention after reasoning-agent review. The validity coupling is enforced
/// at construction: an invalid assessment carries a reason and no labels, a
/// valid one carries both labels.
class AgentAssessment {
 public:
  static AgentAssessment make_valid(DatasetMention mention, Specificity specificity,
                                    Context context);
  /// Throws Error{ValidityCouplingViolation} when `reason` is empty.
  static AgentAssessment make_invalid(DatasetMention mention, std::string reason);

  [[nodiscard]] const DatasetMention& mention() const noexcept { return mention_; }
  [[nodiscard]] bool valid() const noexcept { return valid_; }
  [[nodiscard]] const std::optional<std::string>& invalid_reason() const noexcept {
    return invalid_reason_;
  }
  [[nodiscard]] std::optional<Specificity> specificity() const noexcept { return specificity_; }
  [[nodiscard]] std::optional<Context> context() const noexcept { return context_; }

  bool operator==(const AgentAssessment&) const = default;

 private:
  AgentAssessment() = default;

  DatasetMention mention_;
  bool valid_ = false;
  std::optional<std::string> invalid_reason_;
  std::optional<Specificity> specificity_;
  std::optional<Context> context_;
};

/// Optional per-name labels carried by a ground-truth record.
struct GoldLabels {
  std::optional<Context> context;
  std::optional<Specificity> specificity;
  bool operator==(const GoldLabels&) const = default;
};

struct GroundTruthRecord {
  DocId doc_id;
  int page_number = 1;
  std::vector<std::string> gold_names;
  std::map<std::string, GoldLabels> labels;

  [[nodiscard]] PageKey key() const { return {doc_id, page_number}; }
  bool operator==(const GroundTruthRecord&) const = default;
};

struct PredictionRecord {
  DocId doc_id;
  int page_number = 1;
  std::vector<std::string> predicted_names;

  [[nodiscard]] PageKey key() const { return {doc_id, page_number}; }
  bool operator==(const PredictionRecord&) const = default;
};

// Stage output records of the weak-supervision chain.

struct JudgedBlock {
  MentionBlock block;
  std::vector<JudgeVerdict> verdicts;  // order-aligned with block.datasets
  bool operator==(const JudgedBlock&) const = default;
};

struct AssessedBlock {
  DocId source;
  int page = 1;
  std::string mentioned_in;
  std::vector<AgentAssessment> assessments;
  bool operator==(const AssessedBlock&) const = default;
};

}  // namespace dsm
