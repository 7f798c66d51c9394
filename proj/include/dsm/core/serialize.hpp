#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "dsm/core/types.hpp"

namespace dsm {

using Json = nlohmann::json;

/// Non-fatal findings while decoding (unknown fields, repaired values).
using Warnings = std::vector<std::string>;

// Canonical encoding: snake_case field names, absent optionals omitted.
Json encode(const DocumentRecord& v);
Json encode(const PageRecord& v);
Json encode(const DatasetMention& v);
Json encode(const MentionBlock& v);
Json encode(const JudgeVerdict& v);
Json encode(const AgentAssessment& v);
Json encode(const GroundTruthRecord& v);
Json encode(const PredictionRecord& v);
Json encode(const JudgedBlock& v);
Json encode(const AssessedBlock& v);

/// Decodes a canonical record. Missing required fields raise
/// Error{MissingField}, bad label strings Error{BadEnum}, other shape problems
/// Error{InvalidRecord}. Unknown keys are reported through `warnings`.
template <class T>
T decode(const Json& j, Warnings* warnings = nullptr);

template <> DocumentRecord decode<DocumentRecord>(const Json&, Warnings*);
template <> PageRecord decode<PageRecord>(const Json&, Warnings*);
template <> DatasetMention decode<DatasetMention>(const Json&, Warnings*);
template <> MentionBlock decode<MentionBlock>(const Json&, Warnings*);
template <> JudgeVerdict decode<JudgeVerdict>(const Json&, Warnings*);
template <> AgentAssessment decode<AgentAssessment>(const Json&, Warnings*);
template <> GroundTruthRecord decode<GroundTruthRecord>(const Json&, Warnings*);
template <> PredictionRecord decode<PredictionRecord>(const Json&, Warnings*);
template <> JudgedBlock decode<JudgedBlock>(const Json&, Warnings*);
template <> AssessedBlock decode<AssessedBlock>(const Json&, Warnings*);

/// Parses a mention block as it appears in stage payloads. Dataset entries may
/// omit `mentioned_in`; they inherit the block sentence.
MentionBlock parse_mention_block(const Json& payload, Warnings* warnings = nullptr);

/// One violated invariant of a raw mention object.
struct Violation {
  std::string field;
  std::string message;
  bool operator==(const Violation&) const = default;
};

/// Total check of a raw (untyped) mention: empty raw_name, enum fields outside
/// their value sets, wrong value types. Empty result means ok.
std::vector<Violation> validate_mention(const Json& raw);
std::vector<Violation> validate_mention(const DatasetMention& m);

/// Compact single-line dump with sorted keys. Invalid UTF-8 is replaced.
std::string canonical_dump(const Json& j);

/// Reads an optional text field: absent, null and the literal "None" all map
/// to nullopt.
std::optional<std::string> optional_text(const Json& obj, const char* key);

}  // namespace dsm
