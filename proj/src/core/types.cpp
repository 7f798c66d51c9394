#include "dsm/core/types.hpp"

#include <array>
#include <utility>

#include "dsm/core/error.hpp"

namespace dsm {

namespace {

template <class E, std::size_t N>
std::optional<E> lookup(std::string_view s,
                        const std::array<std::pair<std::string_view, E>, N>& table) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

template <class E, std::size_t N>
std::string_view name_of(E v, const std::array<std::pair<std::string_view, E>, N>& table) {
  for (const auto& [name, value] : table) {
    if (value == v) return name;
  }
  return "?";
}

constexpr std::array<std::pair<std::string_view, Context>, 3> kContexts{{
    {"primary", Context::primary},
    {"supporting", Context::supporting},
    {"background", Context::background},
}};

constexpr std::array<std::pair<std::string_view, Specificity>, 3> kSpecificities{{
    {"properly_named", Specificity::properly_named},
    {"descriptive_but_unnamed", Specificity::descriptive_but_unnamed},
    {"vague_generic", Specificity::vague_generic},
}};

constexpr std::array<std::pair<std::string_view, Relevance>, 3> kRelevances{{
    {"directly_relevant", Relevance::directly_relevant},
    {"indirectly_relevant", Relevance::indirectly_relevant},
    {"not_relevant", Relevance::not_relevant},
}};

constexpr std::array<std::pair<std::string_view, SourceCorpus>, 3> kCorpora{{
    {"one_earth", SourceCorpus::one_earth},
    {"prwp", SourceCorpus::prwp},
    {"other", SourceCorpus::other},
}};

}  // namespace

std::string_view to_string(Context v) { return name_of(v, kContexts); }
std::string_view to_string(Specificity v) { return name_of(v, kSpecificities); }
std::string_view to_string(Relevance v) { return name_of(v, kRelevances); }
std::string_view to_string(SourceCorpus v) { return name_of(v, kCorpora); }

std::optional<Context> parse_context(std::string_view s) { return lookup(s, kContexts); }
std::optional<Specificity> parse_specificity(std::string_view s) {
  return lookup(s, kSpecificities);
}
std::optional<Relevance> parse_relevance(std::string_view s) { return lookup(s, kRelevances); }
std::optional<SourceCorpus> parse_source_corpus(std::string_view s) {
  return lookup(s, kCorpora);
}

bool DocId::is_valid(std::string_view value) noexcept {
  if (value.size() != 40) return false;
  for (char c : value) {
    const bool hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!hex) return false;
  }
  return true;
}

DocId DocId::parse(std::string_view value) {
  if (!is_valid(value)) {
    throw Error(ErrorCode::InvalidRecord,
                "doc_id must be 40 lowercase hex characters, got '" + std::string(value) + "'");
  }
  return DocId(std::string(value));
}

AgentAssessment AgentAssessment::make_valid(DatasetMention mention, Specificity specificity,
                                            Context context) {
  AgentAssessment a;
  a.mention_ = std::move(mention);
  a.valid_ = true;
  a.specificity_ = specificity;
  a.context_ = context;
  return a;
}

AgentAssessment AgentAssessment::make_invalid(DatasetMention mention, std::string reason) {
  if (reason.empty()) {
    throw Error(ErrorCode::ValidityCouplingViolation, "invalid assessment needs a reason");
  }
  AgentAssessment a;
  a.mention_ = std::move(mention);
  a.valid_ = false;
  a.invalid_reason_ = std::move(reason);
  return a;
}

}  // namespace dsm
