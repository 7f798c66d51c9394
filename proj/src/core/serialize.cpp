#include "dsm/core/serialize.hpp"

#include <array>
#include <algorithm>
#include <initializer_list>
#include <string_view>

#include "dsm/core/error.hpp"

namespace dsm {

namespace {

bool is_absent(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return true;
  return it->is_string() && it->get_ref<const std::string&>() == "None";
}

void require_object(const Json& j, std::string_view what) {
  if (!j.is_object()) {
    throw Error(ErrorCode::InvalidRecord, std::string(what) + " must be an object");
  }
}

std::string require_text(const Json& obj, const char* key, std::string_view what) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw Error(ErrorCode::MissingField, std::string(what) + "." + key);
  }
  if (!it->is_string()) {
    throw Error(ErrorCode::InvalidRecord, std::string(what) + "." + key + " must be text");
  }
  return it->get<std::string>();
}

bool require_bool(const Json& obj, const char* key, std::string_view what) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw Error(ErrorCode::MissingField, std::string(what) + "." + key);
  }
  if (it->is_boolean()) return it->get<bool>();
  if (it->is_string()) {
    const auto& s = it->get_ref<const std::string&>();
    if (s == "true" || s == "True") return true;
    if (s == "false" || s == "False") return false;
  }
  throw Error(ErrorCode::InvalidRecord, std::string(what) + "." + key + " must be boolean");
}

int require_page(const Json& obj, const char* key, std::string_view what) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw Error(ErrorCode::MissingField, std::string(what) + "." + key);
  }
  if (!it->is_number_integer()) {
    throw Error(ErrorCode::InvalidRecord, std::string(what) + "." + key + " must be an integer");
  }
  const auto page = it->get<std::int64_t>();
  if (page < 1 || page > 1'000'000) {
    throw Error(ErrorCode::InvalidRecord,
                std::string(what) + "." + key + " must be >= 1, got " + std::to_string(page));
  }
  return static_cast<int>(page);
}

DocId require_doc_id(const Json& obj, const char* key, std::string_view what) {
  return DocId::parse(require_text(obj, key, what));
}

template <class E, class Parser>
std::optional<E> optional_enum(const Json& obj, const char* key, Parser parse,
                               std::string_view what) {
  if (is_absent(obj, key)) return std::nullopt;
  const auto& v = obj.at(key);
  if (!v.is_string()) {
    throw Error(ErrorCode::BadEnum, std::string(what) + "." + key + " must be text");
  }
  auto parsed = parse(v.get_ref<const std::string&>());
  if (!parsed) {
    throw Error(ErrorCode::BadEnum, std::string(what) + "." + key + ": unknown value '" +
                                        v.get<std::string>() + "'");
  }
  return parsed;
}

template <class Keys>
void note_unknown_in(const Json& obj, const Keys& known, std::string_view what,
                     Warnings* warnings) {
  if (warnings == nullptr) return;
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      warnings->push_back("unknown field " + std::string(what) + "." + key);
    }
  }
}

void note_unknown(const Json& obj, std::initializer_list<std::string_view> known,
                  std::string_view what, Warnings* warnings) {
  note_unknown_in(obj, known, what, warnings);
}

template <class T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <class E>
void put_enum(Json& j, const char* key, const std::optional<E>& v) {
  if (v) j[key] = std::string(to_string(*v));
}

template <class E>
Json enum_or_null(const std::optional<E>& v) {
  return v ? Json(std::string(to_string(*v))) : Json(nullptr);
}

constexpr std::array<std::string_view, 10> kMentionKeys = {
    "raw_name", "harmonized_name", "acronym",  "mentioned_in", "context",
    "specificity", "relevance",    "producer", "data_type",    "year"};

DatasetMention decode_mention(const Json& j, const std::string* inherited_sentence,
                              Warnings* warnings) {
  require_object(j, "dataset");
  DatasetMention m;
  m.raw_name = require_text(j, "raw_name", "dataset");
  if (m.raw_name.empty()) throw Error(ErrorCode::InvalidRecord, "dataset.raw_name empty");
  if (inherited_sentence != nullptr && is_absent(j, "mentioned_in")) {
    m.mentioned_in = *inherited_sentence;
  } else {
    m.mentioned_in = require_text(j, "mentioned_in", "dataset");
  }
  m.harmonized_name = optional_text(j, "harmonized_name");
  m.acronym = optional_text(j, "acronym");
  m.context = optional_enum<Context>(j, "context", parse_context, "dataset");
  m.specificity = optional_enum<Specificity>(j, "specificity", parse_specificity, "dataset");
  m.relevance = optional_enum<Relevance>(j, "relevance", parse_relevance, "dataset");
  m.producer = optional_text(j, "producer");
  m.data_type = optional_text(j, "data_type");
  m.year = optional_text(j, "year");
  note_unknown_in(j, kMentionKeys, "dataset", warnings);
  return m;
}

}  // namespace

std::optional<std::string> optional_text(const Json& obj, const char* key) {
  if (is_absent(obj, key)) return std::nullopt;
  const auto& v = obj.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw Error(ErrorCode::InvalidRecord, std::string(key) + " must be text");
}

std::string canonical_dump(const Json& j) {
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

// ---------------------------------------------------------------------------
// encode

Json encode(const DocumentRecord& v) {
  Json j{{"doc_id", v.doc_id.str()},
         {"title", v.title},
         {"source_corpus", std::string(to_string(v.source_corpus))},
         {"is_open_access", v.is_open_access}};
  put_optional(j, "year", v.year);
  put_optional(j, "pdf_url", v.pdf_url);
  put_optional(j, "citation_count", v.citation_count);
  return j;
}

Json encode(const PageRecord& v) {
  return Json{{"doc_id", v.doc_id.str()}, {"page_number", v.page_number}, {"text", v.text}};
}

Json encode(const DatasetMention& v) {
  Json j{{"raw_name", v.raw_name}, {"mentioned_in", v.mentioned_in}};
  put_optional(j, "harmonized_name", v.harmonized_name);
  put_optional(j, "acronym", v.acronym);
  put_enum(j, "context", v.context);
  put_enum(j, "specificity", v.specificity);
  put_enum(j, "relevance", v.relevance);
  put_optional(j, "producer", v.producer);
  put_optional(j, "data_type", v.data_type);
  put_optional(j, "year", v.year);
  return j;
}

Json encode(const MentionBlock& v) {
  Json datasets = Json::array();
  for (const auto& m : v.datasets) datasets.push_back(encode(m));
  return Json{{"mentioned_in", v.mentioned_in},
              {"datasets", std::move(datasets)},
              {"source", v.source.str()},
              {"page", v.page}};
}

Json encode(const JudgeVerdict& v) {
  Json j{{"raw_name", v.raw_name}, {"valid", v.valid}, {"reason", v.reason}};
  put_optional(j, "inferred_year", v.inferred_year);
  put_optional(j, "inferred_producer", v.inferred_producer);
  put_optional(j, "inferred_data_type", v.inferred_data_type);
  return j;
}

Json encode(const AgentAssessment& v) {
  Json j{{"mention", encode(v.mention())},
         {"valid", v.valid()},
         {"specificity", enum_or_null(v.specificity())},
         {"context", enum_or_null(v.context())}};
  put_optional(j, "invalid_reason", v.invalid_reason());
  return j;
}

Json encode(const GroundTruthRecord& v) {
  Json j{{"doc_id", v.doc_id.str()}, {"page_number", v.page_number}, {"gold_names", v.gold_names}};
  if (!v.labels.empty()) {
    Json labels = Json::object();
    for (const auto& [name, l] : v.labels) {
      Json entry = Json::object();
      put_enum(entry, "context", l.context);
      put_enum(entry, "specificity", l.specificity);
      labels[name] = std::move(entry);
    }
    j["labels"] = std::move(labels);
  }
  return j;
}

Json encode(const PredictionRecord& v) {
  return Json{{"doc_id", v.doc_id.str()},
              {"page_number", v.page_number},
              {"predicted_names", v.predicted_names}};
}

Json encode(const JudgedBlock& v) {
  Json j = encode(v.block);
  Json verdicts = Json::array();
  for (const auto& verdict : v.verdicts) verdicts.push_back(encode(verdict));
  j["verdicts"] = std::move(verdicts);
  return j;
}

Json encode(const AssessedBlock& v) {
  Json assessments = Json::array();
  for (const auto& a : v.assessments) assessments.push_back(encode(a));
  return Json{{"source", v.source.str()},
              {"page", v.page},
              {"mentioned_in", v.mentioned_in},
              {"assessments", std::move(assessments)}};
}

// ---------------------------------------------------------------------------
// decode

template <>
DocumentRecord decode<DocumentRecord>(const Json& j, Warnings* warnings) {
  require_object(j, "document");
  DocumentRecord d;
  d.doc_id = require_doc_id(j, "doc_id", "document");
  d.title = require_text(j, "title", "document");
  if (d.title.empty()) throw Error(ErrorCode::InvalidRecord, "document.title empty");
  auto corpus = optional_enum<SourceCorpus>(j, "source_corpus", parse_source_corpus, "document");
  d.source_corpus = corpus.value_or(SourceCorpus::other);
  if (!is_absent(j, "year")) {
    if (!j.at("year").is_number_integer()) {
      throw Error(ErrorCode::InvalidRecord, "document.year must be an integer");
    }
    d.year = j.at("year").get<int>();
  }
  d.is_open_access = j.contains("is_open_access") && require_bool(j, "is_open_access", "document");
  d.pdf_url = optional_text(j, "pdf_url");
  if (!is_absent(j, "citation_count")) {
    const auto& c = j.at("citation_count");
    if (!c.is_number_integer() || c.get<std::int64_t>() < 0) {
      throw Error(ErrorCode::InvalidRecord, "document.citation_count must be a non-negative integer");
    }
    d.citation_count = c.get<std::int64_t>();
  }
  note_unknown(j,
               {"doc_id", "title", "source_corpus", "year", "is_open_access", "pdf_url",
                "citation_count"},
               "document", warnings);
  return d;
}

template <>
PageRecord decode<PageRecord>(const Json& j, Warnings* warnings) {
  require_object(j, "page");
  PageRecord p;
  p.doc_id = require_doc_id(j, "doc_id", "page");
  p.page_number = require_page(j, "page_number", "page");
  p.text = require_text(j, "text", "page");
  note_unknown(j, {"doc_id", "page_number", "text"}, "page", warnings);
  return p;
}

template <>
DatasetMention decode<DatasetMention>(const Json& j, Warnings* warnings) {
  return decode_mention(j, nullptr, warnings);
}

MentionBlock parse_mention_block(const Json& payload, Warnings* warnings) {
  require_object(payload, "block");
  MentionBlock b;
  b.mentioned_in = require_text(payload, "mentioned_in", "block");
  auto it = payload.find("datasets");
  if (it == payload.end() || it->is_null()) throw Error(ErrorCode::MissingField, "block.datasets");
  if (!it->is_array()) throw Error(ErrorCode::InvalidRecord, "block.datasets must be a list");
  for (const auto& d : *it) b.datasets.push_back(decode_mention(d, &b.mentioned_in, warnings));
  b.source = require_doc_id(payload, "source", "block");
  b.page = require_page(payload, "page", "block");
  note_unknown(payload, {"mentioned_in", "datasets", "source", "page", "verdicts"}, "block",
               warnings);
  return b;
}

template <>
MentionBlock decode<MentionBlock>(const Json& j, Warnings* warnings) {
  return parse_mention_block(j, warnings);
}

template <>
JudgeVerdict decode<JudgeVerdict>(const Json& j, Warnings* warnings) {
  require_object(j, "verdict");
  JudgeVerdict v;
  v.raw_name = require_text(j, "raw_name", "verdict");
  v.valid = require_bool(j, "valid", "verdict");
  v.reason = require_text(j, "reason", "verdict");
  if (v.reason.empty()) throw Error(ErrorCode::InvalidRecord, "verdict.reason empty");
  v.inferred_year = optional_text(j, "inferred_year");
  v.inferred_producer = optional_text(j, "inferred_producer");
  v.inferred_data_type = optional_text(j, "inferred_data_type");
  note_unknown(j,
               {"raw_name", "valid", "reason", "inferred_year", "inferred_producer",
                "inferred_data_type"},
               "verdict", warnings);
  return v;
}

template <>
AgentAssessment decode<AgentAssessment>(const Json& j, Warnings* warnings) {
  require_object(j, "assessment");
  auto mention_it = j.find("mention");
  if (mention_it == j.end()) throw Error(ErrorCode::MissingField, "assessment.mention");
  DatasetMention mention = decode_mention(*mention_it, nullptr, warnings);
  const bool valid = require_bool(j, "valid", "assessment");
  auto specificity =
      optional_enum<Specificity>(j, "specificity", parse_specificity, "assessment");
  auto context = optional_enum<Context>(j, "context", parse_context, "assessment");
  note_unknown(j, {"mention", "valid", "invalid_reason", "specificity", "context"}, "assessment",
               warnings);
  if (valid) {
    if (!specificity || !context) {
      throw Error(ErrorCode::ValidityCouplingViolation, "valid assessment without labels");
    }
    return AgentAssessment::make_valid(std::move(mention), *specificity, *context);
  }
  if (specificity || context) {
    throw Error(ErrorCode::ValidityCouplingViolation, "invalid assessment carries labels");
  }
  return AgentAssessment::make_invalid(std::move(mention),
                                       optional_text(j, "invalid_reason").value_or(""));
}

template <>
GroundTruthRecord decode<GroundTruthRecord>(const Json& j, Warnings* warnings) {
  require_object(j, "ground_truth");
  GroundTruthRecord g;
  g.doc_id = require_doc_id(j, "doc_id", "ground_truth");
  g.page_number = require_page(j, "page_number", "ground_truth");
  auto names = j.find("gold_names");
  if (names == j.end()) throw Error(ErrorCode::MissingField, "ground_truth.gold_names");
  if (!names->is_array()) throw Error(ErrorCode::InvalidRecord, "gold_names must be a list");
  for (const auto& n : *names) {
    if (!n.is_string()) throw Error(ErrorCode::InvalidRecord, "gold_names entries must be text");
    g.gold_names.push_back(n.get<std::string>());
  }
  if (auto labels = j.find("labels"); labels != j.end() && labels->is_object()) {
    for (const auto& [name, entry] : labels->items()) {
      GoldLabels l;
      l.context = optional_enum<Context>(entry, "context", parse_context, "labels");
      l.specificity = optional_enum<Specificity>(entry, "specificity", parse_specificity, "labels");
      g.labels.emplace(name, l);
    }
  }
  note_unknown(j, {"doc_id", "page_number", "gold_names", "labels"}, "ground_truth", warnings);
  return g;
}

template <>
PredictionRecord decode<PredictionRecord>(const Json& j, Warnings* warnings) {
  require_object(j, "prediction");
  PredictionRecord p;
  p.doc_id = require_doc_id(j, "doc_id", "prediction");
  p.page_number = require_page(j, "page_number", "prediction");
  auto names = j.find("predicted_names");
  if (names == j.end()) throw Error(ErrorCode::MissingField, "prediction.predicted_names");
  if (!names->is_array()) throw Error(ErrorCode::InvalidRecord, "predicted_names must be a list");
  for (const auto& n : *names) {
    if (!n.is_string()) throw Error(ErrorCode::InvalidRecord, "predicted_names entries must be text");
    p.predicted_names.push_back(n.get<std::string>());
  }
  note_unknown(j, {"doc_id", "page_number", "predicted_names"}, "prediction", warnings);
  return p;
}

template <>
JudgedBlock decode<JudgedBlock>(const Json& j, Warnings* warnings) {
  JudgedBlock jb;
  jb.block = parse_mention_block(j, warnings);
  auto verdicts = j.find("verdicts");
  if (verdicts == j.end()) throw Error(ErrorCode::MissingField, "judged.verdicts");
  if (!verdicts->is_array()) throw Error(ErrorCode::InvalidRecord, "judged.verdicts must be a list");
  for (const auto& v : *verdicts) jb.verdicts.push_back(decode<JudgeVerdict>(v, warnings));
  if (jb.verdicts.size() != jb.block.datasets.size()) {
    throw Error(ErrorCode::ArityMismatch, "judged block verdict count differs from dataset count");
  }
  return jb;
}

template <>
AssessedBlock decode<AssessedBlock>(const Json& j, Warnings* warnings) {
  require_object(j, "assessed");
  AssessedBlock ab;
  ab.source = require_doc_id(j, "source", "assessed");
  ab.page = require_page(j, "page", "assessed");
  ab.mentioned_in = require_text(j, "mentioned_in", "assessed");
  auto list = j.find("assessments");
  if (list == j.end()) throw Error(ErrorCode::MissingField, "assessed.assessments");
  if (!list->is_array()) throw Error(ErrorCode::InvalidRecord, "assessments must be a list");
  for (const auto& a : *list) ab.assessments.push_back(decode<AgentAssessment>(a, warnings));
  note_unknown(j, {"source", "page", "mentioned_in", "assessments"}, "assessed", warnings);
  return ab;
}

// ---------------------------------------------------------------------------
// validation

std::vector<Violation> validate_mention(const Json& raw) {
  std::vector<Violation> out;
  if (!raw.is_object()) {
    out.push_back({"", "mention is not an object"});
    return out;
  }
  auto raw_name = raw.find("raw_name");
  if (raw_name == raw.end() || raw_name->is_null()) {
    out.push_back({"raw_name", "raw_name empty"});
  } else if (!raw_name->is_string()) {
    out.push_back({"raw_name", "raw_name is not text"});
  } else if (raw_name->get_ref<const std::string&>().empty()) {
    out.push_back({"raw_name", "raw_name empty"});
  }

  auto check_enum = [&](const char* key, auto parse) {
    if (is_absent(raw, key)) return;
    const auto& v = raw.at(key);
    if (!v.is_string() || !parse(v.get_ref<const std::string&>())) {
      out.push_back({key, std::string("unknown ") + key + " value"});
    }
  };
  check_enum("context", parse_context);
  check_enum("specificity", parse_specificity);
  check_enum("relevance", parse_relevance);
  return out;
}

std::vector<Violation> validate_mention(const DatasetMention& m) {
  std::vector<Violation> out;
  if (m.raw_name.empty()) out.push_back({"raw_name", "raw_name empty"});
  return out;
}

}  // namespace dsm
