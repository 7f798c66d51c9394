#include "dsm/dataset/annotations.hpp"

#include <algorithm>

#include "dsm/core/error.hpp"
#include "dsm/core/jsonl.hpp"
#include "dsm/evalkit/metric.hpp"

namespace dsm::dataset {

namespace {

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;
};

const Json* find_meta(const Json& record, const char* key) {
  if (record.contains(key)) return &record[key];
  for (const char* holder : {"meta", "metadata"}) {
    if (record.contains(holder) && record[holder].is_object() && record[holder].contains(key)) {
      return &record[holder][key];
    }
  }
  return nullptr;
}

std::vector<Span> read_spans(const Json& record) {
  const Json* list = nullptr;
  for (const char* key : {"label", "labels", "entities"}) {
    if (record.contains(key) && record[key].is_array()) {
      list = &record[key];
      break;
    }
  }
  std::vector<Span> spans;
  if (list == nullptr) return spans;
  for (const auto& s : *list) {
    Span span;
    if (s.is_array() && s.size() >= 2 && s[0].is_number_integer() && s[1].is_number_integer()) {
      span.start = s[0].get<std::size_t>();
      span.end = s[1].get<std::size_t>();
      if (s.size() >= 3 && s[2].is_string()) span.label = s[2].get<std::string>();
    } else if (s.is_object() && s.contains("start_offset") && s.contains("end_offset")) {
      span.start = s["start_offset"].get<std::size_t>();
      span.end = s["end_offset"].get<std::size_t>();
      if (s.contains("label") && s["label"].is_string()) span.label = s["label"].get<std::string>();
    } else {
      throw Error(ErrorCode::ParseError, "unreadable span " + s.dump());
    }
    if (span.end < span.start) throw Error(ErrorCode::ParseError, "span end before start");
    spans.push_back(std::move(span));
  }
  return spans;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

AnnotationFormat parse_annotation_format(std::string_view name) {
  if (name == "canonical") return AnnotationFormat::canonical;
  if (name == "doccano_export" || name == "doccano") return AnnotationFormat::doccano_export;
  throw Error(ErrorCode::UnknownFormat, std::string(name));
}

std::size_t utf8_byte_offset(std::string_view text, std::size_t cp) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if ((c & 0xC0) != 0x80) {
      if (seen == cp) return i;
      ++seen;
    }
  }
  return text.size();
}

GroundTruthRecord from_doccano(const Json& record, Warnings* warnings) {
  if (!record.is_object()) throw Error(ErrorCode::ParseError, "doccano record must be an object");
  if (!record.contains("text") || !record["text"].is_string()) {
    throw Error(ErrorCode::ParseError, "doccano record without text");
  }
  const auto& text = record["text"].get_ref<const std::string&>();
  const Json* doc = find_meta(record, "doc_id");
  const Json* page = find_meta(record, "page_number");
  if (doc == nullptr || !doc->is_string()) throw Error(ErrorCode::ParseError, "doccano record without doc_id");
  if (page == nullptr || !page->is_number_integer() || page->get<int>() < 1) {
    throw Error(ErrorCode::ParseError, "doccano record without page_number");
  }

  GroundTruthRecord g;
  g.doc_id = DocId::parse(doc->get<std::string>());
  g.page_number = page->get<int>();
  for (const auto& span : read_spans(record)) {
    const auto b = utf8_byte_offset(text, span.start);
    const auto e = utf8_byte_offset(text, span.end);
    std::string name = trim(std::string_view(text).substr(b, e - b));
    if (name.empty()) {
      if (warnings) warnings->push_back("empty span in " + g.doc_id.str());
      continue;
    }
    auto [it, fresh] = g.labels.try_emplace(name);
    if (fresh) g.gold_names.push_back(name);
    if (auto c = parse_context(span.label)) it->second.context = c;
    if (auto s = parse_specificity(span.label)) it->second.specificity = s;
  }
  for (auto it = g.labels.begin(); it != g.labels.end();) {
    it = (it->second == GoldLabels{}) ? g.labels.erase(it) : std::next(it);
  }
  return g;
}

void dedupe_gold_names(GroundTruthRecord& record, Warnings* warnings) {
  std::vector<std::string> kept;
  std::vector<eval::TokenSet> seen;
  for (auto& name : record.gold_names) {
    auto tokens = eval::normalize_tokens(name);
    bool duplicate = false;
    for (const auto& s : seen) duplicate = duplicate || s == tokens;
    if (duplicate) {
      if (warnings) {
        warnings->push_back("duplicate gold name '" + name + "' in " + record.doc_id.str() +
                            " page " + std::to_string(record.page_number));
      }
      if (std::find(kept.begin(), kept.end(), name) == kept.end()) record.labels.erase(name);
      continue;
    }
    seen.push_back(std::move(tokens));
    kept.push_back(std::move(name));
  }
  record.gold_names = std::move(kept);
}

AnnotationImport import_annotations(const std::filesystem::path& file, AnnotationFormat format) {
  AnnotationImport out;
  for_each_jsonl(file, [&](const Json& j, std::size_t line) {
    try {
      GroundTruthRecord g = format == AnnotationFormat::canonical
                                ? decode<GroundTruthRecord>(j, &out.warnings)
                                : from_doccano(j, &out.warnings);
      dedupe_gold_names(g, &out.warnings);
      out.records.push_back(std::move(g));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, file.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace dsm::dataset
