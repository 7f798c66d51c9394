#include "dsm/llm/payload.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

#include "dsm/core/error.hpp"

namespace dsm::llm {

namespace {

constexpr std::string_view kOpenTag = "<OUTPUTDATA>";
constexpr std::string_view kCloseTag = "</OUTPUTDATA>";
constexpr std::string_view kFence = "```";

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

/// [begin, end) of `text` with surrounding whitespace removed.
std::pair<std::size_t, std::size_t> trim(std::string_view text, std::size_t begin,
                                         std::size_t end) {
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  return {begin, end};
}

bool starts_with_json_label(std::string_view s) {
  if (s.size() < 4) return false;
  std::string label(s.substr(0, 4));
  std::transform(label.begin(), label.end(), label.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return label == "json";
}

std::size_t find_json_fence(std::string_view text, std::size_t from = 0) {
  for (auto pos = text.find(kFence, from); pos != std::string_view::npos;
       pos = text.find(kFence, pos + kFence.size())) {
    if (starts_with_json_label(text.substr(pos + kFence.size()))) return pos;
  }
  return std::string_view::npos;
}

Json parse_at(std::string_view text, std::size_t begin, std::size_t end) {
  auto [b, e] = trim(text, begin, end);
  if (b == e) throw Error(ErrorCode::NoPayloadFound, "empty payload");
  const std::string_view doc = text.substr(b, e - b);
  try {
    return Json::parse(doc);
  } catch (const Json::parse_error& first) {
    try {
      return Json::parse(strip_trailing_commas(doc));
    } catch (const Json::parse_error&) {
      const std::size_t at = b + (first.byte > 0 ? first.byte - 1 : 0);
      throw Error(ErrorCode::ParseError, std::string("payload at byte ") + std::to_string(at) +
                                             ": " + first.what())
          .with_offset(at);
    }
  }
}

/// Body of a fence opened at `open` (pointing at the backticks). A string
/// value may itself contain backticks, so later closing fences are tried when
/// the first one does not end a valid document.
Json parse_fence(std::string_view text, std::size_t open, std::size_t limit) {
  std::size_t body = open + kFence.size();
  if (starts_with_json_label(text.substr(body))) body += 4;
  std::vector<std::size_t> closes;
  for (auto c = text.find(kFence, body); c != std::string_view::npos && c < limit;
       c = text.find(kFence, c + kFence.size())) {
    closes.push_back(c);
  }
  if (closes.empty()) closes.push_back(limit);
  for (std::size_t i = 1; i < closes.size(); ++i) {
    try {
      return parse_at(text, body, closes[i - 1]);
    } catch (const Error&) {
    }
  }
  return parse_at(text, body, closes.back());
}

}  // namespace

std::string strip_trailing_commas(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      out.push_back(c);
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out.push_back(c);
      continue;
    }
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < text.size() && is_space(text[j])) ++j;
      if (j < text.size() && (text[j] == '}' || text[j] == ']')) continue;
    }
    out.push_back(c);
  }
  return out;
}

Json extract_json_payload(std::string_view text, PayloadMode mode) {
  switch (mode) {
    case PayloadMode::bare:
      return parse_at(text, 0, text.size());

    case PayloadMode::fenced: {
      const auto open = find_json_fence(text);
      if (open == std::string_view::npos) {
        throw Error(ErrorCode::NoPayloadFound, "no ```json fence");
      }
      return parse_fence(text, open, text.size());
    }

    case PayloadMode::tagged: {
      const auto open = text.find(kOpenTag);
      if (open == std::string_view::npos) {
        throw Error(ErrorCode::NoPayloadFound, "no <OUTPUTDATA> tag");
      }
      if (text.find(kOpenTag, open + kOpenTag.size()) != std::string_view::npos) {
        throw Error(ErrorCode::MultiplePayloads, "more than one <OUTPUTDATA> tag pair");
      }
      const auto body = open + kOpenTag.size();
      const auto close = text.find(kCloseTag, body);
      if (close == std::string_view::npos) {
        throw Error(ErrorCode::NoPayloadFound, "unterminated <OUTPUTDATA> tag");
      }
      auto [b, e] = trim(text, body, close);
      if (text.substr(b, e - b).starts_with(kFence)) return parse_fence(text, b, e);
      return parse_at(text, b, e);
    }
  }
  throw Error(ErrorCode::NoPayloadFound, "unknown payload mode");
}

PayloadMode detect_payload_mode(std::string_view text) {
  if (text.find(kOpenTag) != std::string_view::npos) return PayloadMode::tagged;
  if (find_json_fence(text) != std::string_view::npos) return PayloadMode::fenced;
  return PayloadMode::bare;
}

Json extract_stage_payload(std::string_view text) {
  return extract_json_payload(text, detect_payload_mode(text));
}

}  // namespace dsm::llm
