#pragma once

#include <string>
#include <string_view>

#include "dsm/core/serialize.hpp"

namespace dsm::llm {

enum class PayloadMode {
  bare,    // the whole reply is the document
  fenced,  // first ```json fence
  tagged,  // strictly between <OUTPUTDATA> and </OUTPUTDATA>
};

/// Pulls one JSON document out of a model reply. One lenient pass drops
/// trailing commas before giving up. Errors: NoPayloadFound, ParseError (with
/// byte offset into `text`), MultiplePayloads (tagged mode only).
Json extract_json_payload(std::string_view text, PayloadMode mode);

/// Mode used for stage replies: tagged when the tags occur, else fenced when a
/// json fence occurs, else bare.
PayloadMode detect_payload_mode(std::string_view text);
Json extract_stage_payload(std::string_view text);

/// Removes commas that directly precede `}` or `]` outside string literals.
std::string strip_trailing_commas(std::string_view text);

}  // namespace dsm::llm
