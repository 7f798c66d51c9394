#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "dsm/core/serialize.hpp"
#include "dsm/core/types.hpp"

namespace dsm::dataset {

enum class AnnotationFormat { canonical, doccano_export };

/// Throws Error{UnknownFormat}.
AnnotationFormat parse_annotation_format(std::string_view name);

struct AnnotationImport {
  std::vector<GroundTruthRecord> records;
  Warnings warnings;
};

/// Reads ground truth. `doccano_export` lines hold the page `text`, its
/// `doc_id` / `page_number` (top level or under `meta`/`metadata`) and labeled
/// spans as `[start, end, label]` triples or `{start_offset, end_offset,
/// label}` objects under `label`, `labels` or `entities`. Offsets count
/// Unicode code points. Span labels naming a context or specificity value are
/// kept as per-name labels. Names that normalize to the same tokens collapse
/// into the first one, with a warning.
AnnotationImport import_annotations(const std::filesystem::path& file, AnnotationFormat format);

/// Maps one doccano record onto a GroundTruthRecord (without deduplication).
GroundTruthRecord from_doccano(const Json& record, Warnings* warnings = nullptr);

/// Collapses duplicate gold names after token normalization.
void dedupe_gold_names(GroundTruthRecord& record, Warnings* warnings);

/// Byte offset of the `cp`-th code point of a UTF-8 string (size() when past
/// the end).
std::size_t utf8_byte_offset(std::string_view text, std::size_t cp);

}  // namespace dsm::dataset
