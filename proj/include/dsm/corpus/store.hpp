#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "dsm/core/types.hpp"

namespace dsm::corpus {

struct IngestSummary {
  std::size_t added = 0;
  std::size_t skipped = 0;
  bool operator==(const IngestSummary&) const = default;
};

/// Directory-backed corpus: `documents.jsonl` and `pages.jsonl`, both
/// append-only, plus an in-memory index rebuilt on open. Single writer.
class CorpusStore {
 public:
  explicit CorpusStore(std::filesystem::path root);

  /// Adds pages not yet present. The whole batch is validated before anything
  /// is written; a bad record raises Error{InvalidRecord} and writes nothing.
  IngestSummary ingest_pages(std::span<const PageRecord> pages);

  /// Returns false when a document with the same doc_id is already stored.
  bool add_document(const DocumentRecord& doc);

  /// Pages sorted by (doc_id, page_number).
  [[nodiscard]] std::vector<PageRecord> pages() const;
  [[nodiscard]] std::vector<DocumentRecord> documents() const;
  [[nodiscard]] std::optional<DocumentRecord> document(const DocId& id) const;
  [[nodiscard]] std::size_t page_count() const noexcept { return pages_.size(); }
  [[nodiscard]] bool contains(const PageKey& key) const { return pages_.contains(key); }

  [[nodiscard]] const std::filesystem::path& root() const noexcept { return root_; }
  [[nodiscard]] std::filesystem::path pages_file() const { return root_ / "pages.jsonl"; }
  [[nodiscard]] std::filesystem::path documents_file() const { return root_ / "documents.jsonl"; }

 private:
  std::filesystem::path root_;
  std::map<PageKey, PageRecord> pages_;
  std::map<DocId, DocumentRecord> documents_;
};

}  // namespace dsm::corpus
