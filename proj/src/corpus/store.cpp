#include "dsm/corpus/store.hpp"

#include <set>

#include "dsm/core/error.hpp"
#include "dsm/core/jsonl.hpp"

namespace dsm::corpus {

CorpusStore::CorpusStore(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw Error(ErrorCode::StoreWriteError, "cannot create " + root_.string());
  if (std::filesystem::exists(pages_file())) {
    for_each_jsonl(pages_file(), [&](const Json& j, std::size_t) {
      auto p = decode<PageRecord>(j);
      pages_.try_emplace(p.key(), std::move(p));
    });
  }
  if (std::filesystem::exists(documents_file())) {
    for_each_jsonl(documents_file(), [&](const Json& j, std::size_t) {
      auto d = decode<DocumentRecord>(j);
      documents_.try_emplace(d.doc_id, std::move(d));
    });
  }
}

IngestSummary CorpusStore::ingest_pages(std::span<const PageRecord> pages) {
  for (const auto& p : pages) {
    if (p.doc_id.empty()) throw Error(ErrorCode::InvalidRecord, "page without doc_id");
    if (p.page_number < 1) {
      throw Error(ErrorCode::InvalidRecord, "page_number must be >= 1 for " + p.doc_id.str());
    }
  }

  IngestSummary summary;
  std::vector<const PageRecord*> fresh;
  std::set<PageKey> batch;
  for (const auto& p : pages) {
    if (pages_.contains(p.key()) || !batch.insert(p.key()).second) {
      ++summary.skipped;
    } else {
      fresh.push_back(&p);
    }
  }
  if (!fresh.empty()) {
    JsonlAppender out(pages_file());
    for (const auto* p : fresh) out.append(encode(*p));
    out.flush();
    for (const auto* p : fresh) pages_.emplace(p->key(), *p);
  }
  summary.added = fresh.size();
  return summary;
}

bool CorpusStore::add_document(const DocumentRecord& doc) {
  if (documents_.contains(doc.doc_id)) return false;
  JsonlAppender out(documents_file());
  out.append(encode(doc));
  out.flush();
  documents_.emplace(doc.doc_id, doc);
  return true;
}

std::vector<PageRecord> CorpusStore::pages() const {
  std::vector<PageRecord> out;
  out.reserve(pages_.size());
  for (const auto& [_, p] : pages_) out.push_back(p);
  return out;
}

std::vector<DocumentRecord> CorpusStore::documents() const {
  std::vector<DocumentRecord> out;
  out.reserve(documents_.size());
  for (const auto& [_, d] : documents_) out.push_back(d);
  return out;
}

std::optional<DocumentRecord> CorpusStore::document(const DocId& id) const {
  auto it = documents_.find(id);
  if (it == documents_.end()) return std::nullopt;
  return it->second;
}

}  // namespace dsm::corpus
