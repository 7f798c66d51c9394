#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsm/core/retry.hpp"
#include "dsm/core/types.hpp"

namespace dsm::corpus {

/// Title-match endpoint of a scholarly metadata index.
struct MetadataIndexConfig {
  std::string base_url = "https://api.semanticscholar.org";
  std::string match_path = "/graph/v1/paper/search/match";
  std::string fields = "title,year,abstract,citationCount,isOpenAccess,openAccessPdf";
  std::string api_key;  // sent as x-api-key when non-empty
  std::chrono::milliseconds timeout{30'000};
  RetryPolicy retry;    // base 1s, factor 2, 5 attempts
  Sleeper sleep = real_sleep;
};

class MetadataIndexClient {
 public:
  explicit MetadataIndexClient(MetadataIndexConfig config) : config_(std::move(config)) {}

  /// Raw JSON body of the best title match, nullopt on a well-formed no-match
  /// reply. Errors: NetworkError / Timeout after the retry budget,
  /// RateLimited (with retry-after hint), MalformedResponse.
  std::optional<std::string> match_raw(std::string_view title) const;

  [[nodiscard]] const MetadataIndexConfig& config() const noexcept { return config_; }

 private:
  MetadataIndexConfig config_;
};

/// Looks a title up and maps the best match onto a DocumentRecord (paper id,
/// year, citation count, open-access flag, PDF link). Empty titles raise
/// Error{PreconditionViolated}.
std::optional<DocumentRecord> search_paper_by_title(std::string_view title,
                                                    const MetadataIndexClient& client,
                                                    SourceCorpus corpus = SourceCorpus::other);

/// Maps one index match object onto a DocumentRecord. Exposed for tests.
DocumentRecord document_from_match(const std::string& match_json, SourceCorpus corpus);

struct StoredFile {
  std::filesystem::path path;
  std::uintmax_t size = 0;
};

struct FetchOptions {
  std::chrono::milliseconds timeout{60'000};
  RetryPolicy retry;
  Sleeper sleep = real_sleep;
};

/// Downloads doc.pdf_url to `dest/<doc_id>.pdf`. Errors: NoPdfUrl,
/// NetworkError, NonPdfContent.
StoredFile fetch_pdf(const DocumentRecord& doc, const std::filesystem::path& dest,
                     const FetchOptions& opts = {});

/// External converter command; `{input}` is replaced with the shell-quoted PDF
/// path. It must print plain text with pages separated by form feeds, e.g.
/// `pdftotext -layout {input} -`.
struct ConverterSpec {
  std::string command;
};

/// Splits converter output on form feeds into 1-based pages. Errors:
/// ConverterFailed (non-zero exit), EmptyOutput.
std::vector<PageRecord> convert_pdf_to_pages(const DocId& doc_id,
                                             const std::filesystem::path& pdf,
                                             const ConverterSpec& converter);

/// Splits form-feed delimited text into pages; a trailing form feed does not
/// start a new page.
std::vector<std::string> split_pages(std::string_view text);

}  // namespace dsm::corpus
