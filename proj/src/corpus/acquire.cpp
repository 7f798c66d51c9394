#include "dsm/corpus/acquire.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <sys/wait.h>

#include "dsm/core/error.hpp"
#include "dsm/core/http.hpp"
#include "dsm/core/serialize.hpp"

namespace dsm::corpus {

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

Error rate_limited(const http::Response& r, const std::string& what) {
  Error e(ErrorCode::RateLimited, what);
  e.with_http_status(429);
  if (auto s = http::retry_after_seconds(r); s >= 0) e.with_retry_after(std::chrono::seconds(s));
  return e;
}

}  // namespace

std::optional<std::string> MetadataIndexClient::match_raw(std::string_view title) const {
  const std::string url = config_.base_url + config_.match_path +
                          "?query=" + http::url_encode(title) +
                          "&fields=" + http::url_encode(config_.fields);
  http::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("x-api-key", config_.api_key);

  return with_retry(
      config_.retry,
      [&]() -> std::optional<std::string> {
        const auto r = http::get(url, headers, {.timeout = config_.timeout});
        if (r.status == 429) throw rate_limited(r, "metadata index throttled the request");
        if (r.status >= 500) {
          throw Error(ErrorCode::NetworkError, "metadata index returned " + std::to_string(r.status))
              .with_http_status(r.status);
        }
        Json body;
        try {
          body = Json::parse(r.body);
        } catch (const Json::parse_error& e) {
          throw Error(ErrorCode::MalformedResponse, std::string("metadata body: ") + e.what())
              .with_http_status(r.status);
        }
        if (r.status == 404) {
          if (body.is_object() && body.contains("error")) return std::nullopt;
          throw Error(ErrorCode::MalformedResponse, "404 without error body").with_http_status(404);
        }
        if (r.status != 200) {
          throw Error(ErrorCode::MalformedResponse, "unexpected status " + std::to_string(r.status))
              .with_http_status(r.status);
        }
        if (!body.is_object() || !body.contains("data") || !body["data"].is_array()) {
          throw Error(ErrorCode::MalformedResponse, "match reply without data list");
        }
        if (body["data"].empty()) return std::nullopt;
        return body["data"][0].dump();
      },
      nullptr, config_.sleep);
}

DocumentRecord document_from_match(const std::string& match_json, SourceCorpus corpus) {
  Json m;
  try {
    m = Json::parse(match_json);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::MalformedResponse, e.what());
  }
  if (!m.is_object() || !m.contains("paperId") || !m["paperId"].is_string()) {
    throw Error(ErrorCode::MalformedResponse, "match without paperId");
  }
  const auto id = m["paperId"].get<std::string>();
  if (!DocId::is_valid(id)) throw Error(ErrorCode::MalformedResponse, "bad paperId " + id);

  DocumentRecord d;
  d.doc_id = DocId::parse(id);
  d.title = m.value("title", std::string{});
  if (d.title.empty()) throw Error(ErrorCode::MalformedResponse, "match without title");
  d.source_corpus = corpus;
  if (m.contains("year") && m["year"].is_number_integer()) d.year = m["year"].get<int>();
  if (m.contains("citationCount") && m["citationCount"].is_number_integer() &&
      m["citationCount"].get<std::int64_t>() >= 0) {
    d.citation_count = m["citationCount"].get<std::int64_t>();
  }
  d.is_open_access = m.value("isOpenAccess", false);
  if (auto pdf = m.find("openAccessPdf"); pdf != m.end() && pdf->is_object()) {
    if (auto url = pdf->find("url"); url != pdf->end() && url->is_string() &&
                                      !url->get_ref<const std::string&>().empty()) {
      d.pdf_url = url->get<std::string>();
    }
  }
  return d;
}

std::optional<DocumentRecord> search_paper_by_title(std::string_view title,
                                                    const MetadataIndexClient& client,
                                                    SourceCorpus corpus) {
  if (title.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorCode::PreconditionViolated, "title must be non-empty");
  }
  auto raw = client.match_raw(title);
  if (!raw) return std::nullopt;
  return document_from_match(*raw, corpus);
}

StoredFile fetch_pdf(const DocumentRecord& doc, const std::filesystem::path& dest,
                     const FetchOptions& opts) {
  if (!doc.pdf_url || doc.pdf_url->empty()) {
    throw Error(ErrorCode::NoPdfUrl, doc.doc_id.str());
  }
  const auto response = with_retry(
      opts.retry,
      [&] {
        auto r = http::get(*doc.pdf_url, {}, {.timeout = opts.timeout});
        if (r.status == 429) throw rate_limited(r, "pdf host throttled the request");
        if (r.status >= 500) {
          throw Error(ErrorCode::NetworkError, *doc.pdf_url + " returned " + std::to_string(r.status))
              .with_http_status(r.status);
        }
        if (r.status != 200) {
          // other 4xx will not change on retry
          throw Error(ErrorCode::BackendError, *doc.pdf_url + " returned " + std::to_string(r.status))
              .with_http_status(r.status);
        }
        return r;
      },
      nullptr, opts.sleep);

  const std::string type = response.header("content-type");
  const bool declared_pdf = type.find("application/pdf") != std::string::npos;
  const bool generic = type.empty() || type.find("application/octet-stream") != std::string::npos;
  const bool magic = response.body.rfind("%PDF", 0) == 0;
  if (!(declared_pdf || (generic && magic))) {
    throw Error(ErrorCode::NonPdfContent, doc.doc_id.str() + " served '" + type + "'");
  }

  std::filesystem::create_directories(dest);
  StoredFile stored{dest / (doc.doc_id.str() + ".pdf"), response.body.size()};
  std::ofstream out(stored.path, std::ios::binary | std::ios::trunc);
  out.write(response.body.data(), static_cast<std::streamsize>(response.body.size()));
  if (!out) throw Error(ErrorCode::StoreWriteError, "cannot write " + stored.path.string());
  return stored;
}

std::vector<std::string> split_pages(std::string_view text) {
  std::vector<std::string> pages;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto ff = text.find('\f', start);
    if (ff == std::string_view::npos) {
      if (start < text.size()) pages.emplace_back(text.substr(start));
      break;
    }
    pages.emplace_back(text.substr(start, ff - start));
    start = ff + 1;
  }
  return pages;
}

std::vector<PageRecord> convert_pdf_to_pages(const DocId& doc_id,
                                             const std::filesystem::path& pdf,
                                             const ConverterSpec& converter) {
  if (!std::filesystem::exists(pdf)) {
    throw Error(ErrorCode::PreconditionViolated, "no such PDF: " + pdf.string());
  }
  std::string command = converter.command;
  const std::string quoted = shell_quote(pdf.string());
  if (auto pos = command.find("{input}"); pos != std::string::npos) {
    command.replace(pos, 7, quoted);
  } else {
    command += " " + quoted;
  }

  std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(command.c_str(), "r"), pclose);
  if (!pipe) throw Error(ErrorCode::ConverterFailed, "cannot start: " + command);
  std::string output;
  char buf[8192];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe.get())) > 0) output.append(buf, n);
  const int status = pclose(pipe.release());
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw Error(ErrorCode::ConverterFailed,
                "'" + command + "' exited with status " +
                    std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : status));
  }

  const auto texts = split_pages(output);
  const bool blank = output.find_first_not_of(" \t\r\n\f") == std::string::npos;
  if (texts.empty() || blank) throw Error(ErrorCode::EmptyOutput, pdf.string());

  std::vector<PageRecord> pages;
  pages.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    pages.push_back(PageRecord{doc_id, static_cast<int>(i + 1), texts[i]});
  }
  return pages;
}

}  // namespace dsm::corpus
