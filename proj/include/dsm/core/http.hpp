#pragma once

#include <chrono>
#include <map>
#include <string>
#include <string_view>

namespace dsm::http {

struct Response {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;  // lowercase names

  [[nodiscard]] std::string header(const std::string& lower_name) const {
    auto it = headers.find(lower_name);
    return it == headers.end() ? std::string{} : it->second;
  }
};

/// "scheme://host[:port]" and "/path?query" halves of a URL.
struct UrlParts {
  std::string origin;
  std::string path;
};

/// Throws Error{InvalidRecord} for anything that is not http(s)://host...
UrlParts split_url(std::string_view url);

/// Percent-encodes a query parameter value.
std::string url_encode(std::string_view value);

using Headers = std::multimap<std::string, std::string>;

struct Options {
  std::chrono::milliseconds timeout{30'000};
  bool follow_redirects = true;
};

// Transport failures (connection refused, read timeout) raise
// Error{Timeout} or Error{NetworkError}; HTTP error statuses are returned, not
// thrown.
Response get(std::string_view url, const Headers& headers = {}, const Options& opts = {});
Response post(std::string_view url, std::string_view body, std::string_view content_type,
              const Headers& headers = {}, const Options& opts = {});

/// Parses a Retry-After header value in seconds; nullopt-like -1 when absent
/// or not numeric.
long long retry_after_seconds(const Response& r);

}  // namespace dsm::http
