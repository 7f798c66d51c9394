#include <httplib.h>

#include "dsm/core/http.hpp"

#include <algorithm>
#include <cctype>

#include "dsm/core/error.hpp"

namespace dsm::http {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

template <class Call>
Response perform(std::string_view url, const Options& opts, Call&& call) {
  const UrlParts parts = split_url(url);
  httplib::Client client(parts.origin);
  const auto seconds = opts.timeout.count() / 1000;
  const auto micros = (opts.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);
  client.set_follow_location(opts.follow_redirects);

  httplib::Result result = call(client, parts.path);
  if (!result) {
    const auto err = result.error();
    const std::string what = "request to " + std::string(url) + " failed: " + httplib::to_string(err);
    if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorCode::Timeout, what);
    }
    throw Error(ErrorCode::NetworkError, what);
  }
  Response r;
  r.status = result->status;
  r.body = result->body;
  for (const auto& [k, v] : result->headers) r.headers.emplace(lower(k), v);
  return r;
}

httplib::Headers to_httplib(const Headers& headers) {
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  return h;
}

}  // namespace

UrlParts split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorCode::InvalidRecord, "not an absolute URL: " + std::string(url));
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::InvalidRecord, "unsupported URL scheme: " + std::string(url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  UrlParts parts;
  if (path_start == std::string_view::npos) {
    parts.origin = std::string(url);
    parts.path = "/";
  } else {
    parts.origin = std::string(url.substr(0, path_start));
    parts.path = std::string(url.substr(path_start));
  }
  if (parts.origin.size() <= scheme_end + 3) {
    throw Error(ErrorCode::InvalidRecord, "URL without host: " + std::string(url));
  }
  return parts;
}

std::string url_encode(std::string_view value) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : value) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

Response get(std::string_view url, const Headers& headers, const Options& opts) {
  return perform(url, opts, [&](httplib::Client& c, const std::string& path) {
    return c.Get(path, to_httplib(headers));
  });
}

Response post(std::string_view url, std::string_view body, std::string_view content_type,
              const Headers& headers, const Options& opts) {
  return perform(url, opts, [&](httplib::Client& c, const std::string& path) {
    return c.Post(path, to_httplib(headers), body.data(), body.size(), std::string(content_type));
  });
}

long long retry_after_seconds(const Response& r) {
  const std::string v = r.header("retry-after");
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return -1;
  }
  return std::stoll(v);
}

}  // namespace dsm::http
