#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>

namespace dsm::testkit {

struct StubRequest {
  std::string method;
  std::string path;
  std::string body;
  std::map<std::string, std::string> headers;  // as received
  std::map<std::string, std::string> params;   // query string
};

struct StubReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::map<std::string, std::string> headers;
};

/// Local HTTP server on 127.0.0.1 answering every GET/POST through one
/// handler. Runs on its own thread until destroyed.
class StubServer {
 public:
  using Handler = std::function<StubReply(const StubRequest&)>;
  explicit StubServer(Handler handler);
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  [[nodiscard]] int port() const;
  [[nodiscard]] std::string url() const;  // http://127.0.0.1:<port>
  [[nodiscard]] std::size_t hits() const { return hits_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<std::size_t> hits_{0};
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);

/// Directory with the checked-in fixtures and prompts.
std::filesystem::path fixtures_dir();
std::filesystem::path prompts_dir();

}  // namespace dsm::testkit
