#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "dsm/core/serialize.hpp"

namespace dsm {

/// Reads every non-blank line of a line-delimited JSON file. A malformed line
/// raises Error{ParseError} naming the file and line number.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

/// Streams lines to `sink`; same error behavior as read_jsonl.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t line_no)>& sink);

template <class T>
std::vector<T> read_records(const std::filesystem::path& path, Warnings* warnings = nullptr) {
  std::vector<T> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t) { out.push_back(decode<T>(j, warnings)); });
  return out;
}

/// Overwrites `path` with one canonical line per value.
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines);

template <class T>
void write_records(const std::filesystem::path& path, const std::vector<T>& records) {
  std::vector<Json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(encode(r));
  write_jsonl(path, lines);
}

/// Append-only line writer that can truncate to a known byte offset, used for
/// checkpointed stage outputs.
class JsonlAppender {
 public:
  JsonlAppender() = default;
  explicit JsonlAppender(std::filesystem::path path);

  /// Drops any bytes past `offset` (an interrupted partial write) and reopens.
  void truncate_to(std::uint64_t offset);
  void append(const Json& j);
  void flush();

  [[nodiscard]] std::uint64_t offset() const noexcept { return offset_; }
  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::uint64_t offset_ = 0;
};

}  // namespace dsm
