#include "dsm/core/jsonl.hpp"

#include "dsm/core/error.hpp"

namespace dsm {

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const Json&, std::size_t)>& sink) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::ParseError,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what())
          .with_offset(e.byte);
    }
    sink(j, line_no);
  }
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::vector<Json> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t) { out.push_back(j); });
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& lines) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& j : lines) out << canonical_dump(j) << '\n';
  if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

JsonlAppender::JsonlAppender(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::error_code ec;
  offset_ = std::filesystem::exists(path_) ? std::filesystem::file_size(path_, ec) : 0;
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::StoreWriteError, "cannot open " + path_.string());
}

void JsonlAppender::truncate_to(std::uint64_t offset) {
  out_.close();
  if (!std::filesystem::exists(path_)) {
    std::ofstream(path_, std::ios::binary);
  }
  if (std::filesystem::file_size(path_) > offset) std::filesystem::resize_file(path_, offset);
  offset_ = std::filesystem::file_size(path_);
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::StoreWriteError, "cannot reopen " + path_.string());
}

void JsonlAppender::append(const Json& j) {
  const std::string line = canonical_dump(j) + '\n';
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  if (!out_) throw Error(ErrorCode::StoreWriteError, "append failed: " + path_.string());
  offset_ += line.size();
}

void JsonlAppender::flush() {
  out_.flush();
  if (!out_) throw Error(ErrorCode::StoreWriteError, "flush failed: " + path_.string());
}

}  // namespace dsm
