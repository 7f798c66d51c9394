#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dsm {

enum class ErrorCode {
  // core
  MissingField,
  BadEnum,
  InvalidRecord,
  ParseError,
  // corpus
  NetworkError,
  RateLimited,
  MalformedResponse,
  StoreWriteError,
  NoPdfUrl,
  NonPdfContent,
  ConverterFailed,
  EmptyOutput,
  // llm gateway
  Timeout,
  BackendError,
  RetriesExhausted,
  NoPayloadFound,
  MultiplePayloads,
  UnknownTemplate,
  UnscriptedInput,
  // weaksup
  ArityMismatch,
  ValidityCouplingViolation,
  // gate / evalkit / dataset
  MalformedScore,
  MissingLabel,
  UnknownAdapter,
  UnknownFormat,
  PopulationTooSmall,
  InvalidSpec,
  // cli
  ConfigError,
  PreconditionViolated,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  /// HTTP status that produced the error, 0 when not HTTP related.
  [[nodiscard]] int http_status() const noexcept { return http_status_; }
  Error& with_http_status(int status) {
    http_status_ = status;
    return *this;
  }

  [[nodiscard]] std::optional<std::chrono::milliseconds> retry_after() const noexcept {
    return retry_after_;
  }
  Error& with_retry_after(std::chrono::milliseconds delay) {
    retry_after_ = delay;
    return *this;
  }

  /// Byte offset into the parsed text for ParseError.
  [[nodiscard]] std::optional<std::size_t> byte_offset() const noexcept { return offset_; }
  Error& with_offset(std::size_t offset) {
    offset_ = offset;
    return *this;
  }

 private:
  ErrorCode code_;
  int http_status_ = 0;
  std::optional<std::chrono::milliseconds> retry_after_;
  std::optional<std::size_t> offset_;
};

}  // namespace dsm
