#include "dsm/core/error.hpp"

namespace dsm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::BadEnum: return "BadEnum";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NetworkError: return "NetworkError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::StoreWriteError: return "StoreWriteError";
    case ErrorCode::NoPdfUrl: return "NoPdfUrl";
    case ErrorCode::NonPdfContent: return "NonPdfContent";
    case ErrorCode::ConverterFailed: return "ConverterFailed";
    case ErrorCode::EmptyOutput: return "EmptyOutput";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::BackendError: return "BackendError";
    case ErrorCode::RetriesExhausted: return "RetriesExhausted";
    case ErrorCode::NoPayloadFound: return "NoPayloadFound";
    case ErrorCode::MultiplePayloads: return "MultiplePayloads";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::UnscriptedInput: return "UnscriptedInput";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::ValidityCouplingViolation: return "ValidityCouplingViolation";
    case ErrorCode::MalformedScore: return "MalformedScore";
    case ErrorCode::MissingLabel: return "MissingLabel";
    case ErrorCode::UnknownAdapter: return "UnknownAdapter";
    case ErrorCode::UnknownFormat: return "UnknownFormat";
    case ErrorCode::PopulationTooSmall: return "PopulationTooSmall";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace dsm
