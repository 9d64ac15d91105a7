#pragma once

#include <stdexcept>
#include <string>

namespace brepforge {

enum class ErrorCode {
  // topology construction / serialization
  MalformedPair,
  EmptyTopology,
  TooManyFaces,
  SharedEdgeOverflow,
  MalformedLength,
  OpenLoop,
  SelfUnion,
  EdgeReuse,
  FaceMismatch,
  LoopPinch,
  MalformedSequence,
  InvalidTopology,
  // generation
  EmptyCorpus,
  MaxRetriesExceeded,
  // numerics
  ParamOutOfRange,
  TooFewSamples,
  TooFewPoints,
  DegenerateConfiguration,
  BadRange,
  StepOutOfRange,
  NonFiniteState,
  InsufficientData,
  // assembly / metrics
  TopologyGeometryMismatch,
  GapExceedsTolerance,
  DegenerateSurface,
  EmptySet,
  // io
  ParseError,
  SchemaVersionMismatch,
  InvalidRecord,
  BadSpec,
};

constexpr const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedPair: return "MalformedPair";
    case ErrorCode::EmptyTopology: return "EmptyTopology";
    case ErrorCode::TooManyFaces: return "TooManyFaces";
    case ErrorCode::SharedEdgeOverflow: return "SharedEdgeOverflow";
    case ErrorCode::MalformedLength: return "MalformedLength";
    case ErrorCode::OpenLoop: return "OpenLoop";
    case ErrorCode::SelfUnion: return "SelfUnion";
    case ErrorCode::EdgeReuse: return "EdgeReuse";
    case ErrorCode::FaceMismatch: return "FaceMismatch";
    case ErrorCode::LoopPinch: return "LoopPinch";
    case ErrorCode::MalformedSequence: return "MalformedSequence";
    case ErrorCode::InvalidTopology: return "InvalidTopology";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::MaxRetriesExceeded: return "MaxRetriesExceeded";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::StepOutOfRange: return "StepOutOfRange";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::TopologyGeometryMismatch: return "TopologyGeometryMismatch";
    case ErrorCode::GapExceedsTolerance: return "GapExceedsTolerance";
    case ErrorCode::DegenerateSurface: return "DegenerateSurface";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::InvalidRecord: return "InvalidRecord";
    case ErrorCode::BadSpec: return "BadSpec";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  const char* code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace brepforge
