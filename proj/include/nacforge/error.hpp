#pragma once

#include <stdexcept>
#include <string>

namespace nacforge {

enum class ErrorKind {
  SchemaError,
  DanglingReference,
  NonMonoEmbedding,
  NonIncrementalNAC,
  DanglingCondition,
  NacViolated,
  IsoConstraint,
  UnclassifiableShape,
  UnsupportedShape,
  PreconditionViolated,
  NotConsecutive,
  ConditionViolated,
  MappingFailed,
  UnsafeState,
  BoundExceeded,
  Internal,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::NonMonoEmbedding: return "NonMonoEmbedding";
    case ErrorKind::NonIncrementalNAC: return "NonIncrementalNAC";
    case ErrorKind::DanglingCondition: return "DanglingCondition";
    case ErrorKind::NacViolated: return "NacViolated";
    case ErrorKind::IsoConstraint: return "IsoConstraint";
    case ErrorKind::UnclassifiableShape: return "UnclassifiableShape";
    case ErrorKind::UnsupportedShape: return "UnsupportedShape";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::NotConsecutive: return "NotConsecutive";
    case ErrorKind::ConditionViolated: return "ConditionViolated";
    case ErrorKind::MappingFailed: return "MappingFailed";
    case ErrorKind::UnsafeState: return "UnsafeState";
    case ErrorKind::BoundExceeded: return "BoundExceeded";
    case ErrorKind::Internal: return "Internal";
  }
  return "?";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nacforge
