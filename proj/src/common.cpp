#include "cageloop/common.hpp"

namespace cageloop {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DegenerateNeighborhood: return "DegenerateNeighborhood";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::TooManyPoints: return "TooManyPoints";
    case ErrorCode::EmptyGraspingSpace: return "EmptyGraspingSpace";
    case ErrorCode::NoObjectVoxels: return "NoObjectVoxels";
    case ErrorCode::BaseNotInGraspingSpace: return "BaseNotInGraspingSpace";
    case ErrorCode::DegenerateLoop: return "DegenerateLoop";
    case ErrorCode::CollapsedLoop: return "CollapsedLoop";
    case ErrorCode::CollinearLoop: return "CollinearLoop";
    case ErrorCode::NoValidOrigin: return "NoValidOrigin";
    case ErrorCode::NoBasePoints: return "NoBasePoints";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Error Error::with_stage(std::string stage) const {
  Error copy(*this);
  copy.stage_ = std::move(stage);
  return copy;
}

}  // namespace cageloop
