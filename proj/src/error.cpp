#include "schro/error.hpp"

namespace schro {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kGridTooCoarse: return "GridTooCoarse";
    case ErrorCode::kEmptyRegion: return "EmptyRegion";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kBadSupport: return "BadSupport";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kScaleMismatch: return "ScaleMismatch";
    case ErrorCode::kBisectionNotFound: return "BisectionNotFound";
    case ErrorCode::kNoNonSingularPoints: return "NoNonSingularPoints";
    case ErrorCode::kAllBelowFloor: return "AllBelowFloor";
    case ErrorCode::kSupportViolation: return "SupportViolation";
    case ErrorCode::kNonUniformCubes: return "NonUniformCubes";
    case ErrorCode::kSeparationViolated: return "SeparationViolated";
    case ErrorCode::kPreconditionFailed: return "PreconditionFailed";
    case ErrorCode::kTooManyPackets: return "TooManyPackets";
    case ErrorCode::kConstructionDegenerate: return "ConstructionDegenerate";
    case ErrorCode::kUnknownExperiment: return "UnknownExperiment";
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace schro
