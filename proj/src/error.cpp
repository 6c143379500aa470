#include "ctl/error.hpp"

namespace ctl {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateId:            return "DuplicateId";
        case ErrorCode::UnknownId:              return "UnknownId";
        case ErrorCode::CycleDetected:          return "CycleDetected";
        case ErrorCode::KindFieldMismatch:      return "KindFieldMismatch";
        case ErrorCode::ChildAlreadyCreated:    return "ChildAlreadyCreated";
        case ErrorCode::MissingCreatingEvent:   return "MissingCreatingEvent";
        case ErrorCode::DomainError:            return "DomainError";
        case ErrorCode::KindError:              return "KindError";
        case ErrorCode::NoPretrainRoot:         return "NoPretrainRoot";
        case ErrorCode::RecursionDepthExceeded: return "RecursionDepthExceeded";
        case ErrorCode::SyntaxError:            return "SyntaxError";
        case ErrorCode::SchemaError:            return "SchemaError";
        case ErrorCode::ValidationError:        return "ValidationError";
        case ErrorCode::SweepTargetUnresolved:  return "SweepTargetUnresolved";
        case ErrorCode::NonMonotone:            return "NonMonotone";
        case ErrorCode::NoCrossing:             return "NoCrossing";
        case ErrorCode::Internal:               return "Internal";
    }
    return "Internal";
}

} // namespace ctl
