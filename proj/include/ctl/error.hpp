#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ctl {

enum class ErrorCode {
    DuplicateId,
    UnknownId,
    CycleDetected,
    KindFieldMismatch,
    ChildAlreadyCreated,
    MissingCreatingEvent,
    DomainError,
    KindError,
    NoPretrainRoot,
    RecursionDepthExceeded,
    SyntaxError,
    SchemaError,
    ValidationError,
    SweepTargetUnresolved,
    NonMonotone,
    NoCrossing,
    Internal,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library. `field` names the offending id,
// JSON path or parameter when there is one.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::string field = {})
        : std::runtime_error(std::move(message)), code_(code), field_(std::move(field)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorCode code_;
    std::string field_;
};

} // namespace ctl
