#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace addrnet {

enum class ErrorKind {
    UnknownNode,
    UnknownAddressSpace,
    UnknownSubject,
    UnknownPlatform,
    InvalidArgument,
    ConstraintViolation,
    OverlapConflict,
    NoSuchEntry,
    NotOwner,
    IllegalRetype,
    RangeError,
    Conflict,
    AlreadyDerived,
    NoAsidAvailable,
    Exhausted,
    RightsViolation,
    NeverAccessible,
    TypeMismatch,
    NotAMapping,
    NotInMdb,
    NoPath,
    ParseError,
    SemanticError,
    DynamicOnPath,
    BudgetExceeded,
    // Raised by the per-step checks of trace execution.
    NeverAccessibleViolation,
    ConfigSpaceViolation,
    CoverageViolation,
    SecurityViolation,
};

std::string_view error_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail);

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& detail = {});

}  // namespace addrnet
