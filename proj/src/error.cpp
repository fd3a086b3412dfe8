#include "addrnet/error.hpp"

namespace addrnet {

std::string_view error_name(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::UnknownAddressSpace: return "UnknownAddressSpace";
    case ErrorKind::UnknownSubject: return "UnknownSubject";
    case ErrorKind::UnknownPlatform: return "UnknownPlatform";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::OverlapConflict: return "OverlapConflict";
    case ErrorKind::NoSuchEntry: return "NoSuchEntry";
    case ErrorKind::NotOwner: return "NotOwner";
    case ErrorKind::IllegalRetype: return "IllegalRetype";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::Conflict: return "Conflict";
    case ErrorKind::AlreadyDerived: return "AlreadyDerived";
    case ErrorKind::NoAsidAvailable: return "NoAsidAvailable";
    case ErrorKind::Exhausted: return "Exhausted";
    case ErrorKind::RightsViolation: return "RightsViolation";
    case ErrorKind::NeverAccessible: return "NeverAccessible";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::NotAMapping: return "NotAMapping";
    case ErrorKind::NotInMdb: return "NotInMdb";
    case ErrorKind::NoPath: return "NoPath";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SemanticError: return "SemanticError";
    case ErrorKind::DynamicOnPath: return "DynamicOnPath";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NeverAccessibleViolation: return "NeverAccessibleViolation";
    case ErrorKind::ConfigSpaceViolation: return "ConfigSpaceViolation";
    case ErrorKind::CoverageViolation: return "CoverageViolation";
    case ErrorKind::SecurityViolation: return "SecurityViolation";
    }
    return "Unknown";
}

namespace {
std::string compose(ErrorKind kind, const std::string& detail) {
    std::string msg(error_name(kind));
    if (!detail.empty()) {
        msg += ": ";
        msg += detail;
    }
    return msg;
}
}  // namespace

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(compose(kind, detail)), kind_(kind), detail_(detail) {}

void fail(ErrorKind kind, const std::string& detail) { throw Error(kind, detail); }

}  // namespace addrnet
