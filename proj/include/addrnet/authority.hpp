#pragma once

// Abstract security model: subjects hold map/grant/access rights over
// objects in an access-control matrix. A world is statically secure when
// every installed translation is justified by the matrix.

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "addrnet/config.hpp"

namespace addrnet {

enum class SubjectId : std::uint32_t {};

inline std::string to_string(SubjectId s) { return "subject#" + std::to_string(static_cast<std::uint32_t>(s)); }

/// Reserved for translations the monitor installs itself during boot.
inline constexpr SubjectId kMonitorSubject{0};

struct MemoryObject {
    Name base;
    std::uint64_t size = 1;

    bool covers(const MemoryObject& o) const {
        return base.node == o.base.node && o.base.addr >= base.addr && o.base.addr - base.addr <= size &&
               o.size <= size - (o.base.addr - base.addr);
    }
    auto operator<=>(const MemoryObject&) const = default;
};

struct AddressSpaceObject {
    AddressSpaceId asid = 0;
    auto operator<=>(const AddressSpaceObject&) const = default;
};

using ObjectRef = std::variant<MemoryObject, AddressSpaceObject>;

std::string to_string(const ObjectRef& o);

/// Access(object), Map(space), or Grant^depth of either. Grant nesting is
/// flattened into a depth counter: depth 0 is the plain right.
struct Right {
    enum class Kind : std::uint8_t { Access, Map };
    Kind kind = Kind::Access;
    ObjectRef object;
    unsigned grant_depth = 0;

    static Right access(MemoryObject o) { return {Kind::Access, o, 0}; }
    static Right map(AddressSpaceId asid) { return {Kind::Map, AddressSpaceObject{asid}, 0}; }
    static Right grant(Right inner) {
        inner.grant_depth += 1;
        return inner;
    }

    /// Map applies to address spaces, Access to memory.
    bool well_typed() const;
    /// This right confers `other` (same kind and depth, object covered).
    bool confers(const Right& other) const;

    auto operator<=>(const Right&) const = default;
};

std::string to_string(const Right& r);

struct AccessControlMatrix {
    std::map<SubjectId, std::string> subjects;
    std::map<SubjectId, std::set<Right>> rights;

    void add_subject(SubjectId s, std::string label);
    void add(SubjectId s, const Right& r);
    bool has_subject(SubjectId s) const { return subjects.count(s) != 0; }
    bool holds(SubjectId s, const Right& r) const;

    bool operator==(const AccessControlMatrix&) const = default;
};

struct InstallMapping {
    ObjectRef object;
    AddressSpaceId into = 0;
};

struct GrantRight {
    Right right;
    SubjectId to{};
};

using Action = std::variant<InstallMapping, GrantRight>;

struct AcmPolicy {
    // Let Access alone stand in for Grant(Access) when installing.
    bool access_implies_self_grant = false;
};

/// Install requires Grant over the object and Map on the target space;
/// granting requires Grant of the right being passed on.
bool acm_allows(const AccessControlMatrix& acm, SubjectId subject, const Action& action,
                const AcmPolicy& policy = {});

struct MappingRecord {
    SubjectId subject{};
    ObjectRef object;
    AddressSpaceId into = 0;
    AddrRange at;

    auto operator<=>(const MappingRecord&) const = default;
};

struct World {
    Configuration cfg;
    std::vector<MappingRecord> records;
    // Entries installed by the monitor itself; exempt from justification.
    std::set<std::pair<AddressSpaceId, AddrRange>> trusted;
};

struct SecurityViolation {
    enum class Kind { Unauthorized, Unrecorded };
    Kind kind;
    SubjectId subject{};
    ObjectRef object;
    AddressSpaceId space = 0;
    AddrRange range;

    bool operator==(const SecurityViolation&) const = default;
};

std::string to_string(const SecurityViolation& v);

/// Every translate entry of every configured space must be justified by at
/// least one record whose subject is allowed to install it.
std::vector<SecurityViolation> check_static_secure(const World& world, const AccessControlMatrix& acm,
                                                   const AcmPolicy& policy = {});

/// A transition is secure iff the matrix allows it.
bool check_transition_secure(const AccessControlMatrix& acm, const World& world, SubjectId subject,
                             const Action& action, const AcmPolicy& policy = {});

}  // namespace addrnet
