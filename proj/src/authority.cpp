#include "addrnet/authority.hpp"

#include <algorithm>

namespace addrnet {

std::string to_string(const ObjectRef& o) {
    if (const auto* m = std::get_if<MemoryObject>(&o))
        return "mem(" + to_string(m->base) + "+" + std::to_string(m->size) + ")";
    return "space(" + std::to_string(std::get<AddressSpaceObject>(o).asid) + ")";
}

bool Right::well_typed() const {
    return kind == Kind::Map ? std::holds_alternative<AddressSpaceObject>(object)
                             : std::holds_alternative<MemoryObject>(object);
}

bool Right::confers(const Right& other) const {
    if (kind != other.kind || grant_depth != other.grant_depth) return false;
    if (const auto* m = std::get_if<MemoryObject>(&object)) {
        const auto* o = std::get_if<MemoryObject>(&other.object);
        return o && m->covers(*o);
    }
    return object == other.object;
}

std::string to_string(const Right& r) {
    std::string s = r.kind == Right::Kind::Access ? "Access(" : "Map(";
    s += to_string(r.object) + ")";
    for (unsigned i = 0; i < r.grant_depth; ++i) s = "Grant(" + s + ")";
    return s;
}

void AccessControlMatrix::add_subject(SubjectId s, std::string label) { subjects[s] = std::move(label); }

void AccessControlMatrix::add(SubjectId s, const Right& r) {
    if (!has_subject(s)) fail(ErrorKind::UnknownSubject, to_string(s));
    if (!r.well_typed()) fail(ErrorKind::InvalidArgument, "ill-typed right " + to_string(r));
    rights[s].insert(r);
}

bool AccessControlMatrix::holds(SubjectId s, const Right& r) const {
    auto it = rights.find(s);
    if (it == rights.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](const Right& h) { return h.confers(r); });
}

bool acm_allows(const AccessControlMatrix& acm, SubjectId subject, const Action& action, const AcmPolicy& policy) {
    if (!acm.has_subject(subject)) fail(ErrorKind::UnknownSubject, to_string(subject));
    if (const auto* install = std::get_if<InstallMapping>(&action)) {
        if (!acm.holds(subject, Right::map(install->into))) return false;
        if (const auto* mem = std::get_if<MemoryObject>(&install->object)) {
            const Right access = Right::access(*mem);
            return acm.holds(subject, Right::grant(access)) ||
                   (policy.access_implies_self_grant && acm.holds(subject, access));
        }
        // Linking a child space into `into` needs authority over both.
        return acm.holds(subject, Right::map(std::get<AddressSpaceObject>(install->object).asid));
    }
    const auto& g = std::get<GrantRight>(action);
    if (!acm.has_subject(g.to)) fail(ErrorKind::UnknownSubject, to_string(g.to));
    return acm.holds(subject, Right::grant(g.right));
}

std::string to_string(const SecurityViolation& v) {
    std::string kind = v.kind == SecurityViolation::Kind::Unauthorized ? "Unauthorized" : "Unrecorded";
    return kind + "{" + to_string(v.subject) + "," + to_string(v.object) + ",space " + std::to_string(v.space) +
           "," + to_string(v.range) + "}";
}

std::vector<SecurityViolation> check_static_secure(const World& world, const AccessControlMatrix& acm,
                                                   const AcmPolicy& policy) {
    std::vector<SecurityViolation> out;
    auto allowed = [&](const MappingRecord& r) {
        return acm.has_subject(r.subject) && acm_allows(acm, r.subject, InstallMapping{r.object, r.into}, policy);
    };
    for (const auto& [asid, node] : world.cfg.current) {
        for (const auto& e : node.translate) {
            if (world.trusted.count({asid, e.src})) continue;
            std::vector<const MappingRecord*> covering;
            for (const auto& r : world.records)
                if (r.into == asid && r.at.overlaps(e.src)) covering.push_back(&r);
            if (covering.empty()) {
                out.push_back({SecurityViolation::Kind::Unrecorded, kMonitorSubject, AddressSpaceObject{asid}, asid,
                               e.src});
                continue;
            }
            if (std::any_of(covering.begin(), covering.end(), [&](const MappingRecord* r) { return allowed(*r); }))
                continue;
            for (const MappingRecord* r : covering)
                out.push_back({SecurityViolation::Kind::Unauthorized, r->subject, r->object, asid, r->at});
        }
    }
    return out;
}

bool check_transition_secure(const AccessControlMatrix& acm, const World&, SubjectId subject, const Action& action,
                             const AcmPolicy& policy) {
    return acm_allows(acm, subject, action, policy);
}

}  // namespace addrnet
