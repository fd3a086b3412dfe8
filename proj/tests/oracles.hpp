#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls the range resolver, the MDB tree queries or the monitor's own
// bookkeeping helpers.

#include <algorithm>
#include <cstdlib>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "addrnet/platform.hpp"

namespace oracle {

using namespace addrnet;

inline std::uint64_t seed(std::uint64_t fallback = 20240611) {
    if (const char* s = std::getenv("ADDRNET_SEED")) return std::strtoull(s, nullptr, 0);
    return fallback;
}

// ---------------------------------------------------------------------------
// Per-address walker

class Walker {
public:
    explicit Walker(const DecodingNet& net) : net_(net) {
        for (const auto& [id, spec] : net.nodes) limit_ += spec.translate.size();
    }

    ResolveResult operator()(const Name& n) const {
        std::vector<Name> path;
        return go(n, path);
    }

private:
    ResolveResult go(const Name& n, std::vector<Name>& path) const {
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (path[i] == n) {
                Loop l{{path.begin() + static_cast<std::ptrdiff_t>(i), path.end()}};
                l.cycle.push_back(n);
                return l;
            }
        }
        if (path.size() > limit_) {
            Loop l{path};
            l.cycle.push_back(n);
            return l;
        }
        const NodeSpec& s = net_.nodes.at(n.node);
        for (const AddrRange& a : s.accept)
            if (n.addr >= a.base && n.addr - a.base < a.size) return Accepted{{n}};
        for (const TranslateEntry& e : s.translate) {
            if (n.addr < e.src.base || n.addr - e.src.base >= e.src.size) continue;
            std::set<Name> names;
            path.push_back(n);
            for (const Name& d : e.dests) {
                ResolveResult r = go({d.node, d.addr + (n.addr - e.src.base)}, path);
                if (!std::holds_alternative<Accepted>(r)) {
                    path.pop_back();
                    return r;
                }
                for (const Name& x : std::get<Accepted>(r).names) names.insert(x);
            }
            path.pop_back();
            return Accepted{{names.begin(), names.end()}};
        }
        return Undecodable{n};
    }

    const DecodingNet& net_;
    std::size_t limit_ = 0;
};

// ---------------------------------------------------------------------------
// Random nets over a small address range

struct RandomNetConfig {
    std::size_t max_nodes = 64;
    std::uint64_t span = 256;  // every node covers [0, span)
    unsigned max_dests = 2;
};

inline DecodingNet random_net(std::mt19937_64& rng, const RandomNetConfig& cfg = {}) {
    auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };
    const std::size_t n = pick(1, cfg.max_nodes);
    std::vector<NodeId> ids;
    std::set<NodeId> used;
    while (ids.size() < n) {
        const auto id = static_cast<NodeId>(pick(0, 4 * cfg.max_nodes));
        if (used.insert(id).second) ids.push_back(id);
    }
    DecodingNet net;
    for (NodeId id : ids) {
        NodeSpec spec;
        std::uint64_t at = 0;
        while (at < cfg.span) {
            const std::uint64_t len = std::min<std::uint64_t>(pick(1, cfg.span / 4), cfg.span - at);
            const auto kind = pick(0, 9);
            if (kind < 3) {
                spec.accept.push_back({at, len});
            } else if (kind < 8) {
                TranslateEntry e{{at, len}, {}};
                const auto dests = pick(1, cfg.max_dests);
                for (std::uint64_t d = 0; d < dests; ++d)
                    e.dests.push_back({ids[pick(0, ids.size() - 1)], pick(0, cfg.span)});
                spec.translate.push_back(std::move(e));
            }
            at += len;
        }
        net.nodes[id] = std::move(spec);
    }
    return net;
}

// ---------------------------------------------------------------------------
// Capability relations restated from their definitions

inline bool type_below(CapType a, CapType b) {
    using K = CapKind;
    if (a == b) return true;
    if (a.kind == K::RAM) return b.kind == K::Frame || b.kind == K::TStructure || b.kind == K::AddressSpace ||
                                 b.kind == K::Mapping || b.kind == K::RAM;
    if (a.kind == K::Frame) return b.kind == K::Mapping;
    if (a.kind == K::TStructure) return b.kind == K::AddressSpace || b.kind == K::Mapping;
    return false;
}

inline bool descends(const Capability& a, const Capability& b) {
    if (a.type.kind == CapKind::Mapping || a.base.node != b.base.node) return false;
    const bool inside = b.base.addr >= a.base.addr && b.base.addr + b.size <= a.base.addr + a.size;
    const bool copy = a.type == b.type && a.base == b.base && a.size == b.size;
    return inside && !copy && type_below(a.type, b.type);
}

inline std::set<CapId> ids(const std::vector<Capability>& caps) {
    std::set<CapId> s;
    for (const Capability& c : caps) s.insert(c.id);
    return s;
}

inline std::vector<Capability> all_caps(const Mdb& mdb) {
    std::vector<Capability> out;
    mdb.for_each([&](const Capability& c) { out.push_back(c); });
    return out;
}

inline std::set<CapId> scan_descendants(const std::vector<Capability>& all, const Capability& of) {
    std::set<CapId> s;
    for (const Capability& c : all)
        if (descends(of, c)) s.insert(c.id);
    return s;
}

inline std::set<CapId> scan_ancestors(const std::vector<Capability>& all, const Capability& of) {
    std::set<CapId> s;
    for (const Capability& c : all)
        if (descends(c, of)) s.insert(c.id);
    return s;
}

inline std::set<CapId> scan_overlap(const std::vector<Capability>& all, const Name& base, std::uint64_t size) {
    std::set<CapId> s;
    for (const Capability& c : all)
        if (c.base.node == base.node && c.base.addr < base.addr + size && base.addr < c.base.addr + c.size)
            s.insert(c.id);
    return s;
}

inline std::set<CapId> scan_contains(const std::vector<Capability>& all, const Name& base, std::uint64_t size) {
    std::set<CapId> s;
    for (const Capability& c : all)
        if (c.base.node == base.node && c.base.addr <= base.addr && base.addr + size <= c.base.addr + c.size)
            s.insert(c.id);
    return s;
}

// Capabilities scattered over a few nodes, nested often enough that
// descendant queries have real answers.
inline std::vector<Capability> random_caps(std::mt19937_64& rng, std::size_t n) {
    auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };
    static const CapType types[] = {CapType::ram(), CapType::frame(), CapType::tstructure(1), CapType::tstructure(2),
                                    CapType::address_space(), CapType::mapping()};
    std::vector<Capability> out;
    for (std::size_t i = 0; i < n; ++i) {
        Capability c;
        c.id = CapId{i + 1};
        if (!out.empty() && pick(0, 3) == 0) {
            c = out[pick(0, out.size() - 1)];
            c.id = CapId{i + 1};
            c.owner = SubjectId{static_cast<std::uint32_t>(pick(0, 3))};
            out.push_back(c);
            continue;
        }
        c.type = types[pick(0, 5)];
        const std::uint64_t pages = std::uint64_t{1} << pick(0, 8);
        c.base = {static_cast<NodeId>(pick(1, 3)), pick(0, 255) * 4096};
        c.size = pages * 4096;
        c.rights = static_cast<Rights>(pick(0, 7));
        c.owner = SubjectId{static_cast<std::uint32_t>(pick(0, 3))};
        if (c.type.kind == CapKind::AddressSpace) c.payload = AddressSpaceInfo{static_cast<AddressSpaceId>(pick(8, 12))};
        out.push_back(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Table exposure: walk translations backwards from every table's bytes and
// report any visible node that reaches them.

struct Interval {
    NodeId node;
    Address lo;
    Address hi;  // exclusive
    auto operator<=>(const Interval&) const = default;
};

inline std::vector<Capability> exposed_tables(const KernelState& st) {
    const DecodingNet net = st.current_net();
    std::vector<Capability> out;
    for (const Capability& t : all_caps(st.mdb)) {
        if (t.type.kind != CapKind::TStructure) continue;
        std::set<Interval> seen;
        std::vector<Interval> work{{t.base.node, t.base.addr, t.base.addr + t.size}};
        bool hit = false;
        while (!work.empty() && !hit) {
            const Interval iv = work.back();
            work.pop_back();
            if (!seen.insert(iv).second) continue;
            if (st.visible.count(iv.node)) {
                hit = true;
                break;
            }
            for (const auto& [id, spec] : net.nodes)
                for (const TranslateEntry& e : spec.translate)
                    for (const Name& d : e.dests) {
                        if (d.node != iv.node) continue;
                        const Address lo = std::max(iv.lo, d.addr);
                        const Address hi = std::min(iv.hi, d.addr + e.src.size);
                        if (lo < hi) work.push_back({id, e.src.base + (lo - d.addr), e.src.base + (hi - d.addr)});
                    }
        }
        if (hit) out.push_back(t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Revocation closure: descendants, then space teardown and loss of
// authority, iterated to a fixpoint.

inline bool frame_grants(const Capability& c, SubjectId s, const Name& base, std::uint64_t size) {
    return c.owner == s && c.type.kind == CapKind::Frame && has(c.rights, kGrant) && c.base.node == base.node &&
           c.base.addr <= base.addr && base.addr + size <= c.base.addr + c.size;
}

inline bool holds_map(const std::vector<Capability>& caps, SubjectId s, AddressSpaceId asid) {
    return std::any_of(caps.begin(), caps.end(), [&](const Capability& c) {
        const auto* as = std::get_if<AddressSpaceInfo>(&c.payload);
        return c.owner == s && as && as->asid == asid && has(c.rights, kMap);
    });
}

inline std::set<CapId> expected_after_revoke(const std::vector<Capability>& before, const Capability& target) {
    std::set<CapId> killed = scan_descendants(before, target);
    for (;;) {
        std::vector<Capability> alive;
        for (const Capability& c : before)
            if (!killed.count(c.id)) alive.push_back(c);
        std::set<AddressSpaceId> dead;
        for (const Capability& c : before) {
            const auto* as = std::get_if<AddressSpaceInfo>(&c.payload);
            if (as && killed.count(c.id) &&
                std::none_of(alive.begin(), alive.end(), [&](const Capability& x) {
                    const auto* o = std::get_if<AddressSpaceInfo>(&x.payload);
                    return o && o->asid == as->asid;
                }))
                dead.insert(as->asid);
        }
        std::set<CapId> more;
        for (const Capability& c : alive) {
            const auto* m = std::get_if<MappingInfo>(&c.payload);
            if (!m) continue;
            if (dead.count(m->into) || dead.count(m->dest.node)) {
                more.insert(c.id);
                continue;
            }
            bool ok = holds_map(alive, c.owner, m->into);
            if (m->table_link) ok = ok && holds_map(alive, c.owner, m->dest.node);
            else
                ok = ok && std::any_of(alive.begin(), alive.end(),
                                       [&](const Capability& f) { return frame_grants(f, c.owner, c.base, c.size); });
            if (!ok) more.insert(c.id);
        }
        if (more.empty()) return killed;
        killed.insert(more.begin(), more.end());
    }
}

// ---------------------------------------------------------------------------
// Random monitor operations over whatever the state currently holds.

class OpFuzzer {
public:
    explicit OpFuzzer(std::uint64_t s) : rng_(s) {}

    std::mt19937_64& rng() { return rng_; }

    MonitorOp next(const KernelState& st) {
        std::vector<std::pair<std::string, Handle>> held;
        std::vector<std::string> subjects;
        for (const auto& [id, d] : st.dispatchers) {
            if (id == kMonitorSubject) continue;
            subjects.push_back(d.label);
            for (const auto& [h, cid] : d.cspace) held.push_back({d.label, h});
        }
        if (held.empty()) return NopOp{};
        const auto [subj, h] = held[pick(0, held.size() - 1)];
        const Capability& c = st.cap(*st.subject_named(subj), h);
        const CapRef ref = CapRef::of(h);
        const std::uint64_t pages = std::max<std::uint64_t>(1, c.size / 4096);

        switch (pick(0, 11)) {
        case 0:
        case 1: {
            static const CapType types[] = {CapType::frame(), CapType::frame(), CapType::ram(),
                                            CapType::tstructure(1), CapType::tstructure(2)};
            const std::uint64_t off = pick(0, std::min<std::uint64_t>(pages - 1, 64)) * 4096;
            const std::uint64_t len = pick(0, 3) == 0 ? c.size - std::min(off, c.size) : pick(1, 4) * 4096;
            return RetypeOp{subj, ref, types[pick(0, 4)], off, len, {}};
        }
        case 2: {
            std::optional<NodeId> out;
            if (pick(0, 1) && !st.net.nodes.empty()) {
                auto it = st.net.nodes.begin();
                std::advance(it, static_cast<std::ptrdiff_t>(pick(0, st.net.nodes.size() - 1)));
                out = it->first;
            }
            return DeriveAsOp{subj, ref, out, {}};
        }
        case 3: return AsidRetypeOp{subj, ref, static_cast<std::uint32_t>(pick(0, 4)), {}};
        case 4:
        case 5:
        case 6: {
            if (st.spaces.empty()) return NopOp{};
            auto it = st.spaces.begin();
            std::advance(it, static_cast<std::ptrdiff_t>(pick(0, st.spaces.size() - 1)));
            const AddressSpaceId into = it->first;
            std::uint64_t slot = 4096;
            if (st.cs.contains(into)) slot = std::max<std::uint64_t>(1, slot_size(st.cs.at(into)));
            const std::uint64_t need = std::max<std::uint64_t>(1, (c.size + slot - 1) / slot);
            MapOp m;
            m.subject = subj;
            m.table = CapRef::of_space(into);
            m.obj = ref;
            m.first = static_cast<std::uint32_t>(pick(0, 3));
            m.count = static_cast<std::uint32_t>(pick(0, 3) ? std::min<std::uint64_t>(need, 1u << 20) : pick(1, 3));
            m.kind = c.type.kind == CapKind::TStructure && pick(0, 1) ? MapKind::Table : MapKind::Memory;
            return m;
        }
        case 7: return UnmapOp{subj, ref};
        case 8: return CopyOp{subj, ref, subjects[pick(0, subjects.size() - 1)], {}};
        case 9: return RevokeOp{subj, ref};
        case 10: return DeleteOp{subj, ref};
        default: {
            // Raw monitor translation aimed at arbitrary capability bytes.
            std::vector<AddressSpaceId> dyn;
            for (const auto& [asid, cons] : st.cs.constraints) dyn.push_back(asid);
            if (dyn.empty()) return NopOp{};
            const AddressSpaceId asid = dyn[pick(0, dyn.size() - 1)];
            const std::uint64_t slot = std::max<std::uint64_t>(4096, slot_size(st.cs.at(asid)));
            return ModifyMapRawOp{asid, {pick(0, 7) * slot, slot}, {c.base.node, c.base.addr - c.base.addr % 4096}};
        }
        }
    }

private:
    std::uint64_t pick(std::uint64_t lo, std::uint64_t hi) {
        return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng_);
    }

    std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Breakpoints: every accept and entry boundary, pulled back through the
// translations that reach it. Between two consecutive breakpoints of a node
// the walker's answer only shifts with the address.

inline std::map<NodeId, std::set<Address>> breakpoints(const DecodingNet& net) {
    std::map<NodeId, std::set<Address>> own;
    std::size_t entries = 0;
    for (const auto& [id, spec] : net.nodes) {
        auto& b = own[id];
        b.insert(0);
        b.insert(kAddressLimit);
        for (const AddrRange& a : spec.accept) b.insert({a.base, a.base + a.size});
        for (const TranslateEntry& e : spec.translate) b.insert({e.src.base, e.src.base + e.src.size});
        entries += spec.translate.size();
    }
    auto cur = own;
    for (std::size_t round = 0; round < entries + 2; ++round) {
        auto next = own;
        for (const auto& [id, spec] : net.nodes)
            for (const TranslateEntry& e : spec.translate)
                for (const Name& d : e.dests) {
                    const auto it = cur.find(d.node);
                    if (it == cur.end()) continue;
                    for (auto b = it->second.upper_bound(d.addr); b != it->second.end() && *b < d.addr + e.src.size; ++b)
                        next[id].insert(e.src.base + (*b - d.addr));
                }
        if (next == cur) break;
        cur = std::move(next);
    }
    return cur;
}

}  // namespace oracle
