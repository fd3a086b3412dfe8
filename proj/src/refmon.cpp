#include "addrnet/refmon.hpp"

#include <algorithm>

namespace addrnet {

namespace {

std::uint64_t align_down(std::uint64_t x, std::uint64_t a) { return x - x % a; }

bool is_memory(CapKind k) { return k == CapKind::RAM || k == CapKind::Frame || k == CapKind::TStructure; }

bool overlaps(const MemoryObject& a, const Name& base, std::uint64_t size) {
    return a.base.node == base.node && a.base.addr < base.addr + size && base.addr < a.base.addr + a.size;
}

// Runs fn on a scratch copy and commits only if it returns normally.
template <typename Fn>
auto transact(KernelState& st, Fn&& fn) {
    KernelState next = st;
    if constexpr (std::is_void_v<decltype(fn(next))>) {
        fn(next);
        st = std::move(next);
    } else {
        auto r = fn(next);
        st = std::move(next);
        return r;
    }
}

Dispatcher& dispatcher_mut(KernelState& st, SubjectId s) {
    auto it = st.dispatchers.find(s);
    if (it == st.dispatchers.end()) fail(ErrorKind::UnknownSubject, to_string(s));
    return it->second;
}

Handle insert_cap(KernelState& st, Capability c) {
    Dispatcher& d = dispatcher_mut(st, c.owner);
    c.id = CapId{st.next_cap++};
    st.mdb.insert(c);
    const Handle h = d.next_handle++;
    d.cspace[h] = c.id;
    d.handle_of[c.id] = h;
    return h;
}

void erase_cap(KernelState& st, CapId id) {
    const SubjectId owner = st.mdb.at(id).owner;
    st.mdb.erase(id);
    Dispatcher& d = st.dispatchers.at(owner);
    auto it = d.handle_of.find(id);
    if (it == d.handle_of.end()) return;
    const Handle h = it->second;
    d.cspace.erase(h);
    d.handle_of.erase(it);
    std::erase_if(st.labels, [&](const auto& kv) { return kv.second.subject == owner && kv.second.handle == h; });
}

std::vector<Capability> mapping_caps(const KernelState& st) {
    std::vector<Capability> out;
    st.mdb.for_each([&](const Capability& c) {
        if (c.type.kind == CapKind::Mapping) out.push_back(c);
    });
    return out;
}

std::vector<std::pair<AddrRange, Name>> entries_of(const KernelState& st, const MappingInfo& m) {
    std::vector<std::pair<AddrRange, Name>> out;
    for (const AddrRange& src : entry_sources(st, m))
        out.push_back({src, {m.dest.node, m.dest.addr + (src.base - m.window.base)}});
    return out;
}

void release(KernelState& st, const MappingInfo& m) {
    if (!st.cfg.current.count(m.into) || !st.cs.contains(m.into)) return;
    std::set<AddrRange> live;
    for (const Capability& c : mapping_caps(st)) {
        const auto& other = std::get<MappingInfo>(c.payload);
        if (other.into != m.into) continue;
        for (const AddrRange& r : entry_sources(st, other)) live.insert(r);
    }
    for (const AddrRange& src : entry_sources(st, m)) {
        if (live.count(src)) continue;
        const NodeSpec& node = st.cfg.current.at(m.into);
        const bool present = std::any_of(node.translate.begin(), node.translate.end(),
                                         [&](const TranslateEntry& e) { return e.src == src; });
        if (present) st.cfg = clear_map(st.cs, st.cfg, m.into, src);
    }
}

void kill(KernelState& st, CapId id);

void teardown(KernelState& st, AddressSpaceId asid) {
    auto sp = st.spaces.find(asid);
    if (sp == st.spaces.end()) return;
    const SpaceInfo info = sp->second;
    st.spaces.erase(sp);
    st.derived_from.erase(info.table);

    std::vector<Capability> dependents;
    for (const Capability& c : mapping_caps(st)) {
        const auto& m = std::get<MappingInfo>(c.payload);
        if (m.into == asid || m.dest.node == asid) dependents.push_back(c);
    }
    if (info.derived) {
        for (const Capability& c : dependents) {
            if (!st.mdb.contains(c.id)) continue;
            if (std::get<MappingInfo>(c.payload).into == asid) erase_cap(st, c.id);
            else kill(st, c.id);
        }
        st.net.nodes.erase(asid);
        st.cs.constraints.erase(asid);
        st.cfg.current.erase(asid);
        st.visible.erase(asid);
        std::erase_if(st.trusted, [&](const auto& t) { return t.first == asid; });
    } else {
        for (const Capability& c : dependents) kill(st, c.id);
    }
}

void kill(KernelState& st, CapId id) {
    if (!st.mdb.contains(id)) return;
    const Capability c = st.mdb.at(id);
    erase_cap(st, id);
    if (const auto* m = std::get_if<MappingInfo>(&c.payload)) {
        release(st, *m);
    } else if (const auto* as = std::get_if<AddressSpaceInfo>(&c.payload)) {
        const auto same_space = st.mdb.overlapping(c.base, c.size);
        const bool last = std::none_of(same_space.begin(), same_space.end(), [&](const Capability& x) {
            const auto* o = std::get_if<AddressSpaceInfo>(&x.payload);
            return o && o->asid == as->asid;
        });
        if (last) teardown(st, as->asid);
    }
}

void revoke_descendants(KernelState& st, CapId id) {
    auto ds = st.mdb.descendants(id);
    for (auto it = ds.rbegin(); it != ds.rend(); ++it) kill(st, it->id);
}

// Drops mappings whose owner no longer holds the authority to have made them.
void cascade(KernelState& st) {
    for (;;) {
        const AccessControlMatrix acm = derive_acm(st);
        std::optional<CapId> stale;
        for (const Capability& c : mapping_caps(st)) {
            const MappingRecord r = record_of(c);
            if (!acm_allows(acm, r.subject, InstallMapping{r.object, r.into})) {
                stale = c.id;
                break;
            }
        }
        if (!stale) return;
        kill(st, *stale);
    }
}

bool holds_space(const KernelState& st, SubjectId s, AddressSpaceId asid) {
    return derive_acm(st).holds(s, Right::map(asid));
}

std::optional<AddressSpaceId> allocate_asid(const KernelState& st, SubjectId subj) {
    for (const auto& [h, id] : st.dispatcher(subj).cspace) {
        const Capability& c = st.mdb.at(id);
        const auto* r = std::get_if<AsidRangeInfo>(&c.payload);
        if (!r) continue;
        const auto children = st.mdb.descendants(id);
        for (std::uint64_t a = r->first; a < std::uint64_t(r->first) + r->count && a < kAsidSpace; ++a) {
            const auto asid = static_cast<AddressSpaceId>(a);
            if (st.net.has(asid) || st.spaces.count(asid)) continue;
            const bool taken = std::any_of(children.begin(), children.end(), [&](const Capability& x) {
                return x.base.addr <= a && a < x.base.addr + x.size;
            });
            if (!taken) return asid;
        }
    }
    return std::nullopt;
}

// Local address in `from` at which the canonical range appears contiguously.
std::optional<Address> local_address(const DecodingNet& net, NodeId from, const Name& target, std::uint64_t size) {
    for (const RangePiece& p : resolve_range(net, from, {0, kAddressLimit})) {
        const auto* a = std::get_if<Accepted>(&p.outcome);
        if (!a || a->names.size() != 1) continue;
        const Name& n = a->names.front();
        if (n.node != target.node || target.addr < n.addr) continue;
        if (target.addr - n.addr + size <= p.local.size) return p.local.base + (target.addr - n.addr);
    }
    return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------

const Dispatcher& KernelState::dispatcher(SubjectId s) const {
    auto it = dispatchers.find(s);
    if (it == dispatchers.end()) fail(ErrorKind::UnknownSubject, to_string(s));
    return it->second;
}

std::optional<SubjectId> KernelState::subject_named(const std::string& label) const {
    for (const auto& [id, d] : dispatchers)
        if (d.label == label) return id;
    return std::nullopt;
}

const Capability& KernelState::cap(SubjectId s, Handle h) const {
    const Dispatcher& d = dispatcher(s);
    auto it = d.cspace.find(h);
    if (it == d.cspace.end()) fail(ErrorKind::NotOwner, d.label + " holds no handle #" + std::to_string(h));
    return mdb.at(it->second);
}

Handle KernelState::handle_for(SubjectId s, CapId id) const {
    const Dispatcher& d = dispatcher(s);
    auto it = d.handle_of.find(id);
    if (it == d.handle_of.end()) fail(ErrorKind::NotOwner, d.label + " does not hold that capability");
    return it->second;
}

DecodingNet KernelState::current_net() const { return materialize(net, cfg); }

void add_subject(KernelState& st, SubjectId id, const std::string& label) {
    if (st.dispatchers.count(id) || st.subject_named(label))
        fail(ErrorKind::InvalidArgument, "duplicate subject " + label);
    Dispatcher d;
    d.id = id;
    d.label = label;
    st.dispatchers.emplace(id, std::move(d));
}

Handle grant_root(KernelState& st, Capability cap) { return insert_cap(st, std::move(cap)); }

Handle retype(KernelState& st, SubjectId subj, Handle src, CapType type, std::uint64_t offset, std::uint64_t size) {
    return transact(st, [&](KernelState& s) {
        const Capability from = s.cap(subj, src);
        if (!is_memory(from.type.kind) || !is_memory(type.kind) || from.type.kind == CapKind::TStructure ||
            !type_le(from.type, type))
            fail(ErrorKind::IllegalRetype, to_string(from.type) + " to " + to_string(type));
        if (type.kind == CapKind::TStructure && (type.level < 1 || type.level > 4))
            fail(ErrorKind::IllegalRetype, "table level must be 1..4");
        else if (type.kind != CapKind::TStructure && type.level != 0)
            fail(ErrorKind::IllegalRetype, "only tables carry a level");
        if (size == 0 || offset > from.size || size > from.size - offset)
            fail(ErrorKind::RangeError, "retype outside source object");
        if (type == from.type && size == from.size)
            fail(ErrorKind::IllegalRetype, "retype must change type or shrink");
        const Name base{from.base.node, from.base.addr + offset};
        if (type.kind == CapKind::TStructure && (base.addr % 4096 != 0 || size % 4096 != 0))
            fail(ErrorKind::RangeError, "tables are whole 4KiB pages");
        for (const Capability& x : s.mdb.overlapping(base, size))
            if (is_memory(x.type.kind) && is_descendant(from, x))
                fail(ErrorKind::Conflict, "bytes already retyped as " + to_string(x));
        if (type.kind == CapKind::TStructure)
            for (const MemoryObject& v : visible_memory(s))
                if (overlaps(v, base, size)) fail(ErrorKind::NeverAccessible, "table bytes are reachable");

        Capability c;
        c.type = type;
        c.base = base;
        c.size = size;
        c.owner = subj;
        if (type.kind == CapKind::Frame) c.rights = from.rights & (kAccess | kGrant);
        else if (type.kind == CapKind::RAM) c.rights = from.rights;
        return insert_cap(s, c);
    });
}

Handle derive_address_space(KernelState& st, SubjectId subj, Handle ts, std::optional<NodeId> output) {
    return transact(st, [&](KernelState& s) {
        const Capability t = s.cap(subj, ts);
        if (t.type.kind != CapKind::TStructure) fail(ErrorKind::TypeMismatch, "not a translation structure");
        if (s.derived_from.count(t.base)) fail(ErrorKind::AlreadyDerived, to_string(t.base));
        if (output) {
            if (!s.net.has(*output)) fail(ErrorKind::UnknownNode, "node " + std::to_string(*output));
            auto sp = s.spaces.find(*output);
            if (sp != s.spaces.end() && sp->second.derived)
                fail(ErrorKind::InvalidArgument, "output must be a platform node");
        }
        const auto asid = allocate_asid(s, subj);
        if (!asid) fail(ErrorKind::NoAsidAvailable, s.dispatcher(subj).label);

        const std::uint64_t slot = std::uint64_t{4096} << (9 * (t.type.level - 1));
        s.net.nodes[*asid] = NodeSpec{};
        s.cs.constraints[*asid] = RegisterArray{slot, s.table_slots};
        s.cfg.current[*asid] = NodeSpec{};
        s.spaces[*asid] = SpaceInfo{t.base, output, t.type.level, true};
        s.visible.insert(*asid);
        s.derived_from[t.base] = *asid;

        Capability c;
        c.type = CapType::address_space();
        c.base = t.base;
        c.size = t.size;
        c.rights = kMap;
        c.owner = subj;
        c.payload = AddressSpaceInfo{*asid};
        return insert_cap(s, c);
    });
}

Handle asid_retype(KernelState& st, SubjectId subj, Handle range, std::uint32_t count) {
    return transact(st, [&](KernelState& s) {
        const Capability r = s.cap(subj, range);
        const auto* info = std::get_if<AsidRangeInfo>(&r.payload);
        if (!info) fail(ErrorKind::TypeMismatch, "not an ASID range");
        if (count == 0) fail(ErrorKind::InvalidArgument, "empty ASID range");
        if (count > info->count) fail(ErrorKind::Exhausted, "range holds " + std::to_string(info->count));
        const auto children = s.mdb.descendants(r.id);
        std::optional<std::uint32_t> first;
        for (std::uint64_t a = info->first; a + count <= std::uint64_t(info->first) + info->count; ++a) {
            const bool clash = std::any_of(children.begin(), children.end(), [&](const Capability& x) {
                return x.base.addr < a + count && a < x.base.addr + x.size;
            });
            if (!clash) {
                first = static_cast<std::uint32_t>(a);
                break;
            }
        }
        if (!first) fail(ErrorKind::Exhausted, "no " + std::to_string(count) + " free ids");
        Capability c;
        c.type = CapType::asid_range();
        c.base = {kAsidSpace, *first};
        c.size = count;
        c.rights = r.rights;
        c.owner = subj;
        c.payload = AsidRangeInfo{*first, count};
        return insert_cap(s, c);
    });
}

Handle cap_map(KernelState& st, SubjectId subj, TableRef table, Handle obj, std::uint32_t first,
               std::uint32_t count, MapKind kind) {
    return transact(st, [&](KernelState& s) {
        AddressSpaceId into = table.space;
        bool map_ok = false;
        if (table.handle) {
            const Capability& tc = s.cap(subj, *table.handle);
            if (const auto* as = std::get_if<AddressSpaceInfo>(&tc.payload)) {
                into = as->asid;
                map_ok = has(tc.rights, kMap);
            } else if (tc.type.kind == CapKind::TStructure) {
                auto d = s.derived_from.find(tc.base);
                if (d == s.derived_from.end()) fail(ErrorKind::TypeMismatch, "table has no address space");
                into = d->second;
                map_ok = holds_space(s, subj, into);
            } else {
                fail(ErrorKind::TypeMismatch, "map target must be an address space or table");
            }
        } else {
            map_ok = holds_space(s, subj, into);
        }
        auto sp = s.spaces.find(into);
        if (sp == s.spaces.end()) fail(ErrorKind::UnknownAddressSpace, "address space " + std::to_string(into));
        const SpaceInfo info = sp->second;
        if (!map_ok) fail(ErrorKind::RightsViolation, "no map right on space " + std::to_string(into));

        const Capability o = s.cap(subj, obj);
        const AccessControlMatrix acm = derive_acm(s);
        const std::uint64_t slot = slot_size(s.cs.at(into));
        if (slot == 0) fail(ErrorKind::ConstraintViolation, "space " + std::to_string(into) + " is fixed");
        if (count == 0) fail(ErrorKind::RangeError, "empty window");
        const AddrRange window{std::uint64_t(first) * slot, std::uint64_t(count) * slot};
        if (std::uint64_t(first) * slot >= kAddressLimit || !range_in_bounds(window))
            fail(ErrorKind::RangeError, "window outside address space");

        Name dest;
        Name segment;
        if (kind == MapKind::Table) {
            if (o.type.kind != CapKind::TStructure) fail(ErrorKind::TypeMismatch, "table link needs a table");
            auto d = s.derived_from.find(o.base);
            if (d == s.derived_from.end()) fail(ErrorKind::TypeMismatch, "table has no address space");
            if (o.type.level + 1 != info.level)
                fail(ErrorKind::TypeMismatch, "level " + std::to_string(info.level) + " cannot hold " +
                                                  to_string(o.type));
            if (count != 1) fail(ErrorKind::RangeError, "a table occupies one slot");
            if (!acm.holds(subj, Right::map(d->second)))
                fail(ErrorKind::RightsViolation, "no map right on space " + std::to_string(d->second));
            dest = {d->second, 0};
            segment = {into, window.base};
        } else {
            if (o.type.kind == CapKind::TStructure)
                fail(ErrorKind::NeverAccessible, "tables cannot be mapped as memory");
            const auto* chained = std::get_if<MappingInfo>(&o.payload);
            if (o.type.kind != CapKind::Frame && !chained) fail(ErrorKind::TypeMismatch, to_string(o.type));
            if (chained && chained->table_link) fail(ErrorKind::TypeMismatch, "table links cannot be chained");
            if (info.level != 1) fail(ErrorKind::TypeMismatch, "level " + std::to_string(info.level) + " holds tables");
            if (!acm.holds(subj, Right::grant(Right::access({o.base, o.size}))))
                fail(ErrorKind::RightsViolation, "no grant right on " + to_string(o.base));

            Name at;
            if (chained && (!info.output || *info.output == chained->into)) {
                at = chained->segment;
            } else if (!info.output) {
                at = o.base;
            } else {
                const auto local = local_address(s.current_net(), *info.output, o.base, o.size);
                if (!local) fail(ErrorKind::NoPath, to_string(o.base) + " not reachable from node " +
                                                        std::to_string(*info.output));
                at = {*info.output, *local};
            }
            const Address dest_base = align_down(at.addr, slot);
            const std::uint64_t span = at.addr - dest_base + o.size;
            const std::uint64_t need = span / slot + (span % slot != 0);
            if (!chained && (dest_base != at.addr || o.size % slot != 0))
                fail(ErrorKind::ConstraintViolation, "frame does not fill whole slots");
            if (count != need)
                fail(ErrorKind::ConstraintViolation, "object needs " + std::to_string(need) + " slots");
            dest = {at.node, dest_base};
            segment = {into, window.base + (at.addr - dest_base)};
        }

        const MappingInfo mi{info.table, into, first, count, window, dest, segment, kind == MapKind::Table};
        for (const auto& [src, d] : entries_of(s, mi)) {
            const auto cur = s.cfg.current.find(into);
            bool present = false;
            if (cur != s.cfg.current.end()) {
                for (const auto& e : cur->second.translate) {
                    if (!e.src.overlaps(src)) continue;
                    if (e.src == src && e.dests == std::vector<Name>{d}) present = true;
                    else fail(ErrorKind::Conflict, "space " + std::to_string(into) + " already maps " + to_string(e.src));
                }
            }
            if (!present) s.cfg = modify_map(s.cs, s.cfg, into, src, d);
        }
        if (!exposed_tables(s).empty()) fail(ErrorKind::NeverAccessible, "mapping would expose a table");

        Capability m;
        m.type = CapType::mapping();
        m.base = o.base;
        m.size = o.size;
        m.owner = subj;
        m.payload = mi;
        return insert_cap(s, m);
    });
}

void cap_unmap(KernelState& st, SubjectId subj, Handle mapping) {
    transact(st, [&](KernelState& s) {
        const Capability c = s.cap(subj, mapping);
        if (c.type.kind != CapKind::Mapping) fail(ErrorKind::NotAMapping, to_string(c));
        kill(s, c.id);
        cascade(s);
    });
}

Handle cap_copy(KernelState& st, SubjectId from, Handle cap, SubjectId to) {
    return transact(st, [&](KernelState& s) {
        Capability c = s.cap(from, cap);
        s.dispatcher(to);
        c.owner = to;
        return insert_cap(s, c);
    });
}

void cap_revoke(KernelState& st, SubjectId subj, Handle cap) {
    transact(st, [&](KernelState& s) {
        const Capability c = s.cap(subj, cap);
        revoke_descendants(s, c.id);
        cascade(s);
    });
}

void cap_delete(KernelState& st, SubjectId subj, Handle cap) {
    transact(st, [&](KernelState& s) {
        const Capability c = s.cap(subj, cap);
        const auto near = s.mdb.overlapping(c.base, c.size);
        const bool has_copy = std::any_of(near.begin(), near.end(),
                                          [&](const Capability& x) { return x.id != c.id && same_object(x, c); });
        const auto uncovered = uncovered_memory(s);
        if (!has_copy) revoke_descendants(s, c.id);
        kill(s, c.id);
        cascade(s);
        if (uncovered_memory(s) != uncovered)
            fail(ErrorKind::CoverageViolation, "last capability to " + to_string(c.base));
    });
}

void monitor_modify_map(KernelState& st, AddressSpaceId asid, const AddrRange& src, const Name& dest) {
    transact(st, [&](KernelState& s) {
        s.cfg = modify_map(s.cs, s.cfg, asid, src, dest);
        s.trusted.insert({asid, src});
        if (!exposed_tables(s).empty()) fail(ErrorKind::NeverAccessible, "translation would expose a table");
    });
}

// ---------------------------------------------------------------------------

AccessControlMatrix derive_acm(const KernelState& st) {
    AccessControlMatrix acm;
    for (const auto& [id, d] : st.dispatchers) acm.add_subject(id, d.label);
    st.mdb.for_each([&](const Capability& c) {
        if (c.type.kind == CapKind::Frame) {
            const MemoryObject mem{c.base, c.size};
            if (has(c.rights, kGrant)) acm.add(c.owner, Right::grant(Right::access(mem)));
            if (has(c.rights, kAccess)) acm.add(c.owner, Right::access(mem));
        } else if (const auto* as = std::get_if<AddressSpaceInfo>(&c.payload)) {
            if (has(c.rights, kMap)) acm.add(c.owner, Right::map(as->asid));
        }
    });
    return acm;
}

MappingRecord record_of(const Capability& mapping) {
    const auto& m = std::get<MappingInfo>(mapping.payload);
    ObjectRef object = MemoryObject{mapping.base, mapping.size};
    if (m.table_link) object = AddressSpaceObject{m.dest.node};
    return {mapping.owner, object, m.into, m.window};
}

World world_of(const KernelState& st) {
    World w;
    w.cfg = st.cfg;
    w.trusted = st.trusted;
    for (const Capability& c : mapping_caps(st)) w.records.push_back(record_of(c));
    return w;
}

std::vector<AddrRange> entry_sources(const KernelState& st, const MappingInfo& m) {
    if (!st.cs.contains(m.into)) return {};
    if (!std::holds_alternative<RegisterArray>(st.cs.at(m.into))) return {m.window};
    const std::uint64_t slot = m.window.size / m.count;
    std::vector<AddrRange> out;
    for (std::uint32_t j = 0; j < m.count; ++j) out.push_back({m.window.base + j * slot, slot});
    return out;
}

std::vector<MemoryObject> visible_memory(const KernelState& st) {
    const DecodingNet net = st.current_net();
    std::vector<MemoryObject> out;
    for (NodeId v : st.visible) {
        if (!net.has(v)) continue;
        for (const RangePiece& p : resolve_range(net, v, {0, kAddressLimit}))
            if (const auto* a = std::get_if<Accepted>(&p.outcome))
                for (const Name& n : a->names) out.push_back({n, p.local.size});
    }
    return out;
}

std::vector<Capability> exposed_tables(const KernelState& st) {
    std::vector<Capability> out;
    for (const MemoryObject& v : visible_memory(st))
        for (const Capability& c : st.mdb.overlapping(v.base, v.size))
            if (c.type.kind == CapKind::TStructure &&
                std::none_of(out.begin(), out.end(), [&](const Capability& x) { return x.id == c.id; }))
                out.push_back(c);
    return out;
}

std::vector<MemoryObject> uncovered_memory(const KernelState& st) {
    std::vector<MemoryObject> out;
    for (const MemoryObject& m : st.memory) {
        Address at = m.base.addr;
        const Address end = m.base.addr + m.size;
        for (const Capability& c : st.mdb.overlapping(m.base, m.size)) {
            if (c.base.addr > at) out.push_back({{m.base.node, at}, c.base.addr - at});
            at = std::max(at, c.base.addr + c.size);
            if (at >= end) break;
        }
        if (at < end) out.push_back({{m.base.node, at}, end - at});
    }
    return out;
}

std::vector<AddressSpaceId> spaces_outside_config(const KernelState& st) {
    std::vector<AddressSpaceId> out;
    for (const auto& [asid, node] : st.cfg.current)
        if (!st.cs.contains(asid) || !in_config_space(st.cs, asid, node)) out.push_back(asid);
    return out;
}

}  // namespace addrnet
