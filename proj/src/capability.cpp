#include "addrnet/capability.hpp"

#include <bit>
#include <cstring>

namespace addrnet {

PackedName PackedName::pack(const Name& n) {
    if (n.addr >= kAddressLimit) fail(ErrorKind::RangeError, "address exceeds 48 bits: " + to_string(n));
    return {(std::uint64_t(n.node) << kAddressBits) | n.addr};
}

Name PackedName::unpack() const {
    return {static_cast<NodeId>(bits >> kAddressBits), bits & (kAddressLimit - 1)};
}

std::string to_string(CapType t) {
    switch (t.kind) {
    case CapKind::ASIDRange: return "asid-range";
    case CapKind::RAM: return "ram";
    case CapKind::Frame: return "frame";
    case CapKind::TStructure: return "tstructure:" + std::to_string(t.level);
    case CapKind::AddressSpace: return "address-space";
    case CapKind::Mapping: return "mapping";
    }
    return "?";
}

bool type_le(CapType a, CapType b) {
    if (a == b) return true;
    switch (a.kind) {
    case CapKind::ASIDRange: return false;
    case CapKind::RAM: return b.kind != CapKind::ASIDRange;
    case CapKind::Frame: return b.kind == CapKind::Mapping;
    case CapKind::TStructure: return b.kind == CapKind::AddressSpace || b.kind == CapKind::Mapping;
    case CapKind::AddressSpace:
    case CapKind::Mapping: return false;
    }
    return false;
}

std::string rights_string(Rights r) {
    std::string s;
    if (has(r, kAccess)) s += 'a';
    if (has(r, kMap)) s += 'm';
    if (has(r, kGrant)) s += 'g';
    return s.empty() ? "-" : s;
}

std::string to_string(const Capability& c) {
    std::string s = to_string(c.type) + "@" + to_string(c.base) + "+" + std::to_string(c.size) + " " +
                    rights_string(c.rights) + " " + to_string(c.owner);
    if (const auto* m = std::get_if<MappingInfo>(&c.payload))
        s += " into " + std::to_string(m->into) + to_string(m->window) + "->" + to_string(m->dest);
    else if (const auto* as = std::get_if<AddressSpaceInfo>(&c.payload))
        s += " asid " + std::to_string(as->asid);
    return s;
}

std::strong_ordering canonical_cmp(const Capability& a, const Capability& b) {
    if (auto c = a.base <=> b.base; c != 0) return c;
    if (a.size != b.size) return a.size > b.size ? std::strong_ordering::less : std::strong_ordering::greater;
    if (auto c = a.type <=> b.type; c != 0) return c;
    if (auto c = a.owner <=> b.owner; c != 0) return c;
    if (a.payload != b.payload) return a.payload < b.payload ? std::strong_ordering::less : std::strong_ordering::greater;
    return a.id <=> b.id;
}

bool same_object(const Capability& a, const Capability& b) {
    return a.type == b.type && a.base == b.base && a.size == b.size;
}

bool is_descendant(const Capability& a, const Capability& b) {
    // Mapping capabilities are leaves.
    if (a.type.kind == CapKind::Mapping) return false;
    if (a.base.node != b.base.node) return false;
    if (start_of(b) < start_of(a) || end_of(b) > end_of(a)) return false;
    if (!type_le(a.type, b.type)) return false;
    return !same_object(a, b);
}

bool overlaps(const Capability& a, const Capability& b) {
    return start_of(a) < end_of(b) && start_of(b) < end_of(a);
}

// ---------------------------------------------------------------------------
// 64-byte slot layout (little endian):
//   0 base (packed)  8 size  16 kind  17 level  18 rights  19 payload tag
//   20 owner  24.. payload
// The mapping payload stores the window as packed (into, base) plus slot
// shift and count; the table-link flag rides in the shift byte's top bit.

namespace {

template <typename T>
void put(std::array<std::byte, kCapabilityBytes>& out, std::size_t at, T v, std::size_t width = sizeof(T)) {
    for (std::size_t i = 0; i < width; ++i) out[at + i] = static_cast<std::byte>((std::uint64_t(v) >> (8 * i)) & 0xff);
}

std::uint64_t get(const std::array<std::byte, kCapabilityBytes>& in, std::size_t at, std::size_t width) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v |= std::uint64_t(std::to_integer<unsigned>(in[at + i])) << (8 * i);
    return v;
}

}  // namespace

std::array<std::byte, kCapabilityBytes> encode(const Capability& c) {
    std::array<std::byte, kCapabilityBytes> out{};
    put(out, 0, PackedName::pack(c.base).bits);
    put(out, 8, c.size);
    put(out, 16, std::uint8_t(c.type.kind));
    put(out, 17, c.type.level);
    put(out, 18, std::uint8_t(c.rights));
    put(out, 19, std::uint8_t(c.payload.index()));
    put(out, 20, static_cast<std::uint32_t>(c.owner));
    if (const auto* m = std::get_if<MappingInfo>(&c.payload)) {
        const std::uint64_t slot = m->count ? m->window.size / m->count : 0;
        if (m->count == 0 || m->count >= (1u << 24) || !std::has_single_bit(slot) ||
            m->window.base != std::uint64_t(m->first) * slot || m->segment.node != m->into)
            fail(ErrorKind::RangeError, "mapping payload not encodable");
        const auto shift = static_cast<std::uint8_t>(std::countr_zero(slot));
        put(out, 24, PackedName::pack(m->table).bits);
        put(out, 32, PackedName::pack({m->into, m->window.base}).bits);
        put(out, 40, std::uint8_t(shift | (m->table_link ? 0x80 : 0)));
        put(out, 41, m->count, 3);
        put(out, 44, PackedName::pack(m->dest).bits);
        put(out, 52, m->segment.addr, 6);
    } else if (const auto* as = std::get_if<AddressSpaceInfo>(&c.payload)) {
        put(out, 24, as->asid);
    } else if (const auto* r = std::get_if<AsidRangeInfo>(&c.payload)) {
        put(out, 24, r->first);
        put(out, 28, r->count);
    }
    return out;
}

Capability decode(const std::array<std::byte, kCapabilityBytes>& in) {
    Capability c;
    c.base = PackedName{get(in, 0, 8)}.unpack();
    c.size = get(in, 8, 8);
    c.type = {static_cast<CapKind>(get(in, 16, 1)), static_cast<std::uint8_t>(get(in, 17, 1))};
    c.rights = static_cast<Rights>(get(in, 18, 1));
    c.owner = static_cast<SubjectId>(get(in, 20, 4));
    switch (get(in, 19, 1)) {
    case 1: {
        MappingInfo m;
        m.table = PackedName{get(in, 24, 8)}.unpack();
        const Name window = PackedName{get(in, 32, 8)}.unpack();
        const auto flags = get(in, 40, 1);
        const unsigned shift = flags & 0x7f;
        m.table_link = (flags & 0x80) != 0;
        m.into = window.node;
        m.count = static_cast<std::uint32_t>(get(in, 41, 3));
        m.window = {window.addr, std::uint64_t(m.count) << shift};
        m.first = static_cast<std::uint32_t>(window.addr >> shift);
        m.dest = PackedName{get(in, 44, 8)}.unpack();
        m.segment = {m.into, get(in, 52, 6)};
        c.payload = m;
        break;
    }
    case 2: c.payload = AddressSpaceInfo{static_cast<AddressSpaceId>(get(in, 24, 2))}; break;
    case 3: c.payload = AsidRangeInfo{static_cast<std::uint32_t>(get(in, 24, 4)), static_cast<std::uint32_t>(get(in, 28, 4))}; break;
    default: c.payload = NoPayload{}; break;
    }
    return c;
}

}  // namespace addrnet
