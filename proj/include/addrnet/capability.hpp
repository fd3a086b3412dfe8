#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>

#include "addrnet/authority.hpp"
#include "addrnet/net.hpp"

namespace addrnet {

/// Canonical name packed into 64 bits: ASID in the high 16 bits, address in
/// the low 48.
struct PackedName {
    std::uint64_t bits = 0;

    static PackedName pack(const Name& n);
    Name unpack() const;

    auto operator<=>(const PackedName&) const = default;
};

/// Pseudo address space holding ASID ranges; never part of a decoding net.
inline constexpr NodeId kAsidSpace = 0xffff;

enum class CapKind : std::uint8_t { ASIDRange, RAM, Frame, TStructure, AddressSpace, Mapping };

struct CapType {
    CapKind kind = CapKind::RAM;
    std::uint8_t level = 0;  // TStructure only; 1 holds frames, k holds level k-1 tables

    static CapType asid_range() { return {CapKind::ASIDRange, 0}; }
    static CapType ram() { return {CapKind::RAM, 0}; }
    static CapType frame() { return {CapKind::Frame, 0}; }
    static CapType tstructure(std::uint8_t level) { return {CapKind::TStructure, level}; }
    static CapType address_space() { return {CapKind::AddressSpace, 0}; }
    static CapType mapping() { return {CapKind::Mapping, 0}; }

    auto operator<=>(const CapType&) const = default;
};

std::string to_string(CapType t);

/// Partial order of the object hierarchy: a <= b iff b may derive from a.
bool type_le(CapType a, CapType b);

enum Rights : std::uint8_t { kNoRights = 0, kAccess = 1, kMap = 2, kGrant = 4, kAllRights = 7 };

inline Rights operator|(Rights a, Rights b) { return static_cast<Rights>(std::uint8_t(a) | std::uint8_t(b)); }
inline Rights operator&(Rights a, Rights b) { return static_cast<Rights>(std::uint8_t(a) & std::uint8_t(b)); }
inline bool has(Rights set, Rights r) { return (set & r) == r; }

std::string rights_string(Rights r);

enum class CapId : std::uint64_t {};

}  // namespace addrnet

template <>
struct std::hash<addrnet::CapId> {
    std::size_t operator()(addrnet::CapId id) const noexcept {
        return std::hash<std::uint64_t>{}(static_cast<std::uint64_t>(id));
    }
};

namespace addrnet {

struct NoPayload {
    auto operator<=>(const NoPayload&) const = default;
};

/// Bookkeeping for an installed mapping.
struct MappingInfo {
    Name table;              // base of the translation structure written
    AddressSpaceId into = 0; // space whose entries were installed
    std::uint32_t first = 0; // slot range
    std::uint32_t count = 0;
    AddrRange window;        // [first, first+count) slots, in bytes
    Name dest;               // image of window.base
    Name segment;            // where the mapped object's first byte appears in `into`
    bool table_link = false; // child translation structure, not memory

    auto operator<=>(const MappingInfo&) const = default;
};

struct AddressSpaceInfo {
    AddressSpaceId asid = 0;
    auto operator<=>(const AddressSpaceInfo&) const = default;
};

struct AsidRangeInfo {
    std::uint32_t first = 0;
    std::uint32_t count = 0;
    auto operator<=>(const AsidRangeInfo&) const = default;
};

using Payload = std::variant<NoPayload, MappingInfo, AddressSpaceInfo, AsidRangeInfo>;

struct Capability {
    CapId id{};
    CapType type;
    Name base;
    std::uint64_t size = 1;
    Rights rights = kNoRights;
    SubjectId owner{};
    Payload payload;

    bool operator==(const Capability&) const = default;
};

std::string to_string(const Capability& c);

/// Ascending base name; larger object first; ancestor types first; then
/// owner, payload and id so the order is strict.
std::strong_ordering canonical_cmp(const Capability& a, const Capability& b);

struct CanonicalLess {
    bool operator()(const Capability& a, const Capability& b) const { return canonical_cmp(a, b) < 0; }
};

/// Same type over the same bytes: copies of one object.
bool same_object(const Capability& a, const Capability& b);

/// b is a descendant of a.
bool is_descendant(const Capability& a, const Capability& b);

bool overlaps(const Capability& a, const Capability& b);

/// Capabilities occupy one fixed-size slot each.
inline constexpr std::size_t kCapabilityBytes = 64;

std::array<std::byte, kCapabilityBytes> encode(const Capability& c);
Capability decode(const std::array<std::byte, kCapabilityBytes>& bytes);

/// Linear position of a name: node in the high bits, address below.
using Position = unsigned __int128;
inline Position position(const Name& n) { return (Position(n.node) << 66) | Position(n.addr); }
inline Position start_of(const Capability& c) { return position(c.base); }
inline Position end_of(const Capability& c) { return position(c.base) + c.size; }

}  // namespace addrnet
