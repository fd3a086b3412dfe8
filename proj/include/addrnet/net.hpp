#pragma once

// Static decoding-net semantics: address spaces are nodes that accept local
// addresses and/or translate them into names in other spaces.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "addrnet/error.hpp"

namespace addrnet {

using Address = std::uint64_t;
using NodeId = std::uint16_t;

inline constexpr unsigned kAddressBits = 48;
inline constexpr unsigned kNodeIdBits = 16;
inline constexpr std::uint64_t kAddressLimit = std::uint64_t{1} << kAddressBits;

struct Name {
    NodeId node = 0;
    Address addr = 0;

    auto operator<=>(const Name&) const = default;
};

std::string to_string(const Name& n);

/// Half-open byte range [base, base+size). Never empty.
struct AddrRange {
    Address base = 0;
    std::uint64_t size = 1;

    Address end() const { return base + size; }
    bool contains(Address a) const { return a >= base && a - base < size; }
    bool contains(const AddrRange& r) const { return r.base >= base && r.end() <= end(); }
    bool overlaps(const AddrRange& r) const { return base < r.end() && r.base < end(); }

    auto operator<=>(const AddrRange&) const = default;
};

std::string to_string(const AddrRange& r);

/// True if the range is non-empty and lies within the 48-bit address space.
bool range_in_bounds(const AddrRange& r);

/// Maps src.base+k to dest.addr+k for every dest, 0 <= k < src.size.
struct TranslateEntry {
    AddrRange src;
    std::vector<Name> dests;

    auto operator<=>(const TranslateEntry&) const = default;
};

struct NodeSpec {
    std::vector<AddrRange> accept;
    std::vector<TranslateEntry> translate;

    auto operator<=>(const NodeSpec&) const = default;
};

struct DecodingNet {
    std::map<NodeId, NodeSpec> nodes;
    // When set, an address may be both accepted and translated; accept wins.
    bool allow_overlap = false;

    const NodeSpec& node(NodeId id) const;
    bool has(NodeId id) const { return nodes.count(id) != 0; }
    std::size_t translate_entry_count() const;

    bool operator==(const DecodingNet&) const = default;
};

// ---------------------------------------------------------------------------
// Well-formedness

struct Violation {
    enum class Kind { DanglingDest, OverlappingTranslate, AcceptTranslateOverlap, OutOfBounds };
    Kind kind;
    NodeId node;
    AddrRange range;
    std::optional<NodeId> dest_node;

    bool operator==(const Violation&) const = default;
};

std::string to_string(const Violation& v);

std::vector<Violation> net_wellformed(const DecodingNet& net);

/// Node-local part of the well-formedness check (no closed-net check).
std::vector<Violation> node_wellformed(NodeId id, const NodeSpec& spec, bool allow_overlap = false);

// ---------------------------------------------------------------------------
// Decoding

struct Accepts {
    bool operator==(const Accepts&) const = default;
};
struct TranslatesTo {
    std::vector<Name> images;
    bool operator==(const TranslatesTo&) const = default;
};
struct Undecodable {
    Name at;
    bool operator==(const Undecodable&) const = default;
};

using StepResult = std::variant<Accepts, TranslatesTo, Undecodable>;

StepResult decode_step(const DecodingNet& net, const Name& n);

struct Accepted {
    std::vector<Name> names;  // sorted, unique
    bool operator==(const Accepted&) const = default;
};
struct Loop {
    std::vector<Name> cycle;  // first occurrence .. repeat, inclusive
    bool operator==(const Loop&) const = default;
};

using ResolveResult = std::variant<Accepted, Undecodable, Loop>;

std::string to_string(const ResolveResult& r);

/// Branches beyond this many translation hops are reported as a Loop. A
/// path longer than the number of translate entries must reuse an entry.
std::size_t hop_limit(const DecodingNet& net);

/// Follows every translation branch in dest order. Accepted only when every
/// branch accepts; otherwise the first non-accepting outcome.
ResolveResult resolve(const DecodingNet& net, const Name& n);

/// A maximal sub-range on which resolution is offset-preserving: for every
/// address base+k of `local`, resolve gives `outcome` with all names
/// shifted by k.
struct RangePiece {
    AddrRange local;
    ResolveResult outcome;
    bool operator==(const RangePiece&) const = default;
};

std::vector<RangePiece> resolve_range(const DecodingNet& net, NodeId node, const AddrRange& range);

ResolveResult shift(const ResolveResult& r, std::uint64_t by);

}  // namespace addrnet
