#pragma once

// Dynamic configuration layer above the decoding net: the current node of
// every configurable address space, the constraints on what node it may
// take, and the pure ModifyMap transition.

#include <map>
#include <variant>

#include "addrnet/net.hpp"

namespace addrnet {

using AddressSpaceId = NodeId;

struct Unconstrained {
    bool operator==(const Unconstrained&) const = default;
};

/// The node may never change.
struct FixedNode {
    NodeSpec node;
    bool operator==(const FixedNode&) const = default;
};

/// Every entry is aligned to `grain` in base and size and has one dest.
struct GranularityContiguous {
    std::uint64_t grain = 4096;
    bool operator==(const GranularityContiguous&) const = default;
};

/// Every entry covers exactly one naturally-aligned slot of `slot_size`
/// with slot index below `num_slots`, and has one dest.
struct RegisterArray {
    std::uint64_t slot_size = 4096;
    std::uint32_t num_slots = 512;
    bool operator==(const RegisterArray&) const = default;
};

using ConfigConstraint = std::variant<Unconstrained, FixedNode, GranularityContiguous, RegisterArray>;

/// Throws InvalidArgument unless grain/slot sizes are powers of two >= 4096.
void validate_constraint(const ConfigConstraint& c);

/// Granularity at which the constraint lets entries be placed (4096 when
/// unconstrained; 0 for a fixed node).
std::uint64_t slot_size(const ConfigConstraint& c);

struct ConfigSpace {
    std::map<AddressSpaceId, ConfigConstraint> constraints;

    const ConfigConstraint& at(AddressSpaceId asid) const;
    bool contains(AddressSpaceId asid) const { return constraints.count(asid) != 0; }

    bool operator==(const ConfigSpace&) const = default;
};

struct Configuration {
    std::map<AddressSpaceId, NodeSpec> current;

    bool operator==(const Configuration&) const = default;
};

bool in_config_space(const ConfigSpace& cs, AddressSpaceId asid, const NodeSpec& node);

/// Installs src -> [dest] in the node of `asid`, replacing entries fully
/// shadowed by src. Partial overlaps are rejected.
Configuration modify_map(const ConfigSpace& cs, const Configuration& cfg, AddressSpaceId asid,
                         const AddrRange& src, const Name& dest);

/// Removes the entry whose src equals `src` exactly.
Configuration clear_map(const ConfigSpace& cs, const Configuration& cfg, AddressSpaceId asid,
                        const AddrRange& src);

/// Replaces every configured node of `net` by its current spec.
DecodingNet materialize(const DecodingNet& net, const Configuration& cfg);

}  // namespace addrnet
