#pragma once

// Platform descriptions: nodes, configuration constraints, subjects and the
// capabilities they start with. A spec boots into a KernelState.
//
// File format, one declaration per line, '#' starts a comment:
//
//   addrnet-platform 1
//   name <word>
//   table-slots <n>
//   allow-overlap yes|no
//   [nodes]
//   node <id> <label> [dynamic] [kernel-managed] [visible]
//   accept <id> <base> <size>
//   translate <id> <base> <size> <node>:<addr>...
//   constraint <id> unconstrained | fixed | granularity <g> | register-array <slot> <count>
//   output <id> <node>
//   [edges]
//   edge <from> <to>
//   [subjects]
//   subject <label>
//   [memory]
//   memory <node> <base> <size>
//   [caps]
//   cap <label> <type> <node>:<addr> <size> <rights> <owner> [asid=<n>]
//   [acm]
//   acm <subject> [grant]... access <node>:<addr> <size>
//   acm <subject> [grant]... map <asid>
//
// ASID ranges live in node 65535: base 65535:<first>, size <count>.
// Rights are '-' or any of the letters a (access), m (map), g (grant).

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "addrnet/refmon.hpp"
#include "addrnet/topo.hpp"

namespace addrnet {

struct NodeDecl {
    NodeId id = 0;
    std::string label;
    bool dynamic = false;
    bool kernel_managed = false;
    bool visible = false;
    std::optional<NodeId> output;
    ConfigConstraint constraint = Unconstrained{};
    NodeSpec spec;  // initial node; the whole node when not dynamic

    bool operator==(const NodeDecl&) const = default;
};

struct CapDecl {
    std::string label;
    CapType type;
    Name base;
    std::uint64_t size = 0;
    Rights rights = kNoRights;
    std::string owner;
    std::optional<AddressSpaceId> asid;  // address-space caps

    bool operator==(const CapDecl&) const = default;
};

struct AcmDecl {
    std::string subject;
    Right right;

    bool operator==(const AcmDecl&) const = default;
};

struct PlatformSpec {
    std::string name;
    std::uint32_t table_slots = 512;
    bool allow_overlap = false;
    std::vector<NodeDecl> nodes;  // ascending id
    std::vector<Edge> edges;
    std::vector<std::string> subjects;
    std::vector<MemoryObject> memory;
    std::vector<CapDecl> caps;
    std::vector<AcmDecl> acm;

    bool operator==(const PlatformSpec&) const = default;

    const NodeDecl& node(NodeId id) const;
    /// A node label or a decimal id.
    NodeId node_named(const std::string& s) const;
};

/// Parses and validates. ParseError carries `line:column`; SemanticError
/// covers duplicates, dangling references, malformed nets and memory left
/// without a capability.
PlatformSpec load_platform(std::string_view text);
PlatformSpec parse_platform(std::string_view text);
void validate_platform(const PlatformSpec& spec);
std::string print_platform(const PlatformSpec& spec);

DecodingNet net_of(const PlatformSpec& spec);
ConfigSpace config_space_of(const PlatformSpec& spec);
TopologyGraph graph_of(const PlatformSpec& spec);

/// Subject 0 is the monitor; platform subjects follow in declaration order.
KernelState boot(const PlatformSpec& spec);

// ---------------------------------------------------------------------------
// Builtins

/// xeon_phi, pcie_scale:<n>, arm_uniform, arm_swapped, arm_private,
/// arm_private_swapped.
PlatformSpec builtin(const std::string& name);
std::vector<std::string> builtin_names();

PlatformSpec xeon_phi();
PlatformSpec pcie_scale(std::size_t devices);

struct ArmLayout {
    bool swapped = false;
    bool priv = false;
    Address dram_local = 0x80000000;      // cluster-local base of DRAM
    std::uint64_t dram_size = 0x80000000; // split into two halves when swapped
    Address priv0_local = 0x40000000;
    Address priv1_local = 0x50000000;
    std::uint64_t priv_size = 0x10000000;
};

PlatformSpec arm(const std::string& name, const ArmLayout& layout);

/// Node ids of the ARM builtins.
inline constexpr NodeId kArmCluster0 = 1;
inline constexpr NodeId kArmCluster1 = 2;
inline constexpr NodeId kArmDram = 10;
inline constexpr NodeId kArmPriv0 = 11;
inline constexpr NodeId kArmPriv1 = 12;
inline constexpr NodeId kArmSram = 13;

/// Monitor initialization shared by every ARM builtin.
std::vector<MonitorOp> arm_init_trace();

// ---------------------------------------------------------------------------
// Precomputed translations

struct XlateEntry {
    AddrRange local;
    Name canonical;

    bool operator==(const XlateEntry&) const = default;
};

struct XlateTable {
    NodeId core = 0;
    std::vector<XlateEntry> forward;  // by local base
    std::vector<XlateEntry> inverse;  // by canonical name

    std::optional<Name> to_canonical(Address local) const;
    std::optional<Address> to_local(const Name& canonical) const;
};

/// DynamicOnPath if the core reaches a configurable node.
XlateTable gen_xlate(const PlatformSpec& spec, NodeId core);

}  // namespace addrnet
