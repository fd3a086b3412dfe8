#pragma once

// The reference monitor: dispatchers hold handles to capabilities in the
// MDB, and every operation that changes translation state goes through
// here. Operations give the strong guarantee: on error the state is left
// untouched.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "addrnet/authority.hpp"
#include "addrnet/capability.hpp"
#include "addrnet/config.hpp"
#include "addrnet/mdb.hpp"

namespace addrnet {

using Handle = std::uint32_t;

struct Dispatcher {
    SubjectId id{};
    std::string label;
    std::map<Handle, CapId> cspace;
    std::map<CapId, Handle> handle_of;
    Handle next_handle = 1;

    bool operator==(const Dispatcher&) const = default;
};

/// A space that can receive mappings.
struct SpaceInfo {
    Name table;                   // base of its translation structure
    std::optional<NodeId> output; // entries target addresses local to this node
    std::uint8_t level = 1;
    bool derived = false;         // created by derive-as; removed on teardown

    bool operator==(const SpaceInfo&) const = default;
};

struct HandleLabel {
    SubjectId subject{};
    Handle handle = 0;
    bool operator==(const HandleLabel&) const = default;
};

struct KernelState {
    DecodingNet net;    // static net; configurable nodes are overridden by cfg
    ConfigSpace cs;
    Configuration cfg;
    std::map<SubjectId, Dispatcher> dispatchers;
    Mdb mdb;
    std::map<AddressSpaceId, SpaceInfo> spaces;
    std::set<NodeId> visible;  // spaces subjects can issue addresses from
    std::set<std::pair<AddressSpaceId, AddrRange>> trusted;
    std::vector<MemoryObject> memory;
    std::map<Name, AddressSpaceId> derived_from;  // table base -> its space
    std::map<std::string, HandleLabel> labels;
    std::map<std::string, NodeId> node_labels;
    std::set<NodeId> kernel_managed;
    std::uint64_t next_cap = 1;
    std::uint32_t table_slots = 512;

    bool operator==(const KernelState&) const = default;

    const Dispatcher& dispatcher(SubjectId s) const;
    std::optional<SubjectId> subject_named(const std::string& label) const;
    /// The capability behind a subject's handle; NotOwner if there is none.
    const Capability& cap(SubjectId s, Handle h) const;
    Handle handle_for(SubjectId s, CapId id) const;
    /// Current net: static nodes plus configured ones.
    DecodingNet current_net() const;
};

/// Adds a dispatcher; InvalidArgument if the id or label is taken.
void add_subject(KernelState& st, SubjectId id, const std::string& label);

/// Installs a capability without any checks (boot only). Returns its handle.
Handle grant_root(KernelState& st, Capability cap);

Handle retype(KernelState& st, SubjectId subj, Handle src, CapType type, std::uint64_t offset,
              std::uint64_t size);

Handle derive_address_space(KernelState& st, SubjectId subj, Handle ts,
                            std::optional<NodeId> output = std::nullopt);

Handle asid_retype(KernelState& st, SubjectId subj, Handle range, std::uint32_t count);

/// Which space a map targets: a handle to its AddressSpace or table
/// capability, or the space itself (any AddressSpace capability the
/// subject holds then supplies the map right).
struct TableRef {
    std::optional<Handle> handle;
    AddressSpaceId space = 0;

    static TableRef of(Handle h) { return {h, 0}; }
    static TableRef of_space(AddressSpaceId s) { return {std::nullopt, s}; }
};

enum class MapKind { Memory, Table };

Handle cap_map(KernelState& st, SubjectId subj, TableRef table, Handle obj, std::uint32_t first,
               std::uint32_t count, MapKind kind = MapKind::Memory);

void cap_unmap(KernelState& st, SubjectId subj, Handle mapping);

Handle cap_copy(KernelState& st, SubjectId from, Handle cap, SubjectId to);

void cap_revoke(KernelState& st, SubjectId subj, Handle cap);

void cap_delete(KernelState& st, SubjectId subj, Handle cap);

/// Boot-time translation installed by the monitor itself.
void monitor_modify_map(KernelState& st, AddressSpaceId asid, const AddrRange& src, const Name& dest);

// ---------------------------------------------------------------------------
// Views and checks

/// Rows of the access matrix read off capability holdings.
AccessControlMatrix derive_acm(const KernelState& st);

MappingRecord record_of(const Capability& mapping);

World world_of(const KernelState& st);

/// Source ranges of the translate entries a mapping installs.
std::vector<AddrRange> entry_sources(const KernelState& st, const MappingInfo& m);

/// Ranges of canonical memory reachable from subject-visible spaces.
std::vector<MemoryObject> visible_memory(const KernelState& st);

/// Translation structures whose bytes can be reached from a visible space.
std::vector<Capability> exposed_tables(const KernelState& st);

/// Declared memory not covered by any capability.
std::vector<MemoryObject> uncovered_memory(const KernelState& st);

/// Configured spaces whose node lies outside their configuration space.
std::vector<AddressSpaceId> spaces_outside_config(const KernelState& st);

}  // namespace addrnet
