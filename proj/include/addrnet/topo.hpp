#pragma once

// Topology of address spaces for model queries: which configurable spaces
// lie between a source space and the space holding some object.

#include <cstdint>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "addrnet/config.hpp"
#include "addrnet/trace.hpp"

namespace addrnet {

enum class NodeKind { Configurable, Fixed, Accepting };

/// Unit-weight adjacency matrix, one bitset row per node. Indices follow
/// ascending node id.
struct TopologyGraph {
    std::size_t n = 0;
    std::size_t words = 0;  // 64-bit words per row
    std::vector<NodeKind> kind;
    std::vector<bool> kernel_managed;
    std::vector<NodeId> node_to_asid;
    std::unordered_map<NodeId, std::uint32_t> index_of;
    std::vector<std::uint64_t> adj;

    std::uint32_t index(NodeId id) const;
    bool edge(std::size_t u, std::size_t v) const { return (adj[u * words + v / 64] >> (v % 64)) & 1u; }
    void add_edge(std::size_t u, std::size_t v) { adj[u * words + v / 64] |= std::uint64_t{1} << (v % 64); }
};

using Edge = std::pair<NodeId, NodeId>;

/// Edges come from static translate entries plus the declared reachability
/// of configurable spaces.
TopologyGraph build_graph(const DecodingNet& net, const ConfigSpace& cs, const std::vector<Edge>& declared = {},
                          const std::set<NodeId>& kernel_managed = {});

struct RouteBlueprint {
    std::vector<NodeId> path;  // src .. dst
    std::vector<NodeId> hops;  // configurable, not kernel-managed, in path order

    bool operator==(const RouteBlueprint&) const = default;
};

/// Dijkstra over the matrix; among equal-length paths each node's
/// predecessor is the smallest index.
RouteBlueprint route(const TopologyGraph& g, NodeId src, NodeId dst);

/// Breadth-first search that rebuilds its working set and rescans whole
/// matrix rows on every query.
RouteBlueprint route_reference(const TopologyGraph& g, NodeId src, NodeId dst);

/// Longest finite shortest path.
std::size_t graph_diameter(const TopologyGraph& g);

/// Map operations, destination side first, that make `obj` reachable from
/// the blueprint's source. Each result is labelled bp0, bp1, ... and the
/// next hop maps the previous one's segment.
std::vector<MonitorOp> blueprint_to_ops(const RouteBlueprint& bp, const std::string& subject, const CapRef& obj,
                                        const KernelState& st);

ResolveResult resolve_full(const DecodingNet& net, const Configuration& cfg, const Name& n);

}  // namespace addrnet
