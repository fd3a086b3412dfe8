#include "addrnet/topo.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <limits>

namespace addrnet {

std::uint32_t TopologyGraph::index(NodeId id) const {
    auto it = index_of.find(id);
    if (it == index_of.end()) fail(ErrorKind::UnknownNode, "node " + std::to_string(id));
    return it->second;
}

TopologyGraph build_graph(const DecodingNet& net, const ConfigSpace& cs, const std::vector<Edge>& declared,
                          const std::set<NodeId>& kernel_managed) {
    TopologyGraph g;
    g.n = net.nodes.size();
    g.words = (g.n + 63) / 64;
    g.adj.assign(g.n * g.words, 0);
    for (const auto& [id, spec] : net.nodes) {
        g.index_of[id] = static_cast<std::uint32_t>(g.node_to_asid.size());
        g.node_to_asid.push_back(id);
        const bool configurable = cs.contains(id) && !std::holds_alternative<FixedNode>(cs.at(id));
        g.kind.push_back(configurable          ? NodeKind::Configurable
                         : !spec.accept.empty() ? NodeKind::Accepting
                                                : NodeKind::Fixed);
        g.kernel_managed.push_back(kernel_managed.count(id) != 0);
    }
    for (const auto& [id, spec] : net.nodes)
        for (const auto& e : spec.translate)
            for (const auto& d : e.dests)
                if (d.node != id && net.has(d.node)) g.add_edge(g.index(id), g.index(d.node));
    for (const auto& [u, v] : declared) g.add_edge(g.index(u), g.index(v));
    return g;
}

namespace {

RouteBlueprint blueprint(const TopologyGraph& g, const std::vector<std::uint32_t>& idx_path) {
    RouteBlueprint bp;
    for (std::uint32_t i : idx_path) {
        bp.path.push_back(g.node_to_asid[i]);
        if (g.kind[i] == NodeKind::Configurable && !g.kernel_managed[i]) bp.hops.push_back(g.node_to_asid[i]);
    }
    return bp;
}

// Reused across queries; a bumped epoch invalidates every entry at once.
struct Workspace {
    std::vector<std::uint32_t> dist;
    std::vector<std::uint32_t> parent;
    std::vector<std::uint32_t> seen;
    std::vector<std::uint32_t> closed;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> heap;
    std::uint32_t epoch = 0;

    void begin(std::size_t n) {
        if (seen.size() < n) {
            dist.resize(n);
            parent.resize(n);
            seen.resize(n, 0);
            closed.resize(n, 0);
        }
        if (++epoch == 0) {
            std::fill(seen.begin(), seen.end(), 0);
            std::fill(closed.begin(), closed.end(), 0);
            epoch = 1;
        }
        heap.clear();
    }
};

}  // namespace

RouteBlueprint route(const TopologyGraph& g, NodeId src, NodeId dst) {
    const std::uint32_t s = g.index(src);
    const std::uint32_t t = g.index(dst);
    thread_local Workspace w;
    w.begin(g.n);
    const auto later = std::greater<>{};
    w.dist[s] = 0;
    w.parent[s] = s;
    w.seen[s] = w.epoch;
    w.heap.push_back({0, s});
    while (!w.heap.empty()) {
        std::pop_heap(w.heap.begin(), w.heap.end(), later);
        const auto [d, u] = w.heap.back();
        w.heap.pop_back();
        if (w.closed[u] == w.epoch) continue;
        w.closed[u] = w.epoch;
        if (u == t) break;
        const std::uint64_t* row = &g.adj[u * g.words];
        for (std::size_t k = 0; k < g.words; ++k) {
            for (std::uint64_t bits = row[k]; bits; bits &= bits - 1) {
                const auto v = static_cast<std::uint32_t>(k * 64 + std::countr_zero(bits));
                const std::uint32_t nd = d + 1;
                if (w.seen[v] != w.epoch || nd < w.dist[v]) {
                    w.seen[v] = w.epoch;
                    w.dist[v] = nd;
                    w.parent[v] = u;
                    w.heap.push_back({nd, v});
                    std::push_heap(w.heap.begin(), w.heap.end(), later);
                } else if (nd == w.dist[v] && u < w.parent[v]) {
                    w.parent[v] = u;
                }
            }
        }
    }
    if (w.seen[t] != w.epoch) fail(ErrorKind::NoPath, std::to_string(src) + " -> " + std::to_string(dst));
    std::vector<std::uint32_t> path{t};
    while (path.back() != s) path.push_back(w.parent[path.back()]);
    std::reverse(path.begin(), path.end());
    return blueprint(g, path);
}

RouteBlueprint route_reference(const TopologyGraph& g, NodeId src, NodeId dst) {
    const std::uint32_t s = g.index(src);
    const std::uint32_t t = g.index(dst);
    constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> dist(g.n, kInf);
    std::deque<std::uint32_t> queue{s};
    dist[s] = 0;
    while (!queue.empty()) {
        const std::uint32_t u = queue.front();
        queue.pop_front();
        for (std::uint32_t v = 0; v < g.n; ++v) {
            if (g.edge(u, v) && dist[v] == kInf) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    if (dist[t] == kInf) fail(ErrorKind::NoPath, std::to_string(src) + " -> " + std::to_string(dst));
    std::vector<std::uint32_t> path{t};
    while (path.back() != s) {
        const std::uint32_t v = path.back();
        for (std::uint32_t u = 0; u < g.n; ++u) {
            if (dist[u] != kInf && dist[u] + 1 == dist[v] && g.edge(u, v)) {
                path.push_back(u);
                break;
            }
        }
    }
    std::reverse(path.begin(), path.end());
    return blueprint(g, path);
}

std::size_t graph_diameter(const TopologyGraph& g) {
    std::size_t best = 0;
    std::vector<std::uint32_t> dist(g.n);
    std::vector<std::uint32_t> frontier;
    std::vector<std::uint32_t> next;
    for (std::uint32_t s = 0; s < g.n; ++s) {
        std::fill(dist.begin(), dist.end(), std::numeric_limits<std::uint32_t>::max());
        dist[s] = 0;
        frontier.assign(1, s);
        std::uint32_t level = 0;
        while (!frontier.empty()) {
            next.clear();
            for (std::uint32_t u : frontier) {
                const std::uint64_t* row = &g.adj[u * g.words];
                for (std::size_t k = 0; k < g.words; ++k)
                    for (std::uint64_t bits = row[k]; bits; bits &= bits - 1) {
                        const auto v = static_cast<std::uint32_t>(k * 64 + std::countr_zero(bits));
                        if (dist[v] != std::numeric_limits<std::uint32_t>::max()) continue;
                        dist[v] = level + 1;
                        next.push_back(v);
                    }
            }
            if (!next.empty()) ++level;
            frontier.swap(next);
        }
        best = std::max<std::size_t>(best, level);
    }
    return best;
}

namespace {

std::uint64_t space_limit(const ConfigConstraint& c) {
    if (const auto* r = std::get_if<RegisterArray>(&c)) return r->slot_size * r->num_slots;
    return kAddressLimit;
}

// Lowest base, a multiple of `align`, where [base, base+len) is free.
std::optional<Address> lowest_free(const NodeSpec& node, std::uint64_t align, std::uint64_t len, std::uint64_t limit) {
    std::vector<Address> candidates{0};
    for (const auto& e : node.translate) candidates.push_back((e.src.end() + align - 1) / align * align);
    std::sort(candidates.begin(), candidates.end());
    for (Address b : candidates) {
        if (b > limit || len > limit - b) continue;
        const AddrRange want{b, len};
        if (std::none_of(node.translate.begin(), node.translate.end(),
                         [&](const TranslateEntry& e) { return e.src.overlaps(want); }))
            return b;
    }
    return std::nullopt;
}

}  // namespace

std::vector<MonitorOp> blueprint_to_ops(const RouteBlueprint& bp, const std::string& subject, const CapRef& obj,
                                        const KernelState& st) {
    std::vector<MonitorOp> ops;
    if (bp.hops.empty()) return ops;
    const auto subj = st.subject_named(subject);
    if (!subj) fail(ErrorKind::UnknownSubject, subject);
    Handle h = obj.handle;
    if (obj.kind == CapRef::Kind::Label) {
        auto it = st.labels.find(obj.label);
        if (it == st.labels.end()) fail(ErrorKind::NotOwner, "no capability labelled " + obj.label);
        h = it->second.handle;
        if (it->second.subject != *subj) fail(ErrorKind::NotOwner, obj.label);
    }
    const std::uint64_t size = st.cap(*subj, h).size;

    CapRef current = obj;
    for (std::size_t i = bp.hops.size(); i-- > 0;) {
        const AddressSpaceId asid = bp.hops[i];
        const ConfigConstraint& c = st.cs.at(asid);
        const std::uint64_t slot = slot_size(c);
        const std::uint64_t upstream = i > 0 ? slot_size(st.cs.at(bp.hops[i - 1])) : slot;
        const std::uint64_t align = std::max(slot, upstream);
        const std::uint64_t len = (size + slot - 1) / slot * slot;
        NodeSpec empty;
        auto cur = st.cfg.current.find(asid);
        const NodeSpec& node = cur == st.cfg.current.end() ? empty : cur->second;
        const Address base = lowest_free(node, align, len, space_limit(c)).value_or(0);

        MapOp op;
        op.subject = subject;
        op.table = CapRef::of_space(asid);
        op.obj = current;
        op.first = static_cast<std::uint32_t>(base / slot);
        op.count = static_cast<std::uint32_t>(len / slot);
        op.bind = "bp" + std::to_string(ops.size());
        current = CapRef::named(op.bind);
        ops.push_back(op);
    }
    return ops;
}

ResolveResult resolve_full(const DecodingNet& net, const Configuration& cfg, const Name& n) {
    return resolve(materialize(net, cfg), n);
}

}  // namespace addrnet
