#include "addrnet/stats.hpp"

#include <algorithm>
#include <chrono>

namespace addrnet {

namespace {

std::uint64_t managed_bytes(const PlatformSpec& spec) {
    std::uint64_t total = 0;
    for (const MemoryObject& m : spec.memory) total += m.size;
    return total;
}

StatsReport report(std::uint64_t count, const Mdb& mdb, const PlatformSpec& spec) {
    StatsReport r;
    r.capability_count = count;
    r.bytes_of_capabilities = count * kCapabilityBytes;
    r.managed_memory_bytes = managed_bytes(spec);
    r.overhead_ratio = r.managed_memory_bytes == 0
                           ? 0.0
                           : static_cast<double>(r.bytes_of_capabilities) / static_cast<double>(r.managed_memory_bytes);
    r.mdb_depth = mdb.height();
    r.graph_diameter = graph_diameter(graph_of(spec));
    return r;
}

}  // namespace

StatsReport stats_of(const KernelState& st, const PlatformSpec& spec) { return report(st.mdb.size(), st.mdb, spec); }

StatsReport worst_case_stats(const PlatformSpec& spec) {
    std::vector<MemoryObject> memory = spec.memory;
    std::sort(memory.begin(), memory.end(), [](const MemoryObject& a, const MemoryObject& b) { return a.base < b.base; });
    std::uint64_t pages = 0;
    for (const MemoryObject& m : memory) pages += (m.size + 4095) / 4096;
    std::vector<Capability> frames;
    frames.reserve(pages);
    std::uint64_t id = 1;
    for (const MemoryObject& m : memory) {
        for (std::uint64_t off = 0; off < m.size; off += 4096) {
            Capability c;
            c.id = CapId{id++};
            c.type = CapType::frame();
            c.base = {m.base.node, m.base.addr + off};
            c.size = std::min<std::uint64_t>(4096, m.size - off);
            c.rights = kAccess | kGrant;
            frames.push_back(c);
        }
    }
    const Mdb mdb = Mdb::from_sorted(std::move(frames));
    return report(mdb.size(), mdb, spec);
}

namespace {

volatile std::size_t g_sink = 0;

template <typename Fn>
std::pair<std::uint64_t, std::uint64_t> measure(const BenchConfig& cfg, Fn&& query) {
    using clock = std::chrono::steady_clock;
    std::size_t sink = 0;
    for (std::size_t i = 0; i < cfg.warmup; ++i) sink += query();
    std::vector<std::uint64_t> per_query;
    per_query.reserve(cfg.samples);
    for (std::size_t s = 0; s < cfg.samples; ++s) {
        const auto t0 = clock::now();
        for (std::size_t b = 0; b < cfg.batch; ++b) sink += query();
        const auto t1 = clock::now();
        const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
        per_query.push_back(static_cast<std::uint64_t>(ns) / cfg.batch);
    }
    g_sink = g_sink + sink;
    std::sort(per_query.begin(), per_query.end());
    const std::size_t n = per_query.size();
    return {per_query[n / 2], per_query[std::min(n - 1, n * 95 / 100)]};
}

}  // namespace

std::vector<BenchRow> bench_scale(const BenchConfig& cfg) {
    if (cfg.min_devices < 1 || cfg.max_devices < cfg.min_devices || cfg.step == 0 || cfg.samples == 0 ||
        cfg.batch == 0)
        fail(ErrorKind::InvalidArgument, "bad benchmark range");
    std::vector<BenchRow> rows;
    for (std::size_t n = cfg.min_devices; n <= cfg.max_devices; n += cfg.step) {
        const PlatformSpec spec = pcie_scale(n);
        const TopologyGraph g = graph_of(spec);
        const NodeId src = static_cast<NodeId>(16 + 2 * (n - 1));
        const NodeId dst = 2;
        const auto m = measure(cfg, [&] { return route(g, src, dst).hops.size(); });
        rows.push_back({n, "matrix", m.first, m.second});
        const auto r = measure(cfg, [&] { return route_reference(g, src, dst).hops.size(); });
        rows.push_back({n, "reference", r.first, r.second});
    }
    return rows;
}

std::string bench_csv_row(const BenchRow& r) {
    return std::to_string(r.device_count) + "," + r.impl + "," + std::to_string(r.median_ns) + "," +
           std::to_string(r.p95_ns);
}

}  // namespace addrnet
