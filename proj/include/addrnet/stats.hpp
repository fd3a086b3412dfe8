#pragma once

// Capability accounting and the routing benchmark.

#include <cstdint>
#include <string>
#include <vector>

#include "addrnet/platform.hpp"

namespace addrnet {

struct StatsReport {
    std::uint64_t capability_count = 0;
    std::uint64_t bytes_of_capabilities = 0;  // count * 64
    std::uint64_t managed_memory_bytes = 0;
    double overhead_ratio = 0;
    int mdb_depth = 0;
    std::size_t graph_diameter = 0;
};

StatsReport stats_of(const KernelState& st, const PlatformSpec& spec);

/// Every 4KiB page of declared memory held as its own Frame, in a real MDB.
StatsReport worst_case_stats(const PlatformSpec& spec);

struct BenchRow {
    std::size_t device_count = 0;
    std::string impl;  // matrix | reference
    std::uint64_t median_ns = 0;
    std::uint64_t p95_ns = 0;
};

struct BenchConfig {
    std::size_t min_devices = 16;
    std::size_t max_devices = 1024;
    std::size_t step = 16;
    std::size_t samples = 1000;
    std::size_t batch = 32;   // queries per timed sample
    std::size_t warmup = 200; // untimed queries before sampling
};

/// Times route and route_reference from the last device to DRAM on
/// pcie_scale platforms. Single-threaded.
std::vector<BenchRow> bench_scale(const BenchConfig& cfg);

inline constexpr const char* kBenchCsvHeader = "device_count,impl,median_ns,p95_ns";
std::string bench_csv_row(const BenchRow& r);

}  // namespace addrnet
