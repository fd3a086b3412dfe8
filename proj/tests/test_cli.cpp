#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "addrnet/cli.hpp"
#include "addrnet/stats.hpp"
#include "oracles.hpp"

using namespace addrnet;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "addrnet");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string trace_path(const std::string& name) { return std::string(ADDRNET_SOURCE_DIR) + "/traces/" + name; }

std::uint64_t field(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string k, v;
    while (in >> k >> v)
        if (k == key) return std::stoull(v);
    FAIL("missing " << key);
    return 0;
}

}  // namespace

TEST_CASE("check") {
    const Run r = cli({"check", "xeon_phi"});
    CHECK(r.code == 0);
    CHECK(r.out == "ok xeon_phi nodes=7 capabilities=9\n");
    CHECK(cli({"check", "xeon_phi", "--print"}).out == print_platform(xeon_phi()));
    CHECK(cli({"check", std::string(ADDRNET_SOURCE_DIR) + "/platforms/arm_swapped.platform"}).code == 0);
    CHECK(cli({"--format", "csv", "check", "arm_uniform"}).out == "platform,nodes,capabilities\narm_uniform,4,3\n");
}

TEST_CASE("resolve") {
    Run r = cli({"resolve", "xeon_phi", "dram", "0x1234"});
    CHECK(r.code == 0);
    CHECK(r.out == "6:0x1234\n");
    r = cli({"resolve", "xeon_phi", "phi_core", "0x8000000123"});
    CHECK(r.code == 1);
    CHECK(r.out.find("Undecodable") != std::string::npos);
    r = cli({"resolve", "xeon_phi", "phi_core", "0x8000000123", "--after-trace", trace_path("xeon_phi_buffer.trace")});
    CHECK(r.code == 0);
    CHECK(r.out == "6:0x200123\n");
    r = cli({"--format", "json-lines", "resolve", "xeon_phi", "1", "0x10"});
    CHECK(nlohmann::json::parse(r.out)["accepted"][0] == "2:0x10");
}

TEST_CASE("route") {
    const Run r = cli({"route", "xeon_phi", "phi_core", "dram"});
    CHECK(r.code == 0);
    CHECK(r.out == "path phi_core,smpt,iommu,sysbus,dram\nblueprint smpt,iommu\n");
    CHECK(cli({"route", "xeon_phi", "dram", "phi_core"}).code == 1);
}

TEST_CASE("trace") {
    Run r = cli({"trace", "xeon_phi", trace_path("xeon_phi_buffer.trace")});
    CHECK(r.code == 0);
    CHECK(r.out.find("Correct: 4 steps") != std::string::npos);
    r = cli({"trace", "xeon_phi", trace_path("xeon_phi_unauthorized.trace")});
    CHECK(r.code == 1);
    CHECK(r.out.find("Incorrect: step 2: RightsViolation") != std::string::npos);
    for (const char* arm : {"arm_uniform", "arm_swapped", "arm_private", "arm_private_swapped"})
        CHECK(cli({"trace", arm, trace_path("arm_init.trace")}).code == 0);
}

TEST_CASE("errors and usage") {
    Run r = cli({"check", "sparc64"});
    CHECK(r.code == 1);
    CHECK(r.err.find("InvalidArgument") != std::string::npos);
    r = cli({"check", "pcie_scale:0"});
    CHECK(r.code == 1);
    CHECK(r.err.find("UnknownPlatform") != std::string::npos);
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"resolve", "xeon_phi"}).code == 2);
    CHECK(cli({"--format", "xml", "check", "xeon_phi"}).code == 2);
    CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("stats") {
    Run r = cli({"stats", "pcie_scale:16", "--worst-case"});
    CHECK(r.code == 0);
    CHECK(r.out.find("overhead_ratio 0.015625\n") != std::string::npos);
    CHECK(field(r.out, "bytes_of_capabilities") == 64 * field(r.out, "capability_count"));

    for (const char* name : {"xeon_phi", "pcie_scale:16", "arm_uniform", "arm_swapped", "arm_private",
                             "arm_private_swapped"}) {
        r = cli({"stats", name});
        REQUIRE(r.code == 0);
        CHECK(field(r.out, "capability_count") <= 1 + field(r.out, "managed_memory_bytes") / 4096);
    }
    r = cli({"stats", "xeon_phi", "--after-trace", trace_path("xeon_phi_buffer.trace")});
    CHECK(field(r.out, "capability_count") == 13);
    CHECK(field(r.out, "graph_diameter") == 4);
    r = cli({"--format", "json-lines", "stats", "xeon_phi"});
    CHECK(nlohmann::json::parse(r.out)["capability_count"] == 9);
    CHECK(cli({"stats", "xeon_phi"}).out == cli({"stats", "xeon_phi"}).out);
}

TEST_CASE("bench-scale emits the CSV schema") {
    const Run r = cli({"bench-scale", "--min", "16", "--max", "48", "--step", "16", "--samples", "20"});
    CHECK(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == kBenchCsvHeader);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 3);
    }
    CHECK(rows == 6);
    CHECK(r.err.find("single-threaded") != std::string::npos);
    CHECK(cli({"bench-scale", "--min", "0"}).code == 2);
}
