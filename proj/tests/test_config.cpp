#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

using namespace addrnet;

namespace {

constexpr std::uint64_t kGiB = std::uint64_t{1} << 30;

NodeSpec entry(Address base, std::uint64_t size, Name dest) { return NodeSpec{{}, {{{base, size}, {dest}}}}; }

}  // namespace

TEST_CASE("granularity constraint") {
    ConfigSpace cs;
    cs.constraints[1] = GranularityContiguous{4096};
    CHECK(in_config_space(cs, 1, entry(0x1000, 0x1000, {2, 0})));
    CHECK_FALSE(in_config_space(cs, 1, entry(0x800, 0x1000, {2, 0})));
    NodeSpec two = entry(0x1000, 0x1000, {2, 0});
    two.translate[0].dests.push_back({3, 0});
    CHECK_FALSE(in_config_space(cs, 1, two));
    CHECK_THROWS_AS(in_config_space(cs, 9, {}), Error);
}

TEST_CASE("register array constraint") {
    ConfigSpace cs;
    cs.constraints[1] = RegisterArray{16 * kGiB, 32};
    CHECK(in_config_space(cs, 1, entry(0, 16 * kGiB, {2, 0})));
    CHECK_FALSE(in_config_space(cs, 1, entry(0, 8 * kGiB, {2, 0})));
    CHECK_FALSE(in_config_space(cs, 1, entry(32 * 16 * kGiB, 16 * kGiB, {2, 0})));
}

TEST_CASE("fixed constraint and validation") {
    ConfigSpace cs;
    const NodeSpec n = entry(0, 0x1000, {2, 0});
    cs.constraints[1] = FixedNode{n};
    CHECK(in_config_space(cs, 1, n));
    CHECK_FALSE(in_config_space(cs, 1, {}));
    CHECK(slot_size(cs.at(1)) == 0);
    CHECK_THROWS_AS(validate_constraint(GranularityContiguous{1000}), Error);
    CHECK_THROWS_AS(validate_constraint(RegisterArray{2048, 4}), Error);
    CHECK_NOTHROW(validate_constraint(RegisterArray{8192, 4}));
}

TEST_CASE("modify_map installs, replaces and is pure") {
    ConfigSpace cs;
    cs.constraints[1] = Unconstrained{};
    const Configuration empty;
    const Configuration a = modify_map(cs, empty, 1, {0, 0x1000}, {2, 0x8000});
    CHECK(empty.current.empty());
    CHECK(a.current.at(1) == entry(0, 0x1000, {2, 0x8000}));
    CHECK(modify_map(cs, a, 1, {0, 0x1000}, {2, 0x8000}) == a);

    const Configuration wide = modify_map(cs, a, 1, {0, 0x2000}, {3, 0});
    CHECK(wide.current.at(1) == entry(0, 0x2000, {3, 0}));
    CHECK_THROWS_AS(modify_map(cs, a, 1, {0x800, 0x1000}, {3, 0}), Error);
    CHECK_THROWS_AS(modify_map(cs, a, 4, {0, 0x1000}, {3, 0}), Error);
}

TEST_CASE("modify_map in a register array changes exactly one slot") {
    DecodingNet net;
    net.nodes[1] = {};
    net.nodes[2] = NodeSpec{{{0, 64 * kGiB}}, {}};
    ConfigSpace cs;
    cs.constraints[1] = RegisterArray{16 * kGiB, 32};
    Configuration cfg;
    cfg.current[1] = {};
    const DecodingNet before = materialize(net, cfg);
    const Configuration after_cfg = modify_map(cs, cfg, 1, {2 * 16 * kGiB, 16 * kGiB}, {2, 0x1000});
    const DecodingNet after = materialize(net, after_cfg);
    const oracle::Walker w0(before), w1(after);
    for (std::uint64_t slot = 0; slot < 32; ++slot)
        for (std::uint64_t off : {std::uint64_t{0}, std::uint64_t{0x1234}, 16 * kGiB - 1}) {
            const Name n{1, slot * 16 * kGiB + off};
            if (slot == 2) CHECK(w1(n) == ResolveResult{Accepted{{{2, 0x1000 + off}}}});
            else CHECK(w1(n) == w0(n));
        }
    CHECK_THROWS_AS(modify_map(cs, cfg, 1, {0, 4096}, {2, 0}), Error);
}

TEST_CASE("clear_map") {
    ConfigSpace cs;
    cs.constraints[1] = Unconstrained{};
    Configuration cfg;
    cfg.current[1] = {};
    const Configuration one = modify_map(cs, cfg, 1, {0, 0x1000}, {2, 0});
    CHECK(clear_map(cs, one, 1, {0, 0x1000}) == cfg);
    CHECK_THROWS_AS(clear_map(cs, cfg, 1, {0, 0x1000}), Error);
    const Configuration two = modify_map(cs, one, 1, {0x1000, 0x1000}, {2, 0x1000});
    CHECK(clear_map(cs, two, 1, {0, 0x1000}).current.at(1) == entry(0x1000, 0x1000, {2, 0x1000}));
}

TEST_CASE("materialize") {
    DecodingNet net;
    net.nodes[1] = {};
    net.nodes[2] = NodeSpec{{{0, 0x10000}}, {}};
    CHECK(materialize(net, {}) == net);
    ConfigSpace cs;
    cs.constraints[1] = GranularityContiguous{4096};
    Configuration cfg;
    cfg.current[1] = {};
    cfg = modify_map(cs, cfg, 1, {0x1000, 0x1000}, {2, 0x4000});
    const DecodingNet m = materialize(net, cfg);
    CHECK(m == materialize(net, cfg));
    const oracle::Walker before(net), after(m);
    for (Address a = 0; a < 0x3000; a += 0x101) {
        if (a >= 0x1000 && a < 0x2000) CHECK(after({1, a}) == ResolveResult{Accepted{{{2, 0x4000 + a - 0x1000}}}});
        else CHECK(after({1, a}) == before({1, a}));
    }
}

TEST_CASE("random transition sequences stay inside the config space") {
    std::mt19937_64 rng(oracle::seed());
    ConfigSpace cs;
    cs.constraints[1] = GranularityContiguous{8192};
    cs.constraints[2] = RegisterArray{4096, 8};
    Configuration cfg;
    cfg.current[1] = {};
    cfg.current[2] = {};
    for (int i = 0; i < 2000; ++i) {
        const AddressSpaceId asid = rng() % 2 ? 1 : 2;
        const Address base = (rng() % 12) * 4096;
        const std::uint64_t size = (1 + rng() % 3) * 4096;
        const Configuration before = cfg;
        try {
            if (rng() % 3 == 0) cfg = clear_map(cs, cfg, asid, {base, size});
            else cfg = modify_map(cs, cfg, asid, {base, size}, {3, base});
        } catch (const Error&) {
            CHECK(cfg == before);
        }
        REQUIRE(in_config_space(cs, 1, cfg.current.at(1)));
        REQUIRE(in_config_space(cs, 2, cfg.current.at(2)));
    }
}
