#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

using namespace addrnet;

namespace {

NodeSpec accepting(Address base, std::uint64_t size) { return NodeSpec{{{base, size}}, {}}; }

NodeSpec translating(AddrRange src, std::vector<Name> dests) { return NodeSpec{{}, {{src, std::move(dests)}}}; }

bool has_kind(const std::vector<Violation>& vs, Violation::Kind k) {
    return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.kind == k; });
}

}  // namespace

TEST_CASE("wellformed single accepting node") {
    DecodingNet net;
    net.nodes[1] = accepting(0, 0x1000);
    CHECK(net_wellformed(net).empty());
}

TEST_CASE("dangling destination is reported") {
    DecodingNet net;
    net.nodes[1] = translating({0, 0x1000}, {{7, 0}});
    const auto vs = net_wellformed(net);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].kind == Violation::Kind::DanglingDest);
    CHECK(vs[0].node == 1);
    CHECK(vs[0].dest_node == std::optional<NodeId>(7));
}

TEST_CASE("overlap and bounds violations") {
    DecodingNet net;
    net.nodes[1] = NodeSpec{{{0, 0x100}}, {{{0x80, 0x100}, {{2, 0}}}, {{0x100, 0x100}, {{2, 0}}}}};
    net.nodes[2] = accepting(0, 0x1000);
    auto vs = net_wellformed(net);
    CHECK(has_kind(vs, Violation::Kind::AcceptTranslateOverlap));
    CHECK(has_kind(vs, Violation::Kind::OverlappingTranslate));

    net.allow_overlap = true;
    CHECK_FALSE(has_kind(net_wellformed(net), Violation::Kind::AcceptTranslateOverlap));

    DecodingNet far;
    far.nodes[1] = accepting(kAddressLimit - 1, 2);
    CHECK(has_kind(net_wellformed(far), Violation::Kind::OutOfBounds));
}

TEST_CASE("decode_step") {
    DecodingNet net;
    net.nodes[1] = accepting(0, 0x1000);
    net.nodes[2] = translating({0, 0x1000}, {{1, 0x8000}});
    CHECK(std::holds_alternative<Accepts>(decode_step(net, {1, 0x42})));
    CHECK(decode_step(net, {2, 0x10}) == StepResult{TranslatesTo{{{1, 0x8010}}}});
    CHECK(decode_step(net, {1, 0x5000}) == StepResult{Undecodable{{1, 0x5000}}});
    CHECK_THROWS_AS(decode_step(net, {9, 0}), Error);
}

TEST_CASE("resolve zero hop, chain and loop") {
    DecodingNet net;
    net.nodes[1] = translating({0x100, 0x100}, {{2, 0x1000}});
    net.nodes[2] = translating({0x1000, 0x100}, {{3, 0x40}});
    net.nodes[3] = accepting(0, 0x1000);
    CHECK(resolve(net, {3, 7}) == ResolveResult{Accepted{{{3, 7}}}});
    CHECK(resolve(net, {1, 0x105}) == ResolveResult{Accepted{{{3, 0x45}}}});
    CHECK(resolve(net, {1, 0x105}) == oracle::Walker(net)({1, 0x105}));

    DecodingNet loop;
    loop.nodes[1] = translating({0, 0x10}, {{2, 0}});
    loop.nodes[2] = translating({0, 0x10}, {{1, 0}});
    const auto r = resolve(loop, {1, 3});
    REQUIRE(std::holds_alternative<Loop>(r));
    CHECK(std::get<Loop>(r).cycle == std::vector<Name>{{1, 3}, {2, 3}, {1, 3}});
}

TEST_CASE("multi-destination resolution") {
    DecodingNet net;
    net.nodes[1] = translating({0, 0x10}, {{3, 0}, {2, 0}});
    net.nodes[2] = accepting(0, 0x10);
    net.nodes[3] = accepting(0, 0x8);
    CHECK(resolve(net, {1, 2}) == ResolveResult{Accepted{{{2, 2}, {3, 2}}}});
    CHECK(resolve(net, {1, 9}) == ResolveResult{Undecodable{{3, 9}}});
}

TEST_CASE("self-shifting chain hits the hop limit") {
    DecodingNet net;
    net.nodes[1] = translating({0, 0x100}, {{1, 0x10}});
    // 0 -> 0x10 -> ... never revisits, but exceeds one hop per entry.
    const auto r = resolve(net, {1, 0});
    REQUIRE(std::holds_alternative<Loop>(r));
    CHECK(r == oracle::Walker(net)({1, 0}));
}

TEST_CASE("resolve_range pieces are offset preserving") {
    DecodingNet net;
    net.nodes[1] = NodeSpec{{{0, 0x100}}, {{{0x100, 0x100}, {{2, 0x800}}}}};
    net.nodes[2] = accepting(0x880, 0x100);
    const auto pieces = resolve_range(net, 1, {0, 0x400});
    Address at = 0;
    for (const RangePiece& p : pieces) {
        CHECK(p.local.base == at);
        at = p.local.end();
        for (std::uint64_t k : {std::uint64_t{0}, p.local.size / 2, p.local.size - 1})
            CHECK(resolve(net, {1, p.local.base + k}) == shift(p.outcome, k));
    }
    CHECK(at == 0x400);
}

TEST_CASE("resolve agrees with the per-address walker on random nets") {
    std::mt19937_64 rng(oracle::seed());
    for (int i = 0; i < 100; ++i) {
        const DecodingNet net = oracle::random_net(rng, {16, 256, 2});
        REQUIRE(net_wellformed(net).empty());
        const oracle::Walker walk(net);
        for (const auto& [id, spec] : net.nodes)
            for (Address a = 0; a < 256; ++a) REQUIRE(resolve(net, {id, a}) == walk({id, a}));
    }
}

TEST_CASE("hop limit equals translate entry count") {
    DecodingNet net;
    net.nodes[1] = translating({0, 0x10}, {{2, 0}});
    net.nodes[2] = NodeSpec{{}, {{{0, 0x10}, {{3, 0}}}, {{0x10, 0x10}, {{3, 0}}}}};
    net.nodes[3] = accepting(0, 0x10);
    CHECK(net.translate_entry_count() == 3);
    CHECK(hop_limit(net) == 3);
}

TEST_CASE("name formatting") {
    CHECK(to_string(Name{3, 0x10}) == "3:0x10");
    CHECK(to_string(ResolveResult{Undecodable{{4, 0x600000}}}).find("Undecodable") != std::string::npos);
}
