#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

using namespace addrnet;

namespace {

const char* kMapFrame = R"(
# Mapping a RAM object
retype subj=kernel src=@kernel_ram type=frame offset=0 size=0x1000 as=f
retype subj=kernel src=@kernel_ram type=tstructure:1 offset=0x1000 size=0x1000 as=t
derive-as subj=kernel ts=@t output=5 as=vs
map subj=kernel table=@vs obj=@f first=0 count=1 kind=memory as=m1
)";

std::size_t count_len(const std::vector<TraceResult>& rs, std::size_t len) {
    return std::count_if(rs.begin(), rs.end(), [&](const TraceResult& r) { return r.ops.size() == len; });
}

}  // namespace

TEST_CASE("ops print and parse back") {
    const std::vector<MonitorOp> ops{
        RetypeOp{"kernel", CapRef::named("ram"), CapType::tstructure(2), 0x1000, 0x2000, "t"},
        DeriveAsOp{"kernel", CapRef::of(3), NodeId{5}, "vs"},
        DeriveAsOp{"kernel", CapRef::of(3), std::nullopt, ""},
        AsidRetypeOp{"kernel", CapRef::named("asids"), 4, "r"},
        MapOp{"drv", CapRef::of_space(4), CapRef::named("buf"), 2, 1536, MapKind::Memory, "bp"},
        MapOp{"drv", CapRef::named("l2"), CapRef::named("l1"), 0, 1, MapKind::Table, ""},
        UnmapOp{"drv", CapRef::named("bp")},
        CopyOp{"drv", CapRef::of(7), "proc", "c"},
        RevokeOp{"kernel", CapRef::named("ram")},
        DeleteOp{"kernel", CapRef::of(1)},
        ModifyMapRawOp{3, {0x400000000, 0x400000000}, {4, 0x1000}},
        NopOp{}};
    for (const MonitorOp& op : ops) CHECK(parse_op(print_op(op)) == op);
    CHECK(parse_trace(print_trace(ops)) == ops);
}

TEST_CASE("trace parse errors carry the line") {
    try {
        parse_trace("nop\n\nfrobnicate x=1\n");
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ParseError);
        CHECK(e.detail().find("3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_op("map subj=a table=@t"), Error);
    CHECK_THROWS_AS(parse_op("retype subj=a src=@r type=widget offset=0 size=1"), Error);
    CHECK_THROWS_AS(parse_op("nop extra=1"), Error);
}

TEST_CASE("frame mapping trace completes with one state per step") {
    const KernelState st = boot(xeon_phi());
    const TraceResult r = run_trace(st, parse_trace(kMapFrame));
    CHECK(std::holds_alternative<Completed>(r.outcome));
    CHECK(r.states.size() == 5);
    CHECK(classify_trace(r) == TraceClass::Correct);
    CHECK(run_trace(st, parse_trace(kMapFrame)) == r);
}

TEST_CASE("map by a subject without the map right aborts at that step") {
    const KernelState st = boot(xeon_phi());
    std::string text = kMapFrame;
    text.replace(text.find("map subj=kernel"), 15, "map subj=phi_process");
    const TraceResult r = run_trace(st, parse_trace(text));
    REQUIRE(std::holds_alternative<Aborted>(r.outcome));
    const auto& ab = std::get<Aborted>(r.outcome);
    CHECK(ab.step == 3);
    CHECK(r.states.size() == 4);
    CHECK(classify_trace(r) == TraceClass::Incorrect);
    // The retained state is the one before the failing op.
    CHECK(r.states.back() == run_trace(st, std::vector<MonitorOp>(r.ops.begin(), r.ops.begin() + 3)).states.back());
}

TEST_CASE("empty trace") {
    const KernelState st = boot(xeon_phi());
    const TraceResult r = run_trace(st, {});
    CHECK(r.states.size() == 1);
    CHECK(classify_trace(r) == TraceClass::Correct);
}

TEST_CASE("checks abort the step that breaks them") {
    const KernelState st = boot(xeon_phi());
    const TraceResult r = run_trace(st, parse_trace("delete subj=kernel cap=@gddr_ram"));
    REQUIRE(std::holds_alternative<Aborted>(r.outcome));
    CHECK(std::get<Aborted>(r.outcome).error == ErrorKind::CoverageViolation);

    KernelState broken = st;
    broken.memory.push_back({{2, 0x300000000}, 0x1000});
    CHECK_THROWS_AS(run_checks(broken, {}), Error);
    CHECK_NOTHROW(run_checks(broken, CheckSet::none()));
}

TEST_CASE("prefixes of correct traces are correct") {
    const KernelState st = boot(xeon_phi());
    const auto ops = parse_trace(kMapFrame);
    for (std::size_t k = 0; k <= ops.size(); ++k)
        CHECK(classify_trace(run_trace(st, {ops.begin(), ops.begin() + static_cast<std::ptrdiff_t>(k)})) ==
              TraceClass::Correct);
}

TEST_CASE("enumeration counts") {
    const KernelState st = boot(xeon_phi());
    const auto one = enumerate_small_traces(st, {NopOp{}}, 3);
    CHECK(one.size() == 4);
    for (std::size_t len = 0; len <= 3; ++len) CHECK(count_len(one, len) == 1);
    const auto two = enumerate_small_traces(st, {NopOp{}, parse_op("revoke subj=kernel cap=@gddr_ram")}, 2);
    CHECK(count_len(two, 2) == 4);
    CHECK_THROWS_AS(enumerate_small_traces(st, {NopOp{}}, 5, {}, 3), Error);
}

TEST_CASE("correct traces keep every state secure") {
    const KernelState st = boot(xeon_phi());
    const auto alphabet = parse_trace(R"(
retype subj=phi_process src=@proc_ram type=frame offset=0 size=0x1000 as=buffer
copy subj=phi_process cap=@buffer to=iommu_driver as=buf_d
map subj=iommu_driver table=space:4 obj=@buf_d first=0 count=1 kind=memory as=dm
revoke subj=phi_process cap=@proc_ram
)");
    const auto all = enumerate_small_traces(st, alphabet, 3, CheckSet{true, true, true, false});
    std::size_t correct = 0;
    for (const TraceResult& r : all) {
        if (classify_trace(r) != TraceClass::Correct) continue;
        ++correct;
        for (const KernelState& s : r.states) REQUIRE(check_static_secure(world_of(s), derive_acm(s)).empty());
    }
    CHECK(correct > 4);
}
