#include "addrnet/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "addrnet/stats.hpp"
#include "text.hpp"

namespace addrnet {

namespace {

using json = nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::InvalidArgument, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool is_builtin(const std::string& arg) {
    return arg == "xeon_phi" || arg.rfind("arm_", 0) == 0 || arg.rfind("pcie_scale:", 0) == 0;
}

std::string label_of(const PlatformSpec& spec, NodeId id) { return spec.node(id).label; }

std::string join_labels(const PlatformSpec& spec, const std::vector<NodeId>& ids, const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? sep : "") + label_of(spec, ids[i]);
    return s;
}

json names_json(const std::vector<Name>& names) {
    json a = json::array();
    for (const Name& n : names) a.push_back(to_string(n));
    return a;
}

struct Options {
    std::string format = "text";
    std::string platform;
    // resolve
    std::string space;
    std::string addr;
    // route
    std::string src;
    std::string dst;
    // trace / stats
    std::string trace_file;
    bool worst_case = false;
    bool print = false;
    BenchConfig bench;
    std::string bench_out = "-";
};

// Booted state, advanced by a trace file if one is given.
KernelState booted(const PlatformSpec& spec, const std::string& trace_file) {
    KernelState st = boot(spec);
    if (trace_file.empty()) return st;
    TraceResult r = run_trace(st, parse_trace(read_file(trace_file)));
    if (const auto* ab = std::get_if<Aborted>(&r.outcome))
        fail(ab->error, "trace step " + std::to_string(ab->step + 1) + ": " + ab->message);
    return std::move(r.states.back());
}

int cmd_check(const Options& o, std::ostream& out) {
    const PlatformSpec spec = load_platform_arg(o.platform);
    const KernelState st = boot(spec);
    run_checks(st, {});
    if (o.print) {
        out << print_platform(spec);
        return 0;
    }
    if (o.format == "csv")
        out << "platform,nodes,capabilities\n" << spec.name << "," << spec.nodes.size() << "," << st.mdb.size() << "\n";
    else if (o.format == "json-lines")
        out << json{{"platform", spec.name}, {"nodes", spec.nodes.size()}, {"capabilities", st.mdb.size()}, {"ok", true}}
                   .dump()
            << "\n";
    else
        out << "ok " << spec.name << " nodes=" << spec.nodes.size() << " capabilities=" << st.mdb.size() << "\n";
    return 0;
}

int cmd_resolve(const Options& o, std::ostream& out) {
    const PlatformSpec spec = load_platform_arg(o.platform);
    const NodeId from = spec.node_named(o.space);
    const auto addr = text::parse_u64(o.addr);
    if (!addr || *addr >= kAddressLimit) fail(ErrorKind::InvalidArgument, "bad address " + o.addr);
    const KernelState st = booted(spec, o.trace_file);
    const ResolveResult r = resolve(st.current_net(), {from, *addr});
    const auto* a = std::get_if<Accepted>(&r);
    if (o.format == "json-lines") {
        json j{{"from", to_string(Name{from, *addr})}};
        if (a) j["accepted"] = names_json(a->names);
        else if (const auto* u = std::get_if<Undecodable>(&r)) j["undecodable"] = to_string(u->at);
        else j["loop"] = names_json(std::get<Loop>(r).cycle);
        out << j.dump() << "\n";
    } else if (a) {
        for (std::size_t i = 0; i < a->names.size(); ++i) out << (i ? " " : "") << to_string(a->names[i]);
        out << "\n";
    } else {
        out << to_string(r) << "\n";
    }
    return a ? 0 : 1;
}

int cmd_route(const Options& o, std::ostream& out) {
    const PlatformSpec spec = load_platform_arg(o.platform);
    const RouteBlueprint bp = route(graph_of(spec), spec.node_named(o.src), spec.node_named(o.dst));
    if (o.format == "json-lines") {
        json path = json::array();
        json hops = json::array();
        for (NodeId n : bp.path) path.push_back(label_of(spec, n));
        for (NodeId n : bp.hops) hops.push_back(label_of(spec, n));
        out << json{{"path", path}, {"blueprint", hops}}.dump() << "\n";
    } else {
        out << "path " << join_labels(spec, bp.path, ",") << "\n";
        out << "blueprint " << join_labels(spec, bp.hops, ",") << "\n";
    }
    return 0;
}

int cmd_trace(const Options& o, std::ostream& out) {
    const PlatformSpec spec = load_platform_arg(o.platform);
    const auto ops = parse_trace(read_file(o.trace_file));
    const TraceResult r = run_trace(boot(spec), ops);
    const std::size_t done = r.states.size() - 1;
    for (std::size_t i = 0; i < done; ++i) out << "ok " << print_op(ops[i]) << "\n";
    if (const auto* ab = std::get_if<Aborted>(&r.outcome)) {
        out << "abort " << print_op(ops[ab->step]) << "\n";
        out << "Incorrect: step " << ab->step + 1 << ": " << error_name(ab->error) << ": " << ab->message << "\n";
        return 1;
    }
    out << "Correct: " << ops.size() << " steps\n";
    return 0;
}

void print_stats(const StatsReport& s, const std::string& format, std::ostream& out) {
    if (format == "json-lines") {
        out << json{{"capability_count", s.capability_count},
                    {"bytes_of_capabilities", s.bytes_of_capabilities},
                    {"managed_memory_bytes", s.managed_memory_bytes},
                    {"overhead_ratio", s.overhead_ratio},
                    {"mdb_depth", s.mdb_depth},
                    {"graph_diameter", s.graph_diameter}}
                   .dump()
            << "\n";
        return;
    }
    std::ostringstream ratio;
    ratio << std::setprecision(17) << s.overhead_ratio;
    if (format == "csv") {
        out << "capability_count,bytes_of_capabilities,managed_memory_bytes,overhead_ratio,mdb_depth,graph_diameter\n"
            << s.capability_count << "," << s.bytes_of_capabilities << "," << s.managed_memory_bytes << ","
            << ratio.str() << "," << s.mdb_depth << "," << s.graph_diameter << "\n";
        return;
    }
    out << "capability_count " << s.capability_count << "\n"
        << "bytes_of_capabilities " << s.bytes_of_capabilities << "\n"
        << "managed_memory_bytes " << s.managed_memory_bytes << "\n"
        << "overhead_ratio " << ratio.str() << "\n"
        << "mdb_depth " << s.mdb_depth << "\n"
        << "graph_diameter " << s.graph_diameter << "\n";
}

int cmd_stats(const Options& o, std::ostream& out) {
    const PlatformSpec spec = load_platform_arg(o.platform);
    if (o.worst_case) {
        print_stats(worst_case_stats(spec), o.format, out);
        return 0;
    }
    print_stats(stats_of(booted(spec, o.trace_file), spec), o.format, out);
    return 0;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
    const auto rows = bench_scale(o.bench);
    std::ofstream file;
    std::ostream* sink = &out;
    if (o.bench_out != "-") {
        file.open(o.bench_out);
        if (!file) fail(ErrorKind::InvalidArgument, "cannot write " + o.bench_out);
        sink = &file;
    }
    *sink << kBenchCsvHeader << "\n";
    for (const BenchRow& r : rows) *sink << bench_csv_row(r) << "\n";
    err << "bench-scale: single-threaded, samples=" << o.bench.samples << " batch=" << o.bench.batch
        << " warmup=" << o.bench.warmup << "\n";
    return 0;
}

}  // namespace

PlatformSpec load_platform_arg(const std::string& arg) {
    if (is_builtin(arg)) return builtin(arg);
    return load_platform(read_file(arg));
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Address-space and capability model checker", "addrnet"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "csv", "json-lines"}));

    auto* check = app.add_subcommand("check", "Validate and boot a platform");
    check->add_option("platform", o.platform)->required();
    check->add_flag("--print", o.print, "Print the platform in canonical form");

    auto* res = app.add_subcommand("resolve", "Resolve an address from an address space");
    res->add_option("platform", o.platform)->required();
    res->add_option("asid", o.space, "Node label or id")->required();
    res->add_option("addr", o.addr)->required();
    res->add_option("--after-trace", o.trace_file);

    auto* rt = app.add_subcommand("route", "Configurable spaces between two spaces");
    rt->add_option("platform", o.platform)->required();
    rt->add_option("src", o.src)->required();
    rt->add_option("dst", o.dst)->required();

    auto* tr = app.add_subcommand("trace", "Run a trace against the booted platform");
    tr->add_option("platform", o.platform)->required();
    tr->add_option("tracefile", o.trace_file)->required();

    auto* bench = app.add_subcommand("bench-scale", "Routing benchmark over pcie_scale platforms");
    bench->add_option("--min", o.bench.min_devices)->check(CLI::Range(1, 4096));
    bench->add_option("--max", o.bench.max_devices)->check(CLI::Range(1, 4096));
    bench->add_option("--step", o.bench.step)->check(CLI::PositiveNumber);
    bench->add_option("--samples", o.bench.samples)->check(CLI::PositiveNumber);
    bench->add_option("--out", o.bench_out, "CSV destination, - for stdout");

    auto* st = app.add_subcommand("stats", "Capability accounting");
    st->add_option("platform", o.platform)->required();
    st->add_option("--after-trace", o.trace_file);
    st->add_flag("--worst-case", o.worst_case, "One Frame per 4KiB page of memory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    try {
        if (*check) return cmd_check(o, out);
        if (*res) return cmd_resolve(o, out);
        if (*rt) return cmd_route(o, out);
        if (*tr) return cmd_trace(o, out);
        if (*bench) return cmd_bench(o, out, err);
        if (*st) return cmd_stats(o, out);
    } catch (const Error& e) {
        err << error_name(e.kind()) << ": " << e.detail() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace addrnet
