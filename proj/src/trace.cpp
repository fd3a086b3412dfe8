#include "addrnet/trace.hpp"

#include <map>
#include <sstream>

#include "text.hpp"

namespace addrnet {

std::string to_string(const CapRef& r) {
    switch (r.kind) {
    case CapRef::Kind::Label: return "@" + r.label;
    case CapRef::Kind::Handle: return "#" + std::to_string(r.handle);
    case CapRef::Kind::Space: return "space:" + std::to_string(r.space);
    }
    return "?";
}

namespace {

using text::hex;

struct Fields {
    std::string op;
    std::vector<std::pair<std::string, std::string>> kv;
};

std::string render(const Fields& f) {
    std::string s = f.op;
    for (const auto& [k, v] : f.kv)
        if (!v.empty()) s += " " + k + "=" + v;
    return s;
}

struct Printer {
    Fields operator()(const RetypeOp& o) const {
        return {"retype",
                {{"subj", o.subject},
                 {"src", to_string(o.src)},
                 {"type", to_string(o.type)},
                 {"offset", hex(o.offset)},
                 {"size", hex(o.size)},
                 {"as", o.bind}}};
    }
    Fields operator()(const DeriveAsOp& o) const {
        return {"derive-as",
                {{"subj", o.subject},
                 {"ts", to_string(o.ts)},
                 {"output", o.output ? std::to_string(*o.output) : ""},
                 {"as", o.bind}}};
    }
    Fields operator()(const AsidRetypeOp& o) const {
        return {"asid-retype",
                {{"subj", o.subject}, {"range", to_string(o.range)}, {"count", std::to_string(o.count)}, {"as", o.bind}}};
    }
    Fields operator()(const MapOp& o) const {
        return {"map",
                {{"subj", o.subject},
                 {"table", to_string(o.table)},
                 {"obj", to_string(o.obj)},
                 {"first", std::to_string(o.first)},
                 {"count", std::to_string(o.count)},
                 {"kind", o.kind == MapKind::Memory ? "memory" : "table"},
                 {"as", o.bind}}};
    }
    Fields operator()(const UnmapOp& o) const {
        return {"unmap", {{"subj", o.subject}, {"mapping", to_string(o.mapping)}}};
    }
    Fields operator()(const CopyOp& o) const {
        return {"copy", {{"subj", o.subject}, {"cap", to_string(o.cap)}, {"to", o.to}, {"as", o.bind}}};
    }
    Fields operator()(const RevokeOp& o) const { return {"revoke", {{"subj", o.subject}, {"cap", to_string(o.cap)}}}; }
    Fields operator()(const DeleteOp& o) const { return {"delete", {{"subj", o.subject}, {"cap", to_string(o.cap)}}}; }
    Fields operator()(const ModifyMapRawOp& o) const {
        return {"modify-map-raw",
                {{"asid", std::to_string(o.asid)},
                 {"base", hex(o.src.base)},
                 {"size", hex(o.src.size)},
                 {"dest", text::print_name(o.dest)}}};
    }
    Fields operator()(const NopOp&) const { return {"nop", {}}; }
};

class Reader {
public:
    Reader(std::string op, std::map<std::string, std::string> kv) : op_(std::move(op)), kv_(std::move(kv)) {}

    std::string str(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) fail(ErrorKind::ParseError, op_ + ": missing " + key + "=");
        std::string v = it->second;
        kv_.erase(it);
        return v;
    }
    std::string opt_str(const std::string& key) { return kv_.count(key) ? str(key) : std::string{}; }
    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::uint64_t num(const std::string& key) {
        const std::string v = str(key);
        auto n = text::parse_u64(v);
        if (!n) fail(ErrorKind::ParseError, op_ + ": bad number " + key + "=" + v);
        return *n;
    }
    std::uint32_t num32(const std::string& key) {
        const auto v = num(key);
        if (v > 0xffffffffu) fail(ErrorKind::ParseError, op_ + ": " + key + " too large");
        return static_cast<std::uint32_t>(v);
    }
    NodeId node(const std::string& key) {
        const auto v = num(key);
        if (v > 0xffff) fail(ErrorKind::ParseError, op_ + ": " + key + " is not a node id");
        return static_cast<NodeId>(v);
    }
    CapRef ref(const std::string& key) {
        const std::string v = str(key);
        if (v.size() > 1 && v[0] == '@') return CapRef::named(v.substr(1));
        if (v.size() > 1 && v[0] == '#') {
            auto h = text::parse_u64(v.substr(1));
            if (h && *h <= 0xffffffffu) return CapRef::of(static_cast<Handle>(*h));
        }
        if (v.rfind("space:", 0) == 0) {
            auto s = text::parse_u64(v.substr(6));
            if (s && *s <= 0xffff) return CapRef::of_space(static_cast<NodeId>(*s));
        }
        fail(ErrorKind::ParseError, op_ + ": bad reference " + key + "=" + v);
    }
    void done() {
        if (!kv_.empty()) fail(ErrorKind::ParseError, op_ + ": unexpected " + kv_.begin()->first + "=");
    }

private:
    std::string op_;
    std::map<std::string, std::string> kv_;
};

}  // namespace

std::string print_op(const MonitorOp& op) { return render(std::visit(Printer{}, op)); }

MonitorOp parse_op(std::string_view line) {
    const auto tokens = text::tokenize(line);
    if (tokens.empty()) fail(ErrorKind::ParseError, "empty operation");
    const std::string op{tokens[0].text};
    std::map<std::string, std::string> kv;
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        const auto t = tokens[i].text;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos || eq == 0)
            fail(ErrorKind::ParseError, op + ": expected key=value at column " + std::to_string(tokens[i].column));
        if (!kv.emplace(std::string(t.substr(0, eq)), std::string(t.substr(eq + 1))).second)
            fail(ErrorKind::ParseError, op + ": duplicate " + std::string(t.substr(0, eq)));
    }
    Reader r(op, std::move(kv));
    MonitorOp out;
    if (op == "retype") {
        RetypeOp o;
        o.subject = r.str("subj");
        o.src = r.ref("src");
        const std::string type = r.str("type");
        auto t = text::parse_cap_type(type);
        if (!t) fail(ErrorKind::ParseError, "retype: unknown type " + type);
        o.type = *t;
        o.offset = r.num("offset");
        o.size = r.num("size");
        o.bind = r.opt_str("as");
        out = o;
    } else if (op == "derive-as") {
        DeriveAsOp o;
        o.subject = r.str("subj");
        o.ts = r.ref("ts");
        if (r.has("output")) o.output = r.node("output");
        o.bind = r.opt_str("as");
        out = o;
    } else if (op == "asid-retype") {
        AsidRetypeOp o;
        o.subject = r.str("subj");
        o.range = r.ref("range");
        o.count = r.num32("count");
        o.bind = r.opt_str("as");
        out = o;
    } else if (op == "map") {
        MapOp o;
        o.subject = r.str("subj");
        o.table = r.ref("table");
        o.obj = r.ref("obj");
        o.first = r.num32("first");
        o.count = r.num32("count");
        const std::string kind = r.has("kind") ? r.str("kind") : "memory";
        if (kind == "memory") o.kind = MapKind::Memory;
        else if (kind == "table") o.kind = MapKind::Table;
        else fail(ErrorKind::ParseError, "map: unknown kind " + kind);
        o.bind = r.opt_str("as");
        out = o;
    } else if (op == "unmap") {
        out = UnmapOp{r.str("subj"), r.ref("mapping")};
    } else if (op == "copy") {
        CopyOp o;
        o.subject = r.str("subj");
        o.cap = r.ref("cap");
        o.to = r.str("to");
        o.bind = r.opt_str("as");
        out = o;
    } else if (op == "revoke") {
        RevokeOp o;
        o.subject = r.str("subj");
        o.cap = r.ref("cap");
        out = o;
    } else if (op == "delete") {
        DeleteOp o;
        o.subject = r.str("subj");
        o.cap = r.ref("cap");
        out = o;
    } else if (op == "modify-map-raw") {
        ModifyMapRawOp o;
        o.asid = r.node("asid");
        o.src.base = r.num("base");
        o.src.size = r.num("size");
        const std::string dest = r.str("dest");
        auto d = text::parse_name(dest);
        if (!d) fail(ErrorKind::ParseError, "modify-map-raw: bad name " + dest);
        o.dest = *d;
        out = o;
    } else if (op == "nop") {
        out = NopOp{};
    } else {
        fail(ErrorKind::ParseError, "unknown operation " + op);
    }
    r.done();
    return out;
}

std::string print_trace(const std::vector<MonitorOp>& ops) {
    std::string s;
    for (const auto& op : ops) s += print_op(op) + "\n";
    return s;
}

std::vector<MonitorOp> parse_trace(std::string_view text) {
    std::vector<MonitorOp> ops;
    std::size_t lineno = 0;
    for (std::string_view line : text::split_lines(text)) {
        ++lineno;
        const auto tokens = text::tokenize(line);
        if (tokens.empty() || tokens[0].text[0] == '#') continue;
        try {
            ops.push_back(parse_op(line));
        } catch (const Error& e) {
            fail(ErrorKind::ParseError, "line " + std::to_string(lineno) + ": " + e.detail());
        }
    }
    return ops;
}

// ---------------------------------------------------------------------------

namespace {

SubjectId subject(const KernelState& st, const std::string& label) {
    auto s = st.subject_named(label);
    if (!s) fail(ErrorKind::UnknownSubject, label);
    return *s;
}

Handle handle(const KernelState& st, SubjectId s, const CapRef& r) {
    switch (r.kind) {
    case CapRef::Kind::Handle: return r.handle;
    case CapRef::Kind::Label: {
        auto it = st.labels.find(r.label);
        if (it == st.labels.end()) fail(ErrorKind::NotOwner, "no capability labelled " + r.label);
        if (it->second.subject != s)
            fail(ErrorKind::NotOwner, r.label + " belongs to " + st.dispatcher(it->second.subject).label);
        return it->second.handle;
    }
    case CapRef::Kind::Space: break;
    }
    fail(ErrorKind::InvalidArgument, "a space is not a capability");
}

void bind(KernelState& st, const std::string& label, SubjectId s, Handle h) {
    if (!label.empty()) st.labels[label] = {s, h};
}

struct Applier {
    KernelState& st;

    void operator()(const RetypeOp& o) {
        const SubjectId s = subject(st, o.subject);
        bind(st, o.bind, s, retype(st, s, handle(st, s, o.src), o.type, o.offset, o.size));
    }
    void operator()(const DeriveAsOp& o) {
        const SubjectId s = subject(st, o.subject);
        bind(st, o.bind, s, derive_address_space(st, s, handle(st, s, o.ts), o.output));
    }
    void operator()(const AsidRetypeOp& o) {
        const SubjectId s = subject(st, o.subject);
        bind(st, o.bind, s, asid_retype(st, s, handle(st, s, o.range), o.count));
    }
    void operator()(const MapOp& o) {
        const SubjectId s = subject(st, o.subject);
        const TableRef t = o.table.kind == CapRef::Kind::Space ? TableRef::of_space(o.table.space)
                                                                : TableRef::of(handle(st, s, o.table));
        bind(st, o.bind, s, cap_map(st, s, t, handle(st, s, o.obj), o.first, o.count, o.kind));
    }
    void operator()(const UnmapOp& o) {
        const SubjectId s = subject(st, o.subject);
        cap_unmap(st, s, handle(st, s, o.mapping));
    }
    void operator()(const CopyOp& o) {
        const SubjectId s = subject(st, o.subject);
        const SubjectId to = subject(st, o.to);
        bind(st, o.bind, to, cap_copy(st, s, handle(st, s, o.cap), to));
    }
    void operator()(const RevokeOp& o) {
        const SubjectId s = subject(st, o.subject);
        cap_revoke(st, s, handle(st, s, o.cap));
    }
    void operator()(const DeleteOp& o) {
        const SubjectId s = subject(st, o.subject);
        cap_delete(st, s, handle(st, s, o.cap));
    }
    void operator()(const ModifyMapRawOp& o) { monitor_modify_map(st, o.asid, o.src, o.dest); }
    void operator()(const NopOp&) {}
};

}  // namespace

void apply_op(KernelState& st, const MonitorOp& op) { std::visit(Applier{st}, op); }

void run_checks(const KernelState& st, const CheckSet& checks) {
    if (checks.config_space) {
        const auto bad = spaces_outside_config(st);
        if (!bad.empty()) fail(ErrorKind::ConfigSpaceViolation, "space " + std::to_string(bad.front()));
    }
    if (checks.coverage) {
        const auto gaps = uncovered_memory(st);
        if (!gaps.empty())
            fail(ErrorKind::CoverageViolation, "no capability covers " + to_string(gaps.front().base));
    }
    if (checks.never_accessible) {
        const auto exposed = exposed_tables(st);
        if (!exposed.empty()) fail(ErrorKind::NeverAccessibleViolation, to_string(exposed.front()));
    }
    if (checks.static_security) {
        const auto v = check_static_secure(world_of(st), derive_acm(st));
        if (!v.empty()) fail(ErrorKind::SecurityViolation, to_string(v.front()));
    }
}

TraceResult run_trace(const KernelState& initial, const std::vector<MonitorOp>& ops, const CheckSet& checks) {
    TraceResult r;
    r.ops = ops;
    r.states.push_back(initial);
    r.outcome = Completed{};
    for (std::size_t i = 0; i < ops.size(); ++i) {
        KernelState next = r.states.back();
        try {
            apply_op(next, ops[i]);
            run_checks(next, checks);
        } catch (const Error& e) {
            r.outcome = Aborted{i, e.kind(), e.detail()};
            break;
        }
        r.states.push_back(std::move(next));
    }
    return r;
}

TraceClass classify_trace(const TraceResult& result) {
    return std::holds_alternative<Completed>(result.outcome) ? TraceClass::Correct : TraceClass::Incorrect;
}

std::vector<TraceResult> enumerate_small_traces(const KernelState& initial, const std::vector<MonitorOp>& alphabet,
                                                std::size_t max_len, const CheckSet& checks,
                                                std::size_t max_states) {
    std::vector<TraceResult> out;
    std::size_t kept = 0;
    auto keep = [&](TraceResult r) {
        kept += r.states.size();
        if (kept > max_states) fail(ErrorKind::BudgetExceeded, std::to_string(kept) + " states");
        out.push_back(std::move(r));
    };
    auto extend = [&](auto&& self, const TraceResult& prefix) -> void {
        keep(prefix);
        if (prefix.ops.size() == max_len) return;
        for (const MonitorOp& op : alphabet) {
            TraceResult next = prefix;
            next.ops.push_back(op);
            if (std::holds_alternative<Completed>(prefix.outcome)) {
                KernelState st = prefix.states.back();
                try {
                    apply_op(st, op);
                    run_checks(st, checks);
                    next.states.push_back(std::move(st));
                } catch (const Error& e) {
                    next.outcome = Aborted{prefix.ops.size(), e.kind(), e.detail()};
                }
            }
            self(self, next);
        }
    };
    TraceResult empty;
    empty.states.push_back(initial);
    empty.outcome = Completed{};
    extend(extend, empty);
    return out;
}

}  // namespace addrnet
