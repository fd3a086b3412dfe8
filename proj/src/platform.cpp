#include "addrnet/platform.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "text.hpp"

namespace addrnet {

using text::hex;

const NodeDecl& PlatformSpec::node(NodeId id) const {
    for (const NodeDecl& n : nodes)
        if (n.id == id) return n;
    fail(ErrorKind::UnknownNode, "node " + std::to_string(id));
}

NodeId PlatformSpec::node_named(const std::string& s) const {
    for (const NodeDecl& n : nodes)
        if (n.label == s) return n.id;
    if (auto v = text::parse_u64(s); v && *v <= 0xffff) return node(static_cast<NodeId>(*v)).id;
    fail(ErrorKind::UnknownNode, s);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class LineReader {
public:
    LineReader(std::size_t line, std::vector<text::Token> tokens) : line_(line), tokens_(std::move(tokens)) {}

    [[noreturn]] void error(std::size_t i, const std::string& msg) const {
        const std::size_t col = i < tokens_.size() ? tokens_[i].column
                                : tokens_.empty()  ? 1
                                                   : tokens_.back().column + tokens_.back().text.size();
        fail(ErrorKind::ParseError, std::to_string(line_) + ":" + std::to_string(col) + ": " + msg);
    }

    std::size_t size() const { return tokens_.size(); }
    std::string_view word(std::size_t i) const {
        if (i >= tokens_.size()) error(i, "expected more fields");
        return tokens_[i].text;
    }
    std::uint64_t num(std::size_t i) const {
        auto v = text::parse_u64(word(i));
        if (!v) error(i, "expected a number, got '" + std::string(word(i)) + "'");
        return *v;
    }
    NodeId node(std::size_t i) const {
        const auto v = num(i);
        if (v > 0xffff) error(i, "node id out of range");
        return static_cast<NodeId>(v);
    }
    Name name(std::size_t i) const {
        auto n = text::parse_name(word(i));
        if (!n) error(i, "expected <node>:<addr>, got '" + std::string(word(i)) + "'");
        return *n;
    }
    AddrRange range(std::size_t i) const {
        const AddrRange r{num(i), num(i + 1)};
        if (!range_in_bounds(r)) error(i, "range outside the address space");
        return r;
    }
    void arity(std::size_t n) const {
        if (tokens_.size() > n) error(n, "unexpected '" + std::string(tokens_[n].text) + "'");
        if (tokens_.size() < n) error(tokens_.size(), "expected more fields");
    }

private:
    std::size_t line_;
    std::vector<text::Token> tokens_;
};

void semantic(const std::string& msg) { fail(ErrorKind::SemanticError, msg); }

NodeDecl& decl_for(PlatformSpec& spec, const LineReader& r, std::size_t i) {
    const NodeId id = r.node(i);
    for (NodeDecl& n : spec.nodes)
        if (n.id == id) return n;
    r.error(i, "node " + std::to_string(id) + " is not declared");
}

ConfigConstraint parse_constraint(const LineReader& r) {
    const auto kind = r.word(2);
    if (kind == "unconstrained") {
        r.arity(3);
        return Unconstrained{};
    }
    if (kind == "fixed") {
        r.arity(3);
        return FixedNode{};
    }
    if (kind == "granularity") {
        r.arity(4);
        return GranularityContiguous{r.num(3)};
    }
    if (kind == "register-array") {
        r.arity(5);
        const auto count = r.num(4);
        if (count > 0xffffffffu) r.error(4, "slot count out of range");
        return RegisterArray{r.num(3), static_cast<std::uint32_t>(count)};
    }
    r.error(2, "unknown constraint '" + std::string(kind) + "'");
}

}  // namespace

PlatformSpec parse_platform(std::string_view input) {
    PlatformSpec spec;
    std::string section;
    bool header = false;
    std::size_t lineno = 0;
    for (std::string_view raw : text::split_lines(input)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string_view line = raw.substr(0, hash);
        auto tokens = text::tokenize(line);
        if (tokens.empty()) continue;
        const LineReader r(lineno, tokens);
        const std::string_view kw = r.word(0);
        if (!header) {
            if (kw != "addrnet-platform") r.error(0, "expected 'addrnet-platform 1'");
            r.arity(2);
            if (r.num(1) != 1) r.error(1, "unsupported format version");
            header = true;
            continue;
        }
        if (kw.front() == '[') {
            r.arity(1);
            static const std::set<std::string_view> known{"[nodes]",    "[edges]", "[subjects]",
                                                          "[memory]", "[caps]",  "[acm]"};
            if (!known.count(kw)) r.error(0, "unknown section " + std::string(kw));
            section = std::string(kw);
            continue;
        }
        if (section.empty()) {
            if (kw == "name") {
                r.arity(2);
                spec.name = std::string(r.word(1));
            } else if (kw == "table-slots") {
                r.arity(2);
                const auto n = r.num(1);
                if (n == 0 || n > 0xffffffffu) r.error(1, "table-slots out of range");
                spec.table_slots = static_cast<std::uint32_t>(n);
            } else if (kw == "allow-overlap") {
                r.arity(2);
                if (r.word(1) == "yes") spec.allow_overlap = true;
                else if (r.word(1) == "no") spec.allow_overlap = false;
                else r.error(1, "expected yes or no");
            } else {
                r.error(0, "unknown setting '" + std::string(kw) + "'");
            }
        } else if (section == "[nodes]") {
            if (kw == "node") {
                if (r.size() < 3) r.error(r.size(), "expected more fields");
                NodeDecl n;
                n.id = r.node(1);
                n.label = std::string(r.word(2));
                for (std::size_t i = 3; i < r.size(); ++i) {
                    const auto flag = r.word(i);
                    if (flag == "dynamic") n.dynamic = true;
                    else if (flag == "kernel-managed") n.kernel_managed = true;
                    else if (flag == "visible") n.visible = true;
                    else r.error(i, "unknown node flag '" + std::string(flag) + "'");
                }
                spec.nodes.push_back(std::move(n));
            } else if (kw == "accept") {
                r.arity(4);
                decl_for(spec, r, 1).spec.accept.push_back(r.range(2));
            } else if (kw == "translate") {
                if (r.size() < 5) r.error(r.size(), "translate needs at least one destination");
                TranslateEntry e{r.range(2), {}};
                for (std::size_t i = 4; i < r.size(); ++i) e.dests.push_back(r.name(i));
                decl_for(spec, r, 1).spec.translate.push_back(std::move(e));
            } else if (kw == "constraint") {
                NodeDecl& n = decl_for(spec, r, 1);
                n.constraint = parse_constraint(r);
            } else if (kw == "output") {
                r.arity(3);
                decl_for(spec, r, 1).output = r.node(2);
            } else {
                r.error(0, "unknown node declaration '" + std::string(kw) + "'");
            }
        } else if (section == "[edges]") {
            if (kw != "edge") r.error(0, "expected 'edge'");
            r.arity(3);
            spec.edges.push_back({r.node(1), r.node(2)});
        } else if (section == "[subjects]") {
            if (kw != "subject") r.error(0, "expected 'subject'");
            r.arity(2);
            spec.subjects.emplace_back(r.word(1));
        } else if (section == "[memory]") {
            if (kw != "memory") r.error(0, "expected 'memory'");
            r.arity(4);
            const AddrRange range = r.range(2);
            spec.memory.push_back({{r.node(1), range.base}, range.size});
        } else if (section == "[caps]") {
            if (kw != "cap") r.error(0, "expected 'cap'");
            if (r.size() != 7 && r.size() != 8) r.arity(r.size() < 7 ? 7 : 8);
            CapDecl c;
            c.label = std::string(r.word(1));
            auto type = text::parse_cap_type(r.word(2));
            if (!type) r.error(2, "unknown capability type '" + std::string(r.word(2)) + "'");
            c.type = *type;
            c.base = r.name(3);
            c.size = r.num(4);
            auto rights = text::parse_rights(r.word(5));
            if (!rights) r.error(5, "bad rights '" + std::string(r.word(5)) + "'");
            c.rights = *rights;
            c.owner = std::string(r.word(6));
            if (r.size() == 8) {
                const auto w = r.word(7);
                if (w.substr(0, 5) != "asid=") r.error(7, "expected asid=<n>");
                auto v = text::parse_u64(w.substr(5));
                if (!v || *v > 0xffff) r.error(7, "bad asid");
                c.asid = static_cast<AddressSpaceId>(*v);
            }
            spec.caps.push_back(std::move(c));
        } else if (section == "[acm]") {
            if (kw != "acm") r.error(0, "expected 'acm'");
            AcmDecl a;
            a.subject = std::string(r.word(1));
            std::size_t i = 2;
            unsigned depth = 0;
            while (r.word(i) == "grant") {
                ++depth;
                ++i;
            }
            if (r.word(i) == "access") {
                r.arity(i + 3);
                a.right = Right::access({r.name(i + 1), r.num(i + 2)});
            } else if (r.word(i) == "map") {
                r.arity(i + 2);
                a.right = Right::map(r.node(i + 1));
            } else {
                r.error(i, "expected access or map");
            }
            a.right.grant_depth = depth;
            spec.acm.push_back(std::move(a));
        }
    }
    if (!header) fail(ErrorKind::ParseError, std::to_string(lineno + 1) + ":1: missing 'addrnet-platform 1' header");
    for (NodeDecl& n : spec.nodes)
        if (auto* f = std::get_if<FixedNode>(&n.constraint)) f->node = n.spec;
    return spec;
}

// ---------------------------------------------------------------------------
// Validation

DecodingNet net_of(const PlatformSpec& spec) {
    DecodingNet net;
    net.allow_overlap = spec.allow_overlap;
    for (const NodeDecl& n : spec.nodes) net.nodes[n.id] = n.spec;
    return net;
}

ConfigSpace config_space_of(const PlatformSpec& spec) {
    ConfigSpace cs;
    for (const NodeDecl& n : spec.nodes)
        if (n.dynamic) cs.constraints[n.id] = n.constraint;
    return cs;
}

TopologyGraph graph_of(const PlatformSpec& spec) {
    std::set<NodeId> km;
    for (const NodeDecl& n : spec.nodes)
        if (n.kernel_managed) km.insert(n.id);
    return build_graph(net_of(spec), config_space_of(spec), spec.edges, km);
}

void validate_platform(const PlatformSpec& spec) {
    std::set<NodeId> ids;
    std::set<std::string> labels;
    for (const NodeDecl& n : spec.nodes) {
        if (!ids.insert(n.id).second) semantic("duplicate node id " + std::to_string(n.id));
        if (!labels.insert(n.label).second) semantic("duplicate node label " + n.label);
    }
    for (const NodeDecl& n : spec.nodes) {
        if (n.id == kAsidSpace) semantic("node id 65535 is reserved");
        if (n.output && !ids.count(*n.output))
            semantic("node " + std::to_string(n.id) + " outputs to unknown node " + std::to_string(*n.output));
        if (!n.dynamic && !std::holds_alternative<Unconstrained>(n.constraint))
            semantic("node " + std::to_string(n.id) + " has a constraint but is not dynamic");
        if (n.dynamic) {
            try {
                validate_constraint(n.constraint);
            } catch (const Error& e) {
                semantic("node " + std::to_string(n.id) + ": " + e.detail());
            }
        }
    }
    if (!std::is_sorted(spec.nodes.begin(), spec.nodes.end(),
                        [](const NodeDecl& a, const NodeDecl& b) { return a.id < b.id; }))
        semantic("nodes must be declared in ascending id order");
    for (const auto& v : net_wellformed(net_of(spec))) semantic(to_string(v));
    const ConfigSpace cs = config_space_of(spec);
    for (const NodeDecl& n : spec.nodes)
        if (n.dynamic && !in_config_space(cs, n.id, n.spec))
            semantic("initial node " + std::to_string(n.id) + " is outside its configuration space");
    for (const auto& [a, b] : spec.edges)
        if (!ids.count(a) || !ids.count(b)) semantic("edge " + std::to_string(a) + " -> " + std::to_string(b));

    std::set<std::string> subjects{"monitor"};
    for (const std::string& s : spec.subjects)
        if (!subjects.insert(s).second) semantic("duplicate subject " + s);
    for (const MemoryObject& m : spec.memory) {
        if (!ids.count(m.base.node)) semantic("memory in unknown node " + std::to_string(m.base.node));
        const auto& acc = spec.node(m.base.node).spec.accept;
        const AddrRange r{m.base.addr, m.size};
        if (std::none_of(acc.begin(), acc.end(), [&](const AddrRange& a) { return a.contains(r); }))
            semantic("memory " + to_string(m.base) + " is not accepted by its node");
    }
    std::set<std::string> cap_labels;
    for (const CapDecl& c : spec.caps) {
        if (!cap_labels.insert(c.label).second) semantic("duplicate capability " + c.label);
        if (!subjects.count(c.owner) || c.owner == "monitor") semantic(c.label + ": unknown owner " + c.owner);
        if (c.size == 0) semantic(c.label + ": empty capability");
        if (c.type.kind == CapKind::Mapping) semantic(c.label + ": mappings cannot be declared");
        if (c.type.kind == CapKind::ASIDRange) {
            if (c.base.node != kAsidSpace || c.base.addr + c.size > kAsidSpace)
                semantic(c.label + ": ASID ranges live in node 65535 below id 65535");
        } else if (!ids.count(c.base.node)) {
            semantic(c.label + ": unknown node " + std::to_string(c.base.node));
        }
        if (c.type.kind == CapKind::AddressSpace) {
            if (!c.asid) semantic(c.label + ": address-space capability needs asid=");
            if (!ids.count(*c.asid) || !spec.node(*c.asid).dynamic)
                semantic(c.label + ": asid " + std::to_string(*c.asid) + " is not a dynamic node");
        } else if (c.asid) {
            semantic(c.label + ": only address-space capabilities carry an asid");
        }
    }
    for (const AcmDecl& a : spec.acm)
        if (!subjects.count(a.subject)) semantic("acm: unknown subject " + a.subject);

    const KernelState st = boot(spec);
    const auto gaps = uncovered_memory(st);
    if (!gaps.empty()) semantic("memory at " + to_string(gaps.front().base) + " has no capability");
    const AccessControlMatrix acm = derive_acm(st);
    for (const AcmDecl& a : spec.acm)
        if (!acm.holds(*st.subject_named(a.subject), a.right))
            semantic("acm: " + a.subject + " does not hold " + to_string(a.right));
}

PlatformSpec load_platform(std::string_view text) {
    PlatformSpec spec = parse_platform(text);
    validate_platform(spec);
    return spec;
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string print_constraint(const ConfigConstraint& c) {
    if (std::holds_alternative<Unconstrained>(c)) return "unconstrained";
    if (std::holds_alternative<FixedNode>(c)) return "fixed";
    if (const auto* g = std::get_if<GranularityContiguous>(&c)) return "granularity " + hex(g->grain);
    const auto& r = std::get<RegisterArray>(c);
    return "register-array " + hex(r.slot_size) + " " + std::to_string(r.num_slots);
}

}  // namespace

std::string print_platform(const PlatformSpec& spec) {
    std::string s = "addrnet-platform 1\n";
    s += "name " + spec.name + "\n";
    s += "table-slots " + std::to_string(spec.table_slots) + "\n";
    s += std::string("allow-overlap ") + (spec.allow_overlap ? "yes" : "no") + "\n";
    s += "\n[nodes]\n";
    for (const NodeDecl& n : spec.nodes) {
        s += "node " + std::to_string(n.id) + " " + n.label;
        if (n.dynamic) s += " dynamic";
        if (n.kernel_managed) s += " kernel-managed";
        if (n.visible) s += " visible";
        s += "\n";
        const std::string id = std::to_string(n.id);
        for (const AddrRange& a : n.spec.accept) s += "accept " + id + " " + hex(a.base) + " " + hex(a.size) + "\n";
        for (const TranslateEntry& e : n.spec.translate) {
            s += "translate " + id + " " + hex(e.src.base) + " " + hex(e.src.size);
            for (const Name& d : e.dests) s += " " + text::print_name(d);
            s += "\n";
        }
        if (n.dynamic) s += "constraint " + id + " " + print_constraint(n.constraint) + "\n";
        if (n.output) s += "output " + id + " " + std::to_string(*n.output) + "\n";
    }
    if (!spec.edges.empty()) {
        s += "\n[edges]\n";
        for (const auto& [a, b] : spec.edges) s += "edge " + std::to_string(a) + " " + std::to_string(b) + "\n";
    }
    s += "\n[subjects]\n";
    for (const std::string& sub : spec.subjects) s += "subject " + sub + "\n";
    s += "\n[memory]\n";
    for (const MemoryObject& m : spec.memory)
        s += "memory " + std::to_string(m.base.node) + " " + hex(m.base.addr) + " " + hex(m.size) + "\n";
    s += "\n[caps]\n";
    for (const CapDecl& c : spec.caps) {
        s += "cap " + c.label + " " + to_string(c.type) + " " + text::print_name(c.base) + " " + hex(c.size) + " " +
             rights_string(c.rights) + " " + c.owner;
        if (c.asid) s += " asid=" + std::to_string(*c.asid);
        s += "\n";
    }
    if (!spec.acm.empty()) {
        s += "\n[acm]\n";
        for (const AcmDecl& a : spec.acm) {
            s += "acm " + a.subject;
            for (unsigned i = 0; i < a.right.grant_depth; ++i) s += " grant";
            if (a.right.kind == Right::Kind::Map)
                s += " map " + std::to_string(std::get<AddressSpaceObject>(a.right.object).asid);
            else {
                const auto& m = std::get<MemoryObject>(a.right.object);
                s += " access " + text::print_name(m.base) + " " + hex(m.size);
            }
            s += "\n";
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Boot

KernelState boot(const PlatformSpec& spec) {
    KernelState st;
    st.net = net_of(spec);
    st.cs = config_space_of(spec);
    st.table_slots = spec.table_slots;
    st.memory = spec.memory;
    for (const NodeDecl& n : spec.nodes) {
        st.node_labels[n.label] = n.id;
        if (n.visible) st.visible.insert(n.id);
        if (n.kernel_managed) st.kernel_managed.insert(n.id);
        if (!n.dynamic) continue;
        st.cfg.current[n.id] = n.spec;
        for (const TranslateEntry& e : n.spec.translate) st.trusted.insert({n.id, e.src});
    }
    add_subject(st, kMonitorSubject, "monitor");
    for (std::size_t i = 0; i < spec.subjects.size(); ++i)
        add_subject(st, SubjectId{static_cast<std::uint32_t>(i + 1)}, spec.subjects[i]);

    for (const CapDecl& d : spec.caps) {
        Capability c;
        c.type = d.type;
        c.base = d.base;
        c.size = d.size;
        c.rights = d.rights;
        c.owner = *st.subject_named(d.owner);
        if (d.type.kind == CapKind::ASIDRange) {
            c.payload = AsidRangeInfo{static_cast<std::uint32_t>(d.base.addr), static_cast<std::uint32_t>(d.size)};
        } else if (d.type.kind == CapKind::AddressSpace) {
            const AddressSpaceId asid = *d.asid;
            c.payload = AddressSpaceInfo{asid};
            std::uint8_t level = 1;
            for (const CapDecl& t : spec.caps)
                if (t.type.kind == CapKind::TStructure && t.base == d.base) level = t.type.level;
            st.spaces[asid] = SpaceInfo{d.base, spec.node(asid).output, level, false};
            st.derived_from[d.base] = asid;
        }
        st.labels[d.label] = {c.owner, grant_root(st, c)};
    }
    return st;
}

// ---------------------------------------------------------------------------
// Builtins

namespace {

constexpr std::uint64_t KiB = 1024;
constexpr std::uint64_t MiB = 1024 * KiB;
constexpr std::uint64_t GiB = 1024 * MiB;

NodeDecl accepting(NodeId id, std::string label, std::uint64_t size) {
    NodeDecl n;
    n.id = id;
    n.label = std::move(label);
    n.spec.accept.push_back({0, size});
    return n;
}

CapDecl cap(std::string label, CapType type, Name base, std::uint64_t size, Rights rights, std::string owner,
            std::optional<AddressSpaceId> asid = std::nullopt) {
    return {std::move(label), type, base, size, rights, std::move(owner), asid};
}

}  // namespace

PlatformSpec xeon_phi() {
    PlatformSpec p;
    p.name = "xeon_phi";

    NodeDecl core;
    core.id = 1;
    core.label = "phi_core";
    core.dynamic = core.kernel_managed = core.visible = true;
    core.spec.translate = {{{0, 8 * GiB}, {{2, 0}}}, {{0x8000000000, 512 * GiB}, {{3, 0}}}};
    p.nodes.push_back(core);

    p.nodes.push_back(accepting(2, "gddr", 8 * GiB));

    NodeDecl smpt;
    smpt.id = 3;
    smpt.label = "smpt";
    smpt.dynamic = smpt.visible = true;
    smpt.constraint = RegisterArray{16 * GiB, 32};
    smpt.output = 4;
    p.nodes.push_back(smpt);

    NodeDecl iommu;
    iommu.id = 4;
    iommu.label = "iommu";
    iommu.dynamic = iommu.visible = true;
    iommu.constraint = GranularityContiguous{4096};
    iommu.output = 5;
    p.nodes.push_back(iommu);

    NodeDecl sysbus;
    sysbus.id = 5;
    sysbus.label = "sysbus";
    sysbus.spec.translate = {{{0, 1 * GiB}, {{6, 0}}}};
    p.nodes.push_back(sysbus);

    p.nodes.push_back(accepting(6, "dram", 1 * GiB));
    p.nodes.push_back(accepting(7, "regs", 0x2000));

    p.edges = {{3, 4}, {4, 5}};
    p.subjects = {"kernel", "phi_driver", "iommu_driver", "phi_process"};
    p.memory = {{{2, 0}, 8 * GiB}, {{6, 0}, 1 * GiB}, {{7, 0}, 0x2000}};

    const Rights ag = kAccess | kGrant;
    p.caps = {
        cap("gddr_ram", CapType::ram(), {2, 0}, 8 * GiB, ag, "kernel"),
        cap("host_ram", CapType::ram(), {6, 0}, 256 * MiB, ag, "phi_driver"),
        cap("proc_ram", CapType::ram(), {6, 256 * MiB}, 256 * MiB, ag, "phi_process"),
        cap("kernel_ram", CapType::ram(), {6, 512 * MiB}, 512 * MiB, ag, "kernel"),
        cap("smpt_ts", CapType::tstructure(1), {7, 0}, 0x1000, kNoRights, "kernel"),
        cap("iommu_ts", CapType::tstructure(1), {7, 0x1000}, 0x1000, kNoRights, "kernel"),
        cap("smpt_as", CapType::address_space(), {7, 0}, 0x1000, kMap, "phi_driver", 3),
        cap("iommu_as", CapType::address_space(), {7, 0x1000}, 0x1000, kMap, "iommu_driver", 4),
        cap("asids", CapType::asid_range(), {kAsidSpace, 0x40}, 0x40, kNoRights, "kernel"),
    };
    p.acm = {{"phi_driver", Right::map(3)}, {"iommu_driver", Right::map(4)}};
    return p;
}

PlatformSpec pcie_scale(std::size_t devices) {
    if (devices < 1 || devices > 4096) fail(ErrorKind::InvalidArgument, "pcie_scale needs 1..4096 devices");
    PlatformSpec p;
    p.name = "pcie_scale:" + std::to_string(devices);

    NodeDecl sysbus;
    sysbus.id = 1;
    sysbus.label = "sysbus";
    sysbus.spec.translate = {{{0, 1 * GiB}, {{2, 0}}}};
    p.nodes.push_back(sysbus);
    p.nodes.push_back(accepting(2, "dram", 1 * GiB));
    p.nodes.push_back(accepting(3, "regs", devices * 0x1000));

    p.subjects = {"kernel", "driver"};
    p.memory = {{{2, 0}, 1 * GiB}, {{3, 0}, devices * 0x1000}};
    p.caps.push_back(cap("ram", CapType::ram(), {2, 0}, 1 * GiB, kAccess | kGrant, "kernel"));
    for (std::size_t i = 0; i < devices; ++i) {
        const auto dev = static_cast<NodeId>(16 + 2 * i);
        const auto unit = static_cast<NodeId>(dev + 1);
        NodeDecl d;
        d.id = dev;
        d.label = "dev" + std::to_string(i);
        d.visible = true;
        d.spec.translate = {{{0, 4 * GiB}, {{unit, 0}}}};
        p.nodes.push_back(d);

        NodeDecl u;
        u.id = unit;
        u.label = "unit" + std::to_string(i);
        u.dynamic = u.visible = true;
        u.constraint = GranularityContiguous{4096};
        u.output = 1;
        p.nodes.push_back(u);
        p.edges.push_back({unit, 1});

        const Name table{3, i * 0x1000};
        p.caps.push_back(cap("unit" + std::to_string(i) + "_ts", CapType::tstructure(1), table, 0x1000, kNoRights,
                             "kernel"));
        p.caps.push_back(
            cap("unit" + std::to_string(i) + "_as", CapType::address_space(), table, 0x1000, kMap, "driver", unit));
    }
    p.caps.push_back(cap("asids", CapType::asid_range(), {kAsidSpace, 0x8000}, 0x100, kNoRights, "kernel"));
    return p;
}

PlatformSpec arm(const std::string& name, const ArmLayout& l) {
    PlatformSpec p;
    p.name = name;
    const std::uint64_t half = l.dram_size / 2;
    for (NodeId c : {kArmCluster0, kArmCluster1}) {
        NodeDecl n;
        n.id = c;
        n.label = c == kArmCluster0 ? "cluster0" : "cluster1";
        n.kernel_managed = n.visible = true;
        if (l.swapped && c == kArmCluster1) {
            n.spec.translate.push_back({{l.dram_local, half}, {{kArmDram, half}}});
            n.spec.translate.push_back({{l.dram_local + half, half}, {{kArmDram, 0}}});
        } else {
            n.spec.translate.push_back({{l.dram_local, l.dram_size}, {{kArmDram, 0}}});
        }
        if (l.priv) {
            if (c == kArmCluster0) n.spec.translate.push_back({{l.priv0_local, l.priv_size}, {{kArmPriv0, 0}}});
            else n.spec.translate.push_back({{l.priv1_local, l.priv_size}, {{kArmPriv1, 0}}});
        }
        std::sort(n.spec.translate.begin(), n.spec.translate.end());
        p.nodes.push_back(n);
    }
    p.nodes.push_back(accepting(kArmDram, "dram", l.dram_size));
    if (l.priv) {
        p.nodes.push_back(accepting(kArmPriv0, "priv0", l.priv_size));
        p.nodes.push_back(accepting(kArmPriv1, "priv1", l.priv_size));
    }
    p.nodes.push_back(accepting(kArmSram, "sram", 1 * MiB));

    p.subjects = {"kernel", "app"};
    const Rights ag = kAccess | kGrant;
    p.memory.push_back({{kArmDram, 0}, l.dram_size});
    p.caps.push_back(cap("ram", CapType::ram(), {kArmDram, 0}, l.dram_size, ag, "kernel"));
    if (l.priv) {
        p.memory.push_back({{kArmPriv0, 0}, l.priv_size});
        p.memory.push_back({{kArmPriv1, 0}, l.priv_size});
        p.caps.push_back(cap("priv0_ram", CapType::ram(), {kArmPriv0, 0}, l.priv_size, ag, "kernel"));
        p.caps.push_back(cap("priv1_ram", CapType::ram(), {kArmPriv1, 0}, l.priv_size, ag, "kernel"));
    }
    p.memory.push_back({{kArmSram, 0}, 1 * MiB});
    p.caps.push_back(cap("tables", CapType::ram(), {kArmSram, 0}, 1 * MiB, ag, "kernel"));
    p.caps.push_back(cap("asids", CapType::asid_range(), {kAsidSpace, 0x20}, 0x20, kNoRights, "kernel"));
    return p;
}

std::vector<MonitorOp> arm_init_trace() {
    return parse_trace(
        "retype subj=kernel src=@tables type=tstructure:1 offset=0x0 size=0x1000 as=l1\n"
        "derive-as subj=kernel ts=@l1 output=1 as=vspace\n"
        "retype subj=kernel src=@ram type=frame offset=0x0 size=0x1000 as=page\n"
        "map subj=kernel table=@vspace obj=@page first=0 count=1 kind=memory as=page_map\n"
        "copy subj=kernel cap=@vspace to=app as=app_vspace\n");
}

std::vector<std::string> builtin_names() {
    return {"xeon_phi", "pcie_scale:<n>", "arm_uniform", "arm_swapped", "arm_private", "arm_private_swapped"};
}

PlatformSpec builtin(const std::string& name) {
    if (name == "xeon_phi") return xeon_phi();
    if (name == "arm_uniform") return arm(name, {});
    if (name == "arm_swapped") return arm(name, {.swapped = true});
    if (name == "arm_private") return arm(name, {.priv = true});
    if (name == "arm_private_swapped") return arm(name, {.swapped = true, .priv = true});
    constexpr std::string_view prefix = "pcie_scale:";
    if (name.rfind(prefix, 0) == 0) {
        const auto n = text::parse_u64(std::string_view(name).substr(prefix.size()));
        if (n && *n >= 1 && *n <= 4096) return pcie_scale(*n);
    }
    fail(ErrorKind::UnknownPlatform, name);
}

// ---------------------------------------------------------------------------
// Precomputed translations

std::optional<Name> XlateTable::to_canonical(Address local) const {
    auto it = std::upper_bound(forward.begin(), forward.end(), local,
                               [](Address a, const XlateEntry& e) { return a < e.local.base; });
    if (it == forward.begin()) return std::nullopt;
    --it;
    if (!it->local.contains(local)) return std::nullopt;
    return Name{it->canonical.node, it->canonical.addr + (local - it->local.base)};
}

std::optional<Address> XlateTable::to_local(const Name& n) const {
    auto it = std::upper_bound(inverse.begin(), inverse.end(), n,
                               [](const Name& a, const XlateEntry& e) { return a < e.canonical; });
    if (it == inverse.begin()) return std::nullopt;
    --it;
    if (it->canonical.node != n.node || n.addr - it->canonical.addr >= it->local.size) return std::nullopt;
    return it->local.base + (n.addr - it->canonical.addr);
}

XlateTable gen_xlate(const PlatformSpec& spec, NodeId core) {
    const DecodingNet net = net_of(spec);
    if (!net.has(core)) fail(ErrorKind::UnknownNode, "node " + std::to_string(core));
    std::set<NodeId> seen{core};
    std::deque<NodeId> queue{core};
    while (!queue.empty()) {
        const NodeId u = queue.front();
        queue.pop_front();
        if (spec.node(u).dynamic) fail(ErrorKind::DynamicOnPath, spec.node(u).label);
        for (const TranslateEntry& e : net.node(u).translate)
            for (const Name& d : e.dests)
                if (seen.insert(d.node).second) queue.push_back(d.node);
    }
    XlateTable t;
    t.core = core;
    for (const RangePiece& p : resolve_range(net, core, {0, kAddressLimit})) {
        const auto* a = std::get_if<Accepted>(&p.outcome);
        if (!a || a->names.size() != 1) continue;
        t.forward.push_back({p.local, a->names.front()});
    }
    t.inverse = t.forward;
    std::sort(t.inverse.begin(), t.inverse.end(),
              [](const XlateEntry& a, const XlateEntry& b) { return a.canonical < b.canonical; });
    return t;
}

}  // namespace addrnet
