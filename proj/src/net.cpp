#include "addrnet/net.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace addrnet {

namespace {

std::string hex(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string to_string(const Name& n) { return std::to_string(n.node) + ":" + hex(n.addr); }

std::string to_string(const AddrRange& r) { return "[" + hex(r.base) + "," + hex(r.end()) + ")"; }

bool range_in_bounds(const AddrRange& r) {
    return r.size >= 1 && r.base < kAddressLimit && r.size <= kAddressLimit - r.base;
}

const NodeSpec& DecodingNet::node(NodeId id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) fail(ErrorKind::UnknownNode, "node " + std::to_string(id));
    return it->second;
}

std::size_t DecodingNet::translate_entry_count() const {
    std::size_t n = 0;
    for (const auto& [id, spec] : nodes) n += spec.translate.size();
    return n;
}

std::string to_string(const Violation& v) {
    std::string kind;
    switch (v.kind) {
    case Violation::Kind::DanglingDest: kind = "DanglingDest"; break;
    case Violation::Kind::OverlappingTranslate: kind = "OverlappingTranslate"; break;
    case Violation::Kind::AcceptTranslateOverlap: kind = "AcceptTranslateOverlap"; break;
    case Violation::Kind::OutOfBounds: kind = "OutOfBounds"; break;
    }
    std::string s = kind + "{node:" + std::to_string(v.node) + ",range:" + to_string(v.range);
    if (v.dest_node) s += ",dest_node:" + std::to_string(*v.dest_node);
    return s + "}";
}

std::vector<Violation> node_wellformed(NodeId id, const NodeSpec& spec, bool allow_overlap) {
    using K = Violation::Kind;
    std::vector<Violation> out;
    for (const auto& r : spec.accept)
        if (!range_in_bounds(r)) out.push_back({K::OutOfBounds, id, r, std::nullopt});
    for (const auto& e : spec.translate) {
        if (!range_in_bounds(e.src) || e.dests.empty()) {
            out.push_back({K::OutOfBounds, id, e.src, std::nullopt});
            continue;
        }
        for (const auto& d : e.dests)
            if (!range_in_bounds({d.addr, e.src.size}))
                out.push_back({K::OutOfBounds, id, e.src, d.node});
    }
    for (std::size_t i = 0; i < spec.translate.size(); ++i)
        for (std::size_t j = i + 1; j < spec.translate.size(); ++j)
            if (spec.translate[i].src.overlaps(spec.translate[j].src))
                out.push_back({K::OverlappingTranslate, id, spec.translate[j].src, std::nullopt});
    if (!allow_overlap)
        for (const auto& a : spec.accept)
            for (const auto& e : spec.translate)
                if (a.overlaps(e.src)) out.push_back({K::AcceptTranslateOverlap, id, e.src, std::nullopt});
    return out;
}

std::vector<Violation> net_wellformed(const DecodingNet& net) {
    std::vector<Violation> out;
    for (const auto& [id, spec] : net.nodes) {
        auto local = node_wellformed(id, spec, net.allow_overlap);
        out.insert(out.end(), local.begin(), local.end());
        for (const auto& e : spec.translate)
            for (const auto& d : e.dests)
                if (!net.has(d.node))
                    out.push_back({Violation::Kind::DanglingDest, id, e.src, d.node});
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

const AddrRange* find_accept(const NodeSpec& spec, Address a) {
    for (const auto& r : spec.accept)
        if (r.contains(a)) return &r;
    return nullptr;
}

const TranslateEntry* find_entry(const NodeSpec& spec, Address a) {
    for (const auto& e : spec.translate)
        if (e.src.contains(a)) return &e;
    return nullptr;
}

}  // namespace

StepResult decode_step(const DecodingNet& net, const Name& n) {
    const NodeSpec& spec = net.node(n.node);
    if (find_accept(spec, n.addr)) return Accepts{};
    if (const auto* e = find_entry(spec, n.addr)) {
        TranslatesTo t;
        const Address off = n.addr - e->src.base;
        for (const auto& d : e->dests) t.images.push_back({d.node, d.addr + off});
        return t;
    }
    return Undecodable{n};
}

std::size_t hop_limit(const DecodingNet& net) { return net.translate_entry_count(); }

std::string to_string(const ResolveResult& r) {
    std::ostringstream os;
    if (const auto* a = std::get_if<Accepted>(&r)) {
        os << "Accepted{";
        for (std::size_t i = 0; i < a->names.size(); ++i) os << (i ? "," : "") << to_string(a->names[i]);
        os << "}";
    } else if (const auto* u = std::get_if<Undecodable>(&r)) {
        os << "Undecodable{" << to_string(u->at) << "}";
    } else {
        const auto& l = std::get<Loop>(r);
        os << "Loop{";
        for (std::size_t i = 0; i < l.cycle.size(); ++i) os << (i ? "," : "") << to_string(l.cycle[i]);
        os << "}";
    }
    return os.str();
}

ResolveResult shift(const ResolveResult& r, std::uint64_t by) {
    auto mv = [by](std::vector<Name> v) {
        for (auto& n : v) n.addr += by;
        return v;
    };
    if (const auto* a = std::get_if<Accepted>(&r)) return Accepted{mv(a->names)};
    if (const auto* u = std::get_if<Undecodable>(&r)) return Undecodable{{u->at.node, u->at.addr + by}};
    return Loop{mv(std::get<Loop>(r).cycle)};
}

namespace {

std::optional<Loop> check_loop(const std::vector<Name>& path, const Name& here, std::size_t limit) {
    auto it = std::find(path.begin(), path.end(), here);
    if (it != path.end()) {
        Loop l{{it, path.end()}};
        l.cycle.push_back(here);
        return l;
    }
    if (path.size() > limit) {
        Loop l{path};
        l.cycle.push_back(here);
        return l;
    }
    return std::nullopt;
}

void merge_into(Accepted& acc, const Accepted& more) {
    acc.names.insert(acc.names.end(), more.names.begin(), more.names.end());
    std::sort(acc.names.begin(), acc.names.end());
    acc.names.erase(std::unique(acc.names.begin(), acc.names.end()), acc.names.end());
}

ResolveResult resolve_point(const DecodingNet& net, const Name& n, std::vector<Name>& path, std::size_t limit) {
    if (auto l = check_loop(path, n, limit)) return *l;
    StepResult step = decode_step(net, n);
    if (std::holds_alternative<Accepts>(step)) return Accepted{{n}};
    if (auto* u = std::get_if<Undecodable>(&step)) return *u;
    Accepted acc;
    path.push_back(n);
    for (const auto& img : std::get<TranslatesTo>(step).images) {
        ResolveResult sub = resolve_point(net, img, path, limit);
        if (!std::holds_alternative<Accepted>(sub)) {
            path.pop_back();
            return sub;
        }
        merge_into(acc, std::get<Accepted>(sub));
    }
    path.pop_back();
    return acc;
}

// Pieces of a range resolution use offsets relative to the start of the
// range being resolved; callers rebase them.
struct RelPiece {
    std::uint64_t off;
    std::uint64_t size;
    ResolveResult outcome;
};

std::vector<Name> shifted(const std::vector<Name>& path, std::uint64_t by) {
    std::vector<Name> out = path;
    for (auto& n : out) n.addr += by;
    return out;
}

void push_merged(std::vector<RelPiece>& out, RelPiece p) {
    if (!out.empty()) {
        RelPiece& last = out.back();
        if (last.off + last.size == p.off && shift(last.outcome, last.size) == p.outcome) {
            last.size += p.size;
            return;
        }
    }
    out.push_back(std::move(p));
}

std::vector<RelPiece> resolve_rel(const DecodingNet& net, const Name& start, std::uint64_t size,
                                  const std::vector<Name>& path, std::size_t limit) {
    if (auto l = check_loop(path, start, limit)) return {{0, size, *l}};
    const NodeSpec& spec = net.node(start.node);
    const Address lo = start.addr;
    const Address hi = start.addr + size;

    std::vector<Address> cuts{lo, hi};
    auto add_cut = [&](Address a) {
        if (a > lo && a < hi) cuts.push_back(a);
    };
    for (const auto& r : spec.accept) {
        add_cut(r.base);
        add_cut(r.end());
    }
    for (const auto& e : spec.translate) {
        add_cut(e.src.base);
        add_cut(e.src.end());
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<RelPiece> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const Address s = cuts[i];
        const std::uint64_t len = cuts[i + 1] - s;
        const std::uint64_t off = s - lo;
        if (find_accept(spec, s)) {
            push_merged(out, {off, len, Accepted{{{start.node, s}}}});
            continue;
        }
        const TranslateEntry* e = find_entry(spec, s);
        if (!e) {
            push_merged(out, {off, len, Undecodable{{start.node, s}}});
            continue;
        }
        const std::uint64_t eoff = s - e->src.base;
        std::vector<Name> next_path = shifted(path, off);
        next_path.push_back({start.node, s});

        std::vector<std::vector<RelPiece>> per_dest;
        std::vector<std::uint64_t> sub_cuts{0, len};
        for (const auto& d : e->dests) {
            per_dest.push_back(resolve_rel(net, {d.node, d.addr + eoff}, len, next_path, limit));
            for (const auto& p : per_dest.back()) sub_cuts.push_back(p.off);
        }
        std::sort(sub_cuts.begin(), sub_cuts.end());
        sub_cuts.erase(std::unique(sub_cuts.begin(), sub_cuts.end()), sub_cuts.end());

        for (std::size_t j = 0; j + 1 < sub_cuts.size(); ++j) {
            const std::uint64_t r0 = sub_cuts[j];
            const std::uint64_t rlen = sub_cuts[j + 1] - r0;
            std::optional<ResolveResult> combined;
            Accepted acc;
            for (const auto& pieces : per_dest) {
                auto it = std::upper_bound(pieces.begin(), pieces.end(), r0,
                                           [](std::uint64_t v, const RelPiece& p) { return v < p.off; });
                const RelPiece& p = *std::prev(it);
                ResolveResult o = shift(p.outcome, r0 - p.off);
                if (!std::holds_alternative<Accepted>(o)) {
                    combined = std::move(o);
                    break;
                }
                merge_into(acc, std::get<Accepted>(o));
            }
            if (!combined) combined = std::move(acc);
            push_merged(out, {off + r0, rlen, std::move(*combined)});
        }
    }
    return out;
}

}  // namespace

ResolveResult resolve(const DecodingNet& net, const Name& n) {
    std::vector<Name> path;
    return resolve_point(net, n, path, hop_limit(net));
}

std::vector<RangePiece> resolve_range(const DecodingNet& net, NodeId node, const AddrRange& range) {
    if (!range_in_bounds(range)) fail(ErrorKind::RangeError, to_string(range));
    auto rel = resolve_rel(net, {node, range.base}, range.size, {}, hop_limit(net));
    std::vector<RangePiece> out;
    out.reserve(rel.size());
    for (auto& p : rel) out.push_back({{range.base + p.off, p.size}, std::move(p.outcome)});
    return out;
}

}  // namespace addrnet
