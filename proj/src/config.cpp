#include "addrnet/config.hpp"

#include <algorithm>
#include <bit>

namespace addrnet {

namespace {

bool pow2_at_least_page(std::uint64_t v) { return v >= 4096 && std::has_single_bit(v); }

}  // namespace

void validate_constraint(const ConfigConstraint& c) {
    if (const auto* g = std::get_if<GranularityContiguous>(&c)) {
        if (!pow2_at_least_page(g->grain))
            fail(ErrorKind::InvalidArgument, "granularity must be a power of two >= 4096");
    } else if (const auto* r = std::get_if<RegisterArray>(&c)) {
        if (!pow2_at_least_page(r->slot_size))
            fail(ErrorKind::InvalidArgument, "slot size must be a power of two >= 4096");
        if (r->num_slots == 0) fail(ErrorKind::InvalidArgument, "register array needs at least one slot");
    }
}

std::uint64_t slot_size(const ConfigConstraint& c) {
    if (const auto* g = std::get_if<GranularityContiguous>(&c)) return g->grain;
    if (const auto* r = std::get_if<RegisterArray>(&c)) return r->slot_size;
    if (std::holds_alternative<FixedNode>(c)) return 0;
    return 4096;
}

const ConfigConstraint& ConfigSpace::at(AddressSpaceId asid) const {
    auto it = constraints.find(asid);
    if (it == constraints.end()) fail(ErrorKind::UnknownAddressSpace, "address space " + std::to_string(asid));
    return it->second;
}

bool in_config_space(const ConfigSpace& cs, AddressSpaceId asid, const NodeSpec& node) {
    const ConfigConstraint& c = cs.at(asid);
    if (const auto* f = std::get_if<FixedNode>(&c)) return node == f->node;
    if (!node_wellformed(asid, node).empty()) return false;
    if (const auto* g = std::get_if<GranularityContiguous>(&c)) {
        return std::all_of(node.translate.begin(), node.translate.end(), [&](const TranslateEntry& e) {
            return e.dests.size() == 1 && e.src.base % g->grain == 0 && e.src.size % g->grain == 0;
        });
    }
    if (const auto* r = std::get_if<RegisterArray>(&c)) {
        if (node.translate.size() > r->num_slots) return false;
        return std::all_of(node.translate.begin(), node.translate.end(), [&](const TranslateEntry& e) {
            return e.dests.size() == 1 && e.src.size == r->slot_size && e.src.base % r->slot_size == 0 &&
                   e.src.base / r->slot_size < r->num_slots;
        });
    }
    return true;
}

namespace {

NodeSpec current_node(const ConfigSpace& cs, const Configuration& cfg, AddressSpaceId asid) {
    cs.at(asid);
    auto it = cfg.current.find(asid);
    return it == cfg.current.end() ? NodeSpec{} : it->second;
}

}  // namespace

Configuration modify_map(const ConfigSpace& cs, const Configuration& cfg, AddressSpaceId asid,
                         const AddrRange& src, const Name& dest) {
    NodeSpec node = current_node(cs, cfg, asid);
    if (!range_in_bounds(src) || !range_in_bounds({dest.addr, src.size}))
        fail(ErrorKind::ConstraintViolation, "entry out of bounds " + to_string(src));
    for (const auto& e : node.translate)
        if (e.src.overlaps(src) && !src.contains(e.src))
            fail(ErrorKind::OverlapConflict, to_string(src) + " partially overlaps " + to_string(e.src));
    std::erase_if(node.translate, [&](const TranslateEntry& e) { return src.contains(e.src); });
    TranslateEntry entry{src, {dest}};
    auto pos = std::lower_bound(node.translate.begin(), node.translate.end(), entry,
                                [](const TranslateEntry& a, const TranslateEntry& b) { return a.src < b.src; });
    node.translate.insert(pos, std::move(entry));
    if (!in_config_space(cs, asid, node))
        fail(ErrorKind::ConstraintViolation,
             "address space " + std::to_string(asid) + " cannot translate " + to_string(src));
    Configuration out = cfg;
    out.current[asid] = std::move(node);
    return out;
}

Configuration clear_map(const ConfigSpace& cs, const Configuration& cfg, AddressSpaceId asid,
                        const AddrRange& src) {
    NodeSpec node = current_node(cs, cfg, asid);
    auto it = std::find_if(node.translate.begin(), node.translate.end(),
                           [&](const TranslateEntry& e) { return e.src == src; });
    if (it == node.translate.end())
        fail(ErrorKind::NoSuchEntry, "address space " + std::to_string(asid) + " has no entry " + to_string(src));
    node.translate.erase(it);
    if (!in_config_space(cs, asid, node))
        fail(ErrorKind::ConstraintViolation, "address space " + std::to_string(asid) + " must keep its entries");
    Configuration out = cfg;
    out.current[asid] = std::move(node);
    return out;
}

DecodingNet materialize(const DecodingNet& net, const Configuration& cfg) {
    DecodingNet out = net;
    for (const auto& [asid, spec] : cfg.current) {
        auto it = out.nodes.find(asid);
        if (it == out.nodes.end())
            fail(ErrorKind::UnknownAddressSpace, "address space " + std::to_string(asid) + " not in net");
        it->second = spec;
    }
    return out;
}

}  // namespace addrnet
