#include "addrnet/mdb.hpp"

#include <algorithm>

namespace addrnet {

void Mdb::update(std::int32_t n) {
    Node& node = nodes_[n];
    node.height = 1 + std::max(h(node.left), h(node.right));
    Position m = end_of(node.cap);
    if (node.left >= 0) m = std::max(m, nodes_[node.left].max_end);
    if (node.right >= 0) m = std::max(m, nodes_[node.right].max_end);
    node.max_end = m;
}

std::int32_t Mdb::rotate_left(std::int32_t n) {
    const std::int32_t r = nodes_[n].right;
    nodes_[n].right = nodes_[r].left;
    nodes_[r].left = n;
    update(n);
    update(r);
    return r;
}

std::int32_t Mdb::rotate_right(std::int32_t n) {
    const std::int32_t l = nodes_[n].left;
    nodes_[n].left = nodes_[l].right;
    nodes_[l].right = n;
    update(n);
    update(l);
    return l;
}

std::int32_t Mdb::rebalance(std::int32_t n) {
    update(n);
    const int balance = h(nodes_[n].left) - h(nodes_[n].right);
    if (balance > 1) {
        const std::int32_t l = nodes_[n].left;
        if (h(nodes_[l].left) < h(nodes_[l].right)) nodes_[n].left = rotate_left(l);
        return rotate_right(n);
    }
    if (balance < -1) {
        const std::int32_t r = nodes_[n].right;
        if (h(nodes_[r].right) < h(nodes_[r].left)) nodes_[n].right = rotate_right(r);
        return rotate_left(n);
    }
    return n;
}

std::int32_t Mdb::allocate(const Capability& cap) {
    std::int32_t slot;
    if (!free_.empty()) {
        slot = free_.back();
        free_.pop_back();
        nodes_[slot] = Node{cap};
    } else {
        slot = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(Node{cap});
    }
    update(slot);
    return slot;
}

std::int32_t Mdb::insert_at(std::int32_t n, std::int32_t fresh) {
    if (n < 0) return fresh;
    if (canonical_cmp(nodes_[fresh].cap, nodes_[n].cap) < 0)
        nodes_[n].left = insert_at(nodes_[n].left, fresh);
    else
        nodes_[n].right = insert_at(nodes_[n].right, fresh);
    return rebalance(n);
}

std::int32_t Mdb::build(std::int32_t lo, std::int32_t hi) {
    if (lo >= hi) return -1;
    const std::int32_t mid = lo + (hi - lo) / 2;
    nodes_[mid].left = build(lo, mid);
    nodes_[mid].right = build(mid + 1, hi);
    update(mid);
    return mid;
}

Mdb Mdb::from_sorted(std::vector<Capability> caps) {
    Mdb m;
    m.nodes_.reserve(caps.size());
    m.index_.reserve(caps.size());
    for (std::size_t i = 0; i < caps.size(); ++i) {
        if (i > 0 && canonical_cmp(caps[i - 1], caps[i]) > 0) fail(ErrorKind::InvalidArgument, "not in canonical order");
        if (!m.index_.emplace(caps[i].id, static_cast<std::int32_t>(i)).second)
            fail(ErrorKind::Conflict, "capability id already present");
        m.nodes_.push_back(Node{std::move(caps[i])});
    }
    m.root_ = m.build(0, static_cast<std::int32_t>(m.nodes_.size()));
    return m;
}

void Mdb::insert(const Capability& cap) {
    if (index_.count(cap.id)) fail(ErrorKind::Conflict, "capability id already present");
    const std::int32_t fresh = allocate(cap);
    index_.emplace(cap.id, fresh);
    root_ = insert_at(root_, fresh);
}

std::int32_t Mdb::detach_min(std::int32_t n, std::int32_t& min_out) {
    if (nodes_[n].left < 0) {
        min_out = n;
        return nodes_[n].right;
    }
    nodes_[n].left = detach_min(nodes_[n].left, min_out);
    return rebalance(n);
}

std::int32_t Mdb::erase_at(std::int32_t n, const Capability& key) {
    if (n < 0) fail(ErrorKind::NotInMdb, to_string(key));
    const auto c = canonical_cmp(key, nodes_[n].cap);
    if (c < 0) {
        nodes_[n].left = erase_at(nodes_[n].left, key);
        return rebalance(n);
    }
    if (c > 0) {
        nodes_[n].right = erase_at(nodes_[n].right, key);
        return rebalance(n);
    }
    const std::int32_t l = nodes_[n].left;
    const std::int32_t r = nodes_[n].right;
    free_.push_back(n);
    if (l < 0) return r;
    if (r < 0) return l;
    std::int32_t successor = -1;
    const std::int32_t rest = detach_min(r, successor);
    nodes_[successor].left = l;
    nodes_[successor].right = rest;
    return rebalance(successor);
}

void Mdb::erase(CapId id) {
    auto it = index_.find(id);
    if (it == index_.end()) fail(ErrorKind::NotInMdb, "capability " + std::to_string(std::uint64_t(id)));
    const Capability key = nodes_[it->second].cap;
    root_ = erase_at(root_, key);
    index_.erase(it);
}

const Capability* Mdb::find(CapId id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &nodes_[it->second].cap;
}

const Capability& Mdb::at(CapId id) const {
    const Capability* c = find(id);
    if (!c) fail(ErrorKind::NotInMdb, "capability " + std::to_string(std::uint64_t(id)));
    return *c;
}

int Mdb::height() const { return h(root_); }

template <typename Fn>
void Mdb::inorder(std::int32_t n, Fn&& fn) const {
    if (n < 0) return;
    inorder(nodes_[n].left, fn);
    fn(nodes_[n].cap);
    inorder(nodes_[n].right, fn);
}

std::vector<Capability> Mdb::ordered() const {
    std::vector<Capability> out;
    out.reserve(size());
    inorder(root_, [&](const Capability& c) { out.push_back(c); });
    return out;
}

void Mdb::for_each(const std::function<void(const Capability&)>& fn) const { inorder(root_, fn); }

std::vector<Capability> Mdb::overlapping(const Name& base, std::uint64_t size) const {
    const Position lo = position(base);
    const Position hi = lo + size;
    std::vector<Capability> out;
    auto walk = [&](auto&& self, std::int32_t n) -> void {
        if (n < 0 || nodes_[n].max_end <= lo) return;
        self(self, nodes_[n].left);
        const Capability& c = nodes_[n].cap;
        if (start_of(c) >= hi) return;
        if (end_of(c) > lo) out.push_back(c);
        self(self, nodes_[n].right);
    };
    walk(walk, root_);
    return out;
}

std::vector<Capability> Mdb::containing(const Name& base, std::uint64_t size) const {
    const Position lo = position(base);
    const Position hi = lo + size;
    std::vector<Capability> out;
    auto walk = [&](auto&& self, std::int32_t n) -> void {
        if (n < 0 || nodes_[n].max_end < hi) return;
        self(self, nodes_[n].left);
        const Capability& c = nodes_[n].cap;
        if (start_of(c) > lo) return;
        if (end_of(c) >= hi) out.push_back(c);
        self(self, nodes_[n].right);
    };
    walk(walk, root_);
    return out;
}

std::vector<Capability> Mdb::within(const Name& base, std::uint64_t size) const {
    const Position lo = position(base);
    const Position hi = lo + size;
    std::vector<Capability> out;
    auto walk = [&](auto&& self, std::int32_t n) -> void {
        if (n < 0) return;
        const Capability& c = nodes_[n].cap;
        const Position s = start_of(c);
        if (s >= lo) self(self, nodes_[n].left);
        if (s >= lo && s < hi && end_of(c) <= hi) out.push_back(c);
        if (s < hi) self(self, nodes_[n].right);
    };
    walk(walk, root_);
    return out;
}

std::vector<Capability> Mdb::descendants(CapId id) const {
    const Capability& c = at(id);
    std::vector<Capability> out = within(c.base, c.size);
    std::erase_if(out, [&](const Capability& x) { return !is_descendant(c, x); });
    return out;
}

std::vector<Capability> Mdb::ancestors(CapId id) const {
    const Capability& c = at(id);
    std::vector<Capability> out = containing(c.base, c.size);
    std::erase_if(out, [&](const Capability& x) { return !is_descendant(x, c); });
    return out;
}

bool Mdb::check_invariants() const {
    bool ok = true;
    std::size_t count = 0;
    auto walk = [&](auto&& self, std::int32_t n) -> std::pair<int, Position> {
        if (n < 0) return {0, 0};
        ++count;
        const Node& node = nodes_[n];
        auto [lh, lm] = self(self, node.left);
        auto [rh, rm] = self(self, node.right);
        if (node.left >= 0 && canonical_cmp(nodes_[node.left].cap, node.cap) >= 0) ok = false;
        if (node.right >= 0 && canonical_cmp(node.cap, nodes_[node.right].cap) >= 0) ok = false;
        if (std::abs(lh - rh) > 1 || node.height != 1 + std::max(lh, rh)) ok = false;
        const Position m = std::max({end_of(node.cap), lm, rm});
        if (node.max_end != m) ok = false;
        return {node.height, m};
    };
    walk(walk, root_);
    return ok && count == index_.size();
}

std::vector<Capability> mdb_query(const Mdb& mdb, const MdbQuery& query) {
    return std::visit(
        [&](const auto& q) -> std::vector<Capability> {
            using Q = std::decay_t<decltype(q)>;
            if constexpr (std::is_same_v<Q, Descendants>) return mdb.descendants(q.of);
            else if constexpr (std::is_same_v<Q, Ancestors>) return mdb.ancestors(q.of);
            else if constexpr (std::is_same_v<Q, Overlap>) return mdb.overlapping(q.base, q.size);
            else return mdb.containing(q.base, q.size);
        },
        query);
}

}  // namespace addrnet
