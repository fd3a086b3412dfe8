#pragma once

// Mapping database: every capability in one AVL tree ordered canonically.
// Each node also tracks the largest end position in its subtree, which turns
// overlap/containment queries into pruned walks. Nodes live in a vector and
// link by index, so copying an Mdb copies the whole tree.

#include <cstdint>
#include <functional>
#include <unordered_map>
#include <variant>
#include <vector>

#include "addrnet/capability.hpp"

namespace addrnet {

class Mdb {
public:
    /// Balanced tree in linear time. Input must be in canonical order with
    /// distinct ids; InvalidArgument otherwise.
    static Mdb from_sorted(std::vector<Capability> caps);

    void insert(const Capability& cap);
    void erase(CapId id);

    const Capability* find(CapId id) const;
    const Capability& at(CapId id) const;
    bool contains(CapId id) const { return index_.count(id) != 0; }

    std::size_t size() const { return index_.size(); }
    bool empty() const { return index_.empty(); }
    int height() const;

    /// In canonical order.
    std::vector<Capability> ordered() const;
    void for_each(const std::function<void(const Capability&)>& fn) const;

    /// Capabilities intersecting [base, base+size) of base.node.
    std::vector<Capability> overlapping(const Name& base, std::uint64_t size) const;
    /// Capabilities whose range covers all of [base, base+size).
    std::vector<Capability> containing(const Name& base, std::uint64_t size) const;
    /// Capabilities lying entirely within [base, base+size).
    std::vector<Capability> within(const Name& base, std::uint64_t size) const;

    std::vector<Capability> descendants(CapId id) const;
    std::vector<Capability> ancestors(CapId id) const;

    /// Walks the AVL invariants (balance, order, max-end); for tests.
    bool check_invariants() const;

    bool operator==(const Mdb& other) const { return ordered() == other.ordered(); }

private:
    struct Node {
        Capability cap;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::int32_t height = 1;
        Position max_end = 0;
    };

    std::int32_t h(std::int32_t n) const { return n < 0 ? 0 : nodes_[n].height; }
    void update(std::int32_t n);
    std::int32_t rotate_left(std::int32_t n);
    std::int32_t rotate_right(std::int32_t n);
    std::int32_t rebalance(std::int32_t n);
    std::int32_t insert_at(std::int32_t n, std::int32_t fresh);
    std::int32_t erase_at(std::int32_t n, const Capability& key);
    std::int32_t detach_min(std::int32_t n, std::int32_t& min_out);
    std::int32_t allocate(const Capability& cap);
    std::int32_t build(std::int32_t lo, std::int32_t hi);

    template <typename Fn>
    void inorder(std::int32_t n, Fn&& fn) const;

    std::vector<Node> nodes_;
    std::vector<std::int32_t> free_;
    std::unordered_map<CapId, std::int32_t> index_;
    std::int32_t root_ = -1;
};

struct Descendants { CapId of; };
struct Ancestors { CapId of; };
struct Overlap { Name base; std::uint64_t size; };
struct Contains { Name base; std::uint64_t size; };

using MdbQuery = std::variant<Descendants, Ancestors, Overlap, Contains>;

/// Contains returns the capabilities covering the whole region.
std::vector<Capability> mdb_query(const Mdb& mdb, const MdbQuery& query);

}  // namespace addrnet
