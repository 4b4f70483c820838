#pragma once
// Radiality / traversal checks and rooted-tree utilities.
//
// A configuration is operable iff every bus reaches the root over closed
// branches (all-node-traversing) and the closed branches form a tree
// (radiality). Radiality is decided by the rank of the reduced node-branch
// incidence matrix over GF(2): rank = N-1 together with a closed-branch
// count of N-1 is equivalent to the closed subgraph being a spanning tree.

#include <cstdint>
#include <vector>

#include "gridconf/grid_model.hpp"

namespace gridconf {

/// Dense bit matrix, row-major, 64 bits per word.
struct BitMatrix {
    int rows = 0;
    int cols = 0;
    int words_per_row = 0;
    std::vector<std::uint64_t> words;

    BitMatrix(int r, int c)
        : rows(r), cols(c), words_per_row((c + 63) / 64),
          words(static_cast<size_t>(r) * static_cast<size_t>(words_per_row), 0) {}

    void set(int r, int c) {
        words[static_cast<size_t>(r) * words_per_row + c / 64] |= std::uint64_t{1} << (c % 64);
    }
    bool get(int r, int c) const {
        return (words[static_cast<size_t>(r) * words_per_row + c / 64] >> (c % 64)) & 1;
    }
};

/// Reduced node-branch incidence matrix of the closed subgraph: one row per
/// non-root bus, one column per closed branch, entries over GF(2).
inline BitMatrix build_incidence_matrix(const Network& net, const Configuration& cfg) {
    const int n = net.bus_count();
    std::vector<int> closed;
    for (const auto& b : net.branches)
        if (!cfg.contains(b.id)) closed.push_back(b.id);

    BitMatrix m(n - 1, static_cast<int>(closed.size()));
    // bus id -> row: skip the root
    auto row_of = [&](int bus) { return bus < net.root ? bus - 1 : bus - 2; };
    for (int c = 0; c < static_cast<int>(closed.size()); ++c) {
        const Branch& b = net.branch(closed[static_cast<size_t>(c)]);
        if (b.from_bus != net.root) m.set(row_of(b.from_bus), c);
        if (b.to_bus != net.root) m.set(row_of(b.to_bus), c);
    }
    return m;
}

/// Rank over GF(2) by bit-packed Gaussian elimination.
inline int rank_gf2(BitMatrix m) {
    int rank = 0;
    const int w = m.words_per_row;
    for (int col = 0; col < m.cols && rank < m.rows; ++col) {
        const int word = col / 64;
        const std::uint64_t bit = std::uint64_t{1} << (col % 64);
        int pivot = -1;
        for (int r = rank; r < m.rows; ++r)
            if (m.words[static_cast<size_t>(r) * w + word] & bit) {
                pivot = r;
                break;
            }
        if (pivot < 0) continue;
        if (pivot != rank)
            for (int k = 0; k < w; ++k)
                std::swap(m.words[static_cast<size_t>(pivot) * w + k],
                          m.words[static_cast<size_t>(rank) * w + k]);
        for (int r = 0; r < m.rows; ++r) {
            if (r == rank) continue;
            if (m.words[static_cast<size_t>(r) * w + word] & bit)
                for (int k = 0; k < w; ++k)
                    m.words[static_cast<size_t>(r) * w + k] ^=
                        m.words[static_cast<size_t>(rank) * w + k];
        }
        ++rank;
    }
    return rank;
}

/// True iff every bus is connected to the root through closed branches.
inline bool all_nodes_traversed(const Network& net, const Configuration& cfg) {
    const int n = net.bus_count();
    std::vector<std::vector<int>> adj(static_cast<size_t>(n + 1));
    for (const auto& b : net.branches) {
        if (cfg.contains(b.id)) continue;
        adj[static_cast<size_t>(b.from_bus)].push_back(b.to_bus);
        adj[static_cast<size_t>(b.to_bus)].push_back(b.from_bus);
    }
    std::vector<char> seen(static_cast<size_t>(n + 1), 0);
    std::vector<int> stack{net.root};
    seen[static_cast<size_t>(net.root)] = 1;
    int reached = 1;
    while (!stack.empty()) {
        int k = stack.back();
        stack.pop_back();
        for (int nb : adj[static_cast<size_t>(k)])
            if (!seen[static_cast<size_t>(nb)]) {
                seen[static_cast<size_t>(nb)] = 1;
                ++reached;
                stack.push_back(nb);
            }
    }
    return reached == n;
}

/// Rank criterion. The count check is required on top of the rank test: rank
/// N-1 alone only certifies a spanning connected subgraph, not a tree.
inline bool is_radial(const Network& net, const Configuration& cfg) {
    const int closed = net.branch_count() - static_cast<int>(cfg.open_edges.size());
    if (closed != net.bus_count() - 1) return false;
    return rank_gf2(build_incidence_matrix(net, cfg)) == net.bus_count() - 1;
}

/// Union-find over bus ids, sized for the hot enumeration loop.
struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(int n) : parent(static_cast<size_t>(n)) { reset(); }

    void reset() {
        for (int i = 0; i < static_cast<int>(parent.size()); ++i)
            parent[static_cast<size_t>(i)] = i;
    }
    int find(int x) {
        while (parent[static_cast<size_t>(x)] != x) {
            parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
            x = parent[static_cast<size_t>(x)];
        }
        return x;
    }
    /// False if x and y were already connected (a cycle).
    bool unite(int x, int y) {
        int rx = find(x), ry = find(y);
        if (rx == ry) return false;
        parent[static_cast<size_t>(rx)] = ry;
        return true;
    }
};

/// Fast spanning-tree test used by the oracle: closed count N-1 and no cycle.
/// Equivalent to is_radial (see the equivalence property in the test suite).
inline bool is_spanning_config(const Network& net, const Configuration& cfg) {
    const int n = net.bus_count();
    if (net.branch_count() - static_cast<int>(cfg.open_edges.size()) != n - 1) return false;
    UnionFind uf(n + 1);
    for (const auto& b : net.branches) {
        if (cfg.contains(b.id)) continue;
        if (!uf.unite(b.from_bus, b.to_bus)) return false;
    }
    return true;
}

/// Parent map of the operating tree. parent_bus[k] / parent_branch[k] are 0
/// for the root.
struct RootedTree {
    int root = 1;
    std::vector<int> parent_bus;     // index = bus id
    std::vector<int> parent_branch;  // index = bus id
    std::vector<int> bfs_order;      // root first; parents precede children

    /// Branch ids from bus k up to the root (the path set of k).
    std::vector<int> path_to_root(int bus) const {
        std::vector<int> path;
        while (bus != root) {
            path.push_back(parent_branch[static_cast<size_t>(bus)]);
            bus = parent_bus[static_cast<size_t>(bus)];
        }
        return path;
    }
};

/// Breadth-first parent map rooted at the substation.
/// Throws ConstraintError naming the violated constraint if cfg is not operable.
inline RootedTree build_rooted_tree(const Network& net, const Configuration& cfg) {
    if (!all_nodes_traversed(net, cfg))
        throw ConstraintError("all-node-traversing constraint violated");
    if (!is_radial(net, cfg))
        throw ConstraintError("radiality constraint violated");

    const int n = net.bus_count();
    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<size_t>(n + 1));
    for (const auto& b : net.branches) {
        if (cfg.contains(b.id)) continue;
        adj[static_cast<size_t>(b.from_bus)].emplace_back(b.to_bus, b.id);
        adj[static_cast<size_t>(b.to_bus)].emplace_back(b.from_bus, b.id);
    }
    RootedTree tree;
    tree.root = net.root;
    tree.parent_bus.assign(static_cast<size_t>(n + 1), 0);
    tree.parent_branch.assign(static_cast<size_t>(n + 1), 0);
    tree.bfs_order.reserve(static_cast<size_t>(n));
    std::vector<char> seen(static_cast<size_t>(n + 1), 0);
    seen[static_cast<size_t>(net.root)] = 1;
    tree.bfs_order.push_back(net.root);
    for (size_t head = 0; head < tree.bfs_order.size(); ++head) {
        int k = tree.bfs_order[head];
        for (auto [nb, bid] : adj[static_cast<size_t>(k)])
            if (!seen[static_cast<size_t>(nb)]) {
                seen[static_cast<size_t>(nb)] = 1;
                tree.parent_bus[static_cast<size_t>(nb)] = k;
                tree.parent_branch[static_cast<size_t>(nb)] = bid;
                tree.bfs_order.push_back(nb);
            }
    }
    return tree;
}

}  // namespace gridconf
