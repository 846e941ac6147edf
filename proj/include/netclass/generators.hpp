#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "netclass/graph.hpp"
#include "netclass/rng.hpp"

namespace netclass {

struct BaParams {
    std::size_t n = 1000;  // target node count
    std::size_t m = 4;     // edges added per new node

    void validate() const {
        if (m < 1 || m >= n)
            throw std::invalid_argument("ba: need 1 <= m < n, got m=" + std::to_string(m) + " n=" + std::to_string(n));
    }
};

struct WsParams {
    std::size_t n = 1000;  // node count
    std::size_t k = 8;     // ring neighbors per node, even
    double p = 0.1;        // per-edge rewiring probability

    void validate() const {
        if (k % 2 != 0) throw std::invalid_argument("ws: k must be even, got " + std::to_string(k));
        if (k < 2 || k >= n)
            throw std::invalid_argument("ws: need 2 <= k < n, got k=" + std::to_string(k) + " n=" + std::to_string(n));
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("ws: p must be in [0,1]");
    }
};

// Degree-proportional endpoint sampler backing preferential attachment.
// Every stored edge contributes both endpoints, so a uniform draw from the
// pool selects a node with probability degree/total_degree.
class PreferentialPool {
public:
    void add_edge(NodeId a, NodeId b) {
        pool_.push_back(a);
        pool_.push_back(b);
    }

    std::size_t endpoint_count() const { return pool_.size(); }

    NodeId sample(RngStream& rng) const {
        return pool_[rng.next_below(pool_.size())];
    }

private:
    std::vector<NodeId> pool_;
};

// Barabasi-Albert growth: complete seed graph on m nodes, then n-m steps
// each attaching one new node to m distinct existing nodes drawn
// degree-proportionally (duplicates rejected and redrawn). Degrees are
// frozen during a step; the step's edges enter the pool afterwards.
// Edge count is exactly m(m-1)/2 + m(n-m).
inline Graph generate_ba(const BaParams& params, RngStream& rng) {
    params.validate();
    const std::size_t n = params.n, m = params.m;

    std::vector<EdgeRecord> edges;
    edges.reserve(m * (m - 1) / 2 + m * (n - m));
    PreferentialPool pool;

    for (NodeId i = 0; i + 1 < m; ++i)
        for (NodeId j = i + 1; j < m; ++j) {
            edges.push_back({i, j, 1.0});
            pool.add_edge(i, j);
        }

    std::vector<NodeId> targets;
    targets.reserve(m);
    for (NodeId v = static_cast<NodeId>(m); v < n; ++v) {
        targets.clear();
        while (targets.size() < m) {
            NodeId c = pool.sample(rng);
            bool duplicate = false;
            for (NodeId t : targets)
                if (t == c) {
                    duplicate = true;
                    break;
                }
            if (!duplicate) targets.push_back(c);
        }
        for (NodeId t : targets) edges.push_back({v, t, 1.0});
        for (NodeId t : targets) pool.add_edge(v, t);
    }
    return Graph::build(n, /*directed=*/false, std::move(edges));
}

// Watts-Strogatz: ring lattice joining each node to its k/2 nearest
// neighbors per side, then a single scan over the lattice edges in
// (node, offset) order, rewiring each with probability p to a uniformly
// drawn endpoint that is neither the source nor already adjacent to it.
// A rewire draw that fails 100 times leaves the edge in place, so the
// edge count is n*k/2 for every seed and every p.
inline Graph generate_ws(const WsParams& params, RngStream& rng) {
    params.validate();
    const std::size_t n = params.n, half_k = params.k / 2;

    std::vector<EdgeRecord> edges;
    edges.reserve(n * half_k);
    std::vector<std::unordered_set<NodeId>> adjacent(n);
    auto link = [&](NodeId a, NodeId b) {
        adjacent[a].insert(b);
        adjacent[b].insert(a);
    };
    auto unlink = [&](NodeId a, NodeId b) {
        adjacent[a].erase(b);
        adjacent[b].erase(a);
    };

    for (NodeId i = 0; i < n; ++i)
        for (std::size_t j = 1; j <= half_k; ++j) {
            NodeId nb = static_cast<NodeId>((i + j) % n);
            edges.push_back({i, nb, 1.0});
            link(i, nb);
        }

    for (EdgeRecord& e : edges) {
        if (rng.next_double() >= params.p) continue;
        NodeId src = e.src;
        for (int attempt = 0; attempt < 100; ++attempt) {
            NodeId w = static_cast<NodeId>(rng.next_below(n));
            if (w == src || adjacent[src].count(w)) continue;
            unlink(src, e.dst);
            link(src, w);
            e.dst = w;
            break;
        }
    }
    return Graph::build(n, /*directed=*/false, std::move(edges));
}

}  // namespace netclass
