#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "netclass/generators.hpp"

using namespace netclass;

namespace {

std::set<std::pair<NodeId, NodeId>> edge_set(const Graph& g) {
    std::set<std::pair<NodeId, NodeId>> s;
    for (const EdgeRecord& e : g.edges()) s.emplace(std::min(e.src, e.dst), std::max(e.src, e.dst));
    return s;
}

std::size_t ring_distance(NodeId a, NodeId b, std::size_t n) {
    std::size_t d = a > b ? a - b : b - a;
    return std::min(d, n - d);
}

}  // namespace

TEST(GenerateBa, ForcedCompleteGraphWhenMIsNMinusOne) {
    RngStream rng(1, 0);
    Graph g = generate_ba(BaParams{5, 4}, rng);
    EXPECT_EQ(g.node_count(), 5u);
    EXPECT_EQ(g.edge_count(), 10u);  // K5
    for (NodeId v = 0; v < 5; ++v) EXPECT_EQ(g.degree(v), 4u);
}

TEST(GenerateBa, EdgeCountClosedForm) {
    RngStream rng(2, 0);
    Graph g = generate_ba(BaParams{1000, 4}, rng);
    EXPECT_EQ(g.edge_count(), 3990u);  // m(m-1)/2 + m(n-m)
    EXPECT_NEAR(degree_stats(g).mean_degree, 7.98, 1e-12);
}

TEST(GenerateBa, DegreeFloors) {
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        RngStream rng(seed, 0);
        Graph g = generate_ba(BaParams{200, 4}, rng);
        for (NodeId v = 0; v < g.node_count(); ++v) {
            if (v < 4) EXPECT_GE(g.degree(v), 3u);  // seed-clique nodes
            else EXPECT_GE(g.degree(v), 4u);        // grown nodes
        }
    }
}

TEST(GenerateBa, HeavyTailBeatsWsMaxDegree) {
    // Paired seeds; the scale-free max degree should dominate the
    // small-world one by more than 3x every time.
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        RngStream ba_rng(seed, 1);
        RngStream ws_rng(seed, 2);
        std::size_t ba_max = degree_stats(generate_ba(BaParams{1000, 4}, ba_rng)).max_degree;
        std::size_t ws_max = degree_stats(generate_ws(WsParams{1000, 8, 0.1}, ws_rng)).max_degree;
        EXPECT_GT(ba_max, 3 * ws_max) << "seed " << seed;
    }
}

TEST(GenerateWs, ExactRingLatticeAtPZero) {
    RngStream rng(6, 0);
    Graph g = generate_ws(WsParams{10, 4, 0.0}, rng);
    EXPECT_EQ(g.edge_count(), 20u);
    for (NodeId i = 0; i < 10; ++i) {
        std::set<NodeId> expected = {static_cast<NodeId>((i + 1) % 10), static_cast<NodeId>((i + 9) % 10),
                                     static_cast<NodeId>((i + 2) % 10), static_cast<NodeId>((i + 8) % 10)};
        std::set<NodeId> actual;
        for (const Neighbor& nb : g.neighbors(i)) actual.insert(nb.node);
        EXPECT_EQ(actual, expected) << "node " << i;
    }
}

TEST(GenerateWs, EdgeCountInvariantAcrossSeedsAndP) {
    RngStream meta(7, 0);
    for (int rep = 0; rep < 200; ++rep) {
        std::size_t n = 8 + meta.next_below(40);
        std::size_t k = 2 + 2 * meta.next_below(3);
        if (k >= n) k = 2;
        double p = meta.next_double();
        RngStream rng(meta.next_u64(), 0);
        Graph g = generate_ws(WsParams{n, k, p}, rng);
        EXPECT_EQ(g.edge_count(), n * k / 2);
        EXPECT_EQ(g.node_count(), n);
    }
}

TEST(GenerateWs, RewiredFractionNearP) {
    // Edges missing from the p=0 lattice, i.e. spanning a ring distance
    // beyond k/2, estimate the rewiring rate.
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        RngStream rng(seed, 3);
        WsParams params{1000, 8, 0.1};
        Graph g = generate_ws(params, rng);
        std::size_t rewired = 0;
        for (const EdgeRecord& e : g.edges())
            if (ring_distance(e.src, e.dst, params.n) > params.k / 2) ++rewired;
        double fraction = static_cast<double>(rewired) / static_cast<double>(g.edge_count());
        EXPECT_GE(fraction, 0.08) << "seed " << seed;
        EXPECT_LE(fraction, 0.12) << "seed " << seed;
    }
}

TEST(Generators, DeterministicGivenSeed) {
    RngStream a(11, 0), b(11, 0), c(12, 0);
    Graph ga = generate_ba(BaParams{50, 3}, a);
    Graph gb = generate_ba(BaParams{50, 3}, b);
    Graph gc = generate_ba(BaParams{50, 3}, c);
    EXPECT_EQ(edge_set(ga), edge_set(gb));
    EXPECT_NE(edge_set(ga), edge_set(gc));

    RngStream wa(11, 0), wb(11, 0);
    EXPECT_EQ(edge_set(generate_ws(WsParams{50, 4, 0.3}, wa)), edge_set(generate_ws(WsParams{50, 4, 0.3}, wb)));
}

TEST(Generators, InvalidParamsRejected) {
    RngStream rng(0, 0);
    EXPECT_THROW(generate_ba(BaParams{5, 0}, rng), std::invalid_argument);
    EXPECT_THROW(generate_ba(BaParams{5, 5}, rng), std::invalid_argument);
    EXPECT_THROW(generate_ws(WsParams{10, 3, 0.1}, rng), std::invalid_argument);  // odd k
    EXPECT_THROW(generate_ws(WsParams{10, 10, 0.1}, rng), std::invalid_argument);
    EXPECT_THROW(generate_ws(WsParams{10, 4, 1.5}, rng), std::invalid_argument);
}

TEST(PreferentialPool, SamplesProportionallyToDegree) {
    // Degrees from edges {0-1, 1-2, 2-3, 3-0, 0-2}: 3, 2, 3, 2 of total 10.
    PreferentialPool pool;
    pool.add_edge(0, 1);
    pool.add_edge(1, 2);
    pool.add_edge(2, 3);
    pool.add_edge(3, 0);
    pool.add_edge(0, 2);

    RngStream rng(21, 0);
    const int draws = 10000;
    std::array<int, 4> freq{};
    for (int i = 0; i < draws; ++i) ++freq[pool.sample(rng)];

    std::array<double, 4> expected = {0.3, 0.2, 0.3, 0.2};
    for (int v = 0; v < 4; ++v) {
        double p = expected[v];
        double se = std::sqrt(p * (1 - p) / draws);
        EXPECT_NEAR(freq[v] / static_cast<double>(draws), p, 3 * se) << "node " << v;
    }
}
