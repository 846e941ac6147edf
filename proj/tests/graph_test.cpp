#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "netclass/graph.hpp"
#include "netclass/rng.hpp"

using namespace netclass;

namespace {

std::vector<EdgeRecord> sorted_edges(const Graph& g) {
    std::vector<EdgeRecord> e = g.to_edge_list();
    std::sort(e.begin(), e.end(), [](const EdgeRecord& a, const EdgeRecord& b) {
        return std::tie(a.src, a.dst, a.weight) < std::tie(b.src, b.dst, b.weight);
    });
    return e;
}

Graph random_graph(RngStream& rng, bool directed, std::size_t n, std::size_t edges) {
    std::vector<EdgeRecord> records;
    for (std::size_t i = 0; i < edges; ++i) {
        NodeId a = static_cast<NodeId>(rng.next_below(n));
        NodeId b = static_cast<NodeId>(rng.next_below(n));
        records.push_back({a, b, rng.next_uniform(0.1, 5.0)});
    }
    records.push_back({static_cast<NodeId>(n - 1), 0, 1.0});  // pin node_count
    return Graph::from_edge_list(records, directed);
}

}  // namespace

TEST(RngStream, ReplaysExactlyAndStreamsDiffer) {
    RngStream a(1234, 7), b(1234, 7), c(1234, 8);
    bool any_diff = false;
    for (int i = 0; i < 100; ++i) {
        std::uint64_t va = a.next_u64();
        EXPECT_EQ(va, b.next_u64());
        if (va != c.next_u64()) any_diff = true;
    }
    EXPECT_TRUE(any_diff);
}

TEST(RngStream, BoundedDrawsStayInRange) {
    RngStream rng(9, 0);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_LT(rng.next_below(13), 13u);
        double d = rng.next_double();
        EXPECT_GE(d, 0.0);
        EXPECT_LT(d, 1.0);
    }
}

TEST(RngStream, SubstreamIsSeedStable) {
    RngStream base(42, 5);
    RngStream s1 = base.substream(3);
    RngStream s2 = RngStream(42, 5).substream(3);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(s1.next_u64(), s2.next_u64());
}

TEST(FromEdgeList, PathGraph) {
    Graph g = Graph::from_edge_list({{0, 1, 1.0}, {1, 2, 1.0}}, /*directed=*/false);
    EXPECT_EQ(g.node_count(), 3u);
    EXPECT_EQ(g.edge_count(), 2u);
    EXPECT_EQ(g.degree(1), 2u);
}

TEST(FromEdgeList, DuplicatesMergeByWeightSum) {
    Graph g = Graph::from_edge_list({{0, 1, 2.0}, {0, 1, 3.0}}, /*directed=*/true);
    ASSERT_EQ(g.edge_count(), 1u);
    EXPECT_DOUBLE_EQ(g.edges()[0].weight, 5.0);
}

TEST(FromEdgeList, UndirectedDuplicatesMergeAcrossOrientations) {
    Graph g = Graph::from_edge_list({{0, 1, 2.0}, {1, 0, 3.0}}, /*directed=*/false);
    ASSERT_EQ(g.edge_count(), 1u);
    EXPECT_DOUBLE_EQ(g.edges()[0].weight, 5.0);
}

TEST(FromEdgeList, SelfLoopsDroppedWithCount) {
    Graph g = Graph::from_edge_list({{0, 0, 1.0}, {0, 1, 1.0}}, /*directed=*/false);
    EXPECT_EQ(g.edge_count(), 1u);
    EXPECT_EQ(g.dropped_self_loops(), 1u);
}

TEST(FromEdgeList, EmptyRecordsRejected) {
    EXPECT_THROW(Graph::from_edge_list({}, false), std::invalid_argument);
}

TEST(FromEdgeList, NonPositiveWeightNamesRecordIndex) {
    try {
        Graph::from_edge_list({{0, 1, 1.0}, {1, 2, -0.5}}, false);
        FAIL() << "expected rejection";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("record 1"), std::string::npos) << e.what();
    }
}

TEST(Graph, UndirectedAdjacencyIsSymmetric) {
    RngStream rng(77, 1);
    for (int rep = 0; rep < 30; ++rep) {
        Graph g = random_graph(rng, false, 12, 30);
        for (NodeId u = 0; u < g.node_count(); ++u)
            for (const Neighbor& nb : g.neighbors(u)) {
                auto back = g.neighbors(nb.node);
                bool found = std::any_of(back.begin(), back.end(), [&](const Neighbor& x) { return x.node == u; });
                EXPECT_TRUE(found);
            }
    }
}

TEST(Graph, DegreeSumIsTwiceEdgeCount) {
    RngStream rng(78, 1);
    for (int rep = 0; rep < 30; ++rep) {
        Graph g = random_graph(rng, false, 15, 40);
        std::size_t sum = 0;
        for (NodeId v = 0; v < g.node_count(); ++v) sum += g.degree(v);
        EXPECT_EQ(sum, 2 * g.edge_count());
    }
}

TEST(Graph, EdgeListRoundTripsUpToOrdering) {
    RngStream rng(79, 1);
    for (int rep = 0; rep < 20; ++rep) {
        bool directed = rep % 2 == 0;
        Graph g = random_graph(rng, directed, 10, 25);
        Graph back = Graph::from_edge_list(g.to_edge_list(), directed);
        EXPECT_EQ(back.node_count(), g.node_count());
        auto ea = sorted_edges(g), eb = sorted_edges(back);
        ASSERT_EQ(ea.size(), eb.size());
        for (std::size_t i = 0; i < ea.size(); ++i) {
            EXPECT_EQ(ea[i].src, eb[i].src);
            EXPECT_EQ(ea[i].dst, eb[i].dst);
            EXPECT_DOUBLE_EQ(ea[i].weight, eb[i].weight);
        }
    }
}

TEST(DegreeStats, RingOfTen) {
    std::vector<EdgeRecord> ring;
    for (NodeId i = 0; i < 10; ++i) ring.push_back({i, static_cast<NodeId>((i + 1) % 10), 1.0});
    DegreeStats s = degree_stats(Graph::from_edge_list(ring, false));
    EXPECT_DOUBLE_EQ(s.mean_degree, 2.0);
    EXPECT_EQ(s.max_degree, 2u);
    EXPECT_EQ(s.degree_histogram.at(2), 10u);
}

TEST(DegreeStats, DirectedReportsOutDegrees) {
    Graph g = Graph::from_edge_list({{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}}, true);
    DegreeStats s = degree_stats(g);
    EXPECT_EQ(s.max_degree, 2u);  // node 0 has out-degree 2
    EXPECT_DOUBLE_EQ(s.mean_degree, 1.0);
}

TEST(EdgeListFormat, ParsesCommentsAndDefaultWeight) {
    std::istringstream in(
        "# trade sample\n"
        "0,1\n"
        "1,2,2.5  # inline comment\n"
        "\n"
        "2,0,1.5\n");
    LoadedGraph loaded = parse_edge_list(in, false);
    EXPECT_TRUE(loaded.labels.empty());
    EXPECT_EQ(loaded.graph.edge_count(), 3u);
    EXPECT_DOUBLE_EQ(loaded.graph.edges()[0].weight, 1.0);
    EXPECT_DOUBLE_EQ(loaded.graph.edges()[1].weight, 2.5);
}

TEST(EdgeListFormat, MapsStringLabelsInFirstAppearanceOrder) {
    std::istringstream in("FRA,DEU,10\nDEU,USA,3\nUSA,FRA,2\n");
    LoadedGraph loaded = parse_edge_list(in, true);
    ASSERT_EQ(loaded.labels.size(), 3u);
    EXPECT_EQ(loaded.labels[0], "FRA");
    EXPECT_EQ(loaded.labels[1], "DEU");
    EXPECT_EQ(loaded.labels[2], "USA");
    EXPECT_EQ(loaded.graph.node_count(), 3u);
    EXPECT_EQ(loaded.graph.edge_count(), 3u);
}

TEST(EdgeListFormat, RejectsNegativeIdsAndBadWeights) {
    std::istringstream neg("0,1\n-3,2\n");
    EXPECT_THROW(parse_edge_list(neg, false), std::runtime_error);
    std::istringstream badw("0,1,zero\n");
    EXPECT_THROW(parse_edge_list(badw, false), std::runtime_error);
    std::istringstream zerow("0,1,0\n");
    EXPECT_THROW(parse_edge_list(zerow, false), std::runtime_error);
}

TEST(EdgeListFormat, WriteReadRoundTrip) {
    RngStream rng(80, 1);
    Graph g = random_graph(rng, true, 9, 20);
    std::ostringstream out;
    write_edge_list(g, out);
    std::istringstream in(out.str());
    LoadedGraph back = parse_edge_list(in, true);
    auto ea = sorted_edges(g), eb = sorted_edges(back.graph);
    ASSERT_EQ(ea.size(), eb.size());
    for (std::size_t i = 0; i < ea.size(); ++i) {
        EXPECT_EQ(ea[i].src, eb[i].src);
        EXPECT_EQ(ea[i].dst, eb[i].dst);
        EXPECT_DOUBLE_EQ(ea[i].weight, eb[i].weight);  // %.17g round-trips doubles
    }
}

TEST(Graph, Log1pTransformKeepsStructure) {
    Graph g = Graph::from_edge_list({{0, 1, 10.0}, {1, 2, 0.5}}, true);
    Graph t = with_log1p_weights(g);
    EXPECT_EQ(t.edge_count(), g.edge_count());
    EXPECT_DOUBLE_EQ(t.edges()[0].weight, std::log1p(10.0));
    EXPECT_DOUBLE_EQ(t.edges()[1].weight, std::log1p(0.5));
}
