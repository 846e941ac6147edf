#include <gtest/gtest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "netclass/experiments.hpp"
#include "netclass/spec_io.hpp"
#include "oracles.hpp"

using namespace netclass;
namespace fs = std::filesystem;

namespace {

ExperimentSpec tiny_spec(std::uint64_t seed, std::size_t per_class = 8) {
    ExperimentSpec spec;
    spec.classes = {{BaParams{40, 3}, per_class}, {WsParams{40, 4, 0.1}, per_class}};
    spec.pipeline.walk = {200, 8};
    spec.pipeline.sgns.dim = 6;
    spec.pipeline.sgns.epochs = 2;
    spec.pipeline.grid = 16;
    spec.cnn.conv1_filters = 2;
    spec.cnn.conv2_filters = 2;
    spec.cnn.fc_units = 8;
    spec.cnn.batch = 4;
    spec.cnn.epochs = 3;
    spec.split = {0.5, 0.25, 0.25};
    spec.master_seed = seed;
    spec.cnn.seed = mix64(seed, 0xC44);
    return spec;
}

// Hand-assembled sample: a 16x16 raster holding a 10-node cluster in cell
// (7,7) plus corner nodes pinning the bounds at (0,0) and (15,15).
DatasetSample crafted_sample() {
    Points2D pts;
    pts.dims = 2;
    std::vector<std::pair<double, double>> coords = {{0.0, 0.0}, {1.0, 1.0}};
    for (int i = 0; i < 10; ++i) coords.push_back({0.45, 0.45});
    pts.count = coords.size();
    for (auto [x, y] : coords) {
        pts.coords.push_back(x);
        pts.coords.push_back(y);
    }

    std::vector<EdgeRecord> edges;
    for (NodeId v = 0; v + 1 < 12; ++v) edges.push_back({v, static_cast<NodeId>(v + 1), 1.0});
    DatasetSample s;
    s.image = rasterize(pts, 16);
    s.label = 0;
    s.provenance = {"crafted", "", 0};
    s.graph = Graph::from_edge_list(edges, false);
    s.points = std::move(pts);
    return s;
}

CnnModel zeroed_model(std::size_t conv1_filters = 1) {
    CnnConfig cfg;
    cfg.conv1_filters = conv1_filters;
    cfg.conv2_filters = 2;
    cfg.fc_units = 4;
    cfg.seed = 1;
    CnnModel m = init_model(cfg, 16);
    m.params.fill(0.0);
    return m;
}

}  // namespace

TEST(MapActivations, UniformMapActivatesEveryBinnedNode) {
    DatasetSample sample = crafted_sample();
    CnnModel m = zeroed_model();
    m.params.conv1_b.data[0] = 0.7;  // constant positive feature map

    ActivationMap act = map_activations(m, sample, 1, 0, 0.9);
    EXPECT_EQ(act.highlighted_cells.size(), m.geom.conv1_out * m.geom.conv1_out);
    std::vector<NodeId> all_nodes;
    for (NodeId v = 0; v < 12; ++v) all_nodes.push_back(v);
    EXPECT_EQ(act.active_nodes, all_nodes);
}

TEST(MapActivations, SingleMaxCellSelectsItsReceptiveField) {
    DatasetSample sample = crafted_sample();
    CnnModel m = zeroed_model();
    // kernel that copies the input pixel under its center
    m.params.conv1_w.data[2 * 5 + 2] = 1.0;

    ActivationMap act = map_activations(m, sample, 1, 0, 0.9);
    ASSERT_EQ(act.highlighted_cells.size(), 1u);
    EXPECT_EQ(act.highlighted_cells[0], (std::pair<std::size_t, std::size_t>{5, 5}));

    // active set = the 10-node cluster binned at (7,7); corners excluded
    std::vector<NodeId> expected;
    for (NodeId v = 2; v < 12; ++v) expected.push_back(v);
    EXPECT_EQ(act.active_nodes, expected);
}

TEST(MapActivations, ActiveNodesExactlyThoseUnderHighlightedPatches) {
    ExperimentSpec spec = tiny_spec(101, 3);
    spec.retain_graphs = true;
    DatasetSplits data = build_synthetic_dataset(spec);
    CnnModel m = init_model(spec.cnn, spec.pipeline.grid);

    const DatasetSample& sample = data.train.front();
    for (std::size_t f = 0; f < spec.cnn.conv1_filters; ++f) {
        ActivationMap act = map_activations(m, sample, 1, f, 0.85);

        std::set<std::pair<std::size_t, std::size_t>> covered;
        for (auto [r, c] : act.highlighted_cells)
            for (std::size_t pr = 0; pr < m.cfg.kernel; ++pr)
                for (std::size_t pc = 0; pc < m.cfg.kernel; ++pc) covered.insert({r + pr, c + pc});

        std::set<NodeId> active(act.active_nodes.begin(), act.active_nodes.end());
        for (NodeId v = 0; v < sample.points->count; ++v) {
            auto cell = point_cell(sample.image.bounds, sample.image.grid, sample.points->x(v), sample.points->y(v));
            EXPECT_EQ(active.count(v) > 0, covered.count(cell) > 0) << "node " << v;
        }
    }
}

TEST(MapActivations, PreconditionsEnforced) {
    DatasetSample sample = crafted_sample();
    CnnModel m = zeroed_model();
    EXPECT_THROW(map_activations(m, sample, 2, 0, 0.9), std::invalid_argument);
    EXPECT_THROW(map_activations(m, sample, 1, 5, 0.9), std::invalid_argument);
    DatasetSample no_graph = crafted_sample();
    no_graph.graph.reset();
    EXPECT_THROW(map_activations(m, no_graph, 1, 0, 0.9), std::invalid_argument);
}

TEST(MapActivations, OverlayArtifactsWritten) {
    DatasetSample sample = crafted_sample();
    CnnModel m = zeroed_model();
    m.params.conv1_b.data[0] = 0.3;
    ActivationMap act = map_activations(m, sample, 1, 0, 0.9);

    fs::path dir = fs::temp_directory_path() / ("netclass_overlay_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::string stem = (dir / "f0").string();
    write_activation_overlay(act, sample, stem);
    EXPECT_TRUE(fs::exists(stem + ".pgm"));
    std::ifstream nodes(stem + "_nodes.txt");
    std::string first;
    std::getline(nodes, first);
    EXPECT_EQ(first.rfind("node ", 0), 0u);
    fs::remove_all(dir);
}

TEST(WeightedCycle, TransitionsMatchDistributionAndHeavyEdgeShare) {
    // Directed 3-cycle in both orientations with weights 1,1,8: from each
    // endpoint of the heavy pair the walker crosses it with probability 8/9,
    // and 80% of all steps traverse it in the stationary regime.
    std::vector<EdgeRecord> records = {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 8.0},
                                       {1, 0, 1.0}, {2, 1, 1.0}, {0, 2, 8.0}};
    Graph g = Graph::from_edge_list(records, true);

    const std::size_t walks = 100, length = 101;  // 10000 transitions
    WalkCorpus corpus = generate_corpus(g, WalkConfig{walks, length}, RngStream(77, 0));

    std::vector<std::vector<std::size_t>> counts(3, std::vector<std::size_t>(3, 0));
    std::size_t heavy = 0, total = 0;
    for (const auto& w : corpus.walks)
        for (std::size_t i = 0; i + 1 < w.size(); ++i) {
            ++counts[w[i]][w[i + 1]];
            ++total;
            if ((w[i] == 0 && w[i + 1] == 2) || (w[i] == 2 && w[i + 1] == 0)) ++heavy;
        }
    ASSERT_EQ(total, walks * (length - 1));

    for (NodeId v = 0; v < 3; ++v) {
        std::vector<double> probs = transition_distribution(g, v);
        auto nbrs = g.neighbors(v);
        std::size_t from_v = 0;
        for (NodeId u = 0; u < 3; ++u) from_v += counts[v][u];
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            double expected = probs[i];
            double se = std::sqrt(expected * (1 - expected) / static_cast<double>(from_v));
            double observed = static_cast<double>(counts[v][nbrs[i].node]) / static_cast<double>(from_v);
            EXPECT_NEAR(observed, expected, 3 * se) << "from " << v << " to " << nbrs[i].node;
        }
    }

    double exact = oracles::expected_edge_traversal(g, 0, 2, length);
    EXPECT_NEAR(exact, 0.8, 0.02);
    double se = std::sqrt(exact * (1 - exact) / static_cast<double>(total));
    EXPECT_NEAR(static_cast<double>(heavy) / static_cast<double>(total), exact, 3 * se);
}

TEST(RunWsGrid, ProducesRequestedCells) {
    ExperimentSpec base = tiny_spec(102, 6);
    base.classes = {{WsParams{40, 4, 0.1}, 6}, {WsParams{40, 4, 0.1}, 6}};
    WsGridResult grid = run_ws_grid(base, {0.0, 0.6}, /*include_controls=*/true);
    ASSERT_EQ(grid.cells.size(), 3u);  // (0,0) control, (0,0.6), (0.6,0.6) control

    const WsGridCell* pair_cell = find_cell(grid, 0.0, 0.6);
    ASSERT_NE(pair_cell, nullptr);
    EXPECT_GE(pair_cell->error, 0.0);
    EXPECT_LE(pair_cell->error, 1.0);
    EXPECT_GT(pair_cell->n_test, 0u);

    std::ostringstream csv;
    write_ws_grid_csv(grid, csv);
    std::string text = csv.str();
    // header + 2 controls + symmetric pair = 1 + 2 + 2 rows
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(RunWsGrid, RequiresWsBase) {
    ExperimentSpec base = tiny_spec(103);
    base.classes = {{BaParams{40, 3}, 4}, {BaParams{40, 3}, 4}};
    EXPECT_THROW(run_ws_grid(base, {0.1, 0.5}), std::invalid_argument);
}

TEST(RunSizeRobustness, SweepsBothAxesAndReusesHeldOut) {
    ExperimentSpec spec = tiny_spec(104, 6);
    ClassificationResult reference = run_classification(spec);

    RobustnessResult sweep =
        run_size_robustness(reference.model, spec, {30, 40}, {2}, /*test_per_class=*/4,
                            std::make_pair(reference.test.error_rate, reference.data.test.size()));
    ASSERT_EQ(sweep.points.size(), 3u);

    const RobustnessPoint* matched = nullptr;
    for (const RobustnessPoint& p : sweep.points)
        if (p.axis == "nodes" && p.value == 40.0) matched = &p;
    ASSERT_NE(matched, nullptr);
    EXPECT_DOUBLE_EQ(matched->error, reference.test.error_rate);  // held-out reuse at the training size

    for (const RobustnessPoint& p : sweep.points) {
        EXPECT_GE(p.error, 0.0);
        EXPECT_LE(p.error, 1.0);
        EXPECT_GT(p.n_test, 0u);
    }

    std::ostringstream csv;
    write_robustness_csv(sweep, csv);
    std::string text = csv.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(RunClassification, EndToEndDeterministic) {
    ClassificationResult a = run_classification(tiny_spec(105, 6));
    ClassificationResult b = run_classification(tiny_spec(105, 6));
    EXPECT_EQ(a.test.error_rate, b.test.error_rate);
    ASSERT_EQ(a.training.history.size(), b.training.history.size());
    for (std::size_t i = 0; i < a.training.history.size(); ++i)
        EXPECT_EQ(a.training.history[i].train_loss, b.training.history[i].train_loss);
}
