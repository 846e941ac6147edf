#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "netclass/cnn.hpp"
#include "netclass/dataset.hpp"

namespace netclass {

inline constexpr std::uint64_t kGridCellTag = 0x62D;
inline constexpr std::uint64_t kRobustTag = 0x20B;

struct ClassificationResult {
    CnnModel model;
    TrainResult training;
    EvalResult test;
    DatasetSplits data;
};

// Dataset -> train -> held-out test error; the spine of every canned
// experiment.
inline ClassificationResult run_classification(const ExperimentSpec& spec) {
    ClassificationResult result;
    result.data = build_synthetic_dataset(spec);
    CnnConfig cnn = spec.cnn;
    cnn.classes = spec.classes.size();
    result.model = init_model(cnn, spec.pipeline.grid);
    result.training = train(result.model, result.data.train_views(), result.data.val_views(), spec.threads);
    if (result.training.diverged) throw std::runtime_error("run_classification: training diverged");
    result.test = evaluate(result.model, result.data.test_views(), spec.threads);
    return result;
}

inline ClassificationResult train_on_splits(DatasetSplits data, const ExperimentSpec& spec) {
    ClassificationResult result;
    result.data = std::move(data);
    CnnConfig cnn = spec.cnn;
    result.model = init_model(cnn, spec.pipeline.grid);
    result.training = train(result.model, result.data.train_views(), result.data.val_views(), spec.threads);
    if (result.training.diverged) throw std::runtime_error("train_on_splits: training diverged");
    result.test = evaluate(result.model, result.data.test_views(), spec.threads);
    return result;
}

// ---------------------------------------------------------------------------
// WS p-grid (pairwise discriminability of rewiring probabilities).
// ---------------------------------------------------------------------------

struct WsGridCell {
    double p_row = 0, p_col = 0;
    double error = 0;
    std::size_t n_test = 0;
};

struct WsGridResult {
    std::vector<double> p_values;
    std::vector<WsGridCell> cells;  // i<j pairs, plus (i,i) controls when enabled
};

// Builds one two-class WS dataset per unordered pair of p values (control
// cells pit two independently generated sets of the same p against each
// other) and trains a fresh classifier per cell. The base spec supplies the
// WS size, per-class count, pipeline, and classifier configuration; each
// cell derives its own master seed from (base seed, i, j).
inline WsGridResult run_ws_grid(const ExperimentSpec& base, const std::vector<double>& p_values,
                                bool include_controls = false) {
    if (p_values.size() < 2 && !include_controls)
        throw std::invalid_argument("run_ws_grid: need at least 2 p values");
    const WsParams* base_ws = nullptr;
    for (const ClassSpec& c : base.classes)
        if (const WsParams* ws = std::get_if<WsParams>(&c.params)) {
            base_ws = ws;
            break;
        }
    if (!base_ws) throw std::invalid_argument("run_ws_grid: base spec has no WS class");
    const std::size_t count = base.classes.front().count;

    WsGridResult result;
    result.p_values = p_values;
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        for (std::size_t j = i; j < p_values.size(); ++j) {
            if (i == j && !include_controls) continue;
            ExperimentSpec cell = base;
            WsParams a = *base_ws, b = *base_ws;
            a.p = p_values[i];
            b.p = p_values[j];
            cell.classes = {{a, count}, {b, count}};
            cell.master_seed = mix64(base.master_seed, kGridCellTag, i * 1024 + j);
            cell.cnn.seed = mix64(cell.master_seed, 0xC44);
            ClassificationResult run = run_classification(cell);
            result.cells.push_back({p_values[i], p_values[j], run.test.error_rate, run.data.test.size()});
        }
    }
    return result;
}

inline const WsGridCell* find_cell(const WsGridResult& grid, double p_a, double p_b) {
    double lo = std::min(p_a, p_b), hi = std::max(p_a, p_b);
    for (const WsGridCell& c : grid.cells)
        if (std::abs(c.p_row - lo) < 1e-12 && std::abs(c.p_col - hi) < 1e-12) return &c;
    return nullptr;
}

// Long-form symmetric dump: both (i,j) and (j,i) orientations per cell.
inline void write_ws_grid_csv(const WsGridResult& grid, std::ostream& out) {
    out << "p_a,p_b,test_error,n_test\n";
    char buf[160];
    for (const WsGridCell& c : grid.cells) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%zu\n", c.p_row, c.p_col, c.error, c.n_test);
        out << buf;
        if (c.p_row != c.p_col) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%zu\n", c.p_col, c.p_row, c.error, c.n_test);
            out << buf;
        }
    }
}

// ---------------------------------------------------------------------------
// Size robustness: evaluate one trained model on freshly generated test
// sets whose node counts / edge densities differ from the training size.
// ---------------------------------------------------------------------------

struct RobustnessPoint {
    std::string axis;  // "nodes" or "edges"
    double value = 0;  // n for the node sweep, BA m (== WS k/2) for the edge sweep
    double error = 0;
    std::size_t n_test = 0;
};

struct RobustnessResult {
    std::vector<RobustnessPoint> points;
};

// Balanced two-class evaluation set generated outside any split machinery.
inline std::vector<DatasetSample> build_eval_set(const std::vector<ClassSpec>& classes, const PipelineConfig& pipeline,
                                                 std::uint64_t master_seed, std::size_t threads) {
    struct Job {
        std::size_t class_idx, sample_idx;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < classes.size(); ++c)
        for (std::size_t i = 0; i < classes[c].count; ++i) jobs.push_back({c, i});
    std::vector<DatasetSample> samples(jobs.size());
    parallel_for(jobs.size(), threads, [&](std::size_t j) {
        std::uint64_t seed = mix64(master_seed, jobs[j].class_idx, jobs[j].sample_idx);
        samples[j] = synthesize_sample(classes[jobs[j].class_idx], static_cast<int>(jobs[j].class_idx), seed,
                                       pipeline, /*retain=*/false);
    });
    return samples;
}

// ref_spec is the spec the model was trained on (BA class 0, WS class 1).
// The node sweep keeps the training edge parameters and varies n; the edge
// sweep keeps the training n and walks BA m through edge_params with WS
// k = 2m so the mean degrees stay matched. When a sweep point equals the
// training size and `held_out` is given, the training run's test error is
// reported for that point instead of regenerating an equivalent set.
inline RobustnessResult run_size_robustness(const CnnModel& model, const ExperimentSpec& ref_spec,
                                            const std::vector<std::size_t>& node_counts,
                                            const std::vector<std::size_t>& edge_params,
                                            std::size_t test_per_class,
                                            std::optional<std::pair<double, std::size_t>> held_out = std::nullopt) {
    const BaParams* ref_ba = nullptr;
    const WsParams* ref_ws = nullptr;
    for (const ClassSpec& c : ref_spec.classes) {
        if (const BaParams* ba = std::get_if<BaParams>(&c.params)) ref_ba = ba;
        if (const WsParams* ws = std::get_if<WsParams>(&c.params)) ref_ws = ws;
    }
    if (!ref_ba || !ref_ws) throw std::invalid_argument("run_size_robustness: reference spec needs BA and WS classes");

    RobustnessResult result;
    auto evaluate_point = [&](const std::string& axis, double value, BaParams ba, WsParams ws) {
        if (axis == "nodes" && held_out && static_cast<std::size_t>(value) == ref_ba->n) {
            result.points.push_back({axis, value, held_out->first, held_out->second});
            return;
        }
        std::vector<ClassSpec> classes = {{ba, test_per_class}, {ws, test_per_class}};
        std::uint64_t seed = mix64(ref_spec.master_seed, kRobustTag,
                                   mix64(axis == "nodes" ? 1 : 2, static_cast<std::uint64_t>(value)));
        std::vector<DatasetSample> samples = build_eval_set(classes, ref_spec.pipeline, seed, ref_spec.threads);
        SampleViews views;
        views.reserve(samples.size());
        for (const DatasetSample& s : samples) views.push_back({&s.image, s.label});
        EvalResult eval = evaluate(model, views, ref_spec.threads);
        result.points.push_back({axis, value, eval.error_rate, samples.size()});
    };

    for (std::size_t n : node_counts) {
        BaParams ba = *ref_ba;
        WsParams ws = *ref_ws;
        ba.n = n;
        ws.n = n;
        evaluate_point("nodes", static_cast<double>(n), ba, ws);
    }
    for (std::size_t m : edge_params) {
        BaParams ba = *ref_ba;
        WsParams ws = *ref_ws;
        ba.m = m;
        ws.k = 2 * m;
        evaluate_point("edges", static_cast<double>(m), ba, ws);
    }
    return result;
}

inline void write_robustness_csv(const RobustnessResult& result, std::ostream& out) {
    out << "axis,value,error_rate,n_test\n";
    char buf[160];
    for (const RobustnessPoint& p : result.points) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%zu\n", p.axis.c_str(), p.value, p.error, p.n_test);
        out << buf;
    }
}

// Simple name,value metric dump used by single-run experiments.
inline void write_metrics_csv(const std::vector<std::pair<std::string, double>>& metrics, std::ostream& out) {
    out << "name,value\n";
    char buf[160];
    for (const auto& [name, value] : metrics) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g\n", name.c_str(), value);
        out << buf;
    }
}

// ---------------------------------------------------------------------------
// Activation mapping: which nodes light up a layer-1 filter (Fig.3-style).
// ---------------------------------------------------------------------------

struct ActivationMap {
    std::size_t filter_index = 0;
    std::size_t map_side = 0;   // layer-1 feature map side (pre-pool)
    double threshold = 0;
    std::vector<std::pair<std::size_t, std::size_t>> highlighted_cells;  // (row, col)
    std::vector<bool> patch_mask;  // grid x grid, input cells under a highlighted patch
    std::vector<NodeId> active_nodes;
};

// Thresholds the chosen layer-1 post-activation feature map at its
// empirical quantile (nearest rank). Cells strictly above the threshold
// are highlighted; when nothing is strictly above (a constant map), the
// tie convention highlights every cell at the threshold instead. Each
// highlighted cell is mapped through the convolution geometry back to the
// kernel x kernel input patch it reads, and every node whose raster cell
// lies under some patch is active.
inline ActivationMap map_activations(const CnnModel& model, const DatasetSample& sample, std::size_t layer,
                                     std::size_t filter_index, double quantile = 0.9) {
    if (layer != 1) throw std::invalid_argument("map_activations: only layer 1 is supported");
    if (filter_index >= model.cfg.conv1_filters) throw std::invalid_argument("map_activations: filter index out of range");
    if (!sample.graph || !sample.points)
        throw std::invalid_argument("map_activations: sample was built without retained graph/points");
    if (!(quantile >= 0.0 && quantile <= 1.0)) throw std::invalid_argument("map_activations: quantile must be in [0,1]");

    ForwardCache cache;
    forward(model, sample.image, &cache);

    const std::size_t side = model.geom.conv1_out;
    const double* fmap = cache.conv1_act.data() + filter_index * side * side;
    const std::size_t cells = side * side;

    std::vector<double> sorted(fmap, fmap + cells);
    std::sort(sorted.begin(), sorted.end());
    std::size_t rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(cells)));
    rank = std::min(std::max<std::size_t>(rank, 1), cells) - 1;

    ActivationMap out;
    out.filter_index = filter_index;
    out.map_side = side;
    out.threshold = sorted[rank];

    bool any_above = false;
    for (std::size_t i = 0; i < cells; ++i)
        if (fmap[i] > out.threshold) {
            any_above = true;
            break;
        }
    for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) {
            double v = fmap[r * side + c];
            if (any_above ? v > out.threshold : v >= out.threshold) out.highlighted_cells.emplace_back(r, c);
        }

    const std::size_t grid = model.geom.grid, kernel = model.cfg.kernel;
    out.patch_mask.assign(grid * grid, false);
    for (auto [r, c] : out.highlighted_cells)
        for (std::size_t pr = 0; pr < kernel; ++pr)
            for (std::size_t pc = 0; pc < kernel; ++pc) out.patch_mask[(r + pr) * grid + (c + pc)] = true;

    const Points2D& pts = *sample.points;
    for (NodeId v = 0; v < pts.count; ++v) {
        auto [row, col] = point_cell(sample.image.bounds, grid, pts.x(v), pts.y(v));
        if (out.patch_mask[row * grid + col]) out.active_nodes.push_back(v);
    }
    return out;
}

// Rendering artifacts: a PGM with the raster dimmed and highlighted
// patches lifted, plus a text overlay listing active nodes (with their 2D
// coordinates) and every edge incident to one.
inline void write_activation_overlay(const ActivationMap& act, const DatasetSample& sample,
                                     const std::string& stem) {
    GrayImage overlay = sample.image;
    for (std::size_t i = 0; i < overlay.pixels.size(); ++i) {
        double base = 0.5 * overlay.pixels[i];
        overlay.pixels[i] = act.patch_mask[i] ? std::min(1.0, base + 0.5) : base;
    }
    write_pgm(overlay, stem + ".pgm");

    std::ofstream out(stem + "_nodes.txt");
    if (!out) throw std::runtime_error("cannot write overlay: " + stem + "_nodes.txt");
    char buf[128];
    for (NodeId v : act.active_nodes) {
        std::snprintf(buf, sizeof(buf), "node %u %.17g %.17g\n", v, sample.points->x(v), sample.points->y(v));
        out << buf;
    }
    std::vector<bool> active(sample.graph->node_count(), false);
    for (NodeId v : act.active_nodes) active[v] = true;
    for (const EdgeRecord& e : sample.graph->edges())
        if (active[e.src] || active[e.dst]) out << "edge " << e.src << ' ' << e.dst << '\n';
}

}  // namespace netclass
