#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "netclass/cnn.hpp"
#include "netclass/generators.hpp"
#include "netclass/graph.hpp"
#include "netclass/parallel.hpp"
#include "netclass/pca.hpp"
#include "netclass/rasterize.hpp"
#include "netclass/rng.hpp"
#include "netclass/sgns.hpp"
#include "netclass/walk.hpp"

namespace netclass {

// Stream ids for the per-sample pipeline stages. Every sample owns a seed
// derived from (master seed, class index, sample index) via mix64, and each
// stage consumes its own stream of that seed.
inline constexpr std::uint64_t kStreamGraph = 1;
inline constexpr std::uint64_t kStreamWalks = 2;
inline constexpr std::uint64_t kStreamSgns = 3;
inline constexpr std::uint64_t kIngestTag = 0x1267E57;
inline constexpr std::uint64_t kClassShuffleTag = 0xC1A55;
inline constexpr std::uint64_t kSplitShuffleTag = 0x59117;

struct Provenance {
    std::string source;  // generator name, file path, or product code
    std::string params;
    std::uint64_t seed = 0;

    std::string key() const { return source + "|" + params + "|" + std::to_string(seed); }
};

struct DatasetSample {
    GrayImage image;
    int label = 0;
    Provenance provenance;
    // Retained only when an experiment needs to map activations back onto
    // the network.
    std::optional<Graph> graph;
    std::optional<Points2D> points;
};

struct DatasetSplits {
    std::vector<DatasetSample> train, val, test;

    SampleViews views(const std::vector<DatasetSample>& part) const {
        SampleViews v;
        v.reserve(part.size());
        for (const DatasetSample& s : part) v.push_back({&s.image, s.label});
        return v;
    }
    SampleViews train_views() const { return views(train); }
    SampleViews val_views() const { return views(val); }
    SampleViews test_views() const { return views(test); }
};

struct SplitRatios {
    double train = 0.8, val = 0.1, test = 0.1;

    void validate() const {
        if (!(train >= 0 && val >= 0 && test >= 0) || std::abs(train + val + test - 1.0) > 1e-9)
            throw std::invalid_argument("split fractions must be non-negative and sum to 1");
    }
};

// Largest-remainder allocation of `total` items to the three splits; ties
// go to the earlier split. Exact whenever total*ratio is integral.
inline std::array<std::size_t, 3> allocate_split_counts(std::size_t total, const SplitRatios& ratios) {
    ratios.validate();
    std::array<double, 3> want = {total * ratios.train, total * ratios.val, total * ratios.test};
    std::array<std::size_t, 3> counts;
    std::array<double, 3> frac;
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        counts[i] = static_cast<std::size_t>(std::floor(want[i]));
        frac[i] = want[i] - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    while (assigned < total) {
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (frac[i] > frac[best]) best = i;
        ++counts[best];
        frac[best] = -1.0;
        ++assigned;
    }
    return counts;
}

using GeneratorParams = std::variant<BaParams, WsParams>;

struct ClassSpec {
    GeneratorParams params;
    std::size_t count = 0;

    std::string model_name() const { return std::holds_alternative<BaParams>(params) ? "ba" : "ws"; }
    std::string params_string() const {
        std::ostringstream out;
        if (const BaParams* ba = std::get_if<BaParams>(&params)) {
            out << "n=" << ba->n << ",m=" << ba->m;
        } else {
            const WsParams& ws = std::get<WsParams>(params);
            out << "n=" << ws.n << ",k=" << ws.k << ",p=" << ws.p;
        }
        return out.str();
    }
};

struct PipelineConfig {
    WalkConfig walk;
    SgnsConfig sgns;
    std::size_t grid = 48;
    bool log1p_weights = false;  // walk on log1p-compressed volumes instead of raw ones
};

struct ExperimentSpec {
    std::vector<ClassSpec> classes;
    SplitRatios split;
    PipelineConfig pipeline;
    CnnConfig cnn;
    std::uint64_t master_seed = 0;
    std::size_t threads = 1;
    bool retain_graphs = false;

    void validate() const {
        if (classes.size() < 2) throw std::invalid_argument("experiment: need at least 2 classes");
        for (const ClassSpec& c : classes) {
            if (c.count < 1) throw std::invalid_argument("experiment: class counts must be >= 1");
            std::visit([](const auto& p) { p.validate(); }, c.params);
        }
        split.validate();
        pipeline.walk.validate();
        pipeline.sgns.validate();
        if (pipeline.grid < 2) throw std::invalid_argument("experiment: grid must be >= 2");
        CnnConfig c = cnn;
        c.classes = classes.size();
        CnnGeometry::derive(c, pipeline.grid);
    }
};

// Minutes-scale profile: 200 networks per class at n=200, 2000 walks of
// length 10, 16-dimensional embeddings, the default classifier.
inline ExperimentSpec desk_profile(std::uint64_t seed) {
    ExperimentSpec spec;
    spec.classes = {{BaParams{200, 4}, 200}, {WsParams{200, 8, 0.1}, 200}};
    spec.pipeline.walk = {2000, 10};
    spec.pipeline.sgns.dim = 16;
    spec.master_seed = seed;
    spec.cnn.seed = mix64(seed, 0xC44);
    return spec;
}

// Full-scale profile: 5600 networks per class at n=1000, 10000 walks,
// 20-dimensional embeddings, split 8000/2000/1200.
inline ExperimentSpec paper_profile(std::uint64_t seed) {
    ExperimentSpec spec;
    spec.classes = {{BaParams{1000, 4}, 5600}, {WsParams{1000, 8, 0.1}, 5600}};
    spec.pipeline.walk = {10000, 10};
    spec.pipeline.sgns.dim = 20;
    spec.split = {8000.0 / 11200, 2000.0 / 11200, 1200.0 / 11200};
    spec.master_seed = seed;
    spec.cnn.seed = mix64(seed, 0xC44);
    return spec;
}

// graph -> walks -> SGNS -> PCA -> raster for one already-built network.
inline DatasetSample run_sample_pipeline(Graph graph, int label, Provenance provenance,
                                         const PipelineConfig& pc, bool retain) {
    if (pc.log1p_weights) graph = with_log1p_weights(graph);
    WalkCorpus corpus = generate_corpus(graph, pc.walk, RngStream(provenance.seed, kStreamWalks));
    SgnsResult sgns = train_sgns(corpus, pc.sgns, RngStream(provenance.seed, kStreamSgns));
    Points2D points = pca_project(sgns.embedding, 2);
    DatasetSample sample;
    sample.image = rasterize(points, pc.grid);
    sample.label = label;
    sample.provenance = std::move(provenance);
    if (retain) {
        sample.graph = std::move(graph);
        sample.points = std::move(points);
    }
    return sample;
}

inline DatasetSample synthesize_sample(const ClassSpec& cls, int label, std::uint64_t sample_seed,
                                       const PipelineConfig& pc, bool retain) {
    RngStream graph_rng(sample_seed, kStreamGraph);
    Graph graph = std::visit(
        [&](const auto& p) {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, BaParams>)
                return generate_ba(p, graph_rng);
            else
                return generate_ws(p, graph_rng);
        },
        cls.params);
    return run_sample_pipeline(std::move(graph), label, {cls.model_name(), cls.params_string(), sample_seed}, pc,
                               retain);
}

namespace detail {

inline void shuffle_samples(std::vector<DatasetSample>& samples, RngStream rng) {
    for (std::size_t i = samples.size(); i > 1; --i)
        std::swap(samples[i - 1], samples[rng.next_below(i)]);
}

}  // namespace detail

// Generates every class's networks with per-sample derived seeds (parallel
// across samples), then splits. The split is stratified: each class is
// shuffled and allocated to train/val/test by largest remainder, then each
// split is shuffled, which keeps per-split class balance within one sample
// of the pool balance. A failed sample is logged and dropped; more than 1%
// failures aborts the build.
inline DatasetSplits build_synthetic_dataset(const ExperimentSpec& spec) {
    spec.validate();

    struct Job {
        std::size_t class_idx, sample_idx;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < spec.classes.size(); ++c)
        for (std::size_t i = 0; i < spec.classes[c].count; ++i) jobs.push_back({c, i});

    std::vector<std::optional<DatasetSample>> slots(jobs.size());
    std::vector<std::string> failures;
    std::mutex failures_mutex;

    parallel_for(jobs.size(), spec.threads, [&](std::size_t j) {
        const Job& job = jobs[j];
        std::uint64_t sample_seed = mix64(spec.master_seed, job.class_idx, job.sample_idx);
        try {
            slots[j] = synthesize_sample(spec.classes[job.class_idx], static_cast<int>(job.class_idx), sample_seed,
                                         spec.pipeline, spec.retain_graphs);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(failures_mutex);
            failures.push_back(spec.classes[job.class_idx].model_name() + "[" +
                               spec.classes[job.class_idx].params_string() + "] seed " + std::to_string(sample_seed) +
                               ": " + e.what());
        }
    });

    if (!failures.empty()) {
        for (const std::string& f : failures) std::cerr << "sample failed: " << f << '\n';
        if (failures.size() * 100 > jobs.size())
            throw std::runtime_error("dataset build aborted: " + std::to_string(failures.size()) + "/" +
                                     std::to_string(jobs.size()) + " samples failed (>1%)");
    }

    std::vector<std::vector<DatasetSample>> per_class(spec.classes.size());
    for (std::size_t j = 0; j < jobs.size(); ++j)
        if (slots[j]) per_class[jobs[j].class_idx].push_back(std::move(*slots[j]));

    DatasetSplits out;
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        detail::shuffle_samples(per_class[c], RngStream(spec.master_seed, mix64(kClassShuffleTag, c)));
        auto counts = allocate_split_counts(per_class[c].size(), spec.split);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < counts[0]; ++i) out.train.push_back(std::move(per_class[c][pos++]));
        for (std::size_t i = 0; i < counts[1]; ++i) out.val.push_back(std::move(per_class[c][pos++]));
        for (std::size_t i = 0; i < counts[2]; ++i) out.test.push_back(std::move(per_class[c][pos++]));
    }
    detail::shuffle_samples(out.train, RngStream(spec.master_seed, mix64(kSplitShuffleTag, 0)));
    detail::shuffle_samples(out.val, RngStream(spec.master_seed, mix64(kSplitShuffleTag, 1)));
    detail::shuffle_samples(out.test, RngStream(spec.master_seed, mix64(kSplitShuffleTag, 2)));
    return out;
}

// ---------------------------------------------------------------------------
// Manifest ingestion for real (trade) networks.
// Manifest format: one line per network, `path,label,directed(0|1)`,
// `#` comments allowed; relative paths resolve against the manifest's
// directory.
// ---------------------------------------------------------------------------

struct ManifestEntry {
    std::string path;
    int label = 0;
    bool directed = false;
};

inline std::vector<ManifestEntry> read_manifest(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
    std::vector<ManifestEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
    while (std::getline(in, line)) {
        ++line_no;
        if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
        line = detail::trim(line);
        if (line.empty()) continue;
        // split from the right: the path may not contain commas, but keep
        // the parse strict and obvious
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(detail::trim(field));
        if (fields.size() != 3)
            throw std::runtime_error(manifest_path + ":" + std::to_string(line_no) +
                                     ": expected `path,label,directed(0|1)`");
        ManifestEntry e;
        e.path = (base / fields[0]).string();
        try {
            e.label = std::stoi(fields[1]);
        } catch (const std::exception&) {
            throw std::runtime_error(manifest_path + ":" + std::to_string(line_no) + ": bad label");
        }
        if (e.label < 0) throw std::runtime_error(manifest_path + ":" + std::to_string(line_no) + ": negative label");
        if (fields[2] == "0") e.directed = false;
        else if (fields[2] == "1") e.directed = true;
        else throw std::runtime_error(manifest_path + ":" + std::to_string(line_no) + ": directed flag must be 0 or 1");
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw std::runtime_error(manifest_path + ": empty manifest");
    return entries;
}

struct IngestOptions {
    PipelineConfig pipeline;
    SplitRatios split{9.0 / 11, 1.0 / 11, 1.0 / 11};
    std::uint64_t master_seed = 0;
    std::size_t threads = 1;
    bool retain_graphs = false;
};

struct IngestReport {
    std::vector<std::size_t> label_counts;
    std::size_t skipped = 0;
};

// Runs the weighted / directed pipeline over every manifest entry.
// Unreadable or failing networks are skipped with a log line; more than 5%
// skips aborts. The pool is shuffled with the master seed and split by the
// 9:1:1 ratios (largest remainder over the total).
inline DatasetSplits ingest_labeled_networks(const std::string& manifest_path, const IngestOptions& opts,
                                             IngestReport* report = nullptr) {
    std::vector<ManifestEntry> entries = read_manifest(manifest_path);

    std::vector<std::optional<DatasetSample>> slots(entries.size());
    std::vector<std::string> skips;
    std::mutex skips_mutex;
    parallel_for(entries.size(), opts.threads, [&](std::size_t i) {
        const ManifestEntry& e = entries[i];
        std::uint64_t sample_seed = mix64(opts.master_seed, kIngestTag, i);
        try {
            LoadedGraph loaded = read_edge_list(e.path, e.directed);
            slots[i] = run_sample_pipeline(std::move(loaded.graph), e.label,
                                           {e.path, e.directed ? "directed" : "undirected", sample_seed},
                                           opts.pipeline, opts.retain_graphs);
        } catch (const std::exception& ex) {
            std::lock_guard<std::mutex> lock(skips_mutex);
            skips.push_back(e.path + ": " + ex.what());
        }
    });

    for (const std::string& s : skips) std::cerr << "manifest entry skipped: " << s << '\n';
    if (skips.size() * 20 > entries.size())
        throw std::runtime_error("ingestion aborted: " + std::to_string(skips.size()) + "/" +
                                 std::to_string(entries.size()) + " entries skipped (>5%)");

    std::vector<DatasetSample> pool;
    for (auto& s : slots)
        if (s) pool.push_back(std::move(*s));

    if (report) {
        report->skipped = skips.size();
        for (const DatasetSample& s : pool) {
            if (static_cast<std::size_t>(s.label) >= report->label_counts.size())
                report->label_counts.resize(s.label + 1, 0);
            ++report->label_counts[s.label];
        }
    }

    detail::shuffle_samples(pool, RngStream(opts.master_seed, mix64(kSplitShuffleTag, 99)));
    auto counts = allocate_split_counts(pool.size(), opts.split);
    DatasetSplits out;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < counts[0]; ++i) out.train.push_back(std::move(pool[pos++]));
    for (std::size_t i = 0; i < counts[1]; ++i) out.val.push_back(std::move(pool[pos++]));
    for (std::size_t i = 0; i < counts[2]; ++i) out.test.push_back(std::move(pool[pos++]));
    return out;
}

}  // namespace netclass
