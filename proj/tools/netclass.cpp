// netclass: command-line front end for the network-classification pipeline.
// Subcommands cover every stage (generate, embed, rasterize, train,
// evaluate) plus the canned experiments and the activation visualizer.
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "netclass/dataset.hpp"
#include "netclass/experiments.hpp"
#include "netclass/generators.hpp"
#include "netclass/graph.hpp"
#include "netclass/matrix_io.hpp"
#include "netclass/spec_io.hpp"
#include "netclass/version.hpp"

namespace {

namespace fs = std::filesystem;
using namespace netclass;

std::size_t default_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

// Every run announces its resolved configuration and seed up front.
void print_config(const std::string& command, const std::vector<std::pair<std::string, std::string>>& kv) {
    std::cout << "netclass " << kVersion << " :: " << command << '\n';
    for (const auto& [k, v] : kv) std::cout << "  " << k << '=' << v << '\n';
    std::cout.flush();
}

void write_meta(const std::string& path, const std::string& command,
                const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "command=" << command << '\n';
    out << "netclass_version=" << kVersion << '\n';
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

std::vector<std::pair<std::string, std::string>> spec_kv(const ExperimentSpec& spec) {
    std::ostringstream ss;
    write_spec(spec, ss);
    std::vector<std::pair<std::string, std::string>> kv;
    std::istringstream in(ss.str());
    std::string line;
    while (std::getline(in, line)) {
        auto eq = line.find('=');
        kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return kv;
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Spec resolution order: profile/config-file defaults, then explicit flags.
struct SpecOverrides {
    CLI::App* cmd = nullptr;
    std::string config_path;
    std::string profile = "desk";
    std::uint64_t seed = 0;
    std::size_t threads = default_threads();
    std::size_t walks = 0, walk_length = 0, dim = 0, grid = 0;
    std::size_t epochs = 0, batch = 0;
    double lr = 0.0;

    void attach(CLI::App* app, bool with_profile) {
        cmd = app;
        app->add_option("--config", config_path, "experiment spec file (key=value, versioned)");
        if (with_profile)
            app->add_option("--profile", profile, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
        app->add_option("--seed", seed, "master seed");
        app->add_option("--threads", threads, "parallelism cap; 1 = bit-deterministic reference mode");
        app->add_option("--walks", walks, "random walks per network");
        app->add_option("--walk-length", walk_length, "tokens per walk");
        app->add_option("--dim", dim, "embedding dimension");
        app->add_option("--grid", grid, "raster grid side");
        app->add_option("--epochs", epochs, "max training epochs");
        app->add_option("--batch", batch, "mini-batch size");
        app->add_option("--lr", lr, "SGD learning rate");
    }

    ExperimentSpec resolve() const {
        ExperimentSpec spec;
        std::uint64_t base_seed = cmd->count("--seed") ? seed : 0;
        if (!config_path.empty()) {
            std::ifstream probe(config_path);
            if (!probe) throw CLI::FileError::Missing(config_path);
            spec = read_spec_file(config_path);
        } else {
            spec = profile == "paper" ? paper_profile(base_seed) : desk_profile(base_seed);
        }
        if (cmd->count("--seed")) {
            spec.master_seed = seed;
            spec.cnn.seed = mix64(seed, 0xC44);
        }
        spec.threads = threads;
        if (cmd->count("--walks")) spec.pipeline.walk.num_walks = walks;
        if (cmd->count("--walk-length")) spec.pipeline.walk.walk_length = walk_length;
        if (cmd->count("--dim")) spec.pipeline.sgns.dim = dim;
        if (cmd->count("--grid")) spec.pipeline.grid = grid;
        if (cmd->count("--epochs")) spec.cnn.epochs = epochs;
        if (cmd->count("--batch")) spec.cnn.batch = batch;
        if (cmd->count("--lr")) spec.cnn.lr = lr;
        return spec;
    }
};

void save_classification_outputs(const ClassificationResult& run, const ExperimentSpec& spec,
                                 const std::string& command, const std::string& out_dir) {
    ensure_out_dir(out_dir);
    write_history(run.training.history, (fs::path(out_dir) / "history.csv").string());
    save_checkpoint(run.model, (fs::path(out_dir) / "model.ckpt").string());

    std::vector<std::pair<std::string, double>> metrics = {
        {"test_error", run.test.error_rate},
        {"n_test", static_cast<double>(run.data.test.size())},
        {"best_epoch", static_cast<double>(run.training.best_epoch)},
        {"best_val_error", run.training.best_val_error},
    };
    for (std::size_t t = 0; t < run.test.classes; ++t)
        for (std::size_t p = 0; p < run.test.classes; ++p)
            metrics.emplace_back("confusion_" + std::to_string(t) + "_" + std::to_string(p),
                                 static_cast<double>(run.test.at(t, p)));
    std::ofstream results((fs::path(out_dir) / "results.csv").string());
    if (!results) throw std::runtime_error("cannot write results.csv");
    write_metrics_csv(metrics, results);

    write_meta((fs::path(out_dir) / "run.meta").string(), command, spec_kv(spec));
    write_spec_file(spec, (fs::path(out_dir) / "spec.cfg").string());
    std::cout << "test_error=" << fmt_double(run.test.error_rate) << " n_test=" << run.data.test.size()
              << " best_epoch=" << run.training.best_epoch << '\n';
}

// --- generate ---------------------------------------------------------------

int cmd_generate(const std::string& model, std::size_t n, std::size_t m, std::size_t k, double p,
                 std::uint64_t seed, const std::string& out_path) {
    std::vector<std::pair<std::string, std::string>> kv = {
        {"model", model}, {"n", std::to_string(n)},
        {"m", std::to_string(m)}, {"k", std::to_string(k)}, {"p", fmt_double(p)},
        {"seed", std::to_string(seed)}, {"out", out_path}};
    print_config("generate", kv);

    RngStream rng(seed, kStreamGraph);
    Graph g = model == "ba" ? generate_ba(BaParams{n, m}, rng) : generate_ws(WsParams{n, k, p}, rng);
    write_edge_list(g, out_path);
    write_meta(out_path + ".meta", "generate", kv);
    std::cout << "wrote " << g.edge_count() << " edges to " << out_path << '\n';
    return 0;
}

// --- embed ------------------------------------------------------------------

struct EmbedArgs {
    std::string edges, out, dump_embedding, dump_corpus;
    bool directed = false, log_weights = false;
    std::size_t walks = 10000, walk_length = 10, dim = 20, window = 5, negatives = 5, sgns_epochs = 5;
    std::uint64_t seed = 0;
};

int cmd_embed(const EmbedArgs& a) {
    std::vector<std::pair<std::string, std::string>> kv = {
        {"edges", a.edges}, {"directed", a.directed ? "1" : "0"}, {"log_weights", a.log_weights ? "1" : "0"},
        {"walks", std::to_string(a.walks)}, {"walk_length", std::to_string(a.walk_length)},
        {"dim", std::to_string(a.dim)}, {"window", std::to_string(a.window)},
        {"negatives", std::to_string(a.negatives)}, {"sgns_epochs", std::to_string(a.sgns_epochs)},
        {"seed", std::to_string(a.seed)}, {"out", a.out}};
    print_config("embed", kv);

    LoadedGraph loaded = read_edge_list(a.edges, a.directed);
    Graph graph = a.log_weights ? with_log1p_weights(loaded.graph) : loaded.graph;

    WalkConfig wc{a.walks, a.walk_length};
    WalkCorpus corpus = generate_corpus(graph, wc, RngStream(a.seed, kStreamWalks));
    if (!a.dump_corpus.empty()) write_corpus(corpus, a.dump_corpus);

    SgnsConfig sc;
    sc.dim = a.dim;
    sc.window = a.window;
    sc.negatives = a.negatives;
    sc.epochs = a.sgns_epochs;
    SgnsResult sgns = train_sgns(corpus, sc, RngStream(a.seed, kStreamSgns));
    if (!sgns.zero_visit_nodes.empty())
        std::cerr << "embed: " << sgns.zero_visit_nodes.size() << " node(s) never visited; zero vectors assigned\n";
    if (!a.dump_embedding.empty()) write_embedding(sgns.embedding, a.dump_embedding);

    Points2D pts = pca_project(sgns.embedding, 2);
    write_matrix(a.out, pts.count, pts.dims, pts.coords.data());
    write_meta(a.out + ".meta", "embed", kv);
    std::cout << "wrote " << pts.count << " 2d points to " << a.out << '\n';
    return 0;
}

// --- rasterize ----------------------------------------------------------------

int cmd_rasterize(const std::string& points_path, std::size_t grid, const std::string& out_path, bool ascii) {
    std::vector<std::pair<std::string, std::string>> kv = {
        {"points", points_path}, {"grid", std::to_string(grid)}, {"out", out_path}, {"ascii", ascii ? "1" : "0"}};
    print_config("rasterize", kv);

    MatrixData m = read_matrix(points_path);
    if (m.cols < 2) throw std::runtime_error("rasterize: points file must have >= 2 columns");
    Points2D pts;
    pts.count = m.rows;
    pts.dims = m.cols;
    pts.coords = std::move(m.data);
    GrayImage img = rasterize(pts, grid);
    write_pgm(img, out_path, /*binary=*/!ascii);
    write_meta(out_path + ".meta", "rasterize", kv);
    std::cout << "wrote " << grid << "x" << grid << " pgm to " << out_path << '\n';
    return 0;
}

// --- train / evaluate ---------------------------------------------------------

int cmd_train(const SpecOverrides& overrides, const std::string& out_dir) {
    ExperimentSpec spec = overrides.resolve();
    spec.validate();
    print_config("train", spec_kv(spec));
    ClassificationResult run = run_classification(spec);
    save_classification_outputs(run, spec, "train", out_dir);
    return 0;
}

int cmd_evaluate(const SpecOverrides& overrides, const std::string& model_path, const std::string& manifest,
                 const std::string& split, bool log_weights) {
    CnnModel model = load_checkpoint(model_path);
    if (!manifest.empty()) {
        ExperimentSpec spec = overrides.resolve();
        IngestOptions opts;
        opts.pipeline = spec.pipeline;
        opts.pipeline.grid = model.geom.grid;
        opts.pipeline.log1p_weights = log_weights;
        opts.master_seed = spec.master_seed;
        opts.threads = spec.threads;
        print_config("evaluate", {{"model", model_path}, {"manifest", manifest},
                                  {"seed", std::to_string(opts.master_seed)}});
        IngestReport report;
        DatasetSplits data = ingest_labeled_networks(manifest, opts, &report);
        SampleViews all;
        for (const auto* part : {&data.train, &data.val, &data.test})
            for (const DatasetSample& s : *part) all.push_back({&s.image, s.label});
        EvalResult eval = evaluate(model, all, opts.threads);
        std::cout << "error_rate=" << fmt_double(eval.error_rate) << " n=" << all.size() << '\n';
        return 0;
    }

    ExperimentSpec spec = overrides.resolve();
    spec.validate();
    print_config("evaluate", spec_kv(spec));
    DatasetSplits data = build_synthetic_dataset(spec);
    SampleViews views = split == "train" ? data.train_views() : split == "val" ? data.val_views() : data.test_views();
    EvalResult eval = evaluate(model, views, spec.threads);
    std::cout << "split=" << split << " error_rate=" << fmt_double(eval.error_rate) << " n=" << views.size() << '\n';
    for (std::size_t t = 0; t < eval.classes; ++t) {
        std::cout << "confusion[" << t << "]:";
        for (std::size_t p = 0; p < eval.classes; ++p) std::cout << ' ' << eval.at(t, p);
        std::cout << '\n';
    }
    return 0;
}

// --- experiments ----------------------------------------------------------------

int cmd_experiment_ba_ws(const SpecOverrides& overrides, const std::string& out_dir) {
    ExperimentSpec spec = overrides.resolve();
    spec.validate();
    print_config("experiment ba-ws", spec_kv(spec));
    ClassificationResult run = run_classification(spec);
    save_classification_outputs(run, spec, "experiment ba-ws", out_dir);
    return 0;
}

int cmd_experiment_ws_grid(const SpecOverrides& overrides, std::vector<double> p_values, bool include_controls,
                           const std::string& out_dir) {
    ExperimentSpec base = overrides.resolve();
    if (p_values.empty())
        for (int i = 0; i <= 10; ++i) p_values.push_back(0.1 * i);
    // Grid cells are WS-vs-WS; the base profile's WS class supplies n and k.
    print_config("experiment ws-grid", spec_kv(base));
    std::cout << "p_values=";
    for (std::size_t i = 0; i < p_values.size(); ++i) std::cout << (i ? "," : "") << p_values[i];
    std::cout << " include_controls=" << include_controls << '\n';

    WsGridResult grid = run_ws_grid(base, p_values, include_controls);
    ensure_out_dir(out_dir);
    std::ofstream results((fs::path(out_dir) / "results.csv").string());
    if (!results) throw std::runtime_error("cannot write results.csv");
    write_ws_grid_csv(grid, results);
    write_meta((fs::path(out_dir) / "run.meta").string(), "experiment ws-grid", spec_kv(base));
    for (const WsGridCell& c : grid.cells)
        std::cout << "p=" << c.p_row << " vs p=" << c.p_col << " -> error " << fmt_double(c.error) << '\n';
    return 0;
}

int cmd_experiment_robustness(const SpecOverrides& overrides, std::vector<std::size_t> node_counts,
                              std::vector<std::size_t> edge_params, std::size_t test_per_class,
                              const std::string& out_dir) {
    ExperimentSpec spec = overrides.resolve();
    spec.validate();
    if (node_counts.empty()) node_counts = {100, 150, 200, 250, 300};
    if (edge_params.empty()) edge_params = {1, 2, 3, 4, 5, 6, 8, 10, 12, 16};
    print_config("experiment robustness", spec_kv(spec));

    ClassificationResult reference = run_classification(spec);
    std::cout << "reference test_error=" << fmt_double(reference.test.error_rate) << '\n';
    RobustnessResult sweep = run_size_robustness(
        reference.model, spec, node_counts, edge_params, test_per_class,
        std::make_pair(reference.test.error_rate, reference.data.test.size()));

    ensure_out_dir(out_dir);
    save_checkpoint(reference.model, (fs::path(out_dir) / "model.ckpt").string());
    write_history(reference.training.history, (fs::path(out_dir) / "history.csv").string());
    std::ofstream results((fs::path(out_dir) / "results.csv").string());
    if (!results) throw std::runtime_error("cannot write results.csv");
    write_robustness_csv(sweep, results);
    write_meta((fs::path(out_dir) / "run.meta").string(), "experiment robustness", spec_kv(spec));
    for (const RobustnessPoint& p : sweep.points)
        std::cout << p.axis << '=' << p.value << " error=" << fmt_double(p.error) << '\n';
    return 0;
}

int cmd_experiment_trade(const SpecOverrides& overrides, const std::string& manifest, bool log_weights,
                         const std::string& out_dir) {
    ExperimentSpec spec = overrides.resolve();
    // 15/30 filters, 300 units, 9:1:1 split for the trade configuration.
    spec.cnn = spec.cnn.trade_variant();
    spec.split = {9.0 / 11, 1.0 / 11, 1.0 / 11};
    spec.pipeline.log1p_weights = log_weights;
    print_config("experiment trade", spec_kv(spec));
    std::cout << "manifest=" << manifest << '\n';

    IngestOptions opts;
    opts.pipeline = spec.pipeline;
    opts.split = spec.split;
    opts.master_seed = spec.master_seed;
    opts.threads = spec.threads;
    IngestReport report;
    DatasetSplits data = ingest_labeled_networks(manifest, opts, &report);
    std::cout << "ingested labels:";
    for (std::size_t l = 0; l < report.label_counts.size(); ++l) std::cout << " [" << l << "]=" << report.label_counts[l];
    std::cout << " skipped=" << report.skipped << '\n';

    spec.cnn.classes = report.label_counts.size();
    spec.classes.clear();  // classes come from the manifest, not generators
    ClassificationResult run;
    run.data = std::move(data);
    run.model = init_model(spec.cnn, spec.pipeline.grid);
    run.training = train(run.model, run.data.train_views(), run.data.val_views(), spec.threads);
    if (run.training.diverged) throw std::runtime_error("trade training diverged");
    run.test = evaluate(run.model, run.data.test_views(), spec.threads);

    ensure_out_dir(out_dir);
    write_history(run.training.history, (fs::path(out_dir) / "history.csv").string());
    save_checkpoint(run.model, (fs::path(out_dir) / "model.ckpt").string());
    std::vector<std::pair<std::string, double>> metrics = {
        {"test_error", run.test.error_rate},
        {"n_test", static_cast<double>(run.data.test.size())},
        {"skipped", static_cast<double>(report.skipped)},
    };
    std::ofstream results((fs::path(out_dir) / "results.csv").string());
    if (!results) throw std::runtime_error("cannot write results.csv");
    write_metrics_csv(metrics, results);
    write_meta((fs::path(out_dir) / "run.meta").string(), "experiment trade", spec_kv(spec));
    std::cout << "test_error=" << fmt_double(run.test.error_rate) << " n_test=" << run.data.test.size() << '\n';
    return 0;
}

// --- visualize-activations -------------------------------------------------------

struct VisualizeArgs {
    std::string model_path, edges, out_dir;
    bool directed = false, log_weights = false;
    int filter = -1;  // -1 = every layer-1 filter
    double quantile = 0.9;
    std::size_t layer = 1;
    std::size_t walks = 10000, walk_length = 10, dim = 20;
    std::uint64_t seed = 0;
};

int cmd_visualize(const VisualizeArgs& a) {
    print_config("visualize-activations",
                 {{"model", a.model_path}, {"edges", a.edges}, {"directed", a.directed ? "1" : "0"},
                  {"filter", std::to_string(a.filter)}, {"quantile", fmt_double(a.quantile)},
                  {"walks", std::to_string(a.walks)}, {"walk_length", std::to_string(a.walk_length)},
                  {"dim", std::to_string(a.dim)}, {"seed", std::to_string(a.seed)}, {"out_dir", a.out_dir}});

    CnnModel model = load_checkpoint(a.model_path);
    LoadedGraph loaded = read_edge_list(a.edges, a.directed);

    PipelineConfig pc;
    pc.walk = {a.walks, a.walk_length};
    pc.sgns.dim = a.dim;
    pc.grid = model.geom.grid;
    pc.log1p_weights = a.log_weights;
    DatasetSample sample = run_sample_pipeline(std::move(loaded.graph), /*label=*/0,
                                               {a.edges, a.directed ? "directed" : "undirected", a.seed}, pc,
                                               /*retain=*/true);

    ensure_out_dir(a.out_dir);
    std::vector<std::size_t> filters;
    if (a.filter >= 0) filters.push_back(static_cast<std::size_t>(a.filter));
    else
        for (std::size_t f = 0; f < model.cfg.conv1_filters; ++f) filters.push_back(f);

    for (std::size_t f : filters) {
        ActivationMap act = map_activations(model, sample, a.layer, f, a.quantile);
        std::string stem = (fs::path(a.out_dir) / ("filter" + std::to_string(f))).string();
        write_activation_overlay(act, sample, stem);
        std::cout << "filter " << f << ": " << act.highlighted_cells.size() << " highlighted cells, "
                  << act.active_nodes.size() << " active nodes -> " << stem << ".pgm\n";
    }
    write_meta((fs::path(a.out_dir) / "run.meta").string(), "visualize-activations",
               {{"model", a.model_path}, {"edges", a.edges}, {"quantile", fmt_double(a.quantile)},
                {"seed", std::to_string(a.seed)}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"netclass: whole-network classification via random walks, SGNS, PCA, rasterization and a small CNN"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "synthesize a BA or WS network as an edge list");
    std::string gen_model, gen_out;
    std::size_t gen_n = 1000, gen_m = 4, gen_k = 8;
    double gen_p = 0.1;
    std::uint64_t gen_seed = 0;
    gen->add_option("--model", gen_model, "ba or ws")->required()->check(CLI::IsMember({"ba", "ws"}));
    gen->add_option("--n", gen_n, "node count");
    gen->add_option("--m", gen_m, "BA: edges per new node");
    gen->add_option("--k", gen_k, "WS: ring neighbors per node (even)");
    gen->add_option("--p", gen_p, "WS: rewiring probability");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output edge-list path")->required();

    // embed
    auto* embed = app.add_subcommand("embed", "edge list -> walks -> SGNS -> PCA points file");
    EmbedArgs ea;
    embed->add_option("--edges", ea.edges, "input edge list")->required();
    embed->add_flag("--directed", ea.directed, "treat the edge list as directed");
    embed->add_flag("--log-weights", ea.log_weights, "walk on log1p(weight)");
    embed->add_option("--walks", ea.walks);
    embed->add_option("--walk-length", ea.walk_length);
    embed->add_option("--dim", ea.dim);
    embed->add_option("--window", ea.window);
    embed->add_option("--negatives", ea.negatives);
    embed->add_option("--sgns-epochs", ea.sgns_epochs);
    embed->add_option("--seed", ea.seed);
    embed->add_option("--out", ea.out, "output 2d points file")->required();
    embed->add_option("--dump-embedding", ea.dump_embedding, "also dump the full embedding matrix");
    embed->add_option("--dump-corpus", ea.dump_corpus, "also dump the walk corpus");

    // rasterize
    auto* rast = app.add_subcommand("rasterize", "points file -> PGM image");
    std::string rast_points, rast_out;
    std::size_t rast_grid = 48;
    bool rast_ascii = false;
    rast->add_option("--points", rast_points, "input points file")->required();
    rast->add_option("--grid", rast_grid, "grid side");
    rast->add_option("--out", rast_out, "output PGM path")->required();
    rast->add_flag("--ascii", rast_ascii, "write P2 instead of P5");

    // train
    auto* train_cmd = app.add_subcommand("train", "build a dataset per spec and train a classifier");
    SpecOverrides train_ov;
    std::string train_out_dir = "train-out";
    train_ov.attach(train_cmd, /*with_profile=*/true);
    train_cmd->add_option("--out-dir", train_out_dir, "output directory");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on a spec split or a manifest");
    SpecOverrides eval_ov;
    std::string eval_model, eval_manifest, eval_split = "test";
    bool eval_log_weights = false;
    eval_ov.attach(eval_cmd, /*with_profile=*/true);
    eval_cmd->add_option("--model", eval_model, "checkpoint path")->required();
    eval_cmd->add_option("--manifest", eval_manifest, "evaluate on manifest networks instead of a spec");
    eval_cmd->add_option("--split", eval_split)->check(CLI::IsMember({"train", "val", "test"}));
    eval_cmd->add_flag("--log-weights", eval_log_weights);

    // experiment
    auto* exp = app.add_subcommand("experiment", "canned experiments");
    exp->require_subcommand(1);

    auto* ba_ws = exp->add_subcommand("ba-ws", "BA vs WS classification");
    SpecOverrides ba_ws_ov;
    std::string ba_ws_out = "ba-ws-out";
    ba_ws_ov.attach(ba_ws, true);
    ba_ws->add_option("--out-dir", ba_ws_out);

    auto* ws_grid = exp->add_subcommand("ws-grid", "pairwise WS(p) discriminability grid");
    SpecOverrides ws_grid_ov;
    std::string ws_grid_out = "ws-grid-out";
    std::vector<double> ws_grid_p;
    bool ws_grid_controls = false;
    ws_grid_ov.attach(ws_grid, true);
    ws_grid->add_option("--p-values", ws_grid_p, "p values (default 0,0.1,...,1.0)")->delimiter(',');
    ws_grid->add_flag("--include-controls", ws_grid_controls, "also run same-p control cells");
    ws_grid->add_option("--out-dir", ws_grid_out);

    auto* robust = exp->add_subcommand("robustness", "size robustness of a trained classifier");
    SpecOverrides robust_ov;
    std::string robust_out = "robustness-out";
    std::vector<std::size_t> robust_nodes, robust_edges;
    std::size_t robust_test_per_class = 50;
    robust_ov.attach(robust, true);
    robust->add_option("--nodes", robust_nodes, "node-count sweep")->delimiter(',');
    robust->add_option("--edges", robust_edges, "BA m sweep (WS k = 2m)")->delimiter(',');
    robust->add_option("--test-per-class", robust_test_per_class);
    robust->add_option("--out-dir", robust_out);

    auto* trade = exp->add_subcommand("trade", "train on manifest networks (weighted/directed pipeline)");
    SpecOverrides trade_ov;
    std::string trade_manifest, trade_out = "trade-out";
    bool trade_log_weights = false;
    trade_ov.attach(trade, false);
    trade->add_option("--manifest", trade_manifest, "path,label,directed manifest")->required();
    trade->add_flag("--log-weights", trade_log_weights, "walk on log1p(weight)");
    trade->add_option("--out-dir", trade_out);

    // visualize-activations
    auto* vis = app.add_subcommand("visualize-activations", "map layer-1 filter activity back onto network nodes");
    VisualizeArgs va;
    vis->add_option("--model", va.model_path)->required();
    vis->add_option("--edges", va.edges)->required();
    vis->add_flag("--directed", va.directed);
    vis->add_flag("--log-weights", va.log_weights);
    vis->add_option("--filter", va.filter, "filter index (default: all)");
    vis->add_option("--quantile", va.quantile);
    vis->add_option("--layer", va.layer);
    vis->add_option("--walks", va.walks);
    vis->add_option("--walk-length", va.walk_length);
    vis->add_option("--dim", va.dim);
    vis->add_option("--seed", va.seed);
    vis->add_option("--out-dir", va.out_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << "\n\n";
        CLI::App* scope = &app;
        for (CLI::App* sub = &app; !sub->get_subcommands().empty();) {
            sub = sub->get_subcommands().front();
            scope = sub;
        }
        std::cerr << scope->help();
        return 1;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_model, gen_n, gen_m, gen_k, gen_p, gen_seed, gen_out);
        if (embed->parsed()) return cmd_embed(ea);
        if (rast->parsed()) return cmd_rasterize(rast_points, rast_grid, rast_out, rast_ascii);
        if (train_cmd->parsed()) return cmd_train(train_ov, train_out_dir);
        if (eval_cmd->parsed()) return cmd_evaluate(eval_ov, eval_model, eval_manifest, eval_split, eval_log_weights);
        if (ba_ws->parsed()) return cmd_experiment_ba_ws(ba_ws_ov, ba_ws_out);
        if (ws_grid->parsed()) return cmd_experiment_ws_grid(ws_grid_ov, ws_grid_p, ws_grid_controls, ws_grid_out);
        if (robust->parsed())
            return cmd_experiment_robustness(robust_ov, robust_nodes, robust_edges, robust_test_per_class, robust_out);
        if (trade->parsed()) return cmd_experiment_trade(trade_ov, trade_manifest, trade_log_weights, trade_out);
        if (vis->parsed()) return cmd_visualize(va);
    } catch (const CLI::FileError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "netclass: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
