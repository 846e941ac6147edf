#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "netclass/spec_io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliFixture : ::testing::Test {
    fs::path dir;

    void SetUp() override {
        dir = fs::temp_directory_path() / ("netclass_cli_" + std::to_string(::getpid()) + "_" +
                                           std::to_string(counter()++));
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    static int& counter() {
        static int c = 0;
        return c;
    }

    CliResult run(const std::string& args) const {
        fs::path out = dir / "stdout.log", err = dir / "stderr.log";
        std::string cmd = std::string(NETCLASS_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
        int status = std::system(cmd.c_str());
        int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        return {code, slurp(out), slurp(err)};
    }

    std::string file(const std::string& name) const { return (dir / name).string(); }
};

std::size_t line_count(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

netclass::ExperimentSpec tiny_cfg() {
    using namespace netclass;
    ExperimentSpec spec;
    spec.classes = {{BaParams{40, 3}, 8}, {WsParams{40, 4, 0.1}, 8}};
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
    spec.master_seed = 1301;
    spec.cnn.seed = mix64(1301, 0xC44);
    return spec;
}

}  // namespace

TEST_F(CliFixture, GenerateWsWritesExactEdgeCount) {
    CliResult r = run("generate --model ws --n 10 --k 4 --p 0 --seed 1 --out " + file("r.edges"));
    EXPECT_EQ(r.exit_code, 0) << r.err;
    EXPECT_EQ(line_count(file("r.edges")), 20u);  // n*k/2
    EXPECT_TRUE(fs::exists(file("r.edges.meta")));
    EXPECT_NE(r.out.find("seed=1"), std::string::npos);  // resolved config printed
}

TEST_F(CliFixture, GenerateIsByteDeterministic) {
    ASSERT_EQ(run("generate --model ba --n 60 --m 3 --seed 9 --out " + file("a.edges")).exit_code, 0);
    ASSERT_EQ(run("generate --model ba --n 60 --m 3 --seed 9 --out " + file("b.edges")).exit_code, 0);
    EXPECT_EQ(slurp(file("a.edges")), slurp(file("b.edges")));
}

TEST_F(CliFixture, TrainWithMissingConfigExitsOneWithSynopsis) {
    CliResult r = run("train --config " + file("missing.cfg"));
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST_F(CliFixture, UnknownFlagsRejected) {
    CliResult r = run("generate --model ba --bogus 3 --out " + file("x.edges"));
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_FALSE(fs::exists(file("x.edges")));
}

TEST_F(CliFixture, BadUsageEmitsSynopsisOnStderr) {
    CliResult r = run("generate --model er --n 10 --out " + file("x.edges"));  // invalid model choice
    EXPECT_EQ(r.exit_code, 1);
    EXPECT_FALSE(r.err.empty());
}

TEST_F(CliFixture, EmbedRasterizeChainProducesArtifacts) {
    ASSERT_EQ(run("generate --model ws --n 30 --k 4 --p 0.1 --seed 3 --out " + file("g.edges")).exit_code, 0);
    CliResult embed = run("embed --edges " + file("g.edges") +
                          " --walks 200 --walk-length 8 --dim 4 --sgns-epochs 1 --seed 5 --out " + file("pts.txt") +
                          " --dump-embedding " + file("emb.txt") + " --dump-corpus " + file("walks.txt"));
    ASSERT_EQ(embed.exit_code, 0) << embed.err;

    std::ifstream pts(file("pts.txt"));
    std::size_t rows, cols;
    pts >> rows >> cols;
    EXPECT_EQ(rows, 30u);
    EXPECT_EQ(cols, 2u);
    EXPECT_EQ(line_count(file("walks.txt")), 200u);

    std::ifstream emb(file("emb.txt"));
    emb >> rows >> cols;
    EXPECT_EQ(rows, 30u);
    EXPECT_EQ(cols, 4u);

    CliResult rast = run("rasterize --points " + file("pts.txt") + " --grid 24 --out " + file("img.pgm"));
    ASSERT_EQ(rast.exit_code, 0) << rast.err;
    std::string pgm = slurp(file("img.pgm"));
    EXPECT_EQ(pgm.substr(0, 2), "P5");
    EXPECT_TRUE(fs::exists(file("img.pgm.meta")));
}

TEST_F(CliFixture, ExperimentBaWsRunsAndIsDeterministic) {
    using namespace netclass;
    ExperimentSpec spec = tiny_cfg();
    write_spec_file(spec, file("tiny.cfg"));

    CliResult r1 = run("experiment ba-ws --config " + file("tiny.cfg") + " --threads 2 --out-dir " + file("run1"));
    ASSERT_EQ(r1.exit_code, 0) << r1.err;
    EXPECT_TRUE(fs::exists(file("run1/history.csv")));
    EXPECT_TRUE(fs::exists(file("run1/results.csv")));
    EXPECT_TRUE(fs::exists(file("run1/model.ckpt")));
    EXPECT_TRUE(fs::exists(file("run1/run.meta")));

    CliResult r2 = run("experiment ba-ws --config " + file("tiny.cfg") + " --threads 1 --out-dir " + file("run2"));
    ASSERT_EQ(r2.exit_code, 0) << r2.err;
    EXPECT_EQ(slurp(file("run1/history.csv")), slurp(file("run2/history.csv")));
    EXPECT_EQ(slurp(file("run1/results.csv")), slurp(file("run2/results.csv")));
}

TEST_F(CliFixture, VisualizeActivationsWritesOverlays) {
    using namespace netclass;
    ExperimentSpec spec = tiny_cfg();
    write_spec_file(spec, file("tiny.cfg"));
    ASSERT_EQ(run("experiment ba-ws --config " + file("tiny.cfg") + " --out-dir " + file("run")).exit_code, 0);
    ASSERT_EQ(run("generate --model ba --n 40 --m 3 --seed 5 --out " + file("one.edges")).exit_code, 0);

    CliResult vis = run("visualize-activations --model " + file("run/model.ckpt") + " --edges " + file("one.edges") +
                        " --walks 200 --walk-length 8 --dim 6 --seed 2 --out-dir " + file("vis"));
    ASSERT_EQ(vis.exit_code, 0) << vis.err;
    EXPECT_TRUE(fs::exists(file("vis/filter0.pgm")));
    EXPECT_TRUE(fs::exists(file("vis/filter0_nodes.txt")));
    EXPECT_TRUE(fs::exists(file("vis/filter1.pgm")));
}

TEST_F(CliFixture, RuntimeFailuresExitTwo) {
    CliResult r = run("rasterize --points " + file("nonexistent.txt") + " --out " + file("x.pgm"));
    EXPECT_EQ(r.exit_code, 2);
}
