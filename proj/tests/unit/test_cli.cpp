#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "gsd/cli.hpp"
#include "gsd/denoise.hpp"
#include "gsd/graph.hpp"
#include "gsd/io.hpp"
#include "gsd/synth.hpp"

namespace gsd {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "gsd");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("gsd_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    // A noisy two-cluster instance written out as graph.csv and signal.csv.
    SynthInstance write_instance(std::uint64_t seed = 3) {
        SynthSpec spec;
        spec.n = 120;
        spec.seed = seed;
        SynthInstance inst = generate(spec);
        write_graph_csv(path("graph.csv"), inst.graph);
        write_signal_csv(path("signal.csv"), inst.noisy);
        return inst;
    }

    fs::path dir_;
};

TEST_F(CliTest, IdenticalFeatureRowsGiveCompleteUnitTriangle) {
    spit(path("f.csv"), "node_id,a,b\n1,0.5,2\n2,0.5,2\n3,0.5,2\n");
    const Outcome r = run_cli({"build-graph", "--features", path("f.csv"), "-o", path("out")});
    ASSERT_EQ(r.code, 0) << r.err;
    const Graph g = read_graph_csv(path("out/graph.csv"));
    ASSERT_EQ(g.edge_count(), 3u);
    for (const auto& e : g.edges()) EXPECT_EQ(e.w, 1.0);
}

TEST_F(CliTest, IdentityMetricBuildsAllPairsWithinThreshold) {
    std::ostringstream csv;
    csv << "node_id,x,y\n";
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 20; ++i) {
        pts.emplace_back(std::cos(i * 1.3) * (1 + i % 4), std::sin(i * 0.7) * 2);
        csv << (i + 1) << ',' << format_double(pts.back().first) << ',' << format_double(pts.back().second) << '\n';
    }
    spit(path("f.csv"), csv.str());
    const Outcome r =
        run_cli({"build-graph", "--features", path("f.csv"), "--metric", "identity", "--threshold", "2.5", "-o",
                 path("out")});
    ASSERT_EQ(r.code, 0) << r.err;
    const Graph g = read_graph_csv(path("out/graph.csv"), 20);
    std::size_t expected = 0;
    for (std::size_t i = 0; i < 20; ++i) {
        for (std::size_t j = i + 1; j < 20; ++j) {
            const double dx = pts[i].first - pts[j].first;
            const double dy = pts[i].second - pts[j].second;
            if (dx * dx + dy * dy <= 2.5) ++expected;
        }
    }
    EXPECT_EQ(g.edge_count(), expected);
    for (const auto& e : g.edges()) {
        const double dx = pts[e.i].first - pts[e.j].first;
        const double dy = pts[e.i].second - pts[e.j].second;
        EXPECT_NEAR(e.w, std::exp(-(dx * dx + dy * dy)), 1e-15);
    }
    EXPECT_TRUE(fs::exists(path("out/metric.json")));
    EXPECT_TRUE(fs::exists(path("out/manifest.json")));
}

TEST_F(CliTest, NonNumericCellIsParseErrorWithLocation) {
    spit(path("f.csv"), "node_id,a\n1,0.5\n2,oops\n");
    const Outcome r = run_cli({"build-graph", "--features", path("f.csv"), "-o", path("out")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("row 3, column 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, ZeroMuReturnsInput) {
    write_instance();
    const Outcome r = run_cli(
        {"denoise", "--graph", path("graph.csv"), "--signal", path("signal.csv"), "--mu", "0", "-o", path("out")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(path("out/denoised.csv")), slurp(path("signal.csv")));
    EXPECT_FALSE(fs::exists(path("out/mse_curve.csv")));
}

TEST_F(CliTest, DenoiseMatchesLibraryPipeline) {
    const SynthInstance inst = write_instance();
    const Outcome r =
        run_cli({"denoise", "--graph", path("graph.csv"), "--signal", path("signal.csv"), "-o", path("out")});
    ASSERT_EQ(r.code, 0) << r.err;
    const PipelineResult lib = denoise_pipeline(read_graph_csv(path("graph.csv")), inst.noisy);
    const json audit = json::parse(slurp(path("out/audit.json")));
    EXPECT_EQ(audit["mu_star"].get<double>(), lib.mu.mu_star);
    EXPECT_EQ(audit["sigma2"].get<double>(), lib.noise.sigma2);
    EXPECT_TRUE(audit["mu_override"].is_null());
    EXPECT_EQ(read_signal_csv(path("out/denoised.csv")).values, lib.denoised.x_star);
    EXPECT_TRUE(fs::exists(path("out/mse_curve.csv")));

    const json manifest = json::parse(slurp(path("out/manifest.json")));
    EXPECT_EQ(manifest["command"], "denoise");
    std::vector<std::string> outputs = manifest["outputs"];
    EXPECT_NE(std::find(outputs.begin(), outputs.end(), "denoised.csv"), outputs.end());
}

TEST_F(CliTest, WrongSignalLengthNamesBothSizes) {
    write_instance();
    spit(path("short.csv"), "node_id,value\n1,1\n2,2\n");
    const Outcome r =
        run_cli({"denoise", "--graph", path("graph.csv"), "--signal", path("short.csv"), "-o", path("out")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("expected 120, got 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, DisconnectedGraphGetsActionableMessage) {
    spit(path("g.csv"), "i,j,w\n1,2,1\n3,4,1\n");
    spit(path("s.csv"), "node_id,value\n1,1\n2,2\n3,3\n4,4\n");
    const Outcome r = run_cli({"denoise", "--graph", path("g.csv"), "--signal", path("s.csv"), "-o", path("out")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("stage 'graph'"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("threshold"), std::string::npos) << r.err;
}

TEST_F(CliTest, NoiselessBenchRecoversSignal) {
    const Outcome r = run_cli({"bench", "--trials", "1", "--sigma", "0", "--nodes", "100", "-o", path("out")});
    ASSERT_EQ(r.code, 0) << r.err;
    const json summary = json::parse(slurp(path("out/summary.json")));
    EXPECT_LT(summary["mean_mse"].get<double>(), 1e-12);
    EXPECT_TRUE(fs::exists(path("out/trials.csv")));
}

TEST_F(CliTest, UsageErrorsExitOne) {
    EXPECT_EQ(run_cli({"bench", "--family", "torus", "-o", path("out")}).code, 1);
    EXPECT_EQ(run_cli({}).code, 1);
    EXPECT_EQ(run_cli({"denoise", "--graph", "x.csv"}).code, 1);
    EXPECT_EQ(run_cli({"denoise", "--graph", "x", "--signal", "y", "--mu", "abc"}).code, 1);
    EXPECT_EQ(run_cli({"inspect", "--graph", path("missing.csv"), "-o", path("out")}).code, 1);
    EXPECT_EQ(run_cli({"--help"}).code, 0);
    const Outcome v = run_cli({"--version"});
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find('.'), std::string::npos);
}

TEST_F(CliTest, RepeatedRunsAreByteIdentical) {
    write_instance();
    for (const char* sub : {"a", "b"}) {
        ASSERT_EQ(run_cli({"denoise", "--graph", path("graph.csv"), "--signal", path("signal.csv"), "-o",
                           path(std::string("den_") + sub)})
                      .code,
                  0);
        ASSERT_EQ(run_cli({"bench", "--trials", "3", "--nodes", "80", "-o", path(std::string("bench_") + sub)}).code,
                  0);
    }
    for (const char* f : {"denoised.csv", "audit.json", "mse_curve.csv"}) {
        EXPECT_EQ(slurp(path(std::string("den_a/") + f)), slurp(path(std::string("den_b/") + f))) << f;
    }
    for (const char* f : {"trials.csv", "summary.json"}) {
        EXPECT_EQ(slurp(path(std::string("bench_a/") + f)), slurp(path(std::string("bench_b/") + f))) << f;
    }
}

TEST_F(CliTest, CommandLineOverridesConfigFile) {
    spit(path("cfg.ini"), "[bench]\ntrials = 2\nnodes = 60\nseed = 9\n");
    ASSERT_EQ(run_cli({"--config", path("cfg.ini"), "bench", "-o", path("a")}).code, 0);
    json s = json::parse(slurp(path("a/summary.json")));
    EXPECT_EQ(s["trials"].get<int>(), 2);
    json m = json::parse(slurp(path("a/manifest.json")));
    EXPECT_EQ(m["seed"].get<int>(), 9);
    EXPECT_EQ(m["config_file"].get<std::string>(), path("cfg.ini"));

    ASSERT_EQ(run_cli({"--config", path("cfg.ini"), "bench", "--trials", "1", "-o", path("b")}).code, 0);
    s = json::parse(slurp(path("b/summary.json")));
    EXPECT_EQ(s["trials"].get<int>(), 1);
}

TEST_F(CliTest, EnvironmentSuppliesDefaultOutputDir) {
    ::setenv(cli::kOutputDirEnv, path("from_env").c_str(), 1);
    const Outcome r = run_cli({"bench", "--trials", "1", "--nodes", "60"});
    ::unsetenv(cli::kOutputDirEnv);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(path("from_env/summary.json")));
}

}  // namespace
}  // namespace gsd
