#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rarefuse/errors.hpp"
#include "rarefuse/experiment.hpp"

using namespace rarefuse;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("rarefuse-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

nlohmann::json b1_convergence() {
    return {{"benchmark", "linear-gaussian"},
            {"mode", "convergence"},
            {"m", 20000},
            {"n_grid", {300, 600, 900, 1200}},
            {"seed", 42},
            {"repetitions", 3},
            {"benchmark_options", {{"beta", 3.0}}}};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RAREFUSE_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST(Config, ParsesAndDefaults) {
    const auto c = parse_config(b1_convergence());
    EXPECT_EQ(c.mode, Mode::Convergence);
    EXPECT_EQ(c.repetitions, 3u);
    EXPECT_TRUE(c.split.empty());
    EXPECT_EQ(c.subset.N, 2000u);
    EXPECT_EQ(*c.benchmark_options.beta, 3.0);
}

TEST(Config, RejectsInvalid) {
    auto j = b1_convergence();
    j["bogus"] = 1;
    EXPECT_THROW((void)parse_config(j), ConfigError);
    j = b1_convergence();
    j["n_grid"] = {600, 300};
    EXPECT_THROW((void)parse_config(j), ConfigError);
    j["n_grid"] = nlohmann::json::array();
    EXPECT_THROW((void)parse_config(j), ConfigError);
    j = b1_convergence();
    j["repetitions"] = 0;
    EXPECT_THROW((void)parse_config(j), ConfigError);
    j = b1_convergence();
    j["benchmark"] = "nope";
    EXPECT_THROW((void)parse_config(j), ConfigError);
    j = b1_convergence();
    j.erase("benchmark");
    EXPECT_THROW((void)parse_config(j), ConfigError);
    j = b1_convergence();
    j["mode"] = "plot";
    EXPECT_THROW((void)parse_config(j), ConfigError);
    j = b1_convergence();
    j["subset"] = {{"N", 2000}, {"q", 1}};
    EXPECT_THROW((void)parse_config(j), ConfigError);
}

TEST(Config, HashIgnoresOutputDirAndWorkers) {
    auto a = parse_config(b1_convergence());
    auto b = a;
    b.output_dir = "/elsewhere";
    b.workers = 8;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.seed = 43;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(SplitBudget, EqualAndFractional) {
    EXPECT_EQ(split_budget(10, 3), (std::vector<std::size_t>{4, 3, 3}));
    EXPECT_EQ(split_budget(300, 3), (std::vector<std::size_t>{100, 100, 100}));
    const std::vector<double> f = {0.5, 0.25, 0.25};
    EXPECT_EQ(split_budget(11, 3, f), (std::vector<std::size_t>{6, 3, 2}));
    EXPECT_THROW((void)split_budget(10, 0), InvalidArgument);
}

TEST(Experiment, WeightTableRowsSumToOne) {
    const auto report = run_experiment(parse_config(b1_convergence()));
    const auto rows = parse_csv(weights_csv(report));
    ASSERT_EQ(rows.size(), 1u + 4 * 3);
    EXPECT_EQ(rows[0][4], "alpha_1");
    EXPECT_EQ(rows[0][6], "alpha_3");
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double s = std::stod(rows[r][4]) + std::stod(rows[r][5]) + std::stod(rows[r][6]);
        EXPECT_NEAR(s, 1.0, 1e-12);
    }
    // every estimate row is traceable to (config hash, seed, repetition)
    for (const auto& row : parse_csv(estimates_csv(report))) {
        if (row[0] == "config_hash") continue;
        EXPECT_EQ(row[0], report.config_hash);
        EXPECT_EQ(row[1], "42");
    }
}

TEST(Experiment, FusedCvNotAboveWorstComponent) {
    const auto report = run_experiment(parse_config(b1_convergence()));
    for (std::size_t n : {300u, 600u, 900u, 1200u}) {
        for (std::size_t rep = 0; rep < 3; ++rep) {
            double fused_cv = -1, worst = 0;
            for (const auto& e : report.estimates) {
                if (e.n_total != n || e.repetition != rep || e.result.estimate <= 0) continue;
                if (e.result.density_id == "fused") fused_cv = cv(e.result);
                else if (e.result.density_id.starts_with("q")) worst = std::max(worst, cv(e.result));
            }
            ASSERT_GE(fused_cv, 0.0);
            EXPECT_LE(fused_cv, worst);
        }
    }
}

TEST(Experiment, FallbackDensityGetsSmallestWeight) {
    auto j = b1_convergence();
    j["benchmark_options"]["beta"] = 3.5;
    j["n_grid"] = {3000};
    j["repetitions"] = 10;
    j["reference"] = false;
    const auto report = run_experiment(parse_config(j));
    ASSERT_TRUE(report.densities[2].fell_back_to_nominal);
    int ok = 0;
    for (const auto& w : report.weights) {
        ok += w.weights[2] <= w.weights[0] && w.weights[2] <= w.weights[1];
    }
    EXPECT_GE(ok, 8);
}

TEST(Experiment, InsufficientBudgetFlagged) {
    auto j = b1_convergence();
    j["n_grid"] = {5, 300};
    j["repetitions"] = 1;
    const auto report = run_experiment(parse_config(j));
    const auto text = convergence_csv(report);
    EXPECT_NE(text.find("5,fused,nan,nan,nan,0,insufficient"), std::string::npos);
    EXPECT_NE(estimates_csv(report).find(",insufficient,"), std::string::npos);
}

TEST(Experiment, BudgetAccountingMatchesEvaluationCount) {
    auto j = b1_convergence();
    j["n_grid"] = {900};
    j["repetitions"] = 2;
    j["reference"] = true;
    const auto report = run_experiment(parse_config(j));
    const auto& phase = report.timings[1];
    EXPECT_EQ(phase.phase, "convergence");
    ASSERT_EQ(report.budget_per_repetition.size(), 1u);
    EXPECT_EQ(report.budget_per_repetition[0].second, 900u + 900u);
    // Gaussian nominal has full support, so every drawn sample is evaluated
    EXPECT_EQ(phase.high_fidelity_evaluations, 2u * (900u + 900u));
    EXPECT_EQ(report.timings[0].surrogate_evaluations, 3u * 20000u);
    EXPECT_EQ(report.timings[0].high_fidelity_evaluations, 20000u);
}

TEST(Experiment, SubsetCsvColumns) {
    nlohmann::json j = {{"benchmark", "arrhenius-2d"}, {"mode", "subset"}, {"seed", 1},
                        {"subset", {{"N", 2000}, {"p0", 0.1}}}};
    const auto report = run_experiment(parse_config(j));
    const auto rows = parse_csv(subset_csv(report));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"samples", "samples_each_level", "levels", "failure_prob",
                                                 "estimated_cov", "repetition", "seed", "converged",
                                                 "config_hash"}));
    EXPECT_EQ(rows[1][1], "2000");
}

TEST(Experiment, FuseModeComparisons) {
    nlohmann::json j = {{"benchmark", "linear-gaussian"}, {"mode", "fuse"}, {"seed", 3}, {"m", 20000},
                        {"n_grid", {3000}}, {"repetitions", 2}, {"benchmark_options", {{"beta", 3.0}}}};
    const auto report = run_experiment(parse_config(j));
    EXPECT_EQ(report.comparisons.size(), 2u * 3u);
    EXPECT_TRUE(report.subset.empty());
    EXPECT_FALSE(report.reference_density.has_value());
}

TEST(Experiment, DeterministicAcrossRunsAndWorkers) {
    auto j = b1_convergence();
    j["mc_baseline"] = true;
    auto c1 = parse_config(j);
    auto c2 = c1;
    c2.workers = 4;
    const auto a = run_experiment(c1);
    const auto b = run_experiment(c1);
    const auto c = run_experiment(c2);
    EXPECT_EQ(estimates_csv(a), estimates_csv(b));
    EXPECT_EQ(weights_csv(a), weights_csv(b));
    EXPECT_EQ(estimates_csv(a), estimates_csv(c));
    EXPECT_EQ(weights_csv(a), weights_csv(c));
    EXPECT_EQ(convergence_csv(a), convergence_csv(c));
}

TEST(Experiment, WritesOutputs) {
    auto j = b1_convergence();
    j["mode"] = "all";
    j["n_grid"] = {300};
    j["subset"] = {{"N", 500}};
    const auto dir = scratch("outputs");
    write_outputs(run_experiment(parse_config(j)), dir);
    for (const char* f : {"densities.json", "estimates.csv", "weights.csv", "convergence.csv", "subset.csv", "report.json"}) {
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    }
    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    EXPECT_EQ(report["timings"].size(), 3u);
    const auto dens = nlohmann::json::parse(slurp(dir / "densities.json"));
    EXPECT_EQ(dens["densities"].size(), 3u);
}

TEST(Cli, RunIsByteIdenticalOnRerun) {
    const auto dir = scratch("cli");
    auto j = b1_convergence();
    j["n_grid"] = {300, 600};
    j["output_dir"] = (dir / "a").string();
    std::ofstream(dir / "config.json") << j.dump(2);
    ASSERT_EQ(run_cli("run --config " + (dir / "config.json").string()), 0);
    ASSERT_EQ(run_cli("run --config " + (dir / "config.json").string() + " --output-dir " + (dir / "b").string() +
                      " --workers 3"),
              0);
    for (const char* f : {"estimates.csv", "weights.csv", "convergence.csv", "densities.json"}) {
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    }
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli-codes");
    std::ofstream(dir / "bad.json") << R"({"benchmark": "linear-gaussian", "n_grid": [10], "colour": 1})";
    EXPECT_EQ(run_cli("run --config " + (dir / "bad.json").string()), 2);
    EXPECT_EQ(run_cli("run --config " + (dir / "missing.json").string()), 2);
    std::ofstream(dir / "broken.json") << "{not json";
    EXPECT_EQ(run_cli("run --config " + (dir / "broken.json").string()), 2);
    EXPECT_EQ(run_cli("benchmarks list"), 0);
    EXPECT_EQ(run_cli("oracle --benchmark linear-gaussian --beta 2.5"), 0);
    EXPECT_EQ(run_cli("oracle --benchmark arrhenius-2d --resolution 50"), 1);
    EXPECT_EQ(run_cli("frobnicate"), 2);
}
