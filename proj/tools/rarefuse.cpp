// rarefuse command-line runner.
//
//   rarefuse run --config <file> [--workers N] [--output-dir DIR]
//   rarefuse benchmarks list
//   rarefuse oracle --benchmark <name> --resolution <r> [--beta B] [--dim D] [--threshold T]

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "rarefuse/benchmarks.hpp"
#include "rarefuse/errors.hpp"
#include "rarefuse/estimators.hpp"
#include "rarefuse/experiment.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitModel = 3;

int run_command(const std::string& config_path, std::optional<unsigned> workers,
                std::optional<std::string> output_dir) {
    auto config = rarefuse::load_config(config_path);
    if (workers) config.workers = *workers;
    if (output_dir) config.output_dir = *output_dir;
    const auto report = rarefuse::run_experiment(config);
    rarefuse::write_outputs(report, config.output_dir);
    std::cout << "config_hash " << report.config_hash << "\n";
    for (const auto& t : report.timings) {
        std::printf("phase %-16s %9.3f s  hf_evals %zu  surrogate_evals %zu\n", t.phase.c_str(), t.seconds,
                    t.high_fidelity_evaluations, t.surrogate_evaluations);
    }
    std::cout << "wrote outputs to " << config.output_dir << "\n";
    return 0;
}

int oracle_command(const std::string& name, int resolution, const rarefuse::BenchmarkOptions& options,
                   unsigned workers) {
    const auto benchmark = rarefuse::make_benchmark(name, options);
    const double p = rarefuse::oracle_failure_probability(benchmark, resolution, workers);
    std::cout << "benchmark " << benchmark.name << "\n";
    std::cout << "oracle " << benchmark.oracle_hint << "\n";
    std::cout << "resolution " << resolution << "\n";
    std::cout << "probability " << rarefuse::format_double(p) << "\n";
    const int coarse = (resolution + 1) / 2;
    if (coarse >= 101) {
        const double q = rarefuse::oracle_failure_probability(benchmark, coarse, workers);
        std::cout << "delta_vs_resolution_" << coarse << " " << rarefuse::format_double(p - q) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multifidelity importance sampling with estimator fusion"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
    std::string config_path;
    std::optional<unsigned> workers;
    std::optional<std::string> output_dir;
    run->add_option("--config", config_path, "Config file")->required();
    run->add_option("--workers", workers, "Worker threads (0 = hardware concurrency)");
    run->add_option("--output-dir", output_dir, "Override output_dir from the config");

    auto* benchmarks = app.add_subcommand("benchmarks", "Benchmark registry");
    benchmarks->require_subcommand(1);
    auto* list = benchmarks->add_subcommand("list", "List benchmark names");

    auto* oracle = app.add_subcommand("oracle", "Reference failure probability of a benchmark");
    std::string benchmark_name;
    int resolution = 2001;
    unsigned oracle_workers = 0;
    rarefuse::BenchmarkOptions options;
    oracle->add_option("--benchmark", benchmark_name, "Benchmark name")->required();
    oracle->add_option("--resolution", resolution, "Grid points per axis for quadrature oracles");
    oracle->add_option("--beta", options.beta, "linear-gaussian reliability index");
    oracle->add_option("--dim", options.dim, "linear-gaussian dimension");
    oracle->add_option("--threshold", options.threshold, "arrhenius-2d temperature threshold");
    oracle->add_option("--workers", oracle_workers, "Worker threads (0 = hardware concurrency)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) return run_command(config_path, workers, output_dir);
        if (*list) {
            for (const auto& name : rarefuse::benchmark_names()) {
                const auto b = rarefuse::make_benchmark(name);
                std::cout << name << "\t" << b.oracle_hint << "\n";
            }
            return 0;
        }
        if (*oracle) return oracle_command(benchmark_name, resolution, options, oracle_workers);
    } catch (const rarefuse::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const rarefuse::ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitModel;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
