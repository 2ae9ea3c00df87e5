#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rarefuse/densities.hpp"
#include "rarefuse/models.hpp"

namespace rarefuse {

/// A desk-scale failure-probability problem with an independent oracle.
struct Benchmark {
    std::string name;
    Density nominal = UniformBox(Vector::Zero(1), Vector::Ones(1));
    Model high_fidelity;
    std::vector<Model> surrogates;
    LimitState limit_state;
    std::string oracle_hint;
    /// (resolution, workers) -> reference failure probability.
    std::function<double(int, unsigned)> oracle;
};

struct BenchmarkOptions {
    std::optional<std::size_t> dim;
    std::optional<double> beta;
    std::optional<double> threshold;
};

/// Phi(x) for the standard normal, via erfc for accurate tails.
[[nodiscard]] double standard_normal_cdf(double x);

/// "linear-gaussian": f(z) = sum(z) / sqrt(d), failure when f > beta.
[[nodiscard]] Benchmark linear_gaussian(std::size_t dim = 2, double beta = 3.5);

/// "arrhenius-2d": Arrhenius-type peak-temperature stand-in on
/// (A, E) in [5.5e11, 1.5e13] x [1.5e3, 9.5e3], uniform nominal.
[[nodiscard]] Benchmark arrhenius_2d(std::optional<double> threshold = std::nullopt);

[[nodiscard]] Benchmark make_benchmark(std::string_view name, const BenchmarkOptions& options = {});
[[nodiscard]] std::vector<std::string> benchmark_names();

/// Reference probability from the benchmark's registered oracle.
/// Quadrature oracles require resolution >= 101.
[[nodiscard]] double oracle_failure_probability(const Benchmark& benchmark, int resolution,
                                                unsigned workers = 0);

/// Tensor-grid midpoint rule for P(g(f(z)) < 0) under a uniform box nominal
/// (d = 2 only). Counts are integers, so the result is exact per grid.
[[nodiscard]] double midpoint_grid_probability(const Model& model, const LimitState& ls,
                                               const UniformBox& box, int resolution,
                                               unsigned workers = 0);

}  // namespace rarefuse
