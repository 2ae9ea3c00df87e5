#include "rarefuse/benchmarks.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include "rarefuse/arrhenius_constants.hpp"
#include "rarefuse/errors.hpp"
#include "rarefuse/numeric.hpp"

namespace rarefuse {

namespace {

Vector scalar(double y) {
    Vector out(1);
    out[0] = y;
    return out;
}

Model scalar_model(std::string name, std::size_t dim, std::function<double(const Vector&)> f,
                   std::string cost_tag) {
    return Model{std::move(name), dim, 1,
                 [f = std::move(f)](const Vector& z) { return scalar(f(z)); },
                 std::move(cost_tag)};
}

double arrhenius_log_term(double pre_exponential, double activation) {
    using namespace arrhenius;
    return std::log1p(pre_exponential * std::exp(-activation / (kGasConstant * kAmbientTemperature)));
}

double arrhenius_temperature(double pre_exponential, double activation) {
    using namespace arrhenius;
    return kBaseTemperature +
           kTemperatureScale * (arrhenius_log_term(pre_exponential, activation) - kLogReference);
}

}  // namespace

double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

Benchmark linear_gaussian(std::size_t dim, double beta) {
    if (dim == 0) throw InvalidArgument("linear-gaussian: dim must be >= 1");
    if (!std::isfinite(beta)) throw InvalidArgument("linear-gaussian: beta must be finite");
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(dim));
    auto normalized_sum = [inv_sqrt_d](const Vector& z) { return z.sum() * inv_sqrt_d; };

    Benchmark b;
    b.name = "linear-gaussian";
    b.nominal = GaussianMixture::standard_normal(dim);
    b.high_fidelity = scalar_model("high-fidelity", dim, normalized_sum, "high");
    b.surrogates = {
        scalar_model("biased", dim, [normalized_sum](const Vector& z) { return normalized_sum(z) + 0.2; }, "low"),
        scalar_model("scaled", dim, [normalized_sum](const Vector& z) { return 0.9 * normalized_sum(z); }, "low"),
        scalar_model("constant", dim, [](const Vector&) { return 0.0; }, "low"),
    };
    b.limit_state = LimitState{[beta](const Vector& y) { return beta - y[0]; }};
    b.oracle_hint = "closed form Phi(-beta) via erfc";
    b.oracle = [beta](int, unsigned) { return standard_normal_cdf(-beta); };
    return b;
}

Benchmark arrhenius_2d(std::optional<double> threshold) {
    using namespace arrhenius;
    const double tau = threshold.value_or(kThreshold);
    if (!std::isfinite(tau)) throw InvalidArgument("arrhenius-2d: threshold must be finite");

    Vector lower(2), upper(2);
    lower << kPreExponentialMin, kActivationMin;
    upper << kPreExponentialMax, kActivationMax;

    const double mid_a = 0.5 * (kPreExponentialMin + kPreExponentialMax);
    const double mid_e = 0.5 * (kActivationMin + kActivationMax);
    const double rt = kGasConstant * kAmbientTemperature;
    const double x_mid = mid_a * std::exp(-mid_e / rt);
    const double f_mid = arrhenius_temperature(mid_a, mid_e);
    const double df_da = kTemperatureScale * std::exp(-mid_e / rt) / (1.0 + x_mid);
    const double df_de = -kTemperatureScale * x_mid / ((1.0 + x_mid) * rt);

    Benchmark b;
    b.name = "arrhenius-2d";
    b.nominal = UniformBox(lower, upper);
    b.high_fidelity = scalar_model(
        "high-fidelity", 2, [](const Vector& z) { return arrhenius_temperature(z[0], z[1]); }, "high");
    b.surrogates = {
        scalar_model("taylor", 2,
                     [=](const Vector& z) { return f_mid + df_da * (z[0] - mid_a) + df_de * (z[1] - mid_e); },
                     "low"),
        scalar_model("activation-shift", 2,
                     [](const Vector& z) { return arrhenius_temperature(z[0], 1.05 * z[1]); }, "low"),
        scalar_model("constant", 2, [](const Vector&) { return kBaseTemperature; }, "low"),
    };
    b.limit_state = LimitState{[tau](const Vector& y) { return tau - y[0]; }};
    b.oracle_hint = "tensor-grid midpoint quadrature of the failure indicator over D";
    b.oracle = [hf = b.high_fidelity, ls = b.limit_state, box = std::get<UniformBox>(b.nominal)](
                   int resolution, unsigned workers) {
        return midpoint_grid_probability(hf, ls, box, resolution, workers);
    };
    return b;
}

Benchmark make_benchmark(std::string_view name, const BenchmarkOptions& options) {
    if (name == "linear-gaussian") {
        if (options.threshold) throw InvalidArgument("linear-gaussian: use beta, not threshold");
        return linear_gaussian(options.dim.value_or(2), options.beta.value_or(3.5));
    }
    if (name == "arrhenius-2d") {
        if (options.beta || (options.dim && *options.dim != 2)) {
            throw InvalidArgument("arrhenius-2d: only 'threshold' may be overridden");
        }
        return arrhenius_2d(options.threshold);
    }
    throw InvalidArgument("unknown benchmark '" + std::string(name) + "'");
}

std::vector<std::string> benchmark_names() { return {"linear-gaussian", "arrhenius-2d"}; }

double oracle_failure_probability(const Benchmark& benchmark, int resolution, unsigned workers) {
    if (!benchmark.oracle) throw InvalidArgument("benchmark '" + benchmark.name + "' has no oracle");
    return benchmark.oracle(resolution, workers);
}

double midpoint_grid_probability(const Model& model, const LimitState& ls, const UniformBox& box,
                                 int resolution, unsigned workers) {
    if (resolution < 101) throw InvalidArgument("quadrature oracle needs resolution >= 101");
    if (box.dim() != 2) throw InvalidArgument("midpoint grid oracle supports d = 2 only");
    const auto res = static_cast<std::size_t>(resolution);
    const Vector width = box.upper() - box.lower();
    std::vector<std::size_t> row_hits(res, 0);
    parallel_for(res, workers, [&](std::size_t i) {
        Vector z(2);
        z[0] = box.lower()[0] + width[0] * (static_cast<double>(i) + 0.5) / static_cast<double>(res);
        std::size_t hits = 0;
        for (std::size_t j = 0; j < res; ++j) {
            z[1] = box.lower()[1] + width[1] * (static_cast<double>(j) + 0.5) / static_cast<double>(res);
            if (indicator(model, ls, z)) ++hits;
        }
        row_hits[i] = hits;
    });
    std::size_t total = 0;
    for (auto h : row_hits) total += h;
    return static_cast<double>(total) / (static_cast<double>(res) * static_cast<double>(res));
}

}  // namespace rarefuse
