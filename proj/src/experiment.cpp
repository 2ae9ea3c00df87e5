#include "rarefuse/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "rarefuse/errors.hpp"
#include "rarefuse/numeric.hpp"

namespace rarefuse {

namespace {

// Stream namespaces; every random draw in a campaign is addressed by
// (seed, phase, ...).
enum StreamPhase : std::uint64_t {
    kBuildSurrogate = 1,
    kBuildReference = 2,
    kFusedComponent = 3,
    kReferenceEstimate = 4,
    kMonteCarloBaseline = 5,
    kSingleDensity = 6,
    kSubset = 7,
};

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

const std::set<std::string> kConfigKeys = {"benchmark", "benchmark_options", "mode", "m",
                                           "n_grid", "split", "seed", "repetitions",
                                           "output_dir", "threshold_relax", "subset", "workers",
                                           "reference", "mc_baseline"};

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T get_as(const nlohmann::json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad value for '" + key + "': " + e.what());
    }
}

std::size_t get_count(const nlohmann::json& j, const std::string& key) {
    if (!j.at(key).is_number_unsigned() && !(j.at(key).is_number_integer() && j.at(key).get<long long>() >= 0)) {
        throw ConfigError("'" + key + "' must be a nonnegative integer");
    }
    return j.at(key).get<std::size_t>();
}

Mode parse_mode(const std::string& s) {
    if (s == "build_densities") return Mode::BuildDensities;
    if (s == "convergence") return Mode::Convergence;
    if (s == "fuse") return Mode::Fuse;
    if (s == "subset") return Mode::Subset;
    if (s == "all") return Mode::All;
    throw ConfigError("unknown mode '" + s + "'");
}

bool needs_densities(Mode m) { return m != Mode::Subset; }
bool needs_grid(Mode m) { return m == Mode::Convergence || m == Mode::Fuse || m == Mode::All; }
bool runs_convergence(Mode m) { return m == Mode::Convergence || m == Mode::All; }
bool runs_subset(Mode m) { return m == Mode::Subset || m == Mode::All; }

// Shares evaluation counters between copies of a wrapped model.
Model counted(const Model& model, std::shared_ptr<std::atomic<std::size_t>> counter) {
    Model out = model;
    out.evaluate = [inner = model.evaluate, counter = std::move(counter)](const Vector& z) {
        counter->fetch_add(1, std::memory_order_relaxed);
        return inner(z);
    };
    return out;
}

class PhaseClock {
public:
    PhaseClock(std::string name, const std::atomic<std::size_t>& hf, const std::atomic<std::size_t>& lo)
        : name_(std::move(name)), hf_(hf), lo_(lo), hf_start_(hf.load()), lo_start_(lo.load()),
          start_(std::chrono::steady_clock::now()) {}

    [[nodiscard]] PhaseTiming stop() const {
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
        return {name_, elapsed.count(), hf_.load() - hf_start_, lo_.load() - lo_start_};
    }

private:
    std::string name_;
    const std::atomic<std::size_t>& hf_;
    const std::atomic<std::size_t>& lo_;
    std::size_t hf_start_;
    std::size_t lo_start_;
    std::chrono::steady_clock::time_point start_;
};

EstimatorResult fused_as_result(const FusedResult& fused, std::size_t n_total) {
    EstimatorResult r;
    r.estimate = fused.estimate;
    r.n = n_total;
    // Chosen so estimator_variance() equals the fused variance.
    r.sample_variance = fused.variance * static_cast<double>(n_total);
    for (const auto& in : fused.inputs) r.hits += in.hits;
    r.density_id = "fused";
    r.kind = EstimatorKind::ImportanceSampling;
    return r;
}

std::string csv_bool(bool b) { return b ? "true" : "false"; }

}  // namespace

const char* to_string(Mode mode) {
    switch (mode) {
        case Mode::BuildDensities: return "build_densities";
        case Mode::Convergence: return "convergence";
        case Mode::Fuse: return "fuse";
        case Mode::Subset: return "subset";
        case Mode::All: return "all";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Config

ExperimentConfig parse_config(const nlohmann::json& j) {
    reject_unknown(j, kConfigKeys, "config");
    ExperimentConfig c;
    if (!j.contains("benchmark")) throw ConfigError("missing required key 'benchmark'");
    c.benchmark = get_as<std::string>(j, "benchmark");

    if (j.contains("benchmark_options")) {
        const auto& o = j.at("benchmark_options");
        reject_unknown(o, {"beta", "dim", "threshold"}, "benchmark_options");
        if (o.contains("beta")) c.benchmark_options.beta = get_as<double>(o, "beta");
        if (o.contains("dim")) c.benchmark_options.dim = get_count(o, "dim");
        if (o.contains("threshold")) c.benchmark_options.threshold = get_as<double>(o, "threshold");
    }
    try {
        (void)make_benchmark(c.benchmark, c.benchmark_options);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }

    if (j.contains("mode")) c.mode = parse_mode(get_as<std::string>(j, "mode"));
    if (j.contains("m")) c.m = get_count(j, "m");
    if (j.contains("n_grid")) {
        if (!j.at("n_grid").is_array()) throw ConfigError("'n_grid' must be an array");
        for (const auto& v : j.at("n_grid")) {
            if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError("'n_grid' entries must be positive integers");
            c.n_grid.push_back(v.get<std::size_t>());
        }
        if (!std::is_sorted(c.n_grid.begin(), c.n_grid.end()) ||
            std::adjacent_find(c.n_grid.begin(), c.n_grid.end()) != c.n_grid.end()) {
            throw ConfigError("'n_grid' must be strictly ascending");
        }
    }
    if (needs_grid(c.mode) && c.n_grid.empty()) throw ConfigError("'n_grid' must be nonempty for this mode");
    if (j.contains("split")) {
        const auto& s = j.at("split");
        if (s.is_string()) {
            if (s.get<std::string>() != "equal") throw ConfigError("'split' must be \"equal\" or an array of fractions");
        } else if (s.is_array()) {
            for (const auto& v : s) {
                if (!v.is_number() || !(v.get<double>() > 0.0)) throw ConfigError("'split' fractions must be positive");
                c.split.push_back(v.get<double>());
            }
        } else {
            throw ConfigError("'split' must be \"equal\" or an array of fractions");
        }
    }
    if (j.contains("seed")) c.seed = get_count(j, "seed");
    if (j.contains("repetitions")) c.repetitions = get_count(j, "repetitions");
    if (c.repetitions < 1) throw ConfigError("'repetitions' must be >= 1");
    if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j, "output_dir");
    if (j.contains("threshold_relax") && !j.at("threshold_relax").is_null()) {
        c.threshold_relax = get_as<double>(j, "threshold_relax");
        if (!(*c.threshold_relax >= 0.0)) throw ConfigError("'threshold_relax' must be >= 0");
    }
    if (j.contains("subset")) {
        const auto& s = j.at("subset");
        reject_unknown(s, {"N", "p0", "max_levels"}, "subset");
        if (s.contains("N")) c.subset.N = get_count(s, "N");
        if (s.contains("p0")) c.subset.p0 = get_as<double>(s, "p0");
        if (s.contains("max_levels")) c.subset.max_levels = get_count(s, "max_levels");
    }
    if (runs_subset(c.mode)) {
        if (c.subset.N < 100) throw ConfigError("'subset.N' must be >= 100");
        if (!(c.subset.p0 > 0.0 && c.subset.p0 < 1.0)) throw ConfigError("'subset.p0' must lie in (0, 1)");
        if (c.subset.max_levels < 1) throw ConfigError("'subset.max_levels' must be >= 1");
    }
    if (j.contains("workers")) c.workers = static_cast<unsigned>(get_count(j, "workers"));
    if (j.contains("reference")) c.reference = get_as<bool>(j, "reference");
    if (j.contains("mc_baseline")) c.mc_baseline = get_as<bool>(j, "mc_baseline");
    if (needs_densities(c.mode) && c.m < 1) throw ConfigError("'m' must be >= 1");
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(j);
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json options = nlohmann::json::object();
    if (c.benchmark_options.beta) options["beta"] = *c.benchmark_options.beta;
    if (c.benchmark_options.dim) options["dim"] = *c.benchmark_options.dim;
    if (c.benchmark_options.threshold) options["threshold"] = *c.benchmark_options.threshold;
    nlohmann::json j = {{"benchmark", c.benchmark},
                        {"benchmark_options", options},
                        {"mode", to_string(c.mode)},
                        {"m", c.m},
                        {"n_grid", c.n_grid},
                        {"seed", c.seed},
                        {"repetitions", c.repetitions},
                        {"output_dir", c.output_dir},
                        {"subset", {{"N", c.subset.N}, {"p0", c.subset.p0}, {"max_levels", c.subset.max_levels}}},
                        {"workers", c.workers},
                        {"reference", c.reference},
                        {"mc_baseline", c.mc_baseline}};
    if (c.split.empty()) {
        j["split"] = "equal";
    } else {
        j["split"] = c.split;
    }
    j["threshold_relax"] = c.threshold_relax ? nlohmann::json(*c.threshold_relax) : nlohmann::json(nullptr);
    return j;
}

std::string config_hash(const ExperimentConfig& config) {
    auto j = to_json(config);
    j.erase("output_dir");
    j.erase("workers");
    const std::string canonical = j.dump();
    std::uint64_t h = kFnvOffset;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= kFnvPrime;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::size_t> split_budget(std::size_t n, std::size_t k, std::span<const double> fractions) {
    if (k == 0) throw InvalidArgument("split_budget: k must be >= 1");
    std::vector<std::size_t> out(k, 0);
    if (fractions.empty()) {
        for (std::size_t i = 0; i < k; ++i) out[i] = n / k + (i < n % k ? 1 : 0);
        return out;
    }
    if (fractions.size() != k) throw InvalidArgument("split_budget: need one fraction per density");
    double total = 0.0;
    for (double f : fractions) total += f;
    std::size_t used = 0;
    for (std::size_t i = 0; i < k; ++i) {
        out[i] = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions[i] / total));
        used += out[i];
    }
    for (std::size_t i = 0; used < n; i = (i + 1) % k, ++used) ++out[i];
    return out;
}

// ---------------------------------------------------------------------------
// Runner

CampaignReport run_experiment(const ExperimentConfig& config) {
    return run_experiment(config, make_benchmark(config.benchmark, config.benchmark_options));
}

CampaignReport run_experiment(const ExperimentConfig& config, const Benchmark& benchmark_in) {
    CampaignReport report;
    report.config = config;
    report.config_hash = config_hash(config);
    report.benchmark_name = benchmark_in.name;

    auto hf_count = std::make_shared<std::atomic<std::size_t>>(0);
    auto lo_count = std::make_shared<std::atomic<std::size_t>>(0);
    const Model hf = counted(benchmark_in.high_fidelity, hf_count);
    std::vector<Model> surrogates;
    for (const auto& s : benchmark_in.surrogates) surrogates.push_back(counted(s, lo_count));
    const auto& ls = benchmark_in.limit_state;
    const auto& nominal = benchmark_in.nominal;
    const std::size_t k = surrogates.size();
    const RandomStream root(config.seed);

    BiasingOptions build_options;
    build_options.threshold_relax = config.threshold_relax;
    build_options.sampling.workers = config.workers;

    // Phase 1: one biasing density per surrogate (+ high-fidelity reference).
    if (needs_densities(config.mode)) {
        if (k == 0) throw InvalidArgument("benchmark has no surrogate models");
        if (!config.split.empty() && config.split.size() != k) {
            throw ConfigError("'split' needs " + std::to_string(k) + " fractions");
        }
        PhaseClock clock("build_densities", *hf_count, *lo_count);
        for (std::size_t i = 0; i < k; ++i) {
            report.densities.push_back(build_biasing_density(surrogates[i], ls, nominal, config.m,
                                                             root.child(kBuildSurrogate).child(i), build_options));
            report.density_ids.push_back("q" + std::to_string(i + 1) + ":" + surrogates[i].name);
        }
        if (config.reference && config.mode != Mode::Fuse) {
            report.reference_density = build_biasing_density(hf, ls, nominal, config.m,
                                                             root.child(kBuildReference), build_options);
        }
        report.timings.push_back(clock.stop());
    }

    // Phase 2: per-density IS estimates, fused, over n_grid x repetitions.
    if (runs_convergence(config.mode) || config.mode == Mode::Fuse) {
        const bool comparison = config.mode == Mode::Fuse;
        PhaseClock clock(comparison ? "fuse" : "convergence", *hf_count, *lo_count);
        const std::size_t tasks = config.n_grid.size() * config.repetitions;

        struct TaskOutput {
            std::vector<EstimateRow> estimates;
            std::optional<WeightRow> weights;
            std::vector<ComparisonRow> comparisons;
        };
        std::vector<TaskOutput> outputs(tasks);
        SamplingOptions inner;  // parallelism is across tasks
        inner.workers = 1;

        parallel_for(tasks, config.workers, [&](std::size_t t) {
            const std::size_t g = t / config.repetitions;
            const std::size_t rep = t % config.repetitions;
            const std::size_t n = config.n_grid[g];
            auto& out = outputs[t];
            const auto budget = split_budget(n, k, config.split);
            if (*std::min_element(budget.begin(), budget.end()) < 2) {
                for (std::size_t i = 0; i < k; ++i) {
                    EstimatorResult r;
                    r.n = budget[i];
                    r.density_id = report.density_ids[i];
                    r.kind = EstimatorKind::ImportanceSampling;
                    out.estimates.push_back({rep, n, "insufficient", r});
                }
                EstimatorResult fused;
                fused.n = n;
                fused.density_id = "fused";
                fused.kind = EstimatorKind::ImportanceSampling;
                out.estimates.push_back({rep, n, "insufficient", fused});
                return;
            }
            std::vector<EstimatorResult> parts;
            for (std::size_t i = 0; i < k; ++i) {
                parts.push_back(importance_sampling_estimate(
                    hf, ls, nominal, report.densities[i].density, budget[i],
                    root.child(kFusedComponent).child(rep).child(g).child(i), inner, report.density_ids[i]));
                out.estimates.push_back({rep, n, "ok", parts.back()});
            }
            const FusedResult fused = fuse(parts, true);
            out.estimates.push_back({rep, n, fused.no_information ? "no_information" : "ok", fused_as_result(fused, n)});
            out.weights = WeightRow{rep, n, fused.weights, fused.estimate, fused.variance, fused.no_information};

            if (comparison) {
                std::vector<double> component_variances;
                for (const auto& p : parts) component_variances.push_back(p.sample_variance);
                const bool usable = std::all_of(component_variances.begin(), component_variances.end(),
                                                [](double v) { return v > 0.0; });
                for (std::size_t i = 0; i < k; ++i) {
                    auto single = importance_sampling_estimate(
                        hf, ls, nominal, report.densities[i].density, n,
                        root.child(kSingleDensity).child(rep).child(g).child(i), inner,
                        report.density_ids[i] + "@n");
                    out.estimates.push_back({rep, n, "ok", single});
                    ComparisonRow row;
                    row.repetition = rep;
                    row.n_total = n;
                    row.candidate = report.density_ids[i];
                    row.candidate_sample_variance = single.sample_variance;
                    row.dominance = usable && single.sample_variance > 0.0 &&
                                    dominance_criterion(component_variances, single.sample_variance);
                    row.fused_variance = fused.variance;
                    row.candidate_variance = single.estimator_variance();
                    out.comparisons.push_back(row);
                }
            } else {
                if (report.reference_density) {
                    out.estimates.push_back({rep, n, "ok",
                                             importance_sampling_estimate(
                                                 hf, ls, nominal, report.reference_density->density, n,
                                                 root.child(kReferenceEstimate).child(rep).child(g), inner,
                                                 "reference")});
                }
                if (config.mc_baseline) {
                    out.estimates.push_back({rep, n, "ok",
                                             monte_carlo_estimate(hf, ls, nominal, n,
                                                                  root.child(kMonteCarloBaseline).child(rep).child(g),
                                                                  inner, "mc")});
                }
            }
        });

        for (auto& out : outputs) {
            for (auto& e : out.estimates) report.estimates.push_back(std::move(e));
            if (out.weights) report.weights.push_back(std::move(*out.weights));
            for (auto& c : out.comparisons) report.comparisons.push_back(std::move(c));
        }
        for (std::size_t n : config.n_grid) {
            const auto budget = split_budget(n, k, config.split);
            std::size_t total = 0;
            for (auto b : budget) total += b;
            if (comparison) total += k * n;
            if (!comparison && report.reference_density) total += n;
            if (!comparison && config.mc_baseline) total += n;
            report.budget_per_repetition.emplace_back(n, total);
        }

        // Averages over repetitions per (n, estimator).
        for (std::size_t n : config.n_grid) {
            std::vector<std::string> ids;
            for (const auto& e : report.estimates) {
                if (e.n_total == n && std::find(ids.begin(), ids.end(), e.result.density_id) == ids.end()) {
                    ids.push_back(e.result.density_id);
                }
            }
            for (const auto& id : ids) {
                ConvergenceRow row;
                row.n = n;
                row.estimator_id = id;
                CompensatedSum est, err, rel;
                std::size_t count = 0;
                bool insufficient = false;
                for (const auto& e : report.estimates) {
                    if (e.n_total != n || e.result.density_id != id) continue;
                    if (e.status == "insufficient") {
                        insufficient = true;
                        continue;
                    }
                    ++count;
                    est.add(e.result.estimate);
                    err.add(rmse(e.result));
                    if (e.result.estimate > 0.0) {
                        rel.add(cv(e.result));
                        ++row.repetitions;
                    }
                }
                if (insufficient) {
                    row.status = "insufficient";
                    row.estimate = row.rmse = row.cv = std::nan("");
                } else {
                    row.estimate = est.value() / static_cast<double>(count);
                    row.rmse = err.value() / static_cast<double>(count);
                    row.cv = row.repetitions > 0 ? rel.value() / static_cast<double>(row.repetitions) : std::nan("");
                    row.status = row.repetitions > 0 ? "ok" : "undefined_cv";
                }
                report.convergence.push_back(row);
            }
        }
        report.timings.push_back(clock.stop());
    }

    // Phase 3: subset simulation baseline on the high-fidelity model.
    if (runs_subset(config.mode)) {
        PhaseClock clock("subset", *hf_count, *lo_count);
        SubsetOptions options;
        options.samples_per_level = config.subset.N;
        options.p0 = config.subset.p0;
        options.max_levels = config.subset.max_levels;
        options.workers = config.workers;
        for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
            report.subset.push_back({rep, subset_simulation(hf, ls, nominal, options, root.child(kSubset).child(rep))});
        }
        report.timings.push_back(clock.stop());
    }
    return report;
}

std::vector<ConvergenceRow> convergence_study(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    c.mode = Mode::Convergence;
    return run_experiment(c).convergence;
}

// ---------------------------------------------------------------------------
// Outputs

std::string estimates_csv(const CampaignReport& report) {
    std::ostringstream os;
    os << "config_hash,seed,repetition,n_total,status," << estimator_csv_header() << "\n";
    for (const auto& e : report.estimates) {
        os << report.config_hash << "," << report.config.seed << "," << e.repetition << "," << e.n_total << ","
           << e.status << ",";
        if (e.status == "insufficient") {
            os << e.result.density_id << "," << to_string(e.result.kind) << "," << e.result.n
               << ",nan,nan,0,nan,nan\n";
        } else {
            os << estimator_csv_row(e.result) << "\n";
        }
    }
    return os.str();
}

std::string weights_csv(const CampaignReport& report) {
    std::ostringstream os;
    os << "config_hash,seed,repetition,n";
    for (std::size_t i = 0; i < report.density_ids.size(); ++i) os << ",alpha_" << (i + 1);
    os << ",weight_sum,fused_estimate,fused_variance,no_information\n";
    for (const auto& w : report.weights) {
        os << report.config_hash << "," << report.config.seed << "," << w.repetition << "," << w.n_total;
        for (Eigen::Index i = 0; i < w.weights.size(); ++i) os << "," << format_double(w.weights[i]);
        os << "," << format_double(w.weights.sum()) << "," << format_double(w.estimate) << ","
           << format_double(w.variance) << "," << csv_bool(w.no_information) << "\n";
    }
    return os.str();
}

std::string convergence_csv(const CampaignReport& report) {
    std::ostringstream os;
    os << "n,estimator_id,estimate,rmse,cv,repetitions,status\n";
    for (const auto& r : report.convergence) {
        os << r.n << "," << r.estimator_id << "," << format_double(r.estimate) << "," << format_double(r.rmse)
           << "," << format_double(r.cv) << "," << r.repetitions << "," << r.status << "\n";
    }
    return os.str();
}

std::string subset_csv(const CampaignReport& report) {
    std::ostringstream os;
    os << subset_csv_header() << ",repetition,seed,converged,config_hash\n";
    for (const auto& s : report.subset) {
        os << subset_csv_row(s.result) << "," << s.repetition << "," << report.config.seed << ","
           << csv_bool(s.result.converged) << "," << report.config_hash << "\n";
    }
    return os.str();
}

nlohmann::json densities_json(const CampaignReport& report) {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = 0; i < report.densities.size(); ++i) {
        auto j = to_json(report.densities[i]);
        j["id"] = report.density_ids[i];
        list.push_back(j);
    }
    nlohmann::json out = {{"benchmark", report.benchmark_name}, {"config_hash", report.config_hash}, {"densities", list}};
    if (report.reference_density) {
        auto j = to_json(*report.reference_density);
        j["id"] = "reference";
        out["reference"] = j;
    }
    return out;
}

nlohmann::json report_json(const CampaignReport& report) {
    nlohmann::json timings = nlohmann::json::array();
    for (const auto& t : report.timings) {
        timings.push_back({{"phase", t.phase},
                           {"seconds", t.seconds},
                           {"high_fidelity_evaluations", t.high_fidelity_evaluations},
                           {"surrogate_evaluations", t.surrogate_evaluations}});
    }
    nlohmann::json builds = nlohmann::json::array();
    for (std::size_t i = 0; i < report.densities.size(); ++i) {
        const auto& d = report.densities[i];
        builds.push_back({{"id", report.density_ids[i]},
                          {"samples_drawn", d.samples_drawn},
                          {"failures_found", d.failures_found},
                          {"fell_back_to_nominal", d.fell_back_to_nominal},
                          {"threshold_used", d.threshold_used}});
    }
    nlohmann::json budget = nlohmann::json::array();
    for (const auto& [n, total] : report.budget_per_repetition) {
        budget.push_back({{"n", n}, {"high_fidelity_samples_per_repetition", total}});
    }
    nlohmann::json comparisons = nlohmann::json::array();
    for (const auto& c : report.comparisons) {
        comparisons.push_back({{"repetition", c.repetition},
                               {"n", c.n_total},
                               {"candidate", c.candidate},
                               {"candidate_sample_variance", c.candidate_sample_variance},
                               {"dominance_criterion", c.dominance},
                               {"fused_variance", c.fused_variance},
                               {"candidate_variance", c.candidate_variance}});
    }
    nlohmann::json subset = nlohmann::json::array();
    for (const auto& s : report.subset) {
        auto j = to_json(s.result);
        j["repetition"] = s.repetition;
        subset.push_back(j);
    }
    nlohmann::json out = {{"config", to_json(report.config)},
                          {"config_hash", report.config_hash},
                          {"benchmark", report.benchmark_name},
                          {"density_builds", builds},
                          {"budget", budget},
                          {"comparisons", comparisons},
                          {"subset", subset},
                          {"timings", timings}};
    if (report.reference_density) {
        out["reference_build"] = {{"samples_drawn", report.reference_density->samples_drawn},
                                  {"failures_found", report.reference_density->failures_found},
                                  {"fell_back_to_nominal", report.reference_density->fell_back_to_nominal}};
    }
    return out;
}

void write_outputs(const CampaignReport& report, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    auto write = [&directory](const std::string& name, const std::string& content) {
        std::ofstream out(directory / name, std::ios::binary);
        if (!out) throw Error("cannot write '" + (directory / name).string() + "'");
        out << content;
    };
    const Mode mode = report.config.mode;
    if (needs_densities(mode)) write("densities.json", densities_json(report).dump(2) + "\n");
    if (needs_grid(mode)) {
        write("estimates.csv", estimates_csv(report));
        write("weights.csv", weights_csv(report));
        write("convergence.csv", convergence_csv(report));
    }
    if (runs_subset(mode)) write("subset.csv", subset_csv(report));
    write("report.json", report_json(report).dump(2) + "\n");
}

}  // namespace rarefuse
