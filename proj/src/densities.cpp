#include "rarefuse/densities.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rarefuse/errors.hpp"
#include "rarefuse/numeric.hpp"

namespace rarefuse {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2 pi)
constexpr double kWeightSumTolerance = 1e-12;

void check_dim(std::size_t expected, const Vector& z) {
    if (static_cast<std::size_t>(z.size()) != expected) {
        throw DimensionMismatch(expected, static_cast<std::size_t>(z.size()));
    }
}

double uniform01(Generator& gen) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen);
}

Vector json_to_vector(const nlohmann::json& j) {
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json vector_to_json(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

// ---------------------------------------------------------------------------
// UniformBox

UniformBox::UniformBox(Vector lower, Vector upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() == 0 || lower_.size() != upper_.size()) {
        throw InvalidArgument("UniformBox: bounds must be nonempty and of equal length");
    }
    log_volume_ = 0.0;
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
        if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i])) {
            throw InvalidArgument("UniformBox: need finite lower[i] < upper[i]");
        }
        log_volume_ += std::log(upper_[i] - lower_[i]);
    }
    volume_ = (upper_ - lower_).prod();
}

bool UniformBox::contains(const Vector& z) const {
    check_dim(dim(), z);
    return ((z.array() >= lower_.array()) && (z.array() <= upper_.array())).all();
}

double UniformBox::log_pdf(const Vector& z) const {
    return contains(z) ? -log_volume_ : -std::numeric_limits<double>::infinity();
}

Vector UniformBox::sample(Generator& gen) const {
    Vector z(lower_.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z[i] = lower_[i] + (upper_[i] - lower_[i]) * uniform01(gen);
    }
    return z;
}

// ---------------------------------------------------------------------------
// GaussianMixture

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw InvalidArgument("GaussianMixture: no components");
    dim_ = static_cast<std::size_t>(components_.front().mean.size());
    if (dim_ == 0) throw InvalidArgument("GaussianMixture: zero dimension");

    double total = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight > 0.0)) throw InvalidArgument("GaussianMixture: weights must be positive");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > kWeightSumTolerance) {
        throw InvalidArgument("GaussianMixture: weights must sum to 1");
    }

    factors_.reserve(components_.size());
    double running = 0.0;
    for (const auto& c : components_) {
        const auto d = static_cast<Eigen::Index>(dim_);
        if (c.mean.size() != d || c.covariance.rows() != d || c.covariance.cols() != d) {
            throw DimensionMismatch(dim_, static_cast<std::size_t>(c.mean.size()));
        }
        if (!c.mean.allFinite() || !c.covariance.allFinite()) {
            throw InvalidArgument("GaussianMixture: non-finite parameters");
        }
        const double scale = std::max(1.0, c.covariance.cwiseAbs().maxCoeff());
        if ((c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw InvalidArgument("GaussianMixture: covariance not symmetric");
        }
        Eigen::LLT<Matrix> llt(c.covariance);
        if (llt.info() != Eigen::Success) {
            throw InvalidArgument("GaussianMixture: covariance not positive definite");
        }
        Matrix lower = llt.matrixL();
        if ((lower.diagonal().array() <= 0.0).any()) {
            throw InvalidArgument("GaussianMixture: covariance not positive definite");
        }
        const double log_det = 2.0 * lower.diagonal().array().log().sum();
        factors_.push_back({std::move(lower), -0.5 * (static_cast<double>(dim_) * kLogTwoPi + log_det)});
        running += c.weight;
        cumulative_weights_.push_back(running);
    }
    cumulative_weights_.back() = 1.0;
}

GaussianMixture GaussianMixture::single(Vector mean, Matrix covariance) {
    return GaussianMixture({GaussianComponent{1.0, std::move(mean), std::move(covariance)}});
}

GaussianMixture GaussianMixture::standard_normal(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return single(Vector::Zero(d), Matrix::Identity(d, d));
}

double GaussianMixture::log_pdf(const Vector& z) const {
    check_dim(dim_, z);
    std::vector<double> terms(components_.size());
    for (std::size_t i = 0; i < components_.size(); ++i) {
        const Vector centered = z - components_[i].mean;
        const Vector white = factors_[i].lower.triangularView<Eigen::Lower>().solve(centered);
        terms[i] = std::log(components_[i].weight) + factors_[i].log_normalizer -
                   0.5 * white.squaredNorm();
    }
    const double peak = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(peak)) return peak;
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - peak);
    return peak + std::log(acc);
}

Vector GaussianMixture::sample(Generator& gen) const {
    std::size_t pick = 0;
    if (components_.size() > 1) {
        const double u = uniform01(gen);
        pick = static_cast<std::size_t>(
            std::upper_bound(cumulative_weights_.begin(), cumulative_weights_.end(), u) -
            cumulative_weights_.begin());
        pick = std::min(pick, components_.size() - 1);
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector white(static_cast<Eigen::Index>(dim_));
    for (Eigen::Index i = 0; i < white.size(); ++i) white[i] = normal(gen);
    return components_[pick].mean + factors_[pick].lower * white;
}

// ---------------------------------------------------------------------------
// Density dispatch

std::size_t dimension(const Density& density) {
    return std::visit([](const auto& d) { return d.dim(); }, density);
}

double log_pdf(const Density& density, const Vector& z) {
    return std::visit([&z](const auto& d) { return d.log_pdf(z); }, density);
}

double pdf(const Density& density, const Vector& z) {
    return std::exp(log_pdf(density, z));
}

Vector sample_one(const Density& density, Generator& gen) {
    return std::visit([&gen](const auto& d) { return d.sample(gen); }, density);
}

std::vector<Vector> sample(const Density& density, Generator& gen, std::size_t count) {
    std::vector<Vector> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sample_one(density, gen));
    return out;
}

SampleMoments sample_moments(std::span<const Vector> samples) {
    if (samples.size() < 2) {
        throw InsufficientSamples("sample moments need at least 2 points, got " + std::to_string(samples.size()));
    }
    const auto d = samples.front().size();
    const auto n = samples.size();
    for (const auto& z : samples) check_dim(static_cast<std::size_t>(d), z);

    // Compensated sums keep the moments independent of how the failure set
    // was gathered.
    SampleMoments m{Vector(d), Matrix(d, d)};
    for (Eigen::Index i = 0; i < d; ++i) {
        CompensatedSum s;
        for (const auto& z : samples) s.add(z[i]);
        m.mean[i] = s.value() / static_cast<double>(n);
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            CompensatedSum s;
            for (const auto& z : samples) s.add((z[i] - m.mean[i]) * (z[j] - m.mean[j]));
            m.covariance(i, j) = m.covariance(j, i) = s.value() / static_cast<double>(n - 1);
        }
    }
    return m;
}

GaussianMixture fit_gaussian(std::span<const Vector> samples, double regularization) {
    if (!(regularization >= 0.0)) throw InvalidArgument("fit_gaussian: regularization must be >= 0");
    if (samples.empty()) throw InsufficientSamples("insufficient failure samples: got 0");
    const auto d = static_cast<std::size_t>(samples.front().size());
    if (samples.size() < min_fit_samples(d)) {
        throw InsufficientSamples("insufficient failure samples: got " + std::to_string(samples.size()) +
                                  ", need " + std::to_string(min_fit_samples(d)));
    }
    auto [mean, cov] = sample_moments(samples);
    const double trace = cov.trace();
    if (!(trace > 0.0)) {
        throw InsufficientSamples("insufficient failure samples: all points identical");
    }
    // per-axis inflation keeps the fit unit-free when coordinates differ in
    // scale by many orders of magnitude; a flat axis borrows the mean variance
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
        const double base = cov(i, i) > 0.0 ? cov(i, i) : trace / static_cast<double>(d);
        cov(i, i) += regularization * base;
    }
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw InsufficientSamples("insufficient failure samples: singular sample covariance");
    }
    return GaussianMixture::single(std::move(mean), std::move(cov));
}

bool has_unit_cube_transform(const Density& density) {
    if (std::holds_alternative<UniformBox>(density)) return true;
    return std::get<GaussianMixture>(density).components().size() == 1;
}

Vector from_unit_cube(const Density& density, const Vector& u) {
    check_dim(dimension(density), u);
    if (const auto* box = std::get_if<UniformBox>(&density)) {
        return box->lower().array() + (box->upper() - box->lower()).array() * u.array();
    }
    const auto& mixture = std::get<GaussianMixture>(density);
    if (mixture.components().size() != 1) {
        throw InvalidArgument("from_unit_cube: mixture must have a single component");
    }
    static const boost::math::normal_distribution<double> standard;
    constexpr double kEdge = 1e-300;
    Vector white(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        white[i] = boost::math::quantile(standard, std::clamp(u[i], kEdge, 1.0 - 1e-16));
    }
    return mixture.components().front().mean + mixture.cholesky(0) * white;
}

nlohmann::json to_json(const Density& density) {
    if (const auto* box = std::get_if<UniformBox>(&density)) {
        return {{"type", "uniform_box"},
                {"lower", vector_to_json(box->lower())},
                {"upper", vector_to_json(box->upper())}};
    }
    const auto& mixture = std::get<GaussianMixture>(density);
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : mixture.components()) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < c.covariance.rows(); ++r) rows.push_back(vector_to_json(c.covariance.row(r)));
        comps.push_back({{"weight", c.weight}, {"mean", vector_to_json(c.mean)}, {"covariance", rows}});
    }
    return {{"type", "gaussian_mixture"}, {"dim", mixture.dim()}, {"components", comps}};
}

Density density_from_json(const nlohmann::json& j) {
    try {
        const auto type = j.at("type").get<std::string>();
        if (type == "uniform_box") {
            return UniformBox(json_to_vector(j.at("lower")), json_to_vector(j.at("upper")));
        }
        if (type == "gaussian_mixture") {
            std::vector<GaussianComponent> comps;
            for (const auto& c : j.at("components")) {
                Vector mean = json_to_vector(c.at("mean"));
                const auto& rows = c.at("covariance");
                Matrix cov(static_cast<Eigen::Index>(rows.size()), mean.size());
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    Vector row = json_to_vector(rows[r]);
                    if (row.size() != mean.size()) throw InvalidArgument("density JSON: ragged covariance");
                    cov.row(static_cast<Eigen::Index>(r)) = row;
                }
                comps.push_back({c.at("weight").get<double>(), std::move(mean), std::move(cov)});
            }
            GaussianMixture mixture(std::move(comps));
            if (j.contains("dim") && j.at("dim").get<std::size_t>() != mixture.dim()) {
                throw DimensionMismatch(j.at("dim").get<std::size_t>(), mixture.dim());
            }
            return mixture;
        }
        throw InvalidArgument("density JSON: unknown type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("density JSON: ") + e.what());
    }
}

std::string describe(const Density& density) {
    std::ostringstream os;
    if (const auto* box = std::get_if<UniformBox>(&density)) {
        os << "uniform_box(d=" << box->dim() << ")";
    } else {
        const auto& m = std::get<GaussianMixture>(density);
        os << "gaussian_mixture(d=" << m.dim() << ", k=" << m.components().size() << ")";
    }
    return os.str();
}

}  // namespace rarefuse
