#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rarefuse/rng.hpp"

namespace rarefuse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Uniform density on an axis-aligned box.
class UniformBox {
public:
    UniformBox(Vector lower, Vector upper);

    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(lower_.size()); }
    [[nodiscard]] const Vector& lower() const { return lower_; }
    [[nodiscard]] const Vector& upper() const { return upper_; }
    [[nodiscard]] double volume() const { return volume_; }
    [[nodiscard]] bool contains(const Vector& z) const;

    [[nodiscard]] double log_pdf(const Vector& z) const;
    [[nodiscard]] Vector sample(Generator& gen) const;

private:
    Vector lower_;
    Vector upper_;
    double volume_;
    double log_volume_;
};

struct GaussianComponent {
    double weight;
    Vector mean;
    Matrix covariance;
};

/// Finite Gaussian mixture with full-support components.
class GaussianMixture {
public:
    explicit GaussianMixture(std::vector<GaussianComponent> components);

    static GaussianMixture single(Vector mean, Matrix covariance);
    static GaussianMixture standard_normal(std::size_t dim);

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] const std::vector<GaussianComponent>& components() const { return components_; }

    /// Log-density via log-sum-exp over components.
    [[nodiscard]] double log_pdf(const Vector& z) const;
    /// Categorical component pick, then mean + L * N(0, I).
    [[nodiscard]] Vector sample(Generator& gen) const;

    /// Lower Cholesky factor of component i.
    [[nodiscard]] const Matrix& cholesky(std::size_t i) const { return factors_[i].lower; }

private:
    struct Factor {
        Matrix lower;
        double log_normalizer;  // -0.5 * (d log 2pi + log det)
    };

    std::size_t dim_;
    std::vector<GaussianComponent> components_;
    std::vector<Factor> factors_;
    std::vector<double> cumulative_weights_;
};

using Density = std::variant<UniformBox, GaussianMixture>;

[[nodiscard]] std::size_t dimension(const Density& density);

/// Exact density value. Throws DimensionMismatch.
[[nodiscard]] double pdf(const Density& density, const Vector& z);
/// -inf where pdf is zero.
[[nodiscard]] double log_pdf(const Density& density, const Vector& z);

[[nodiscard]] Vector sample_one(const Density& density, Generator& gen);
[[nodiscard]] std::vector<Vector> sample(const Density& density, Generator& gen, std::size_t count);

inline constexpr double kDefaultRegularization = 1e-10;

/// Minimum number of points accepted by fit_gaussian in dimension d.
[[nodiscard]] constexpr std::size_t min_fit_samples(std::size_t d) { return d + 2; }

struct SampleMoments {
    Vector mean;
    Matrix covariance;  // n - 1 divisor
};

/// Sample mean and unbiased covariance of at least 2 points.
[[nodiscard]] SampleMoments sample_moments(std::span<const Vector> samples);

/// One-component Gaussian with the sample mean and unbiased sample
/// covariance, each diagonal entry inflated by regularization times itself
/// (zero entries use trace / d instead).
///
/// Throws InsufficientSamples with fewer than d + 2 points, or when the
/// points are all identical (zero trace leaves nothing to regularize with).
[[nodiscard]] GaussianMixture fit_gaussian(std::span<const Vector> samples,
                                           double regularization = kDefaultRegularization);

/// Whether the density admits the probability-integral transform from the
/// unit hypercube (uniform boxes and single-component Gaussians).
[[nodiscard]] bool has_unit_cube_transform(const Density& density);

/// Maps u in (0,1)^d to the density's support: affine for boxes,
/// mean + L * Phi^{-1}(u) for a single Gaussian.
[[nodiscard]] Vector from_unit_cube(const Density& density, const Vector& u);

[[nodiscard]] nlohmann::json to_json(const Density& density);
[[nodiscard]] Density density_from_json(const nlohmann::json& j);

[[nodiscard]] std::string describe(const Density& density);

}  // namespace rarefuse
