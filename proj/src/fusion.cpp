#include "rarefuse/fusion.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "rarefuse/errors.hpp"
#include "rarefuse/numeric.hpp"

namespace rarefuse {

namespace {

using LapackInt = lapack_int;

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

void require_positive(std::span<const double> values, const char* what) {
    if (values.empty()) throw InvalidArgument(std::string(what) + ": need at least one variance");
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InvalidArgument(std::string(what) + ": variances must be finite and positive");
        }
    }
}

// Solves the symmetric indefinite system in place with Bunch-Kaufman.
class SymmetricIndefiniteSolver {
public:
    explicit SymmetricIndefiniteSolver(const Matrix& a) : factor_(a), pivots_(a.rows()) {
        const auto n = static_cast<LapackInt>(a.rows());
        const LapackInt info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, factor_.data(), n, pivots_.data());
        if (info != 0) throw SingularCovariance("KKT system is singular");
    }

    [[nodiscard]] Vector solve(const Vector& rhs) const {
        Vector x = rhs;
        Matrix copy = factor_;
        const auto n = static_cast<LapackInt>(factor_.rows());
        const LapackInt info = LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n, 1, copy.data(), n,
                                              pivots_.data(), x.data(), n);
        if (info != 0) throw Error("dsytrs failed");
        return x;
    }

private:
    Matrix factor_;
    std::vector<LapackInt> pivots_;
};

}  // namespace

// ---------------------------------------------------------------------------
// CovarianceMatrix

CovarianceMatrix::CovarianceMatrix(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
        throw InvalidArgument("CovarianceMatrix: must be square and nonempty");
    }
    if (!entries_.allFinite()) throw InvalidArgument("CovarianceMatrix: non-finite entries");
    const double scale = max_abs(entries_);
    if (max_abs(entries_ - entries_.transpose()) > 1e-14 * scale) {
        throw InvalidArgument("CovarianceMatrix: not symmetric");
    }
    entries_ = 0.5 * (entries_ + entries_.transpose()).eval();
}

CovarianceMatrix CovarianceMatrix::diagonal(std::span<const double> variances) {
    Vector v = Eigen::Map<const Vector>(variances.data(), static_cast<Eigen::Index>(variances.size()));
    return CovarianceMatrix(v.asDiagonal().toDenseMatrix());
}

bool CovarianceMatrix::is_diagonal() const {
    Matrix off = entries_;
    off.diagonal().setZero();
    return (off.array() == 0.0).all();
}

double CovarianceMatrix::condition_estimate() const {
    const auto n = static_cast<LapackInt>(entries_.rows());
    double anorm = 0.0;
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) anorm = std::max(anorm, entries_.col(j).cwiseAbs().sum());
    Matrix factor = entries_;
    if (LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', n, factor.data(), n) != 0) {
        return std::numeric_limits<double>::infinity();
    }
    double rcond = 0.0;
    if (LAPACKE_dpocon(LAPACK_COL_MAJOR, 'L', n, factor.data(), n, anorm, &rcond) != 0 || !(rcond > 0.0)) {
        return std::numeric_limits<double>::infinity();
    }
    return 1.0 / rcond;
}

CovarianceMatrix CovarianceMatrix::select(std::span<const std::size_t> indices) const {
    Matrix sub(static_cast<Eigen::Index>(indices.size()), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t a = 0; a < indices.size(); ++a) {
        for (std::size_t b = 0; b < indices.size(); ++b) {
            if (indices[a] >= size() || indices[b] >= size()) throw InvalidArgument("select: index out of range");
            sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                entries_(static_cast<Eigen::Index>(indices[a]), static_cast<Eigen::Index>(indices[b]));
        }
    }
    return CovarianceMatrix(std::move(sub));
}

// ---------------------------------------------------------------------------
// Weights

WeightSolution optimal_weights(const CovarianceMatrix& covariance) {
    const auto k = static_cast<Eigen::Index>(covariance.size());
    const Matrix& sigma = covariance.entries();
    const double cond = covariance.condition_estimate();
    if (!(cond <= kSingularConditionThreshold)) {
        throw SingularCovariance("covariance is singular or ill-conditioned (condition estimate " +
                                 format_double(cond) + "); use diagonal fusion");
    }

    // The weights are invariant to scaling the covariance, so solve with
    // unit-scale entries to keep the KKT block balanced.
    const double scale = max_abs(sigma);
    Matrix kkt = Matrix::Zero(k + 1, k + 1);
    kkt.topLeftCorner(k, k) = sigma / scale;
    kkt.block(0, k, k, 1).setOnes();
    kkt.block(k, 0, 1, k).setOnes();
    Vector rhs = Vector::Zero(k + 1);
    rhs[k] = 1.0;

    const SymmetricIndefiniteSolver solver(kkt);
    Vector x = solver.solve(rhs);
    x += solver.solve(rhs - kkt * x);

    WeightSolution out;
    out.weights = x.head(k);
    out.multiplier = x[k] * scale;
    out.variance = out.weights.dot(sigma * out.weights);
    return out;
}

WeightSolution optimal_weights_diagonal(std::span<const double> variances) {
    require_positive(variances, "optimal_weights_diagonal");
    CompensatedSum precision;
    for (double v : variances) precision.add(1.0 / v);
    const double total = precision.value();
    WeightSolution out;
    out.weights.resize(static_cast<Eigen::Index>(variances.size()));
    for (std::size_t i = 0; i < variances.size(); ++i) {
        out.weights[static_cast<Eigen::Index>(i)] = (1.0 / variances[i]) / total;
    }
    out.variance = 1.0 / total;
    out.multiplier = -out.variance;
    return out;
}

// ---------------------------------------------------------------------------
// Fusion

FusedResult fuse(std::span<const EstimatorResult> results, bool assume_independent,
                 const std::optional<CovarianceMatrix>& covariance) {
    if (results.empty()) throw InvalidArgument("fuse: need at least one estimator result");
    const std::size_t k = results.size();
    if (!assume_independent) {
        if (!covariance) throw InvalidArgument("fuse: correlated fusion needs a covariance matrix");
        if (covariance->size() != k) throw DimensionMismatch(k, covariance->size());
    }

    FusedResult out;
    out.inputs.assign(results.begin(), results.end());
    out.weights = Vector::Zero(static_cast<Eigen::Index>(k));

    std::vector<double> variances(k);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& r = results[i];
        if (r.n < 1 || !(r.sample_variance >= 0.0) || !(r.estimate >= 0.0)) {
            throw InvalidArgument("fuse: malformed estimator result '" + r.density_id + "'");
        }
        variances[i] = r.estimator_variance();
        if (r.sample_variance == 0.0) {
            if (r.estimate == 0.0) {
                out.excluded.push_back(i);
                out.warnings.push_back("excluded '" + r.density_id + "': no failures observed");
                continue;
            }
            variances[i] = kVarianceFloor;
            out.floored.push_back(i);
            out.warnings.push_back("floored variance of '" + r.density_id + "': zero sample variance");
        }
        kept.push_back(i);
    }

    if (assume_independent) {
        out.covariance_used = Eigen::Map<const Vector>(variances.data(), static_cast<Eigen::Index>(k))
                                  .asDiagonal()
                                  .toDenseMatrix();
    } else {
        out.covariance_used = covariance->entries();
    }

    if (kept.empty()) {
        out.no_information = true;
        out.estimate = 0.0;
        out.variance = 0.0;
        out.multiplier = 0.0;
        out.warnings.push_back("no information: every estimator was excluded");
        return out;
    }

    WeightSolution solution;
    if (assume_independent) {
        std::vector<double> kept_variances;
        for (auto i : kept) kept_variances.push_back(variances[i]);
        solution = optimal_weights_diagonal(kept_variances);
    } else {
        solution = optimal_weights(covariance->select(kept));
    }

    CompensatedSum estimate;
    for (std::size_t a = 0; a < kept.size(); ++a) {
        const double w = solution.weights[static_cast<Eigen::Index>(a)];
        out.weights[static_cast<Eigen::Index>(kept[a])] = w;
        estimate.add(w * results[kept[a]].estimate);
    }
    out.estimate = estimate.value();
    out.variance = solution.variance;
    out.multiplier = solution.multiplier;
    return out;
}

double componentwise_weight_residual(const CovarianceMatrix& covariance, const Vector& weights) {
    const auto k = static_cast<Eigen::Index>(covariance.size());
    if (weights.size() != k) throw DimensionMismatch(covariance.size(), static_cast<std::size_t>(weights.size()));
    if (std::abs(weights.sum() - 1.0) > 1e-8) throw InvalidArgument("componentwise_weight_residual: weights must sum to 1");
    const Matrix& s = covariance.entries();
    for (Eigen::Index i = 0; i < k; ++i) {
        if (!(s(i, i) > 0.0)) throw InvalidArgument("componentwise_weight_residual: diagonal must be positive");
    }

    auto cross = [&](Eigen::Index i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (j != i) acc += weights[j] * s(i, j);
        }
        return acc;
    };

    double precision = 0.0;
    double coupling = 0.0;
    for (Eigen::Index l = 0; l < k; ++l) {
        precision += 1.0 / s(l, l);
        coupling += cross(l) / s(l, l);
    }
    const double mu = (1.0 + coupling) / precision;

    double residual = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        const double rhs = (mu - cross(i)) / s(i, i);
        residual = std::max(residual, std::abs(weights[i] - rhs));
    }
    return residual;
}

bool dominance_criterion(std::span<const double> variances, double candidate_variance) {
    require_positive(variances, "dominance_criterion");
    if (!(candidate_variance > 0.0)) throw InvalidArgument("dominance_criterion: candidate variance must be positive");
    double precision = 0.0;
    for (double v : variances) precision += 1.0 / v;
    return candidate_variance > static_cast<double>(variances.size()) / precision;
}

nlohmann::json to_json(const FusedResult& result) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : result.inputs) {
        rows.push_back({{"density_id", r.density_id},
                        {"kind", to_string(r.kind)},
                        {"n", r.n},
                        {"estimate", r.estimate},
                        {"sample_variance", r.sample_variance},
                        {"hits", r.hits}});
    }
    return {{"estimate", result.estimate},
            {"weights", std::vector<double>(result.weights.data(), result.weights.data() + result.weights.size())},
            {"multiplier", result.multiplier},
            {"variance", result.variance},
            {"excluded", result.excluded},
            {"floored", result.floored},
            {"no_information", result.no_information},
            {"warnings", result.warnings},
            {"inputs", rows}};
}

}  // namespace rarefuse
