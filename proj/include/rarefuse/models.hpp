#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "rarefuse/densities.hpp"

namespace rarefuse {

/// Deterministic map from a parameter vector to a quantity of interest.
struct Model {
    std::string name;
    std::size_t input_dim = 0;
    std::size_t output_dim = 1;
    std::function<Vector(const Vector&)> evaluate;
    std::string cost_tag;

    /// Checks dimensions and wraps failures of the underlying callable in
    /// ModelError. Non-finite outputs are also reported as ModelError.
    [[nodiscard]] Vector operator()(const Vector& z) const;
};

/// Scalar limit state over the QoI; negative values mean failure.
struct LimitState {
    std::function<double(const Vector&)> g;

    [[nodiscard]] double operator()(const Vector& qoi) const { return g(qoi); }
};

/// g(f(z)).
[[nodiscard]] double limit_state_value(const Model& model, const LimitState& ls, const Vector& z);

/// 1 iff g(f(z)) < relax. relax = 0 is the true failure event (ties are safe).
[[nodiscard]] bool indicator(const Model& model, const LimitState& ls, const Vector& z,
                             double relax = 0.0);

}  // namespace rarefuse
