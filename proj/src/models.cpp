#include "rarefuse/models.hpp"

#include <cmath>

#include "rarefuse/errors.hpp"

namespace rarefuse {

Vector Model::operator()(const Vector& z) const {
    if (static_cast<std::size_t>(z.size()) != input_dim) {
        throw DimensionMismatch(input_dim, static_cast<std::size_t>(z.size()));
    }
    Vector out;
    try {
        out = evaluate(z);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw ModelError("model '" + name + "' failed: " + e.what());
    }
    if (static_cast<std::size_t>(out.size()) != output_dim) {
        throw ModelError("model '" + name + "' returned " + std::to_string(out.size()) +
                         " outputs, expected " + std::to_string(output_dim));
    }
    if (!out.allFinite()) throw ModelError("model '" + name + "' returned a non-finite output");
    return out;
}

double limit_state_value(const Model& model, const LimitState& ls, const Vector& z) {
    const double value = ls(model(z));
    if (std::isnan(value)) throw ModelError("limit state returned NaN for model '" + model.name + "'");
    return value;
}

bool indicator(const Model& model, const LimitState& ls, const Vector& z, double relax) {
    return limit_state_value(model, ls, z) < relax;
}

}  // namespace rarefuse
