#pragma once

// Frozen constants for the "arrhenius-2d" benchmark.
//
//   f(A, E) = T_b + c1 * (log(1 + A * exp(-E / (R * T_a))) - L_ref)
//   g(y)    = tau - y            (failure: peak temperature above tau)
//
// c1 and L_ref put f over the domain at roughly [1200.1, 2495.8]. tau is
// chosen so the failure probability under the uniform nominal is ~5.35e-4.

namespace rarefuse::arrhenius {

inline constexpr double kPreExponentialMin = 5.5e11;
inline constexpr double kPreExponentialMax = 1.5e13;
inline constexpr double kActivationMin = 1.5e3;
inline constexpr double kActivationMax = 9.5e3;

inline constexpr double kGasConstant = 8.314472;
inline constexpr double kAmbientTemperature = 950.0;
inline constexpr double kBaseTemperature = 1500.0;
inline constexpr double kTemperatureScale = 300.0;
inline constexpr double kLogReference = 26.83;

inline constexpr double kThreshold = 2486.0;

// Midpoint-grid quadrature of the failure indicator at kThreshold.
inline constexpr double kOracleProbability4001 = 0.0005353572878962214;
inline constexpr double kOracleProbability2001 = 0.0005359639021069176;

}  // namespace rarefuse::arrhenius
