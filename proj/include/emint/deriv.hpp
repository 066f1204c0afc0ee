#pragma once

#include <span>
#include <vector>

#include "emint/gross.hpp"
#include "emint/ode_system.hpp"

namespace emint {

/// Runs `count` explicit Euler micro-steps with the unit infinitesimal
/// as stepsize,
///
///     y_{j+1} = y_j + G^-1 * f(t_j, y_j),
///
/// starting from the lifted state, and returns all count+1 micro-states
/// at truncation depth `depth`. Non-autonomous systems are handled by
/// augmenting the state with t (derivative 1), so t advances by G^-1
/// per micro-step; the returned vectors carry only the y part.
std::vector<GrossVector> euler_microsteps(const OdeSystem& system, double t,
                                          std::span<const double> y, int count, int depth);

/// Binomial forward difference of the first k+1 samples:
///   sum_{j=0..k} (-1)^j C(k,j) values[k-j].
GrossVector forward_difference(std::span<const GrossVector> values, int k);
Vec forward_difference(std::span<const Vec> values, int k);

/// Derivatives y^(1..k_max) from forward differences of k_max
/// micro-states at depth k_max; the digit of G^-k of the k-th
/// difference is the exact k-th derivative.
LieDerivatives derivatives_strategy_a(const OdeSystem& system, double t, std::span<const double> y,
                                      int k_max);

/// Same derivatives from forward differences of the field values along
/// k_max - 1 micro-states, which only needs truncation depth k_max - 1.
LieDerivatives derivatives_strategy_b(const OdeSystem& system, double t, std::span<const double> y,
                                      int k_max);

/// Dispatches on the strategy; Analytic requires the system to supply
/// closed-form derivatives.
LieDerivatives lie_derivatives(const OdeSystem& system, double t, std::span<const double> y,
                               int k_max, DerivativeStrategy strategy);

}  // namespace emint
