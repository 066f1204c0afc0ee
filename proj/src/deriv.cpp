#include "emint/deriv.hpp"

#include <stdexcept>
#include <string>

namespace emint {

namespace {

// C(k, j) for j = 0..k, exact in double for the small k used here.
std::vector<double> binomial_row(int k) {
    std::vector<double> row(static_cast<size_t>(k) + 1, 1.0);
    for (int j = 1; j <= k; ++j) row[static_cast<size_t>(j)] = row[static_cast<size_t>(j - 1)] * (k - j + 1) / j;
    return row;
}

// Micro-states of the time-augmented state [y; t]. For autonomous
// systems the t slot is still carried (it is cheap and keeps one code
// path); its derivative is 1.
std::vector<GrossVector> microsteps_augmented(const OdeSystem& system, double t,
                                              std::span<const double> y, int count, int depth) {
    const int n = system.dim();
    if (static_cast<int>(y.size()) != n) {
        throw std::invalid_argument("state dimension " + std::to_string(y.size()) +
                                    " does not match system dimension " + std::to_string(n));
    }
    if (count < 0) throw std::invalid_argument("micro-step count must be non-negative");
    if (depth < 1 && count > 0) throw std::invalid_argument("micro-steps need depth >= 1");

    GrossVector state(n + 1, depth);
    for (int i = 0; i < n; ++i) state[i] = GrossValue::lift(y[i], depth);
    state[n] = GrossValue::lift(t, depth);

    const GrossValue h = count > 0 ? GrossValue::infinitesimal(depth) : GrossValue(0.0, depth);

    std::vector<GrossVector> states;
    states.reserve(static_cast<size_t>(count) + 1);
    states.push_back(state);
    GrossVector dy(n, depth);
    for (int step = 0; step < count; ++step) {
        system.eval(state[n], std::span<const GrossValue>(state.entries().data(), static_cast<size_t>(n)),
                    dy.entries());
        for (int i = 0; i < n; ++i) state[i] += h * dy[i];
        state[n] += h;
        states.push_back(state);
    }
    return states;
}

GrossVector drop_time(const GrossVector& aug) {
    GrossVector out(aug.dim() - 1, aug.depth());
    for (int i = 0; i < out.dim(); ++i) out[i] = aug[i];
    return out;
}

}  // namespace

std::vector<GrossVector> euler_microsteps(const OdeSystem& system, double t,
                                          std::span<const double> y, int count, int depth) {
    auto aug = microsteps_augmented(system, t, y, count, depth);
    std::vector<GrossVector> out;
    out.reserve(aug.size());
    for (const auto& s : aug) out.push_back(drop_time(s));
    return out;
}

GrossVector forward_difference(std::span<const GrossVector> values, int k) {
    if (static_cast<int>(values.size()) < k + 1) {
        throw std::invalid_argument("forward difference of order " + std::to_string(k) + " needs " +
                                    std::to_string(k + 1) + " values");
    }
    const auto binom = binomial_row(k);
    GrossVector acc(values[0].dim(), values[0].depth());
    for (int j = 0; j <= k; ++j) {
        const double w = (j % 2 == 0 ? 1.0 : -1.0) * binom[static_cast<size_t>(j)];
        acc = acc + w * values[static_cast<size_t>(k - j)];
    }
    return acc;
}

Vec forward_difference(std::span<const Vec> values, int k) {
    if (static_cast<int>(values.size()) < k + 1) {
        throw std::invalid_argument("forward difference of order " + std::to_string(k) + " needs " +
                                    std::to_string(k + 1) + " values");
    }
    const auto binom = binomial_row(k);
    Vec acc(values[0].size(), 0.0);
    for (int j = 0; j <= k; ++j) {
        const double w = (j % 2 == 0 ? 1.0 : -1.0) * binom[static_cast<size_t>(j)];
        const Vec& v = values[static_cast<size_t>(k - j)];
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += w * v[i];
    }
    return acc;
}

LieDerivatives derivatives_strategy_a(const OdeSystem& system, double t, std::span<const double> y,
                                      int k_max) {
    if (k_max < 1) throw std::invalid_argument("derivative order must be >= 1");
    const auto states = euler_microsteps(system, t, y, k_max, k_max);

    LieDerivatives lie;
    lie.base_state.assign(y.begin(), y.end());
    lie.values.reserve(static_cast<size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        // The O(G^-1) remainder sits in higher digits; picking the digit
        // of G^-k of the k-th difference discards it exactly.
        const GrossVector diff =
            forward_difference(std::span<const GrossVector>(states.data(), static_cast<size_t>(k) + 1), k);
        Vec d(static_cast<size_t>(diff.dim()));
        for (int i = 0; i < diff.dim(); ++i) d[static_cast<size_t>(i)] = diff[i].coeff(k);
        lie.values.push_back(std::move(d));
    }
    return lie;
}

LieDerivatives derivatives_strategy_b(const OdeSystem& system, double t, std::span<const double> y,
                                      int k_max) {
    if (k_max < 1) throw std::invalid_argument("derivative order must be >= 1");
    const int depth = k_max - 1;

    LieDerivatives lie;
    lie.base_state.assign(y.begin(), y.end());

    if (depth == 0) {
        lie.values.push_back(system.eval(t, y));
        return lie;
    }

    const auto states = microsteps_augmented(system, t, y, k_max - 1, depth);
    const int n = system.dim();
    std::vector<GrossVector> f_values;
    f_values.reserve(states.size());
    for (const auto& s : states) {
        GrossVector dy(n, depth);
        system.eval(s[n], std::span<const GrossValue>(s.entries().data(), static_cast<size_t>(n)),
                    dy.entries());
        f_values.push_back(std::move(dy));
    }

    lie.values.reserve(static_cast<size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        const GrossVector diff = forward_difference(
            std::span<const GrossVector>(f_values.data(), static_cast<size_t>(k)), k - 1);
        Vec d(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) d[static_cast<size_t>(i)] = diff[i].coeff(k - 1);
        lie.values.push_back(std::move(d));
    }
    return lie;
}

LieDerivatives lie_derivatives(const OdeSystem& system, double t, std::span<const double> y,
                               int k_max, DerivativeStrategy strategy) {
    switch (strategy) {
        case DerivativeStrategy::ForwardOnState:
            return derivatives_strategy_a(system, t, y, k_max);
        case DerivativeStrategy::ForwardOnField:
            return derivatives_strategy_b(system, t, y, k_max);
        case DerivativeStrategy::Analytic:
            if (!system.has_analytic_lie()) {
                throw std::invalid_argument("system '" + system.name() +
                                            "' supplies no closed-form derivatives");
            }
            return system.analytic_lie(t, y, k_max);
    }
    throw std::invalid_argument("unknown derivative strategy");
}

}  // namespace emint
