#include <doctest.h>

#include <cmath>
#include <random>

#include "emint/deriv.hpp"
#include "emint/problems.hpp"
#include "support/oracles.hpp"

using emint::DerivativeStrategy;
using emint::GrossValue;
using emint::GrossVector;
using emint::LieDerivatives;
using emint::OdeSystem;
using emint::Vec;

namespace {

void check_digits(const GrossValue& v, const std::vector<double>& expected, double tol = 1e-15) {
    REQUIRE(v.depth() + 1 == static_cast<int>(expected.size()));
    for (size_t k = 0; k < expected.size(); ++k) {
        CAPTURE(k);
        CHECK(std::abs(v.coeff(static_cast<int>(k)) - expected[k]) <= tol);
    }
}

}  // namespace

TEST_CASE("micro-steps of the scalar demo field reproduce the known digits") {
    auto sys = emint::example1_system();
    const Vec y0{0.4};

    auto states = emint::euler_microsteps(sys, 0.0, y0, 3, 3);
    REQUIRE(states.size() == 4);
    check_digits(states[0][0], {0.4, 0.0, 0.0, 0.0});
    check_digits(states[1][0], {0.4, 0.4, 0.0, 0.0});
    check_digits(states[2][0], {0.4, 0.8, -0.32, -0.32});
    check_digits(states[3][0], {0.4, 1.2, -0.96, -1.92});

    // Two micro-steps at depth 3 match the stated second state.
    auto two = emint::euler_microsteps(sys, 0.0, y0, 2, 3);
    check_digits(two[2][0], {0.4, 0.8, -0.32, -0.32});
}

TEST_CASE("the demo derivatives come out exactly, both strategies") {
    auto sys = emint::example1_system();
    const Vec y0{0.4};
    const Vec expected{0.4, -0.32, -0.96};

    for (auto strategy : {DerivativeStrategy::ForwardOnState, DerivativeStrategy::ForwardOnField}) {
        auto lie = emint::lie_derivatives(sys, 0.0, y0, 3, strategy);
        REQUIRE(lie.order() == 3);
        for (int k = 0; k < 3; ++k) {
            CAPTURE(k);
            CHECK(std::abs(lie.values[static_cast<size_t>(k)][0] - expected[static_cast<size_t>(k)]) <= 1e-14);
        }
    }

    // The field values along the micro-states carry the digits used by
    // the forward-on-field route at depth 2.
    auto states = emint::euler_microsteps(sys, 0.0, y0, 2, 2);
    auto t_of = [](int j) { return GrossValue::from_coeffs({0.0, static_cast<double>(j), 0.0}); };
    GrossVector f0(1, 2), f1(1, 2), f2(1, 2);
    sys.eval(GrossValue(0.0, 2), states[0].entries(), f0.entries());
    sys.eval(t_of(1), states[1].entries(), f1.entries());
    sys.eval(t_of(2), states[2].entries(), f2.entries());
    check_digits(f0[0], {0.4, 0.0, 0.0});
    check_digits(f1[0], {0.4, -0.32, -0.32});
    check_digits(f2[0], {0.4, -0.64, -1.6});
}

TEST_CASE("forward differences") {
    using emint::forward_difference;
    std::vector<Vec> vals{{1.0}, {2.0}, {4.0}};
    CHECK(forward_difference(std::span<const Vec>(vals), 1)[0] == 1.0);
    CHECK(forward_difference(std::span<const Vec>(vals), 2)[0] == 1.0);

    std::vector<Vec> cubes{{0.0}, {1.0}, {8.0}, {27.0}};
    CHECK(forward_difference(std::span<const Vec>(cubes), 3)[0] == 6.0);

    CHECK_THROWS_AS(forward_difference(std::span<const Vec>(vals), 3), std::invalid_argument);
}

TEST_CASE("zero and identity fields") {
    auto zero = OdeSystem::from_field("zero", 2, true,
                                      [](const auto&, auto y, auto dy) {
                                          dy[0] = 0.0 * y[0];
                                          dy[1] = 0.0 * y[0];
                                      });
    const Vec y0{1.5, -2.0};
    auto states = emint::euler_microsteps(zero, 0.0, y0, 3, 3);
    for (const auto& s : states) {
        CHECK(s.finite() == y0);
        for (int i = 0; i < 2; ++i)
            for (int k = 1; k <= 3; ++k) CHECK(s[i].coeff(k) == 0.0);
    }

    auto ident = OdeSystem::from_field("ident", 1, true,
                                       [](const auto&, auto y, auto dy) { dy[0] = y[0]; });
    auto st = emint::euler_microsteps(ident, 0.0, Vec{1.0}, 1, 1);
    check_digits(st[1][0], {1.0, 1.0});

    auto constant = OdeSystem::from_field("const", 1, true,
                                          [](const auto&, auto y, auto dy) { dy[0] = 0.0 * y[0] + 2.5; });
    auto lie = emint::derivatives_strategy_a(constant, 0.0, Vec{7.0}, 4);
    CHECK(lie.values[0][0] == doctest::Approx(2.5).epsilon(1e-15));
    for (int k = 1; k < 4; ++k) CHECK(std::abs(lie.values[static_cast<size_t>(k)][0]) <= 1e-14);
}

TEST_CASE("linear fields have matrix-power derivative stacks") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = 3;
    double a[3][3];
    for (auto& row : a)
        for (double& x : row) x = dist(rng);

    auto linear = OdeSystem::from_field("linear", n, true, [a](const auto&, auto y, auto dy) {
        for (int i = 0; i < n; ++i) {
            dy[static_cast<size_t>(i)] = a[i][0] * y[0];
            for (int j = 1; j < n; ++j) dy[static_cast<size_t>(i)] += a[i][j] * y[static_cast<size_t>(j)];
        }
    });

    const Vec y0{0.3, -1.1, 0.7};
    const int k_max = 5;
    auto la = emint::derivatives_strategy_a(linear, 0.0, y0, k_max);
    auto lb = emint::derivatives_strategy_b(linear, 0.0, y0, k_max);

    // Oracle: y^(k) = A^k y, accumulated by repeated multiplication.
    Vec power = y0;
    for (int k = 1; k <= k_max; ++k) {
        Vec next(static_cast<size_t>(n), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) next[static_cast<size_t>(i)] += a[i][j] * power[static_cast<size_t>(j)];
        power = next;
        for (int i = 0; i < n; ++i) {
            const double tol = 1e-12 * (1.0 + std::abs(power[static_cast<size_t>(i)]));
            CHECK(std::abs(la.values[static_cast<size_t>(k - 1)][static_cast<size_t>(i)] - power[static_cast<size_t>(i)]) <= tol);
            CHECK(std::abs(lb.values[static_cast<size_t>(k - 1)][static_cast<size_t>(i)] - power[static_cast<size_t>(i)]) <= tol);
        }
    }
}

TEST_CASE("both strategies match the symbolic stack on random polynomial fields") {
    std::mt19937 rng(20240812);
    std::uniform_real_distribution<double> dist(-0.8, 0.8);
    for (int rep = 0; rep < 20; ++rep) {
        const int m = 1 + static_cast<int>(rng() % 2);
        auto f = oracles::random_hamiltonian_field(rng, m, 3);
        auto sys = oracles::poly_system(f);
        const int n = 2 * m;

        Vec y0(static_cast<size_t>(n));
        for (double& x : y0) x = dist(rng);

        const int orders = 5;
        auto stack = oracles::symbolic_lie_stack(f, orders);
        auto la = emint::derivatives_strategy_a(sys, 0.0, y0, orders);
        auto lb = emint::derivatives_strategy_b(sys, 0.0, y0, orders);
        for (int j = 0; j < orders; ++j)
            for (int i = 0; i < n; ++i) {
                const double exact = stack[static_cast<size_t>(j)][static_cast<size_t>(i)].eval(std::span<const double>(y0));
                const double tol = 1e-12 * (1.0 + std::abs(exact));
                CAPTURE(rep);
                CAPTURE(j);
                CHECK(std::abs(la.values[static_cast<size_t>(j)][static_cast<size_t>(i)] - exact) <= tol);
                CHECK(std::abs(lb.values[static_cast<size_t>(j)][static_cast<size_t>(i)] - exact) <= tol);
            }
    }
}

TEST_CASE("k-th state difference equals G^-1 times the (k-1)-th field difference") {
    std::mt19937 rng(5150);
    std::uniform_real_distribution<double> dist(-0.8, 0.8);
    auto f = oracles::random_hamiltonian_field(rng, 2, 3);
    auto sys = oracles::poly_system(f);

    Vec y0{0.4, -0.2, 0.1, 0.6};
    const int k_max = 4;
    const int depth = k_max;
    auto states = emint::euler_microsteps(sys, 0.0, y0, k_max, depth);

    std::vector<GrossVector> f_vals;
    for (const auto& s : states) f_vals.push_back(sys.eval(GrossValue(0.0, depth), s));

    const auto g1 = GrossValue::infinitesimal(depth);
    for (int k = 1; k <= k_max; ++k) {
        auto lhs = emint::forward_difference(std::span<const GrossVector>(states.data(), static_cast<size_t>(k) + 1), k);
        auto rhs_base = emint::forward_difference(std::span<const GrossVector>(f_vals.data(), static_cast<size_t>(k)), k - 1);
        auto rhs = g1 * rhs_base;
        for (int i = 0; i < lhs.dim(); ++i)
            for (int d = 0; d <= depth; ++d) {
                const double tol = 1e-13 * (1.0 + std::abs(lhs[i].coeff(d)));
                CHECK(std::abs(lhs[i].coeff(d) - rhs[i].coeff(d)) <= tol);
            }
    }
}

TEST_CASE("the field route needs one less digit than the state route") {
    std::mt19937 rng(777);
    auto f = oracles::random_hamiltonian_field(rng, 1, 3);
    auto sys = oracles::poly_system(f);
    const Vec y0{0.3, -0.5};

    for (int k = 2; k <= 5; ++k) {
        auto deep = emint::derivatives_strategy_a(sys, 0.0, y0, k);

        // Reproduce y^(k) from field differences computed at depth k-1.
        auto states = emint::euler_microsteps(sys, 0.0, y0, k - 1, k - 1);
        std::vector<GrossVector> f_vals;
        for (const auto& s : states) f_vals.push_back(sys.eval(GrossValue(0.0, k - 1), s));
        auto diff = emint::forward_difference(std::span<const GrossVector>(f_vals), k - 1);
        for (int i = 0; i < 2; ++i) {
            const double exact = deep.values[static_cast<size_t>(k - 1)][static_cast<size_t>(i)];
            CHECK(std::abs(diff[i].coeff(k - 1) - exact) <= 1e-12 * (1.0 + std::abs(exact)));
        }
    }
}

TEST_CASE("analytic derivatives require a closed form") {
    auto zero = OdeSystem::from_field("zero", 1, true,
                                      [](const auto&, auto y, auto dy) { dy[0] = 0.0 * y[0]; });
    CHECK_THROWS_AS(emint::lie_derivatives(zero, 0.0, Vec{1.0}, 2, DerivativeStrategy::Analytic),
                    std::invalid_argument);

    auto sys = emint::example1_system();
    auto lie = emint::lie_derivatives(sys, 0.0, Vec{0.4}, 3, DerivativeStrategy::Analytic);
    CHECK(lie.values[0][0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(lie.values[1][0] == doctest::Approx(-0.32).epsilon(1e-14));
    CHECK(lie.values[2][0] == doctest::Approx(-0.96).epsilon(1e-14));
}

TEST_CASE("micro-step preconditions") {
    auto sys = emint::example1_system();
    CHECK_THROWS_AS(emint::euler_microsteps(sys, 0.0, Vec{0.4}, 2, 0), std::invalid_argument);
    CHECK_THROWS_AS(emint::euler_microsteps(sys, 0.0, Vec{0.4, 0.0}, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(emint::derivatives_strategy_a(sys, 0.0, Vec{0.4}, 0), std::invalid_argument);
}
