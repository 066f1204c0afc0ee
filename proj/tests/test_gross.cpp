#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "emint/gross.hpp"

using emint::GrossValue;
using emint::GrossVector;

namespace {

GrossValue gv(std::vector<double> coeffs) { return GrossValue::from_coeffs(std::move(coeffs)); }

void check_digits(const GrossValue& v, const std::vector<double>& expected, double tol = 1e-13) {
    REQUIRE(v.depth() + 1 == static_cast<int>(expected.size()));
    for (size_t k = 0; k < expected.size(); ++k) {
        CAPTURE(k);
        CHECK(v.coeff(static_cast<int>(k)) == doctest::Approx(expected[k]).epsilon(tol).scale(1.0));
    }
}

GrossValue random_value(std::mt19937& rng, int depth) {
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    std::vector<double> c(static_cast<size_t>(depth) + 1);
    for (double& x : c) x = dist(rng);
    return gv(std::move(c));
}

}  // namespace

TEST_CASE("addition follows the worked micro-step example") {
    auto a = gv({0.4, 0.0});
    auto b = gv({0.0, 0.4});
    check_digits(a + b, {0.4, 0.4});
}

TEST_CASE("additive identity and inverse") {
    auto x = gv({1.25, -0.5, 3.0});
    check_digits(x + GrossValue(0.0, 2), {1.25, -0.5, 3.0});
    check_digits(gv({1.0, 2.0}) + gv({-1.0, -2.0}), {0.0, 0.0});
}

TEST_CASE("multiplication is the truncated convolution") {
    check_digits(gv({1.0, 2.0, 0.0}) * gv({3.0, 1.0, 0.0}), {3.0, 7.0, 2.0});
    check_digits(gv({0.0, 1.0}) * gv({0.0, 1.0}), {0.0, 0.0});  // G^-2 beyond depth 1
    check_digits(gv({0.4, 0.4, 0.0}) * gv({0.4, 0.4, 0.0}), {0.16, 0.32, 0.16});
}

TEST_CASE("division inverts multiplication") {
    check_digits(gv({1.0, 0.0, 0.0}) / gv({1.0, 1.0, 0.0}), {1.0, -1.0, 1.0});
    auto a = gv({1.3, -0.7, 0.2});
    check_digits(a / GrossValue::lift(1.0, 2), {1.3, -0.7, 0.2});
    // Derived by multiplying back: (0.4 + 0.4 G^-1)/(1 + G^-1) = 0.4.
    auto q = gv({0.4, 0.4}) / gv({1.0, 1.0});
    check_digits(q, {0.4, 0.0});
    check_digits(q * gv({1.0, 1.0}), {0.4, 0.4});
}

TEST_CASE("elementary functions expand about the finite part") {
    auto g1 = GrossValue::infinitesimal(3);
    check_digits(sin(g1), {0.0, 1.0, 0.0, -1.0 / 6.0});
    check_digits(exp(GrossValue(0.0, 2)), {1.0, 0.0, 0.0});

    // Derived by squaring back: sqrt(1 + 2 G^-1) at depth 2.
    auto s = sqrt(gv({1.0, 2.0, 0.0}));
    check_digits(s, {1.0, 1.0, -0.5});
    check_digits(s * s, {1.0, 2.0, 0.0});
}

TEST_CASE("digit extraction") {
    CHECK(coeff_at(gv({-0.32, -0.32}), 0) == doctest::Approx(-0.32));
    CHECK(coeff_at(GrossValue::lift(2.75, 4), 0) == 2.75);
    CHECK(coeff_at(gv({3.0, 7.0, 2.0}), 2) == 2.0);
}

TEST_CASE("error paths") {
    CHECK_THROWS_AS(gv({1.0, 2.0}) + gv({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(gv({1.0, 2.0}) * gv({1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(gv({1.0}) / gv({0.0}), std::domain_error);
    CHECK_THROWS_AS(gv({1.0, 1.0}) / GrossValue::infinitesimal(1), std::domain_error);
    CHECK_THROWS_AS(sqrt(gv({-1.0, 1.0})), std::domain_error);
    CHECK_THROWS_AS(sqrt(gv({0.0, 1.0})), std::domain_error);
    CHECK_THROWS_AS(gv({1.0}).coeff(1), std::invalid_argument);
    CHECK_THROWS_AS(GrossValue::infinitesimal(0), std::invalid_argument);
    CHECK_THROWS_AS(GrossValue(1.0, -1), std::invalid_argument);
}

TEST_CASE("ring laws hold digit-wise on random operands") {
    std::mt19937 rng(20240811);
    for (int depth : {0, 1, 3, 5}) {
        for (int rep = 0; rep < 50; ++rep) {
            auto a = random_value(rng, depth);
            auto b = random_value(rng, depth);
            auto c = random_value(rng, depth);
            auto expect_equal = [&](const GrossValue& lhs, const GrossValue& rhs) {
                for (int k = 0; k <= depth; ++k) {
                    const double scale = 1.0 + std::abs(lhs.coeff(k)) + std::abs(rhs.coeff(k));
                    CHECK(std::abs(lhs.coeff(k) - rhs.coeff(k)) <= 1e-13 * scale);
                }
            };
            expect_equal(a + b, b + a);
            expect_equal((a + b) + c, a + (b + c));
            expect_equal(a * b, b * a);
            expect_equal((a * b) * c, a * (b * c));
            expect_equal(a * (b + c), a * b + a * c);
        }
    }
}

TEST_CASE("reals embed homomorphically") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int rep = 0; rep < 100; ++rep) {
        const double x = dist(rng), y = dist(rng);
        const int depth = 4;
        auto lx = GrossValue::lift(x, depth), ly = GrossValue::lift(y, depth);
        for (auto [got, expected] :
             {std::pair{lx + ly, x + y}, {lx * ly, x * y}, {lx - ly, x - y}}) {
            CHECK(got.finite() == expected);
            for (int k = 1; k <= depth; ++k) CHECK(got.coeff(k) == 0.0);
        }
        if (y != 0.0) {
            auto q = lx / ly;
            CHECK(q.finite() == x / y);
            for (int k = 1; k <= depth; ++k) CHECK(q.coeff(k) == 0.0);
        }
    }
}

TEST_CASE("a zero tail behaves as the finite part under all operations") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> dist(0.1, 2.5);
    for (int rep = 0; rep < 50; ++rep) {
        const double x = dist(rng);
        auto lx = GrossValue::lift(x, 3);
        CHECK(sin(lx).finite() == doctest::Approx(std::sin(x)).epsilon(1e-15));
        CHECK(exp(lx).finite() == doctest::Approx(std::exp(x)).epsilon(1e-15));
        CHECK(sqrt(lx).finite() == doctest::Approx(std::sqrt(x)).epsilon(1e-15));
        for (int k = 1; k <= 3; ++k) {
            CHECK(sin(lx).coeff(k) == 0.0);
            CHECK(exp(lx).coeff(k) == 0.0);
            CHECK(sqrt(lx).coeff(k) == 0.0);
        }
    }
}

TEST_CASE("division is a right inverse of multiplication") {
    std::mt19937 rng(123);
    int well_conditioned = 0;
    for (int rep = 0; rep < 300; ++rep) {
        auto a = random_value(rng, 4);
        auto b = random_value(rng, 4);
        if (std::abs(b.finite()) < 0.1) continue;
        auto q = a / b;
        auto back = q * b;
        // Roundoff enters at the size of the products actually summed,
        // which is governed by the quotient digits, not by a's.
        double qmax = 0.0, bmax = 0.0;
        for (int k = 0; k <= 4; ++k) {
            qmax = std::max(qmax, std::abs(q.coeff(k)));
            bmax = std::max(bmax, std::abs(b.coeff(k)));
        }
        for (int k = 0; k <= 4; ++k) {
            const double scale = 1.0 + std::abs(a.coeff(k)) + qmax * bmax;
            CHECK(std::abs(back.coeff(k) - a.coeff(k)) <= 1e-13 * scale);
        }
        // Divisors with a dominant finite part round-trip at the strict
        // per-digit level.
        if (std::abs(b.finite()) >= 1.0) {
            ++well_conditioned;
            for (int k = 0; k <= 4; ++k) {
                CHECK(std::abs(back.coeff(k) - a.coeff(k)) <= 1e-13 * (1.0 + std::abs(a.coeff(k))));
            }
        }
    }
    CHECK(well_conditioned > 30);
}

TEST_CASE("tail digits of elementary functions are scaled derivatives") {
    // f(x + G^-1) carries f^(k)(x)/k! in the digit of G^-k.
    const int depth = 6;
    struct Case {
        GrossValue (*fn)(const GrossValue&);
        double (*deriv)(double, int);
    };
    auto sin_d = [](double x, int k) {
        switch (k % 4) {
            case 0: return std::sin(x);
            case 1: return std::cos(x);
            case 2: return -std::sin(x);
            default: return -std::cos(x);
        }
    };
    auto cos_d = [](double x, int k) {
        switch (k % 4) {
            case 0: return std::cos(x);
            case 1: return -std::sin(x);
            case 2: return -std::cos(x);
            default: return std::sin(x);
        }
    };
    auto exp_d = [](double x, int) { return std::exp(x); };
    auto sqrt_d = [](double x, int k) {
        // d^k/dx^k sqrt(x) = sqrt(x) * prod_{j=0..k-1} (1/2 - j) / x^k
        double c = 1.0;
        for (int j = 0; j < k; ++j) c *= (0.5 - j);
        return c * std::sqrt(x) / std::pow(x, k);
    };
    const Case cases[] = {
        {&emint::sin, sin_d}, {&emint::cos, cos_d}, {&emint::exp, exp_d}, {&emint::sqrt, sqrt_d}};

    for (double x : {0.3, 1.1, 2.4}) {
        auto arg = GrossValue::lift(x, depth) + GrossValue::infinitesimal(depth);
        for (const auto& c : cases) {
            auto val = c.fn(arg);
            double fact = 1.0;
            for (int k = 0; k <= depth; ++k) {
                if (k > 0) fact *= k;
                const double expected = c.deriv(x, k) / fact;
                CHECK(std::abs(coeff_at(val, k) - expected) <= 1e-10 * (1.0 + std::abs(expected)));
            }
        }
    }
}

TEST_CASE("integer powers, including the reciprocal branch") {
    auto x = gv({1.5, -0.25, 0.75});
    check_digits(powi(x, 0), {1.0, 0.0, 0.0});
    check_digits(powi(x, 1), {1.5, -0.25, 0.75});
    auto cube = x * x * x;
    check_digits(powi(x, 3), {cube.coeff(0), cube.coeff(1), cube.coeff(2)});
    check_digits(powi(x, -2) * (x * x), {1.0, 0.0, 0.0});
    CHECK_THROWS_AS(powi(GrossValue::infinitesimal(2), -1), std::domain_error);
}

TEST_CASE("debug rendering shows nonzero digits only") {
    auto v = gv({0.5, 0.0, -0.25});
    CHECK(emint::to_string(v, 6) == "0.5 - 0.25*G^-2");
    CHECK(emint::to_string(GrossValue(2.0, 3), 6) == "2");
}

TEST_CASE("gross vectors lift, combine and project") {
    const std::vector<double> y{1.0, -2.0, 0.5};
    auto v = GrossVector::lift(y, 2);
    CHECK(v.dim() == 3);
    CHECK(v.depth() == 2);
    CHECK(v.finite() == y);

    auto w = GrossValue::infinitesimal(2) * v;
    CHECK(w[0].coeff(1) == 1.0);
    CHECK(w[2].coeff(1) == 0.5);
    auto sum = v + w;
    CHECK(sum[1].finite() == -2.0);
    CHECK(sum[1].coeff(1) == -2.0);
    CHECK_THROWS_AS(v + GrossVector(2, 2), std::invalid_argument);
}
