#include "emint/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace emint {

namespace {

constexpr double kPi = 3.14159265358979323846;

template <class E>
void bind_energy(HamiltonianSystem& sys, E e) {
    sys.energy = [e](std::span<const double> y) { return e(y); };
    sys.energy_gross = [e](std::span<const GrossValue> y) { return e(y); };
}

struct PendulumField {
    template <class T>
    void operator()(const T&, std::span<const T> y, std::span<T> dy) const {
        using std::sin;
        dy[0] = y[1];
        dy[1] = -sin(y[0]);
    }
};

struct PendulumEnergy {
    template <class T>
    auto operator()(std::span<const T> y) const {
        using std::cos;
        return 0.5 * (y[1] * y[1]) - cos(y[0]);
    }
};

LieDerivatives pendulum_lie(double, std::span<const double> y, int k_max) {
    if (k_max > 4) {
        throw std::invalid_argument("pendulum closed-form derivatives available up to order 4");
    }
    const double q = y[0], p = y[1];
    const double sq = std::sin(q), cq = std::cos(q);
    LieDerivatives lie;
    lie.base_state.assign(y.begin(), y.end());
    const Vec stack[4] = {
        {p, -sq},
        {-sq, -p * cq},
        {-p * cq, sq * cq + p * p * sq},
        {sq * cq + p * p * sq, p * std::cos(2.0 * q) - 2.0 * p * sq * sq + p * p * p * cq},
    };
    for (int j = 0; j < k_max; ++j) lie.values.push_back(stack[j]);
    return lie;
}

struct KeplerField {
    template <class T>
    void operator()(const T&, std::span<const T> y, std::span<T> dy) const {
        using std::sqrt;
        T r2 = y[0] * y[0] + y[1] * y[1];
        if (finite_part(r2) < 1e-24) {
            throw std::domain_error("two-body evaluation at |q| < 1e-12 (collision)");
        }
        T r = sqrt(r2);
        T r3 = r2 * r;
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = -y[0] / r3;
        dy[3] = -y[1] / r3;
    }
};

struct KeplerEnergy {
    template <class T>
    auto operator()(std::span<const T> y) const {
        using std::sqrt;
        return 0.5 * (y[2] * y[2] + y[3] * y[3]) - 1.0 / sqrt(y[0] * y[0] + y[1] * y[1]);
    }
};

// Acceleration derivatives in terms of u = 1/|q|, s = q.p, w = |p|^2,
// obtained by repeated differentiation of a = -u^3 q along the flow
// (u' = -s u^3, s' = w - u, w' = -2 s u^3).
LieDerivatives kepler_lie(double, std::span<const double> y, int k_max) {
    if (k_max > 4) {
        throw std::invalid_argument("two-body closed-form derivatives available up to order 4");
    }
    const double q1 = y[0], q2 = y[1], p1 = y[2], p2 = y[3];
    const double r = std::sqrt(q1 * q1 + q2 * q2);
    const double u = 1.0 / r;
    const double s = q1 * p1 + q2 * p2;
    const double w = p1 * p1 + p2 * p2;
    const double u3 = u * u * u, u5 = u3 * u * u, u6 = u5 * u, u7 = u6 * u, u8 = u7 * u,
                 u9 = u8 * u;

    auto combo = [&](double cq, double cp) {
        return Vec{cq * q1 + cp * p1, cq * q2 + cp * p2};
    };
    const Vec a = combo(-u3, 0.0);
    const Vec a1 = combo(3.0 * s * u5, -u3);
    const Vec a2 = combo(u6 + 3.0 * (w - u) * u5 - 15.0 * s * s * u7, 6.0 * s * u5);
    const Vec a3 = combo(-15.0 * s * u8 - 45.0 * s * (w - u) * u7 + 105.0 * s * s * s * u9,
                         u6 + 9.0 * (w - u) * u5 - 45.0 * s * s * u7);

    LieDerivatives lie;
    lie.base_state.assign(y.begin(), y.end());
    const Vec* acc[4] = {&a, &a1, &a2, &a3};
    Vec upper{p1, p2};
    for (int j = 0; j < k_max; ++j) {
        Vec d{upper[0], upper[1], (*acc[j])[0], (*acc[j])[1]};
        lie.values.push_back(std::move(d));
        upper = *acc[j];
    }
    return lie;
}

// FPU index helpers, 0-based state (q_0..q_{2m-1}, p_0..p_{2m-1}).
// Stiff spring i (0-based) couples masses 2i and 2i+1; the cubic
// springs see the differences q_{2j} - q_{2j-1} with fixed ends
// q_{-1} = q_{2m} = 0 folded in.
struct FpuField {
    int m;
    double omega;

    template <class T>
    void operator()(const T&, std::span<const T> y, std::span<T> dy) const {
        const int n = 2 * m;
        const double w2 = 0.5 * omega * omega;
        auto q = [&](int k) -> const T& { return y[static_cast<size_t>(k)]; };
        auto quart = [&](int j) -> T {
            // q_{2j} - q_{2j-1} in 1-based terms; j = 0..m with fixed ends.
            if (j == 0) return q(0);
            if (j == m) return -1.0 * q(n - 1);
            return q(2 * j) - q(2 * j - 1);
        };
        for (int k = 0; k < n; ++k) dy[static_cast<size_t>(k)] = y[static_cast<size_t>(n + k)];
        for (int k = 0; k < n; ++k) {
            T stiff = (k % 2 == 0) ? q(k + 1) - q(k) : q(k) - q(k - 1);
            T grad = (k % 2 == 0) ? w2 * ((-1.0) * stiff) : w2 * stiff;
            T d = (k % 2 == 0) ? quart(k / 2) : quart((k + 1) / 2);
            T d3 = d * d * d;
            grad = (k % 2 == 0) ? grad + 4.0 * d3 : grad - 4.0 * d3;
            dy[static_cast<size_t>(n + k)] = -1.0 * grad;
        }
    }
};

struct FpuEnergy {
    int m;
    double omega;

    template <class T>
    auto operator()(std::span<const T> y) const {
        const int n = 2 * m;
        T acc = 0.5 * (y[static_cast<size_t>(n)] * y[static_cast<size_t>(n)]);
        for (int k = 1; k < n; ++k)
            acc += 0.5 * (y[static_cast<size_t>(n + k)] * y[static_cast<size_t>(n + k)]);
        for (int i = 0; i < m; ++i) {
            T d = y[static_cast<size_t>(2 * i + 1)] - y[static_cast<size_t>(2 * i)];
            acc += 0.25 * omega * omega * (d * d);
        }
        for (int j = 0; j <= m; ++j) {
            T d = (j == 0)   ? y[0]
                  : (j == m) ? -1.0 * y[static_cast<size_t>(n - 1)]
                             : y[static_cast<size_t>(2 * j)] - y[static_cast<size_t>(2 * j - 1)];
            T d2 = d * d;
            acc += d2 * d2;
        }
        return acc;
    }
};

struct CassiniField {
    double a2;

    template <class T>
    void operator()(const T&, std::span<const T> y, std::span<T> dy) const {
        T q = y[0], p = y[1];
        T s = q * q + p * p;
        dy[0] = 4.0 * (p * s) + 4.0 * a2 * p;
        dy[1] = -4.0 * (q * s) + 4.0 * a2 * q;
    }
};

struct CassiniEnergy {
    double a2;

    template <class T>
    auto operator()(std::span<const T> y) const {
        T q = y[0], p = y[1];
        T s = q * q + p * p;
        return s * s - 2.0 * a2 * (q * q - p * p);
    }
};

struct Example1Field {
    template <class T>
    void operator()(const T& t, std::span<const T> y, std::span<T> dy) const {
        dy[0] = (y[0] - 2.0 * (t * (y[0] * y[0]))) / (1.0 + t);
    }
};

// Derivatives of the closed-form solution y(t) = (1+t)/(2.5+t^2) of the
// demo field; valid along that solution curve.
LieDerivatives example1_lie(double t, std::span<const double> y, int k_max) {
    if (k_max > 3) {
        throw std::invalid_argument("demo field closed-form derivatives available up to order 3");
    }
    const double d = 2.5 + t * t;
    const double d2 = d * d, d3 = d2 * d, d4 = d3 * d;
    const double num1 = 2.5 - 2.0 * t - t * t;
    const double y1 = num1 / d2;
    const double y2 = (-2.0 - 2.0 * t) / d2 - 4.0 * t * num1 / d3;
    const double y3 = -2.0 / d2 + (8.0 * t + 8.0 * t * t) / d3 -
                      4.0 * (2.5 - 4.0 * t - 3.0 * t * t) / d3 + 24.0 * t * t * num1 / d4;
    LieDerivatives lie;
    lie.base_state.assign(y.begin(), y.end());
    const double stack[3] = {y1, y2, y3};
    for (int j = 0; j < k_max; ++j) lie.values.push_back(Vec{stack[j]});
    return lie;
}

}  // namespace

double pendulum_period(double q0) {
    if (!(q0 > 0.0) || !(q0 < kPi)) {
        throw std::invalid_argument("pendulum period defined for 0 < q0 < pi");
    }
    const double k = std::sin(0.5 * q0);
    double an = 1.0;
    double bn = std::sqrt(1.0 - k * k);
    // Quadratic convergence; stop once the gap no longer shrinks.
    double gap = an - bn;
    while (true) {
        const double am = 0.5 * (an + bn);
        bn = std::sqrt(an * bn);
        an = am;
        const double next_gap = std::abs(an - bn);
        if (!(next_gap < gap) || next_gap <= 1e-17 * an) break;
        gap = next_gap;
    }
    return 4.0 * (0.5 * kPi / an);
}

HamiltonianSystem pendulum(double q0) {
    HamiltonianSystem sys;
    sys.name = "pendulum";
    sys.dof = 1;
    sys.ode = OdeSystem::from_field("pendulum", 2, true, PendulumField{});
    sys.ode.with_jacobian([](double, std::span<const double> y, Matrix& j) {
        j.setZero();
        j(0, 1) = 1.0;
        j(1, 0) = -std::cos(y[0]);
    });
    sys.ode.with_analytic_lie(pendulum_lie);
    bind_energy(sys, PendulumEnergy{});
    sys.invariants = {{"H", [](std::span<const double> y) { return PendulumEnergy{}(y); }}};
    sys.initial_state = {q0, 0.0};
    sys.period = pendulum_period(q0);
    sys.default_points_per_period = 28;
    return sys;
}

HamiltonianSystem kepler(double e) {
    if (!(e >= 0.0) || !(e < 1.0)) throw std::invalid_argument("eccentricity must satisfy 0 <= e < 1");
    HamiltonianSystem sys;
    sys.name = "kepler";
    sys.dof = 2;
    sys.ode = OdeSystem::from_field("kepler", 4, true, KeplerField{});
    sys.ode.with_jacobian([](double, std::span<const double> y, Matrix& j) {
        const double q1 = y[0], q2 = y[1];
        const double r2 = q1 * q1 + q2 * q2;
        const double r = std::sqrt(r2);
        const double inv_r3 = 1.0 / (r2 * r);
        const double inv_r5 = inv_r3 / r2;
        j.setZero();
        j(0, 2) = 1.0;
        j(1, 3) = 1.0;
        j(2, 0) = -inv_r3 + 3.0 * q1 * q1 * inv_r5;
        j(2, 1) = 3.0 * q1 * q2 * inv_r5;
        j(3, 0) = 3.0 * q1 * q2 * inv_r5;
        j(3, 1) = -inv_r3 + 3.0 * q2 * q2 * inv_r5;
    });
    sys.ode.with_analytic_lie(kepler_lie);
    bind_energy(sys, KeplerEnergy{});

    auto momentum = [](std::span<const double> y) { return y[0] * y[3] - y[1] * y[2]; };
    auto lenz1 = [momentum](std::span<const double> y) {
        return y[3] * momentum(y) - y[0] / std::hypot(y[0], y[1]);
    };
    auto lenz2 = [momentum](std::span<const double> y) {
        return -y[2] * momentum(y) - y[1] / std::hypot(y[0], y[1]);
    };
    sys.invariants = {{"H", [](std::span<const double> y) { return KeplerEnergy{}(y); }},
                      {"M", momentum},
                      {"A1", lenz1},
                      {"A2", lenz2}};
    sys.initial_state = {1.0 - e, 0.0, 0.0, std::sqrt((1.0 + e) / (1.0 - e))};
    sys.period = 2.0 * kPi;
    sys.default_points_per_period = 400;
    return sys;
}

double fpu_spring_energy(std::span<const double> y, int m, double omega, int i) {
    if (i < 1 || i > m) throw std::invalid_argument("spring index out of range");
    const int n = 2 * m;
    const double dp = y[static_cast<size_t>(n + 2 * i - 1)] - y[static_cast<size_t>(n + 2 * i - 2)];
    const double dq = y[static_cast<size_t>(2 * i - 1)] - y[static_cast<size_t>(2 * i - 2)];
    return 0.25 * (dp * dp + omega * omega * dq * dq);
}

double fpu_spring_energy_unsquared(std::span<const double> y, int m, double omega, int i) {
    if (i < 1 || i > m) throw std::invalid_argument("spring index out of range");
    const int n = 2 * m;
    const double dp = y[static_cast<size_t>(n + 2 * i - 1)] - y[static_cast<size_t>(n + 2 * i - 2)];
    const double sq = y[static_cast<size_t>(2 * i - 1)] + y[static_cast<size_t>(2 * i - 2)];
    return 0.25 * (dp * dp + omega * omega * sq);
}

HamiltonianSystem fpu(int m, double omega) {
    if (m < 1) throw std::invalid_argument("fpu needs m >= 1");
    if (!(omega > 0.0)) throw std::invalid_argument("fpu needs omega > 0");
    HamiltonianSystem sys;
    sys.name = "fpu";
    sys.dof = 2 * m;
    sys.ode = OdeSystem::from_field("fpu", 4 * m, true, FpuField{m, omega});
    sys.ode.with_jacobian([m, omega](double, std::span<const double> y, Matrix& j) {
        const int n = 2 * m;
        j.setZero();
        for (int k = 0; k < n; ++k) j(k, n + k) = 1.0;
        // d p'/d q = -Hqq: stiff 2x2 blocks plus cubic-spring couplings.
        Matrix hqq = Matrix::Zero(n, n);
        const double w2 = 0.5 * omega * omega;
        for (int i = 0; i < m; ++i) {
            hqq(2 * i, 2 * i) += w2;
            hqq(2 * i + 1, 2 * i + 1) += w2;
            hqq(2 * i, 2 * i + 1) -= w2;
            hqq(2 * i + 1, 2 * i) -= w2;
        }
        for (int q = 0; q <= m; ++q) {
            const int upper = 2 * q;          // valid when q <= m-1
            const int lower = 2 * q - 1;      // valid when q >= 1
            double d;
            if (q == 0) d = y[0];
            else if (q == m) d = -y[static_cast<size_t>(n - 1)];
            else d = y[static_cast<size_t>(upper)] - y[static_cast<size_t>(lower)];
            const double c = 12.0 * d * d;
            if (q <= m - 1) hqq(upper, upper) += c;
            if (q >= 1) hqq(lower, lower) += c;
            if (q >= 1 && q <= m - 1) {
                hqq(upper, lower) -= c;
                hqq(lower, upper) -= c;
            }
        }
        j.block(n, 0, n, n) = -hqq;
    });
    bind_energy(sys, FpuEnergy{m, omega});

    sys.invariants = {{"H", [m, omega](std::span<const double> y) { return FpuEnergy{m, omega}(y); }}};
    for (int i = 1; i <= m; ++i) {
        sys.invariants.push_back({"I" + std::to_string(i), [m, omega, i](std::span<const double> y) {
                                      return fpu_spring_energy(y, m, omega, i);
                                  }});
    }
    sys.invariants.push_back({"I_total", [m, omega](std::span<const double> y) {
                                  double total = 0.0;
                                  for (int i = 1; i <= m; ++i) total += fpu_spring_energy(y, m, omega, i);
                                  return total;
                              }});

    const double s2 = std::sqrt(2.0);
    Vec q(static_cast<size_t>(2 * m), 0.0), p(static_cast<size_t>(2 * m), 0.0);
    q[0] = s2 / 2.0 - s2 / (2.0 * omega);
    q[1] = s2 / omega + s2 / 2.0 - s2 / (2.0 * omega);
    p[1] = s2;
    sys.initial_state.assign(q.begin(), q.end());
    sys.initial_state.insert(sys.initial_state.end(), p.begin(), p.end());
    sys.default_h = 0.03;
    return sys;
}

double cassini_default_a() { return std::sqrt(2.5); }

std::optional<double> cassini_shape_r(double energy, double a) {
    const double x = 1.0 + energy / (a * a);
    if (x < 0.0) return std::nullopt;
    return std::pow(x, 0.25);
}

HamiltonianSystem cassini(double a, double q0, double p0) {
    if (!(a > 0.0)) throw std::invalid_argument("cassini needs a > 0");
    const double a2 = a * a;
    HamiltonianSystem sys;
    sys.name = "cassini";
    sys.dof = 1;
    sys.ode = OdeSystem::from_field("cassini", 2, true, CassiniField{a2});
    sys.ode.with_jacobian([a2](double, std::span<const double> y, Matrix& j) {
        const double q = y[0], p = y[1];
        j(0, 0) = 8.0 * p * q;
        j(0, 1) = 4.0 * (q * q + 3.0 * p * p) + 4.0 * a2;
        j(1, 0) = -4.0 * (3.0 * q * q + p * p) + 4.0 * a2;
        j(1, 1) = -8.0 * q * p;
    });
    bind_energy(sys, CassiniEnergy{a2});
    sys.invariants = {{"H", [a2](std::span<const double> y) { return CassiniEnergy{a2}(y); }}};
    sys.initial_state = {q0, p0};
    sys.default_h = 1.5e-2;
    return sys;
}

OdeSystem example1_system() {
    OdeSystem sys = OdeSystem::from_field("example1", 1, false, Example1Field{});
    sys.with_jacobian([](double t, std::span<const double> y, Matrix& j) {
        j(0, 0) = (1.0 - 4.0 * t * y[0]) / (1.0 + t);
    });
    sys.with_analytic_lie(example1_lie);
    return sys;
}

std::vector<std::string> problem_names() { return {"pendulum", "kepler", "fpu", "cassini"}; }

HamiltonianSystem make_problem(const std::string& name, const ProblemParams& params) {
    if (name == "pendulum") return pendulum(params.q0.value_or(0.5 * kPi));
    if (name == "kepler") return kepler(params.e);
    if (name == "fpu") return fpu(params.m, params.omega);
    if (name == "cassini") {
        const double a = params.a > 0.0 ? params.a : cassini_default_a();
        return cassini(a, params.q0.value_or(0.0), params.p0.value_or(1e-2));
    }
    std::string known;
    for (const auto& n : problem_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown problem '" + name + "'; known problems: " + known);
}

}  // namespace emint
