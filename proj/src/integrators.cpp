#include "emint/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace emint {

namespace {

using EVec = Eigen::VectorXd;

EVec to_eigen(std::span<const double> v) {
    return Eigen::Map<const EVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vec to_vec(const EVec& v) { return Vec(v.data(), v.data() + v.size()); }

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

int em_derivative_order(int s) { return s == 1 ? 1 : 2 * s - 2; }

}  // namespace

double bernoulli_even(int k) {
    // B_2..B_16 exactly; enough for Euler-Maclaurin orders up to 18.
    static const double table[] = {1.0 / 6.0,        -1.0 / 30.0, 1.0 / 42.0,
                                   -1.0 / 30.0,      5.0 / 66.0,  -691.0 / 2730.0,
                                   7.0 / 6.0,        -3617.0 / 510.0};
    if (k < 1 || k > 8) {
        throw std::invalid_argument("Bernoulli table covers B_2..B_16 (k = 1..8), got k = " +
                                    std::to_string(k));
    }
    return table[k - 1];
}

IntegratorSpec IntegratorSpec::euler_maclaurin(int s, double h) {
    if (s < 1) throw std::invalid_argument("Euler-Maclaurin needs s >= 1");
    if (s > 9) throw std::invalid_argument("Euler-Maclaurin limited to s <= 9 by the Bernoulli table");
    if (!(h != 0.0) || !std::isfinite(h)) throw std::invalid_argument("stepsize must be nonzero and finite");
    return {Method::EulerMaclaurin, s, h, DerivativeStrategy::ForwardOnField, {}};
}

IntegratorSpec IntegratorSpec::gauss(int stages, double h) {
    if (stages != 2 && stages != 3) throw std::invalid_argument("Gauss supports 2 or 3 stages");
    if (!(h != 0.0) || !std::isfinite(h)) throw std::invalid_argument("stepsize must be nonzero and finite");
    return {Method::Gauss, stages, h, DerivativeStrategy::ForwardOnField, {}};
}

IntegratorSpec IntegratorSpec::taylor_explicit(int p, double h) {
    if (p < 1) throw std::invalid_argument("Taylor needs order p >= 1");
    if (!(h != 0.0) || !std::isfinite(h)) throw std::invalid_argument("stepsize must be nonzero and finite");
    return {Method::TaylorExplicit, p, h, DerivativeStrategy::ForwardOnField, {}};
}

IntegratorSpec IntegratorSpec::taylor_implicit(int p, double h) {
    IntegratorSpec spec = taylor_explicit(p, h);
    spec.method = Method::TaylorImplicit;
    return spec;
}

int IntegratorSpec::order() const {
    switch (method) {
        case Method::EulerMaclaurin: return 2 * param;
        case Method::Gauss: return 2 * param;
        case Method::TaylorExplicit:
        case Method::TaylorImplicit: return param;
    }
    return 0;
}

std::string IntegratorSpec::label() const {
    switch (method) {
        case Method::EulerMaclaurin: return "em" + std::to_string(order());
        case Method::Gauss: return "gauss" + std::to_string(order());
        case Method::TaylorExplicit: return "taylor" + std::to_string(param);
        case Method::TaylorImplicit: return "taylor" + std::to_string(param) + "-implicit";
    }
    return "?";
}

Vec em_residual(std::span<const double> y0, std::span<const double> y1, double h, int s,
                const LieDerivatives& lie0, const LieDerivatives& lie1) {
    const size_t n = y0.size();
    if (lie0.order() < em_derivative_order(s) || lie1.order() < em_derivative_order(s)) {
        throw std::invalid_argument("Euler-Maclaurin s = " + std::to_string(s) + " needs " +
                                    std::to_string(em_derivative_order(s)) + " derivative orders");
    }
    Vec r(n);
    const Vec& f0 = lie0.values[0];
    const Vec& f1 = lie1.values[0];
    for (size_t i = 0; i < n; ++i) r[i] = y1[i] - y0[i] - 0.5 * h * (f1[i] + f0[i]);
    for (int k = 1; k <= s - 1; ++k) {
        const double w = std::pow(h, 2 * k) * bernoulli_even(k) / factorial(2 * k);
        const Vec& d0 = lie0.values[static_cast<size_t>(2 * k - 1)];
        const Vec& d1 = lie1.values[static_cast<size_t>(2 * k - 1)];
        for (size_t i = 0; i < n; ++i) r[i] += w * (d1[i] - d0[i]);
    }
    return r;
}

Eigen::PartialPivLU<Matrix> factor_iteration_matrix(const Matrix& m) {
    if (!m.allFinite()) throw SingularMatrix("iteration matrix has non-finite entries");
    Eigen::PartialPivLU<Matrix> lu(m);
    const double det = lu.determinant();
    if (det == 0.0 || !std::isfinite(det)) throw SingularMatrix("iteration matrix is singular");
    return lu;
}

NewtonResult modified_newton_solve(const std::function<Vec(std::span<const double>)>& residual,
                                   const Eigen::PartialPivLU<Matrix>& iteration_matrix,
                                   std::span<const double> predictor,
                                   std::span<const double> scale, const NewtonConfig& cfg) {
    if (!all_finite(predictor)) throw std::invalid_argument("Newton predictor is not finite");
    if (cfg.tol <= 0.0) throw std::invalid_argument("Newton tol must be positive");
    if (cfg.max_iter < 1) throw std::invalid_argument("Newton max_iter must be >= 1");

    Vec x(predictor.begin(), predictor.end());
    double prev_norm = std::numeric_limits<double>::infinity();
    int stalled = 0;

    for (int it = 1; it <= cfg.max_iter; ++it) {
        const Vec r = residual(x);
        const EVec dx = iteration_matrix.solve(to_eigen(r));
        double norm = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            x[i] -= dx[static_cast<Eigen::Index>(i)];
            norm = std::max(norm, std::abs(dx[static_cast<Eigen::Index>(i)]) / (1.0 + std::abs(scale[i])));
        }
        if (!std::isfinite(norm)) {
            throw NonConvergence("Newton iterate diverged (non-finite increment)", it, norm, x);
        }
        if (norm <= cfg.tol) return {std::move(x), it, norm};

        // Stagnating above tol for 3 consecutive iterations: bail out
        // instead of spending the whole budget.
        stalled = (norm >= prev_norm) ? stalled + 1 : 0;
        if (stalled >= 3) {
            throw NonConvergence("Newton stagnated at increment " + std::to_string(norm), it, norm, x);
        }
        prev_norm = norm;
    }
    throw NonConvergence("Newton did not converge in " + std::to_string(cfg.max_iter) +
                             " iterations (last increment " + std::to_string(prev_norm) + ")",
                         cfg.max_iter, prev_norm, x);
}

Stepper::Stepper(const OdeSystem& system, IntegratorSpec spec)
    : system_(&system), spec_(std::move(spec)) {}

const Eigen::PartialPivLU<Matrix>& Stepper::frozen_or_fresh(const Matrix& m) {
    if (spec_.newton.refresh == NewtonConfig::JacobianRefresh::Frozen && lu_ready_) return lu_;
    lu_ = factor_iteration_matrix(m);
    lu_ready_ = true;
    return lu_;
}

Vec Stepper::step_euler_maclaurin(double t, std::span<const double> y0) {
    const int s = spec_.param;
    const double h = spec_.h;
    const int k_max = em_derivative_order(s);
    const LieDerivatives lie0 = lie_derivatives(*system_, t, y0, k_max, spec_.strategy);

    Vec predictor(y0.begin(), y0.end());
    for (size_t i = 0; i < predictor.size(); ++i) predictor[i] += h * lie0.values[0][i];

    system_->jacobian(t, y0, jac_);
    const Matrix m = Matrix::Identity(system_->dim(), system_->dim()) - 0.5 * h * jac_;
    const auto& lu = frozen_or_fresh(m);

    auto residual = [&](std::span<const double> y1) {
        const LieDerivatives lie1 = lie_derivatives(*system_, t + h, y1, k_max, spec_.strategy);
        return em_residual(y0, y1, h, s, lie0, lie1);
    };
    NewtonResult res = modified_newton_solve(residual, lu, predictor, y0, spec_.newton);
    last_newton_iterations_ = res.iterations;
    return std::move(res.x);
}

namespace {

struct GaussTableau {
    int stages;
    double a[3][3];
    double b[3];
    double c[3];
};

const GaussTableau& gauss_tableau(int stages) {
    static const double s3 = std::sqrt(3.0);
    static const GaussTableau two{
        2,
        {{0.25, 0.25 - s3 / 6.0, 0.0}, {0.25 + s3 / 6.0, 0.25, 0.0}, {0.0, 0.0, 0.0}},
        {0.5, 0.5, 0.0},
        {0.5 - s3 / 6.0, 0.5 + s3 / 6.0, 0.0}};
    static const double s15 = std::sqrt(15.0);
    static const GaussTableau three{
        3,
        {{5.0 / 36.0, 2.0 / 9.0 - s15 / 15.0, 5.0 / 36.0 - s15 / 30.0},
         {5.0 / 36.0 + s15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - s15 / 24.0},
         {5.0 / 36.0 + s15 / 30.0, 2.0 / 9.0 + s15 / 15.0, 5.0 / 36.0}},
        {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0},
        {0.5 - s15 / 10.0, 0.5, 0.5 + s15 / 10.0}};
    if (stages == 2) return two;
    if (stages == 3) return three;
    throw std::invalid_argument("Gauss supports 2 or 3 stages");
}

}  // namespace

Vec Stepper::step_gauss(double t, std::span<const double> y0) {
    const GaussTableau& tab = gauss_tableau(spec_.param);
    const int ns = tab.stages;
    const int n = system_->dim();
    const double h = spec_.h;

    const Vec f0 = system_->eval(t, y0);

    // Stage increments Z_i = Y_i - y0, stacked; simplified Newton with
    // the Jacobian frozen at y0.
    system_->jacobian(t, y0, jac_);
    Matrix m = Matrix::Identity(ns * n, ns * n);
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j)
            m.block(i * n, j * n, n, n) -= h * tab.a[i][j] * jac_;
    const auto& lu = frozen_or_fresh(m);

    Vec predictor(static_cast<size_t>(ns * n));
    Vec scale(static_cast<size_t>(ns * n));
    for (int i = 0; i < ns; ++i)
        for (int k = 0; k < n; ++k) {
            predictor[static_cast<size_t>(i * n + k)] = tab.c[i] * h * f0[static_cast<size_t>(k)];
            scale[static_cast<size_t>(i * n + k)] = y0[static_cast<size_t>(k)];
        }

    Vec stage_y(static_cast<size_t>(n));
    std::vector<Vec> stage_f(static_cast<size_t>(ns), Vec(static_cast<size_t>(n)));
    auto eval_stage_fields = [&](std::span<const double> z) {
        for (int j = 0; j < ns; ++j) {
            for (int k = 0; k < n; ++k)
                stage_y[static_cast<size_t>(k)] = y0[static_cast<size_t>(k)] + z[static_cast<size_t>(j * n + k)];
            system_->eval(t + tab.c[j] * h, stage_y, stage_f[static_cast<size_t>(j)]);
        }
    };
    auto residual = [&](std::span<const double> z) {
        eval_stage_fields(z);
        Vec r(z.begin(), z.end());
        for (int i = 0; i < ns; ++i)
            for (int j = 0; j < ns; ++j) {
                const double w = h * tab.a[i][j];
                for (int k = 0; k < n; ++k)
                    r[static_cast<size_t>(i * n + k)] -= w * stage_f[static_cast<size_t>(j)][static_cast<size_t>(k)];
            }
        return r;
    };

    NewtonResult res = modified_newton_solve(residual, lu, predictor, scale, spec_.newton);
    last_newton_iterations_ = res.iterations;

    eval_stage_fields(res.x);
    Vec y1(y0.begin(), y0.end());
    for (int j = 0; j < ns; ++j)
        for (int k = 0; k < n; ++k)
            y1[static_cast<size_t>(k)] += h * tab.b[j] * stage_f[static_cast<size_t>(j)][static_cast<size_t>(k)];
    return y1;
}

Vec Stepper::step_taylor(double t, std::span<const double> y0, bool implicit) {
    const int p = spec_.param;
    const double h = spec_.h;
    const size_t n = y0.size();

    if (!implicit) {
        const LieDerivatives lie0 = lie_derivatives(*system_, t, y0, p, spec_.strategy);
        Vec y1(y0.begin(), y0.end());
        double hj = 1.0;
        for (int j = 1; j <= p; ++j) {
            hj *= h / j;
            const Vec& d = lie0.values[static_cast<size_t>(j - 1)];
            for (size_t i = 0; i < n; ++i) y1[i] += hj * d[i];
        }
        last_newton_iterations_ = 0;
        return y1;
    }

    const Vec f0 = system_->eval(t, y0);
    Vec predictor(y0.begin(), y0.end());
    for (size_t i = 0; i < n; ++i) predictor[i] += h * f0[i];

    system_->jacobian(t, y0, jac_);
    const Matrix m = Matrix::Identity(system_->dim(), system_->dim()) - h * jac_;
    const auto& lu = frozen_or_fresh(m);

    auto residual = [&](std::span<const double> y1) {
        const LieDerivatives lie1 = lie_derivatives(*system_, t + h, y1, p, spec_.strategy);
        Vec r(y1.begin(), y1.end());
        for (size_t i = 0; i < n; ++i) r[i] -= y0[i];
        double hj = 1.0;
        for (int j = 1; j <= p; ++j) {
            hj *= -h / j;
            const Vec& d = lie1.values[static_cast<size_t>(j - 1)];
            for (size_t i = 0; i < n; ++i) r[i] += hj * d[i];
        }
        return r;
    };
    NewtonResult res = modified_newton_solve(residual, lu, predictor, y0, spec_.newton);
    last_newton_iterations_ = res.iterations;
    return std::move(res.x);
}

Vec Stepper::step(double t, std::span<const double> y0) {
    switch (spec_.method) {
        case IntegratorSpec::Method::EulerMaclaurin: return step_euler_maclaurin(t, y0);
        case IntegratorSpec::Method::Gauss: return step_gauss(t, y0);
        case IntegratorSpec::Method::TaylorExplicit: return step_taylor(t, y0, false);
        case IntegratorSpec::Method::TaylorImplicit: return step_taylor(t, y0, true);
    }
    throw std::invalid_argument("unknown method");
}

Vec em_step(const OdeSystem& system, double t, std::span<const double> y0,
            const IntegratorSpec& spec) {
    if (spec.method != IntegratorSpec::Method::EulerMaclaurin)
        throw std::invalid_argument("spec is not an Euler-Maclaurin method");
    return Stepper(system, spec).step(t, y0);
}

Vec gauss_step(const OdeSystem& system, double t, std::span<const double> y0,
               const IntegratorSpec& spec) {
    if (spec.method != IntegratorSpec::Method::Gauss)
        throw std::invalid_argument("spec is not a Gauss method");
    return Stepper(system, spec).step(t, y0);
}

Vec taylor_step(const OdeSystem& system, double t, std::span<const double> y0,
                const IntegratorSpec& spec) {
    if (spec.method != IntegratorSpec::Method::TaylorExplicit &&
        spec.method != IntegratorSpec::Method::TaylorImplicit)
        throw std::invalid_argument("spec is not a Taylor method");
    return Stepper(system, spec).step(t, y0);
}

const std::vector<double>& Trajectory::invariant(std::string_view name) const {
    for (size_t i = 0; i < invariant_names.size(); ++i) {
        if (invariant_names[i] == name) return invariant_series[i];
    }
    throw std::invalid_argument("trajectory has no invariant named '" + std::string(name) + "'");
}

Trajectory integrate(const OdeSystem& system, double t0, std::span<const double> y0,
                     const IntegratorSpec& spec, long n_steps,
                     std::span<const Observer> observers, int stride) {
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (static_cast<int>(y0.size()) != system.dim())
        throw std::invalid_argument("initial state dimension mismatch");

    Trajectory traj;
    traj.t0 = t0;
    traj.h = spec.h;
    traj.n_steps = n_steps;
    traj.stride = stride;
    traj.times.push_back(t0);
    traj.states.emplace_back(y0.begin(), y0.end());
    for (const Observer& obs : observers) {
        traj.invariant_names.push_back(obs.name);
        traj.invariant_series.emplace_back();
        traj.invariant_series.back().reserve(static_cast<size_t>(n_steps) + 1);
        traj.invariant_series.back().push_back(obs.fn(y0));
    }

    Stepper stepper(system, spec);
    Vec y(y0.begin(), y0.end());
    for (long i = 1; i <= n_steps; ++i) {
        const double t = t0 + static_cast<double>(i - 1) * spec.h;
        try {
            y = stepper.step(t, y);
        } catch (const NonConvergence& e) {
            std::ostringstream msg;
            msg << "step " << i << " (t = " << t << ") failed: " << e.what() << " after "
                << e.iterations << " Newton iterations, last increment " << e.last_increment;
            throw IntegrationError(msg.str(), i);
        } catch (const std::exception& e) {
            throw IntegrationError("step " + std::to_string(i) + " (t = " + std::to_string(t) +
                                       ") failed: " + e.what(),
                                   i);
        }
        for (size_t j = 0; j < traj.invariant_series.size(); ++j)
            traj.invariant_series[j].push_back(observers[j].fn(y));
        if (i % stride == 0) {
            traj.times.push_back(t0 + static_cast<double>(i) * spec.h);
            traj.states.push_back(y);
        }
    }
    traj.final_state = std::move(y);
    return traj;
}

}  // namespace emint
