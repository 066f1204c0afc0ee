#pragma once

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "emint/deriv.hpp"
#include "emint/ode_system.hpp"

namespace emint {

/// Stopping rule for the modified Newton iteration: the increment's
/// max-norm, scaled per component by 1 + |y0_i|, must fall below tol.
struct NewtonConfig {
    enum class JacobianRefresh { PerStep, Frozen };

    double tol = 1e-14;
    int max_iter = 50;
    JacobianRefresh refresh = JacobianRefresh::PerStep;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(std::string msg, int iterations, double last_increment, Vec last_iterate)
        : std::runtime_error(std::move(msg)),
          iterations(iterations),
          last_increment(last_increment),
          last_iterate(std::move(last_iterate)) {}

    int iterations;
    double last_increment;
    Vec last_iterate;
};

class SingularMatrix : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(std::string msg, long step_index)
        : std::runtime_error(std::move(msg)), step_index(step_index) {}

    long step_index;
};

/// Even Bernoulli numbers as exact rationals rendered to double;
/// bernoulli_even(k) = B_{2k} for 1 <= k <= 8, so B_2 = 1/6,
/// B_4 = -1/30, B_6 = 1/42, B_8 = -1/30, ...
double bernoulli_even(int k);

/// One-step method identity plus everything needed to run it.
struct IntegratorSpec {
    enum class Method { EulerMaclaurin, Gauss, TaylorExplicit, TaylorImplicit };

    Method method = Method::EulerMaclaurin;
    int param = 1;  // s for Euler-Maclaurin, stages for Gauss, p for Taylor
    double h = 0.0;
    DerivativeStrategy strategy = DerivativeStrategy::ForwardOnField;
    NewtonConfig newton;

    static IntegratorSpec euler_maclaurin(int s, double h);
    static IntegratorSpec gauss(int stages, double h);
    static IntegratorSpec taylor_explicit(int p, double h);
    static IntegratorSpec taylor_implicit(int p, double h);

    /// Order of accuracy: 2s for Euler-Maclaurin (s = 1 is the
    /// trapezoidal rule), 2*stages for Gauss, p for Taylor.
    int order() const;
    std::string label() const;
};

/// Defect of a candidate step of the order-2s Euler-Maclaurin method:
///
///   R = y1 - y0 - h/2 (f(y1) + f(y0))
///       + sum_{k=1}^{s-1} h^{2k} B_{2k}/(2k)! (D_{2k-1}f(y1) - D_{2k-1}f(y0)),
///
/// zero exactly when y1 is the step. lie0/lie1 must hold D_0..D_{2s-3}f
/// (just f for s = 1) at y0 and the candidate.
Vec em_residual(std::span<const double> y0, std::span<const double> y1, double h, int s,
                const LieDerivatives& lie0, const LieDerivatives& lie1);

struct NewtonResult {
    Vec x;
    int iterations = 0;
    double last_increment = 0.0;
};

/// LU factorization that rejects singular matrices up front.
Eigen::PartialPivLU<Matrix> factor_iteration_matrix(const Matrix& m);

/// Newton iteration with a frozen iteration matrix, factored once by
/// the caller and reused across iterations. Scale holds the reference
/// state for the increment norm. Raises NonConvergence when max_iter is
/// exhausted or the increment norm stops decreasing above tol for 3
/// consecutive iterations.
NewtonResult modified_newton_solve(const std::function<Vec(std::span<const double>)>& residual,
                                   const Eigen::PartialPivLU<Matrix>& iteration_matrix,
                                   std::span<const double> predictor,
                                   std::span<const double> scale, const NewtonConfig& cfg);

/// Reusable one-step engine; owns the Newton workspace and, in Frozen
/// mode, the iteration matrix factored on the first step.
class Stepper {
public:
    Stepper(const OdeSystem& system, IntegratorSpec spec);

    Vec step(double t, std::span<const double> y0);

    const IntegratorSpec& spec() const { return spec_; }
    int last_newton_iterations() const { return last_newton_iterations_; }

private:
    Vec step_euler_maclaurin(double t, std::span<const double> y0);
    Vec step_gauss(double t, std::span<const double> y0);
    Vec step_taylor(double t, std::span<const double> y0, bool implicit);

    const Eigen::PartialPivLU<Matrix>& frozen_or_fresh(const Matrix& m);

    const OdeSystem* system_;
    IntegratorSpec spec_;
    Matrix jac_;
    Eigen::PartialPivLU<Matrix> lu_;
    bool lu_ready_ = false;
    int last_newton_iterations_ = 0;
};

Vec em_step(const OdeSystem& system, double t, std::span<const double> y0,
            const IntegratorSpec& spec);
Vec gauss_step(const OdeSystem& system, double t, std::span<const double> y0,
               const IntegratorSpec& spec);
Vec taylor_step(const OdeSystem& system, double t, std::span<const double> y0,
                const IntegratorSpec& spec);

/// Named scalar function sampled along the trajectory every step.
struct Observer {
    std::string name;
    std::function<double(std::span<const double>)> fn;
};

/// Fixed-stepsize trajectory. States are recorded every `stride` steps
/// (index 0 included) to bound memory; observer samples are kept for
/// every step; the final state is always available.
struct Trajectory {
    double t0 = 0.0;
    double h = 0.0;
    long n_steps = 0;
    int stride = 1;
    std::vector<double> times;
    std::vector<Vec> states;
    Vec final_state;
    std::vector<std::string> invariant_names;
    std::vector<std::vector<double>> invariant_series;  // per name, n_steps+1 samples

    const std::vector<double>& invariant(std::string_view name) const;
};

Trajectory integrate(const OdeSystem& system, double t0, std::span<const double> y0,
                     const IntegratorSpec& spec, long n_steps,
                     std::span<const Observer> observers = {}, int stride = 1);

}  // namespace emint
