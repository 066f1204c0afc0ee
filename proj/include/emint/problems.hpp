#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emint/integrators.hpp"
#include "emint/ode_system.hpp"

namespace emint {

/// A canonical Hamiltonian system y' = J grad H(y) with y = (q, p),
/// q, p in R^m, together with its first integrals and canonical initial
/// data. The field, energy and Jacobian are consistent by construction
/// and checked against finite differences in the test suite.
struct HamiltonianSystem {
    std::string name;
    int dof = 0;  // m; the state dimension is 2m
    OdeSystem ode;
    std::function<double(std::span<const double>)> energy;
    std::function<GrossValue(std::span<const GrossValue>)> energy_gross;
    std::vector<Observer> invariants;  // "H" first

    Vec initial_state;
    std::optional<double> period;
    std::optional<int> default_points_per_period;
    std::optional<double> default_h;

    int dim() const { return 2 * dof; }
};

/// Planar pendulum, H = p^2/2 - cos q, oscillating start (q0, 0).
HamiltonianSystem pendulum(double q0 = 1.5707963267948966);

/// Oscillation period for the start (q0, 0), 0 < q0 < pi, via the
/// complete elliptic integral of the first kind evaluated with the
/// arithmetic-geometric mean.
double pendulum_period(double q0);

/// Two-body problem with eccentricity 0 <= e < 1; invariants H, the
/// angular momentum M and the two in-plane Lenz components. Period 2*pi.
HamiltonianSystem kepler(double e);

/// Chain of 2m unit masses with alternating stiff linear springs
/// (frequency omega) and weak cubic springs, fixed ends. Invariants: H,
/// the per-spring oscillatory energies I1..Im and their sum I_total.
HamiltonianSystem fpu(int m, double omega);

/// Oscillatory energy of stiff spring i (1-based), the quarter-sum of
/// squared momentum and position differences across the spring.
double fpu_spring_energy(std::span<const double> y, int m, double omega, int i);

/// Same quantity with the position term entering unsquared and with a
/// plus sign; kept for comparison, not a first integral (see tests).
double fpu_spring_energy_unsquared(std::span<const double> y, int m, double omega, int i);

/// Non-separable system whose level curves are Cassini ovals,
/// H = (q^2+p^2)^2 - 2a^2(q^2-p^2).
HamiltonianSystem cassini(double a, double q0 = 0.0, double p0 = 1e-2);

/// Default oval parameter: a^2 = 2.5.
double cassini_default_a();

/// Shape classifier r = (1 + H/a^2)^(1/4): r < 1 one-lobe orbits, r > 1
/// orbits embracing both foci, r = 1 the separatrix. Empty when
/// 1 + H/a^2 < 0 (no real r).
std::optional<double> cassini_shape_r(double energy, double a);

/// Scalar non-autonomous demo field y' = (y - 2ty^2)/(1+t) whose
/// solution through (0, 0.4) is known in closed form; its first three
/// derivatives are available analytically along that solution.
OdeSystem example1_system();

/// Names accepted by make_problem.
std::vector<std::string> problem_names();

struct ProblemParams {
    double e = 0.6;        // kepler eccentricity
    int m = 3;             // fpu spring pairs
    double omega = 50.0;   // fpu stiffness
    double a = 0.0;        // cassini parameter; 0 means default
    std::optional<double> q0;  // pendulum angle / cassini q start
    std::optional<double> p0;  // cassini p start
};

/// Problem registry; throws std::invalid_argument listing the known
/// names when `name` is not one of them.
HamiltonianSystem make_problem(const std::string& name, const ProblemParams& params = {});

}  // namespace emint
