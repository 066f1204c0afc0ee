#pragma once

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emint/integrators.hpp"
#include "emint/problems.hpp"

namespace emint {

/// 1-norm solution errors at period boundaries: element k-1 holds
/// ||y_{k*steps_per_period} - y0||_1. The trajectory's state stride and
/// length must both align with the period sampling.
std::vector<double> periodic_error_series(const Trajectory& traj, std::span<const double> y0,
                                          long steps_per_period);

/// Per-period running maxima of |Q(y_n) - Q(y_0)| for the named
/// invariant sampled during integration.
std::vector<double> invariant_error_series(const Trajectory& traj, std::string_view name,
                                           long steps_per_period);

struct ConvergenceRow {
    int n = 0;           // mesh points per period
    double error = 0.0;  // max invariant error over the whole interval
    double rate = std::numeric_limits<double>::quiet_NaN();  // NaN in the first row
    std::string failure;  // non-empty when this cell failed to integrate
};

/// Dyadic convergence table for one method on one problem: for each N
/// integrate `periods` periods at h = T/N and record the max error of
/// the target invariant; rates use log(e_prev/e)/log(N/N_prev).
/// Cells run concurrently; a failing cell is reported in its row.
std::vector<ConvergenceRow> convergence_study(const HamiltonianSystem& problem,
                                              IntegratorSpec proto, std::span<const int> n_list,
                                              int periods, std::string_view invariant);

struct WorkPrecisionPoint {
    double h = 0.0;
    double seconds = 0.0;  // best of 3 repetitions, monotonic clock
    double error = 0.0;    // final-state 1-norm error against the reference
};

/// Runtime/accuracy sweep. The reference for each h is the same problem
/// integrated to the same horizon with the 3-stage Gauss method at
/// stepsize h/20, cached under cache_dir (empty string disables the
/// cache).
std::vector<WorkPrecisionPoint> work_precision(const HamiltonianSystem& problem,
                                               IntegratorSpec proto, std::span<const double> h_list,
                                               double t_end, const std::string& cache_dir);

/// Summary of one integration run at desk scale.
struct ExperimentReport {
    std::string problem;
    std::string method;
    double h = 0.0;
    long total_steps = 0;
    long steps_per_period = 0;
    double wall_seconds = 0.0;
    std::vector<double> solution_error_per_period;
    std::vector<std::string> invariant_names;
    std::vector<std::vector<double>> invariant_error_per_period;
    double final_error = 0.0;                 // ||y_n - y0||_1
    std::vector<double> max_invariant_error;  // per invariant, whole run

    Trajectory trajectory;  // states at the requested stride
};

/// Runs the problem and assembles the standard error/conservation
/// series. steps_per_period controls the chunking of the per-period
/// series and must divide total_steps.
ExperimentReport run_experiment(const HamiltonianSystem& problem, const IntegratorSpec& spec,
                                long total_steps, long steps_per_period, int stride = 1);

/// Least-squares slope of log(error) against log(N) — the fitted
/// convergence order of a table with errors e(N) ~ N^-p.
double fitted_order(std::span<const ConvergenceRow> rows);

}  // namespace emint
