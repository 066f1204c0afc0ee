#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "emint/experiments.hpp"
#include "emint/problems.hpp"

namespace emint::cli {

/// Fully resolved invocation of one subcommand. Validation happens in
/// the cmd_* functions so that config errors are reported uniformly.
struct RunConfig {
    std::string problem;  // registry name; deriv-demo uses "example1"
    ProblemParams params;

    std::string method = "em";  // em | gauss | taylor | taylor-implicit
    int order = 4;
    std::string strategy = "b";  // a | b | analytic

    std::optional<double> h;
    std::optional<int> points_per_period;  // N, mesh points per period
    std::optional<double> periods;
    std::optional<long> steps;

    double tol = 1e-14;
    int max_iter = 50;
    int stride = 1;

    std::vector<int> n_list;       // convergence
    std::vector<double> h_list;    // wpd
    std::string invariant;         // convergence target; default per problem
    std::string cache_dir = "ref_cache";

    std::string output;  // CSV path; empty writes to stdout
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Exit codes shared by the subcommands: 0 ok, 2 usage/config error,
/// 3 numerical failure.
int exit_code_for(const std::exception& e);

/// Single integration: CSV rows (step, t, state, per-invariant errors)
/// plus a human-readable summary on `summary`.
int cmd_run(const RunConfig& cfg, std::ostream& summary);

/// Convergence table (N, error, rate) for the configured method.
int cmd_convergence(const RunConfig& cfg, std::ostream& summary);

/// Work-precision sweep (h, time_s, error).
int cmd_wpd(const RunConfig& cfg, std::ostream& summary);

/// Walks through the exact-derivative computation on the built-in demo
/// field, printing micro-states and extracted derivatives per strategy
/// ("a", "b", "analytic", or empty for both difference routes).
int cmd_deriv_demo(const RunConfig& cfg, std::ostream& out);

}  // namespace emint::cli
