#include "emint/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "emint/csv.hpp"
#include "emint/deriv.hpp"

namespace emint::cli {

namespace {

DerivativeStrategy parse_strategy(const std::string& s) {
    if (s == "a") return DerivativeStrategy::ForwardOnState;
    if (s == "b") return DerivativeStrategy::ForwardOnField;
    if (s == "analytic") return DerivativeStrategy::Analytic;
    throw ConfigError("unknown derivative strategy '" + s + "' (use a, b or analytic)");
}

IntegratorSpec build_spec(const RunConfig& cfg, double h) {
    IntegratorSpec spec;
    if (cfg.method == "em") {
        if (cfg.order < 2 || cfg.order % 2 != 0)
            throw ConfigError("Euler-Maclaurin orders are the even numbers >= 2");
        spec = IntegratorSpec::euler_maclaurin(cfg.order / 2, h);
    } else if (cfg.method == "gauss") {
        if (cfg.order != 4 && cfg.order != 6)
            throw ConfigError("Gauss orders available: 4 and 6");
        spec = IntegratorSpec::gauss(cfg.order / 2, h);
    } else if (cfg.method == "taylor") {
        spec = IntegratorSpec::taylor_explicit(cfg.order, h);
    } else if (cfg.method == "taylor-implicit") {
        spec = IntegratorSpec::taylor_implicit(cfg.order, h);
    } else {
        throw ConfigError("unknown method '" + cfg.method +
                          "' (use em, gauss, taylor or taylor-implicit)");
    }
    spec.strategy = parse_strategy(cfg.strategy);
    spec.newton.tol = cfg.tol;
    spec.newton.max_iter = cfg.max_iter;
    if (spec.newton.tol <= 0.0) throw ConfigError("tol must be positive");
    if (spec.newton.max_iter < 1) throw ConfigError("max-iter must be >= 1");
    return spec;
}

struct ResolvedRun {
    HamiltonianSystem problem;
    IntegratorSpec spec;
    long n_steps = 0;
    long steps_per_period = 0;
};

ResolvedRun resolve(const RunConfig& cfg) {
    ResolvedRun run{make_problem(cfg.problem, cfg.params), {}, 0, 0};

    if (cfg.h && cfg.points_per_period) throw ConfigError("give exactly one of h and N");
    double h = 0.0;
    if (cfg.points_per_period) {
        if (*cfg.points_per_period < 1) throw ConfigError("N must be >= 1");
        if (!run.problem.period)
            throw ConfigError("problem '" + cfg.problem + "' has no period; give h instead of N");
        h = *run.problem.period / *cfg.points_per_period;
        run.steps_per_period = *cfg.points_per_period;
    } else if (cfg.h) {
        if (!(*cfg.h > 0.0)) throw ConfigError("h must be positive");
        h = *cfg.h;
        if (run.problem.period) run.steps_per_period = std::llround(*run.problem.period / h);
    } else if (run.problem.default_points_per_period && run.problem.period) {
        h = *run.problem.period / *run.problem.default_points_per_period;
        run.steps_per_period = *run.problem.default_points_per_period;
    } else if (run.problem.default_h) {
        h = *run.problem.default_h;
    } else {
        throw ConfigError("give one of h and N");
    }

    if (cfg.periods && cfg.steps) throw ConfigError("give exactly one of periods and steps");
    if (cfg.periods) {
        if (!run.problem.period) {
            throw ConfigError("problem '" + cfg.problem + "' has no period; give steps instead");
        }
        if (!(*cfg.periods > 0.0)) throw ConfigError("periods must be positive");
        run.n_steps = std::llround(*cfg.periods * *run.problem.period / h);
    } else if (cfg.steps) {
        run.n_steps = *cfg.steps;
    } else {
        throw ConfigError("give one of periods and steps");
    }
    if (run.n_steps < 1) throw ConfigError("the run must make at least one step");
    if (cfg.stride < 1) throw ConfigError("stride must be >= 1");
    if (run.steps_per_period < 1) run.steps_per_period = run.n_steps;

    run.spec = build_spec(cfg, h);
    return run;
}

std::vector<std::string> config_echo(const RunConfig& cfg, const ResolvedRun& run) {
    std::vector<std::string> lines;
    auto kv = [&lines](const std::string& k, const std::string& v) { lines.push_back(k + "=" + v); };
    kv("problem", cfg.problem);
    if (cfg.problem == "kepler") kv("e", csv::format(cfg.params.e));
    if (cfg.problem == "fpu") {
        kv("m", std::to_string(cfg.params.m));
        kv("omega", csv::format(cfg.params.omega));
    }
    if (cfg.problem == "cassini")
        kv("a", csv::format(cfg.params.a > 0.0 ? cfg.params.a : cassini_default_a()));
    if (cfg.params.q0) kv("q0", csv::format(*cfg.params.q0));
    if (cfg.params.p0) kv("p0", csv::format(*cfg.params.p0));
    kv("method", cfg.method);
    kv("order", std::to_string(cfg.order));
    kv("strategy", cfg.strategy);
    kv("h", csv::format(run.spec.h));
    kv("steps", std::to_string(run.n_steps));
    kv("steps-per-period", std::to_string(run.steps_per_period));
    kv("tol", csv::format(cfg.tol));
    kv("max-iter", std::to_string(cfg.max_iter));
    kv("stride", std::to_string(cfg.stride));
    return lines;
}

void write_table(const RunConfig& cfg, const csv::Table& table) {
    if (cfg.output.empty()) {
        csv::write(std::cout, table);
        return;
    }
    std::ofstream out(cfg.output);
    if (!out) throw ConfigError("cannot open output file '" + cfg.output + "'");
    csv::write(out, table);
}

std::vector<std::string> state_column_names(const HamiltonianSystem& problem) {
    std::vector<std::string> names;
    for (int i = 1; i <= problem.dof; ++i) names.push_back("q" + std::to_string(i));
    for (int i = 1; i <= problem.dof; ++i) names.push_back("p" + std::to_string(i));
    return names;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const IntegrationError*>(&e) || dynamic_cast<const NonConvergence*>(&e) ||
        dynamic_cast<const SingularMatrix*>(&e))
        return 3;
    return 2;
}

int cmd_run(const RunConfig& cfg, std::ostream& summary) {
    const ResolvedRun run = resolve(cfg);
    const ExperimentReport report =
        run_experiment(run.problem, run.spec, run.n_steps, run.steps_per_period, cfg.stride);

    csv::Table table;
    table.comments = config_echo(cfg, run);
    table.header = {"step", "t"};
    for (const auto& name : state_column_names(run.problem)) table.header.push_back(name);
    for (const auto& inv : run.problem.invariants) table.header.push_back("err_" + inv.name);

    const Trajectory& traj = report.trajectory;
    std::vector<double> q0;
    for (const auto& series : traj.invariant_series) q0.push_back(series[0]);
    for (size_t row = 1; row < traj.states.size(); ++row) {
        const long step = static_cast<long>(row) * traj.stride;
        std::vector<double> cells{static_cast<double>(step), traj.times[row]};
        cells.insert(cells.end(), traj.states[row].begin(), traj.states[row].end());
        for (size_t j = 0; j < traj.invariant_series.size(); ++j)
            cells.push_back(std::abs(traj.invariant_series[j][static_cast<size_t>(step)] - q0[j]));
        table.rows.push_back(std::move(cells));
    }
    write_table(cfg, table);

    summary << "run " << run.problem.name << " " << report.method << " h=" << csv::format(report.h)
            << " steps=" << report.total_steps << " wall=" << report.wall_seconds << "s\n";
    summary << "  final |y_n - y_0|_1 = " << csv::format(report.final_error) << "\n";
    for (size_t i = 0; i < report.invariant_names.size(); ++i) {
        summary << "  max |" << report.invariant_names[i] << " - "
                << report.invariant_names[i] << "_0| = "
                << csv::format(report.max_invariant_error[i]) << "\n";
    }
    return 0;
}

int cmd_convergence(const RunConfig& cfg, std::ostream& summary) {
    if (cfg.n_list.empty()) throw ConfigError("give an N list, e.g. --N-list 32,64,128");
    RunConfig base = cfg;
    base.points_per_period = cfg.n_list.front();
    if (!base.periods && !base.steps) base.periods = 10.0;
    const ResolvedRun run = resolve(base);

    std::string invariant = cfg.invariant;
    if (invariant.empty()) invariant = cfg.problem == "kepler" ? "M" : "H";
    const int periods = static_cast<int>(base.periods.value_or(10.0));

    const auto rows = convergence_study(run.problem, run.spec, cfg.n_list, periods, invariant);

    csv::Table table;
    table.comments = config_echo(cfg, run);
    table.comments.push_back("invariant=" + invariant);
    table.comments.push_back("periods=" + std::to_string(periods));
    table.header = {"N", "error", "rate"};
    for (const auto& row : rows) {
        if (!row.failure.empty()) {
            table.comments.push_back("N=" + std::to_string(row.n) + " failed: " + row.failure);
            continue;
        }
        table.rows.push_back({static_cast<double>(row.n), row.error, row.rate});
    }
    write_table(cfg, table);

    summary << "convergence " << run.problem.name << " " << run.spec.label() << " invariant "
            << invariant << " over " << periods << " periods\n";
    for (const auto& row : rows) {
        summary << "  N=" << row.n;
        if (!row.failure.empty())
            summary << " failed: " << row.failure << "\n";
        else if (std::isnan(row.rate))
            summary << " error=" << csv::format(row.error) << "\n";
        else
            summary << " error=" << csv::format(row.error) << " rate=" << row.rate << "\n";
    }
    return 0;
}

int cmd_wpd(const RunConfig& cfg, std::ostream& summary) {
    if (cfg.h_list.empty()) throw ConfigError("give an h list, e.g. --h-list 0.2,0.1,0.05");
    RunConfig base = cfg;
    base.h = cfg.h_list.front();
    if (!base.periods && !base.steps) base.periods = 10.0;
    const ResolvedRun run = resolve(base);
    const double t_end = static_cast<double>(run.n_steps) * run.spec.h;

    const auto points = work_precision(run.problem, run.spec, cfg.h_list, t_end, cfg.cache_dir);

    csv::Table table;
    table.comments = config_echo(cfg, run);
    table.comments.push_back("t_end=" + csv::format(t_end));
    table.header = {"h", "time_s", "error"};
    for (const auto& p : points) table.rows.push_back({p.h, p.seconds, p.error});
    write_table(cfg, table);

    summary << "wpd " << run.problem.name << " " << run.spec.label() << " to t=" << t_end << "\n";
    for (const auto& p : points)
        summary << "  h=" << csv::format(p.h) << " time=" << p.seconds
                << "s error=" << csv::format(p.error) << "\n";
    return 0;
}

namespace {

void demo_forward_on_state(const OdeSystem& sys, std::ostream& out) {
    out << "forward differences of micro-states (depth 3):\n";
    const Vec y0{0.4};
    const auto states = euler_microsteps(sys, 0.0, y0, 3, 3);
    for (size_t j = 0; j < states.size(); ++j)
        out << "  y_" << j << " = " << to_string(states[j][0]) << "\n";
    const auto lie = derivatives_strategy_a(sys, 0.0, y0, 3);
    for (int k = 1; k <= 3; ++k) {
        const auto diff = forward_difference(
            std::span<const GrossVector>(states.data(), static_cast<size_t>(k) + 1), k);
        out << "  F^" << k << " = " << to_string(diff[0]) << "  ->  y^(" << k
            << ")(0) = " << csv::format(lie.values[static_cast<size_t>(k - 1)][0]) << "\n";
    }
}

void demo_forward_on_field(const OdeSystem& sys, std::ostream& out) {
    out << "forward differences of field values (depth 2):\n";
    const Vec y0{0.4};
    const auto states = euler_microsteps(sys, 0.0, y0, 2, 2);
    std::vector<GrossVector> f_values;
    for (size_t j = 0; j < states.size(); ++j) {
        GrossValue t = GrossValue::from_coeffs({0.0, static_cast<double>(j), 0.0});
        GrossVector f(1, 2);
        sys.eval(t, states[j].entries(), f.entries());
        out << "  f(t_" << j << ", y_" << j << ") = " << to_string(f[0]) << "\n";
        f_values.push_back(std::move(f));
    }
    const auto lie = derivatives_strategy_b(sys, 0.0, y0, 3);
    for (int k = 1; k <= 3; ++k) {
        const auto diff = forward_difference(
            std::span<const GrossVector>(f_values.data(), static_cast<size_t>(k)), k - 1);
        out << "  F^" << (k - 1) << "[f] = " << to_string(diff[0]) << "  ->  y^(" << k
            << ")(0) = " << csv::format(lie.values[static_cast<size_t>(k - 1)][0]) << "\n";
    }
}

void demo_analytic(const OdeSystem& sys, std::ostream& out) {
    out << "closed-form derivatives of the demo solution:\n";
    const auto lie = lie_derivatives(sys, 0.0, Vec{0.4}, 3, DerivativeStrategy::Analytic);
    for (int k = 1; k <= 3; ++k)
        out << "  y^(" << k << ")(0) = " << csv::format(lie.values[static_cast<size_t>(k - 1)][0])
            << "\n";
}

}  // namespace

int cmd_deriv_demo(const RunConfig& cfg, std::ostream& out) {
    const OdeSystem sys = example1_system();
    out << "y' = (y - 2ty^2)/(1+t), y(0) = 0.4; derivatives at t = 0\n";
    if (cfg.strategy.empty()) {
        demo_forward_on_state(sys, out);
        demo_forward_on_field(sys, out);
    } else if (cfg.strategy == "a") {
        demo_forward_on_state(sys, out);
    } else if (cfg.strategy == "b") {
        demo_forward_on_field(sys, out);
    } else if (cfg.strategy == "analytic") {
        demo_analytic(sys, out);
    } else {
        throw ConfigError("unknown derivative strategy '" + cfg.strategy + "'");
    }
    return 0;
}

}  // namespace emint::cli
