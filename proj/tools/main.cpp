#include <CLI11.hpp>

#include <iostream>

#include "emint/cli.hpp"

using emint::cli::RunConfig;

namespace {

struct FlagBuffer {
    double h = 0.0;
    int n = 0;
    double periods = 0.0;
    long steps = 0;
    double q0 = 0.0;
    double p0 = 0.0;
};

void add_problem_options(CLI::App* sub, RunConfig& cfg, FlagBuffer& buf) {
    sub->add_option("--problem", cfg.problem, "problem name (pendulum, kepler, fpu, cassini)")
        ->required();
    sub->add_option("--e", cfg.params.e, "kepler eccentricity")->capture_default_str();
    sub->add_option("--m", cfg.params.m, "fpu stiff-spring count")->capture_default_str();
    sub->add_option("--omega", cfg.params.omega, "fpu stiffness")->capture_default_str();
    sub->add_option("--a", cfg.params.a, "cassini oval parameter (default sqrt(2.5))");
    sub->add_option("--q0", buf.q0, "initial q (pendulum angle, cassini position)");
    sub->add_option("--p0", buf.p0, "initial p (cassini)");
}

void add_method_options(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--method", cfg.method, "em | gauss | taylor | taylor-implicit")
        ->capture_default_str();
    sub->add_option("--order", cfg.order, "method order")->capture_default_str();
    sub->add_option("--strategy", cfg.strategy, "derivative source: a | b | analytic")
        ->capture_default_str();
    sub->add_option("--tol", cfg.tol, "Newton increment tolerance")->capture_default_str();
    sub->add_option("--max-iter", cfg.max_iter, "Newton iteration cap")->capture_default_str();
}

void add_stepping_options(CLI::App* sub, FlagBuffer& buf) {
    sub->add_option("--h", buf.h, "stepsize");
    sub->add_option("--N", buf.n, "mesh points per period");
    sub->add_option("--periods", buf.periods, "horizon in periods");
    sub->add_option("--steps", buf.steps, "horizon in steps");
}

void finish_config(const CLI::App* sub, const FlagBuffer& buf, RunConfig& cfg) {
    auto given = [sub](const std::string& name) {
        const CLI::Option* opt = sub->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--h")) cfg.h = buf.h;
    if (given("--N")) cfg.points_per_period = buf.n;
    if (given("--periods")) cfg.periods = buf.periods;
    if (given("--steps")) cfg.steps = buf.steps;
    if (given("--q0")) cfg.params.q0 = buf.q0;
    if (given("--p0")) cfg.params.p0 = buf.p0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-derivative one-step integrators for Hamiltonian systems"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print usage");  // keep --h free for the stepsize
    app.set_help_all_flag("--help-all", "print usage of every subcommand");
    app.set_config("--config", "", "key=value configuration file");

    RunConfig cfg;
    FlagBuffer buf;

    CLI::App* run = app.add_subcommand("run", "integrate and emit a per-step CSV");
    run->set_help_flag("--help", "print usage");
    add_problem_options(run, cfg, buf);
    add_method_options(run, cfg);
    add_stepping_options(run, buf);
    run->add_option("--stride", cfg.stride, "record every k-th state")->capture_default_str();
    run->add_option("-o,--output", cfg.output, "CSV path (default: stdout)");

    CLI::App* conv = app.add_subcommand("convergence", "error/rate table over an N sweep");
    conv->set_help_flag("--help", "print usage");
    add_problem_options(conv, cfg, buf);
    add_method_options(conv, cfg);
    conv->add_option("--N-list", cfg.n_list, "mesh sizes, e.g. 32,64,128")
        ->delimiter(',')
        ->required();
    conv->add_option("--periods", buf.periods, "horizon in periods (default 10)");
    conv->add_option("--invariant", cfg.invariant, "target invariant (default M for kepler, else H)");
    conv->add_option("-o,--output", cfg.output, "CSV path (default: stdout)");

    CLI::App* wpd = app.add_subcommand("wpd", "work-precision sweep over an h list");
    wpd->set_help_flag("--help", "print usage");
    add_problem_options(wpd, cfg, buf);
    add_method_options(wpd, cfg);
    wpd->add_option("--h-list", cfg.h_list, "stepsizes, e.g. 0.2,0.1,0.05")
        ->delimiter(',')
        ->required();
    wpd->add_option("--periods", buf.periods, "horizon in periods (default 10)");
    wpd->add_option("--steps", buf.steps, "horizon in steps of the first h");
    wpd->add_option("--cache-dir", cfg.cache_dir, "reference-solution cache directory")
        ->capture_default_str();
    wpd->add_option("-o,--output", cfg.output, "CSV path (default: stdout)");

    CLI::App* demo = app.add_subcommand("deriv-demo", "exact-derivative walkthrough on a demo field");
    demo->set_help_flag("--help", "print usage");
    demo->add_option("--strategy", cfg.strategy, "a | b | analytic (default: both difference routes)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(run)) {
            finish_config(run, buf, cfg);
            return emint::cli::cmd_run(cfg, std::cout);
        }
        if (app.got_subcommand(conv)) {
            finish_config(conv, buf, cfg);
            return emint::cli::cmd_convergence(cfg, std::cout);
        }
        if (app.got_subcommand(wpd)) {
            finish_config(wpd, buf, cfg);
            return emint::cli::cmd_wpd(cfg, std::cout);
        }
        if (app.got_subcommand(demo)) {
            if (!demo->count("--strategy")) cfg.strategy.clear();
            return emint::cli::cmd_deriv_demo(cfg, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return emint::cli::exit_code_for(e);
    }
    return 2;
}
