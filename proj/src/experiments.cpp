#include "emint/experiments.hpp"

#include "emint/csv.hpp"

#include <chrono>
#include <limits>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

namespace emint {

namespace {

double norm1_diff(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

std::vector<double> periodic_error_series(const Trajectory& traj, std::span<const double> y0,
                                          long steps_per_period) {
    if (steps_per_period < 1) throw std::invalid_argument("steps_per_period must be >= 1");
    if (traj.n_steps % steps_per_period != 0)
        throw std::invalid_argument("trajectory length " + std::to_string(traj.n_steps) +
                                    " is not a multiple of " + std::to_string(steps_per_period));
    if (steps_per_period % traj.stride != 0)
        throw std::invalid_argument("state stride " + std::to_string(traj.stride) +
                                    " does not divide the period sampling");

    const long per_period = steps_per_period / traj.stride;
    const long periods = traj.n_steps / steps_per_period;
    std::vector<double> series;
    series.reserve(static_cast<size_t>(periods));
    for (long k = 1; k <= periods; ++k)
        series.push_back(norm1_diff(traj.states[static_cast<size_t>(k * per_period)], y0));
    return series;
}

std::vector<double> invariant_error_series(const Trajectory& traj, std::string_view name,
                                           long steps_per_period) {
    if (steps_per_period < 1) throw std::invalid_argument("steps_per_period must be >= 1");
    if (traj.n_steps % steps_per_period != 0)
        throw std::invalid_argument("trajectory length " + std::to_string(traj.n_steps) +
                                    " is not a multiple of " + std::to_string(steps_per_period));
    const std::vector<double>& samples = traj.invariant(name);
    const double q0 = samples[0];
    const long periods = traj.n_steps / steps_per_period;
    std::vector<double> series;
    series.reserve(static_cast<size_t>(periods));
    for (long k = 0; k < periods; ++k) {
        double worst = 0.0;
        for (long j = 1; j <= steps_per_period; ++j)
            worst = std::max(worst, std::abs(samples[static_cast<size_t>(k * steps_per_period + j)] - q0));
        series.push_back(worst);
    }
    return series;
}

std::vector<ConvergenceRow> convergence_study(const HamiltonianSystem& problem,
                                              IntegratorSpec proto, std::span<const int> n_list,
                                              int periods, std::string_view invariant) {
    if (!problem.period) throw std::invalid_argument("convergence study needs a periodic problem");
    for (size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1]) throw std::invalid_argument("N list must be ascending");
    const double period = *problem.period;
    const std::string inv_name(invariant);

    auto cell = [&problem, proto, periods, period, inv_name](int n) {
        ConvergenceRow row;
        row.n = n;
        IntegratorSpec spec = proto;
        spec.h = period / n;
        try {
            const auto traj = integrate(problem.ode, 0.0, problem.initial_state, spec,
                                        static_cast<long>(n) * periods, problem.invariants,
                                        /*stride=*/n);
            const auto& samples = traj.invariant(inv_name);
            double worst = 0.0;
            for (double q : samples) worst = std::max(worst, std::abs(q - samples[0]));
            row.error = worst;
        } catch (const std::exception& e) {
            row.failure = e.what();
        }
        return row;
    };

    std::vector<std::future<ConvergenceRow>> futures;
    futures.reserve(n_list.size());
    for (int n : n_list) futures.push_back(std::async(std::launch::async, cell, n));

    std::vector<ConvergenceRow> rows;
    rows.reserve(n_list.size());
    for (auto& f : futures) rows.push_back(f.get());
    for (size_t i = 1; i < rows.size(); ++i) {
        if (!rows[i].failure.empty() || !rows[i - 1].failure.empty()) continue;
        rows[i].rate = std::log(rows[i - 1].error / rows[i].error) /
                       std::log(static_cast<double>(rows[i].n) / rows[i - 1].n);
    }
    return rows;
}

double fitted_order(std::span<const ConvergenceRow> rows) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long m = 0;
    for (const auto& row : rows) {
        if (!row.failure.empty() || row.error <= 0.0) continue;
        const double x = std::log(static_cast<double>(row.n));
        const double y = std::log(row.error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += y * x;
        ++m;
    }
    if (m < 2) throw std::invalid_argument("need at least two usable rows to fit an order");
    return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

namespace {

// Reference cache entry: versioned binary header plus the final state.
constexpr char kCacheMagic[8] = {'E', 'M', 'R', 'E', 'F', 'C', '0', '1'};

std::string cache_key(const HamiltonianSystem& problem, double h, long n_steps) {
    std::string key = problem.name + ";dim=" + std::to_string(problem.dim());
    key += ";y0=";
    for (double x : problem.initial_state) key += csv::format(x) + ",";
    key += ";h=" + csv::format(h) + ";n=" + std::to_string(n_steps) + ";gauss6/20";
    return key;
}

std::filesystem::path cache_file(const std::string& dir, const std::string& key) {
    // FNV-1a over the key keeps filenames short and stable.
    uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : key) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char name[32];
    std::snprintf(name, sizeof(name), "ref_%016llx.bin", static_cast<unsigned long long>(hash));
    return std::filesystem::path(dir) / name;
}

std::optional<Vec> load_cached(const std::filesystem::path& path, const std::string& key, int dim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kCacheMagic, 8) != 0) return std::nullopt;
    uint32_t key_size = 0;
    in.read(reinterpret_cast<char*>(&key_size), sizeof key_size);
    if (!in || key_size > 1 << 20) return std::nullopt;
    std::string stored(key_size, '\0');
    in.read(stored.data(), key_size);
    if (!in || stored != key) return std::nullopt;
    uint32_t stored_dim = 0;
    in.read(reinterpret_cast<char*>(&stored_dim), sizeof stored_dim);
    if (!in || static_cast<int>(stored_dim) != dim) return std::nullopt;
    Vec state(static_cast<size_t>(dim));
    in.read(reinterpret_cast<char*>(state.data()), static_cast<std::streamsize>(dim * sizeof(double)));
    if (!in) return std::nullopt;
    return state;
}

void store_cached(const std::filesystem::path& path, const std::string& key, const Vec& state) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return;  // cache is best-effort
    out.write(kCacheMagic, 8);
    const uint32_t key_size = static_cast<uint32_t>(key.size());
    out.write(reinterpret_cast<const char*>(&key_size), sizeof key_size);
    out.write(key.data(), key_size);
    const uint32_t dim = static_cast<uint32_t>(state.size());
    out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    out.write(reinterpret_cast<const char*>(state.data()),
              static_cast<std::streamsize>(state.size() * sizeof(double)));
}

Vec reference_final_state(const HamiltonianSystem& problem, double h, long n_steps,
                          const std::string& cache_dir) {
    const double h_ref = h / 20.0;
    const long n_ref = n_steps * 20;
    const std::string key = cache_key(problem, h_ref, n_ref);
    const auto path = cache_dir.empty() ? std::filesystem::path{} : cache_file(cache_dir, key);
    if (!cache_dir.empty()) {
        if (auto hit = load_cached(path, key, problem.dim())) return *hit;
    }
    const auto traj = integrate(problem.ode, 0.0, problem.initial_state,
                                IntegratorSpec::gauss(3, h_ref), n_ref, {}, /*stride=*/
                                static_cast<int>(std::min<long>(n_ref, 1 << 30)));
    if (!cache_dir.empty()) store_cached(path, key, traj.final_state);
    return traj.final_state;
}

}  // namespace

std::vector<WorkPrecisionPoint> work_precision(const HamiltonianSystem& problem,
                                               IntegratorSpec proto, std::span<const double> h_list,
                                               double t_end, const std::string& cache_dir) {
    if (!(t_end > 0.0)) throw std::invalid_argument("work precision horizon must be positive");
    std::vector<WorkPrecisionPoint> points;
    points.reserve(h_list.size());
    for (double h : h_list) {
        if (!(h > 0.0)) throw std::invalid_argument("stepsizes must be positive");
        const long n = std::llround(t_end / h);
        if (n < 1) throw std::invalid_argument("horizon shorter than one step");

        IntegratorSpec spec = proto;
        spec.h = h;
        const Vec ref = reference_final_state(problem, h, n, cache_dir);

        WorkPrecisionPoint point;
        point.h = h;
        point.seconds = std::numeric_limits<double>::infinity();
        Vec final_state;
        for (int rep = 0; rep < 3; ++rep) {
            const double start = now_seconds();
            const auto traj =
                integrate(problem.ode, 0.0, problem.initial_state, spec, n, {},
                          /*stride=*/static_cast<int>(n));
            point.seconds = std::min(point.seconds, now_seconds() - start);
            final_state = traj.final_state;
        }
        point.error = norm1_diff(final_state, ref);
        points.push_back(point);
    }
    return points;
}

ExperimentReport run_experiment(const HamiltonianSystem& problem, const IntegratorSpec& spec,
                                long total_steps, long steps_per_period, int stride) {
    ExperimentReport report;
    report.problem = problem.name;
    report.method = spec.label();
    report.h = spec.h;
    report.total_steps = total_steps;
    report.steps_per_period = steps_per_period;

    const double start = now_seconds();
    report.trajectory = integrate(problem.ode, 0.0, problem.initial_state, spec, total_steps,
                                  problem.invariants, stride);
    report.wall_seconds = now_seconds() - start;

    report.final_error = norm1_diff(report.trajectory.final_state, problem.initial_state);
    for (const auto& inv : problem.invariants) {
        report.invariant_names.push_back(inv.name);
        const auto& samples = report.trajectory.invariant(inv.name);
        double worst = 0.0;
        for (double q : samples) worst = std::max(worst, std::abs(q - samples[0]));
        report.max_invariant_error.push_back(worst);
    }
    if (total_steps % steps_per_period == 0 && steps_per_period % stride == 0) {
        report.solution_error_per_period =
            periodic_error_series(report.trajectory, problem.initial_state, steps_per_period);
        for (const auto& inv : problem.invariants)
            report.invariant_error_per_period.push_back(
                invariant_error_series(report.trajectory, inv.name, steps_per_period));
    }
    return report;
}

}  // namespace emint
