#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "analysis.hpp"
#include "distribution.hpp"
#include "json_io.hpp"
#include "matrix.hpp"
#include "matrix_io.hpp"
#include "partition.hpp"
#include "rng.hpp"
#include "sketch.hpp"

// Monte Carlo harness comparing the finest-partition sampler with a pairwise
// sampler on a fixed matrix A, approximating A A^T.
//
// Every output is a pure function of the config: the matrix comes from the
// substream derive(seed, matrix_stream), and trial t at grid point g of
// method j sketches with seed derive(derive(derive(base, j), g), t), where
// base = derive(seed, trial_stream) for fig1 and derive(seed, trial_stream + 1)
// for fig2. Trials may run on several threads; results are reduced in trial
// order.
namespace pairsketch::experiment {

struct ExperimentConfig {
    std::size_t rows = 50;
    std::size_t cols = 500;
    std::optional<std::filesystem::path> matrix_file; // overrides rows/cols
    std::size_t c_min = 250;
    std::size_t c_max = 1500;
    std::size_t c_step = 250;
    std::size_t trials = 200;
    std::size_t runs = 5000;
    std::vector<std::size_t> fig2_c; // empty: {n/2, 3n/2}
    std::optional<PairingStrategy> strategy = PairingStrategy{}; // nullopt: finest method only
    std::uint64_t seed = 0;
    std::size_t threads = 0; // 0: hardware concurrency
    double spectral_tol = 1e-10;

    /// 100 x 2000, c = 1000..3000, 1000 trials, 50000 histogram runs.
    static ExperimentConfig paper_scale()
    {
        ExperimentConfig cfg;
        cfg.rows = 100;
        cfg.cols = 2000;
        cfg.c_min = 1000;
        cfg.c_max = 3000;
        cfg.c_step = 250;
        cfg.trials = 1000;
        cfg.runs = 50000;
        return cfg;
    }
};

inline std::vector<std::size_t> c_grid(const ExperimentConfig& cfg)
{
    std::vector<std::size_t> grid;
    for (std::size_t c = cfg.c_min; c <= cfg.c_max; c += cfg.c_step) grid.push_back(c);
    return grid;
}

inline void validate(const ExperimentConfig& cfg)
{
    if (!cfg.matrix_file && (cfg.rows == 0 || cfg.cols == 0)) {
        throw std::invalid_argument("experiment: rows and cols must be positive");
    }
    if (cfg.c_min == 0) throw std::invalid_argument("experiment: c-min must be at least 1");
    if (cfg.c_step == 0) throw std::invalid_argument("experiment: c-step must be positive");
    if (cfg.c_max < cfg.c_min) throw std::invalid_argument("experiment: empty c grid (c-max < c-min)");
    if (cfg.trials == 0) throw std::invalid_argument("experiment: trials must be at least 1");
    if (cfg.runs == 0) throw std::invalid_argument("experiment: runs must be at least 1");
    if (std::find(cfg.fig2_c.begin(), cfg.fig2_c.end(), 0) != cfg.fig2_c.end()) {
        throw std::invalid_argument("experiment: fig2 c values must be positive");
    }
    if (!(cfg.spectral_tol > 0.0)) throw std::invalid_argument("experiment: spectral tolerance must be positive");
}

inline DenseMatrix experiment_matrix(const ExperimentConfig& cfg)
{
    if (cfg.matrix_file) return io::load_matrix(*cfg.matrix_file);
    return DenseMatrix::uniform(cfg.rows, cfg.cols, rng::derive(cfg.seed, rng::matrix_stream));
}

struct Method {
    std::string name;
    SamplingDistribution dist;
};

inline std::string method_name(const std::optional<PairingStrategy>& s)
{
    return s ? "pairwise-" + std::string(to_string(s->kind)) : "finest";
}

/// "finest" with the optimal finest distribution, then (if configured) the
/// pairwise method with the aggregated pair distribution.
inline std::vector<Method> experiment_methods(const DenseMatrix& a, const DenseMatrix& b, const ExperimentConfig& cfg)
{
    std::vector<Method> methods;
    auto p_o = optimal_distribution(a, b, finest(a.cols()));
    methods.push_back({"finest", p_o});
    if (cfg.strategy) {
        if (a.cols() < 2) throw std::invalid_argument("experiment: pairwise method needs at least 2 columns");
        auto pairing = pair_partition(p_o, *cfg.strategy);
        methods.push_back({method_name(cfg.strategy), aggregate_distribution(p_o, pairing)});
    }
    return methods;
}

template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& fn)
{
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = count;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

inline std::uint64_t trial_seed(std::uint64_t base, std::size_t method, std::size_t grid_point, std::size_t trial)
{
    return rng::derive(rng::derive(rng::derive(base, method), grid_point), trial);
}

struct Fig1Row {
    std::size_t c;
    std::string method;
    double mean_rel_frob_err;
    double mean_sq_frob_err;
    double stderr_rel; // standard error of mean_rel_frob_err
    double stderr_sq;  // standard error of mean_sq_frob_err (not in the CSV)
    std::size_t trials;
};

struct Fig1Result {
    std::vector<Fig1Row> rows;

    std::string to_csv() const
    {
        std::string out = "c,method,mean_rel_frob_err,mean_sq_frob_err,stderr,trials\n";
        for (const auto& r : rows) {
            out += std::to_string(r.c) + ',' + r.method + ',' + io::format_double(r.mean_rel_frob_err) + ',' +
                   io::format_double(r.mean_sq_frob_err) + ',' + io::format_double(r.stderr_rel) + ',' +
                   std::to_string(r.trials) + '\n';
        }
        return out;
    }
};

namespace detail {

struct MeanAndError {
    double mean;
    double stderr;
};

inline MeanAndError summarize(const std::vector<double>& xs)
{
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double n = static_cast<double>(xs.size());
    const double mean = sum / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

} // namespace detail

/// Mean relative Frobenius error E||AA^T - S||_F / ||AA^T||_F (and the mean
/// squared error) per c and method.
inline Fig1Result run_fig1(const ExperimentConfig& cfg)
{
    validate(cfg);
    const auto a = experiment_matrix(cfg);
    const auto b = transpose(a);
    const auto ab = multiply(a, b);
    const double ab_frob = frobenius_norm(ab);
    const auto methods = experiment_methods(a, b, cfg);
    const auto grid = c_grid(cfg);
    const std::uint64_t base = rng::derive(cfg.seed, rng::trial_stream);

    Fig1Result result;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        for (std::size_t j = 0; j < methods.size(); ++j) {
            std::vector<double> rel(cfg.trials), sq(cfg.trials);
            parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
                const auto s = sketch(a, b, methods[j].dist, {grid[g], trial_seed(base, j, g, t)});
                sq[t] = squared_frobenius_distance(ab, s.estimate);
                rel[t] = std::sqrt(sq[t]) / ab_frob;
            });
            const auto r = detail::summarize(rel);
            const auto q = detail::summarize(sq);
            result.rows.push_back({grid[g], methods[j].name, r.mean, q.mean, r.stderr, q.stderr, cfg.trials});
        }
    }
    return result;
}

struct Fig2Row {
    std::string method;
    std::size_t c;
    std::size_t run;
    double rel_2norm_err;
};

struct Fig2Result {
    std::vector<Fig2Row> rows;

    std::string to_csv() const
    {
        std::string out = "method,c,run,rel_2norm_err\n";
        for (const auto& r : rows) {
            out += r.method + ',' + std::to_string(r.c) + ',' + std::to_string(r.run) + ',' +
                   io::format_double(r.rel_2norm_err) + '\n';
        }
        return out;
    }

    /// Mean of the relative errors for one (method, c) cell.
    double mean(const std::string& method, std::size_t c) const
    {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& r : rows) {
            if (r.method == method && r.c == c) {
                sum += r.rel_2norm_err;
                ++count;
            }
        }
        if (count == 0) throw std::invalid_argument("no fig2 rows for " + method);
        return sum / static_cast<double>(count);
    }
};

inline std::vector<std::size_t> fig2_c_values(const ExperimentConfig& cfg, std::size_t n)
{
    if (!cfg.fig2_c.empty()) return cfg.fig2_c;
    return {std::max<std::size_t>(1, n / 2), std::max<std::size_t>(1, 3 * n / 2)};
}

/// Per-run relative 2-norm errors ||AA^T - S||_2 / ||AA^T||_2 for both
/// methods at each fig2 c value.
inline Fig2Result run_fig2(const ExperimentConfig& cfg)
{
    validate(cfg);
    const auto a = experiment_matrix(cfg);
    const auto b = transpose(a);
    const auto ab = multiply(a, b);
    const double ab_spec = spectral_norm(ab, cfg.spectral_tol);
    const auto methods = experiment_methods(a, b, cfg);
    const auto cs = fig2_c_values(cfg, a.cols());
    const std::uint64_t base = rng::derive(cfg.seed, rng::trial_stream + 1);

    Fig2Result result;
    for (std::size_t j = 0; j < methods.size(); ++j) {
        for (std::size_t g = 0; g < cs.size(); ++g) {
            std::vector<double> err(cfg.runs);
            parallel_for(cfg.runs, cfg.threads, [&](std::size_t t) {
                const auto s = sketch(a, b, methods[j].dist, {cs[g], trial_seed(base, j, g, t)});
                err[t] = spectral_norm(subtract(ab, s.estimate), cfg.spectral_tol) / ab_spec;
            });
            for (std::size_t t = 0; t < cfg.runs; ++t) result.rows.push_back({methods[j].name, cs[g], t, err[t]});
        }
    }
    return result;
}

struct Table1Result {
    std::size_t n;
    std::string strategy;
    DistributionStats p_o;
    DistributionStats p_pair;

    json::ordered_json to_json() const
    {
        json::ordered_json out;
        out["n"] = n;
        out["strategy"] = strategy;
        out["p_o"] = json::to_json(p_o);
        out["p_pair"] = json::to_json(p_pair);
        return out;
    }
};

/// max/mean/min of the optimal finest distribution and of the aggregated
/// pair distribution, for B = A^T. Uses enhanced pairing when the config
/// selects no strategy.
inline Table1Result run_table1(const ExperimentConfig& cfg)
{
    validate(cfg);
    const auto a = experiment_matrix(cfg);
    const auto b = transpose(a);
    const auto strategy = cfg.strategy.value_or(PairingStrategy{});
    const auto plan = pairwise_plan(a, b, strategy);
    return {a.cols(), std::string(to_string(strategy.kind)), stats(plan.finest), stats(plan.aggregated)};
}

} // namespace pairsketch::experiment
