// Command-line driver: ad-hoc sketches, bound analysis and the Monte Carlo
// experiments (fig1, fig2, table1).
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 numeric
// failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pairsketch/pairsketch.hpp"

namespace fs = std::filesystem;
using namespace pairsketch;

namespace {

enum ExitCode { ok = 0, config_failure = 1, io_failure = 2, numeric_failure = 3 };

struct MatrixOptions {
    std::optional<std::string> a_file;
    std::optional<std::string> b_file;
    std::optional<std::size_t> rows;
    std::optional<std::size_t> cols;
};

struct PartitionOptions {
    std::string strategy = "finest";
    std::optional<std::string> partition_file;
    std::optional<std::string> distribution;
};

void add_matrix_options(CLI::App& cmd, MatrixOptions& m)
{
    cmd.add_option("--a", m.a_file, "Matrix A (CSV, or binary if the name ends in .bin)");
    cmd.add_option("--b", m.b_file, "Matrix B (default: A transposed)");
    cmd.add_option("--rows", m.rows, "Rows of a generated U[0,1) matrix A (when --a is absent)");
    cmd.add_option("--cols", m.cols, "Columns of a generated U[0,1) matrix A");
}

void add_partition_options(CLI::App& cmd, PartitionOptions& p)
{
    cmd.add_option("--strategy", p.strategy, "finest, enhanced, random, balanced or simple")
        ->check(CLI::IsMember({"finest", "enhanced", "random", "balanced", "simple"}));
    cmd.add_option("--partition-file", p.partition_file, "JSON array of 1-based index groups");
    cmd.add_option("--distribution", p.distribution,
                   "optimal, aggregated or uniform (default: aggregated for pairing strategies, optimal otherwise)")
        ->check(CLI::IsMember({"optimal", "aggregated", "uniform"}));
}

struct Instance {
    DenseMatrix a;
    DenseMatrix b;
};

std::optional<Instance> load_instance(const MatrixOptions& m, std::uint64_t seed, bool required)
{
    std::optional<DenseMatrix> a;
    if (m.a_file) {
        a = io::load_matrix(*m.a_file);
    } else if (m.rows || m.cols) {
        if (!m.rows || !m.cols) throw std::invalid_argument("--rows and --cols must be given together");
        a = DenseMatrix::uniform(*m.rows, *m.cols, rng::derive(seed, rng::matrix_stream));
    } else if (required) {
        throw std::invalid_argument("no input matrix: pass --a FILE or --rows/--cols");
    } else {
        return std::nullopt;
    }
    auto b = m.b_file ? io::load_matrix(*m.b_file) : transpose(*a);
    if (a->cols() != b.rows()) throw dimension_error("A has " + std::to_string(a->cols()) + " columns but B has " +
                                                     std::to_string(b.rows()) + " rows");
    return Instance{std::move(*a), std::move(b)};
}

SamplingDistribution make_distribution(const Instance& in, const PartitionOptions& opt, std::uint64_t seed)
{
    const std::size_t n = in.a.cols();
    const auto p_o = optimal_distribution(in.a, in.b, finest(n));

    std::optional<Partition> partition;
    bool pairing = false;
    if (opt.partition_file) {
        partition = json::partition_from_json(json::parse(io::read_file(*opt.partition_file)), n);
    } else if (opt.strategy == "finest") {
        partition = finest(n);
    } else {
        partition = pair_partition(p_o, {*parse_pairing_kind(opt.strategy), seed});
        pairing = true;
    }

    const std::string dist = opt.distribution.value_or(pairing ? "aggregated" : "optimal");
    if (dist == "uniform") return uniform_distribution(*partition);
    if (dist == "aggregated") return aggregate_distribution(p_o, *partition);
    return optimal_distribution(in.a, in.b, *partition);
}

json::ordered_json analysis_json(const Instance& in, const SamplingDistribution& dist, std::size_t c,
                                 std::optional<double> epsilon)
{
    json::ordered_json out;
    out["groups"] = dist.size();
    out["c"] = c;
    const auto report = bound_report(in.a, in.b, dist);
    out["bound_report"] = json::to_json(report);
    out["expected_frobenius_error_sq"] = expected_frobenius_error_sq(in.a, in.b, dist, c);
    out["optimal_expected_error"] = optimal_expected_error(in.a, in.b, dist.support(), c);
    out["optimal_expected_error_finest"] = optimal_expected_error(in.a, in.b, finest(in.a.cols()), c);
    if (epsilon) {
        out["epsilon"] = *epsilon;
        out["tail_bound"] = bernstein_tail_bound(report, c, *epsilon);
    }
    return out;
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const json::ordered_json& j) { io::write_file(path, j.dump(2) + "\n"); }

int report_error(const char* category, const std::exception& e, int code)
{
    std::cerr << "pairsketch: " << category << " error: " << e.what() << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Partition-based randomized matrix multiplication sketches"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker threads for experiments (0: all cores)");

    // sketch
    auto* sketch_cmd = app.add_subcommand("sketch", "Sketch AB once and write estimate, draw log and bounds");
    MatrixOptions sketch_mat;
    PartitionOptions sketch_part;
    std::size_t sketch_c = 0;
    std::optional<double> sketch_eps;
    std::string sketch_out = ".";
    add_matrix_options(*sketch_cmd, sketch_mat);
    add_partition_options(*sketch_cmd, sketch_part);
    sketch_cmd->add_option("--c", sketch_c, "Number of draws")->required()->check(CLI::PositiveNumber);
    sketch_cmd->add_option("--seed", seed, "Master seed");
    sketch_cmd->add_option("--epsilon", sketch_eps, "Evaluate the 2-norm tail bound at this epsilon");
    sketch_cmd->add_option("--out-dir", sketch_out, "Output directory");

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "Closed-form errors, bound report and draw thresholds (JSON)");
    MatrixOptions an_mat;
    PartitionOptions an_part;
    std::size_t an_c = 1;
    std::optional<double> an_eps;
    std::optional<std::size_t> th_c, th_k;
    std::optional<std::string> an_out;
    add_matrix_options(*analyze_cmd, an_mat);
    add_partition_options(*analyze_cmd, an_part);
    analyze_cmd->add_option("--c", an_c, "Sample count for the error formulas")->check(CLI::PositiveNumber);
    analyze_cmd->add_option("--seed", seed, "Master seed");
    analyze_cmd->add_option("--epsilon", an_eps, "Evaluate the 2-norm tail bound at this epsilon");
    analyze_cmd->add_option("--threshold-c", th_c, "c for the uniform-sampling draw threshold s_c");
    analyze_cmd->add_option("--threshold-k", th_k, "k for the uniform-sampling draw threshold s_c");
    analyze_cmd->add_option("--out", an_out, "Write JSON here instead of stdout");

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo experiments");
    exp_cmd->require_subcommand(1);
    struct ExperimentFlags {
        std::optional<std::size_t> rows, cols, c_min, c_max, c_step, trials, runs;
        std::vector<std::size_t> fig2_c;
        std::optional<std::string> matrix_file;
        std::string strategy = "enhanced";
        std::string out_dir = ".";
        bool paper_scale = false;
    } ef;
    exp_cmd->add_option("--seed", seed, "Master seed");
    exp_cmd->add_option("--rows", ef.rows, "Rows of the generated matrix A");
    exp_cmd->add_option("--cols", ef.cols, "Columns of the generated matrix A");
    exp_cmd->add_option("--matrix-file", ef.matrix_file, "Use this matrix instead of a generated one");
    exp_cmd->add_option("--c-min", ef.c_min, "Smallest c of the grid");
    exp_cmd->add_option("--c-max", ef.c_max, "Largest c of the grid");
    exp_cmd->add_option("--c-step", ef.c_step, "Grid step");
    exp_cmd->add_option("--trials", ef.trials, "Sketches per grid point (fig1)");
    exp_cmd->add_option("--runs", ef.runs, "Sketches per c value (fig2)");
    exp_cmd->add_option("--fig2-c", ef.fig2_c, "c values for fig2 (default n/2 and 3n/2)");
    exp_cmd->add_option("--strategy", ef.strategy, "Pairing strategy of the pairwise method, or finest")
        ->check(CLI::IsMember({"finest", "enhanced", "random", "balanced", "simple"}));
    exp_cmd->add_option("--out-dir", ef.out_dir, "Output directory");
    exp_cmd->add_flag("--paper-scale", ef.paper_scale, "100x2000 matrix, c 1000..3000, 1000 trials, 50000 runs");
    auto* fig1_cmd = exp_cmd->add_subcommand("fig1", "Mean relative Frobenius error versus c (CSV)");
    auto* fig2_cmd = exp_cmd->add_subcommand("fig2", "Per-run relative 2-norm errors (CSV)");
    auto* table1_cmd = exp_cmd->add_subcommand("table1", "Statistics of p_o and p_pair (JSON)");
    for (auto* sub : {fig1_cmd, fig2_cmd, table1_cmd}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_failure;
    }

    try {
        if (*sketch_cmd) {
            const auto in = *load_instance(sketch_mat, seed, true);
            const auto dist = make_distribution(in, sketch_part, seed);
            const SketchConfig cfg{sketch_c, seed};
            const auto result = sketch(in.a, in.b, dist, cfg);
            ensure_dir(sketch_out);
            io::save_matrix(fs::path(sketch_out) / "estimate.csv", result.estimate);
            write_json(fs::path(sketch_out) / "draws.json", json::draw_log(result, cfg));
            write_json(fs::path(sketch_out) / "bounds.json", analysis_json(in, dist, sketch_c, sketch_eps));
            return ok;
        }

        if (*analyze_cmd) {
            json::ordered_json out;
            if (const auto in = load_instance(an_mat, seed, false)) {
                const auto dist = make_distribution(*in, an_part, seed);
                out["analysis"] = analysis_json(*in, dist, an_c, an_eps);
            }
            if (th_c || th_k) {
                if (!th_c || !th_k) throw std::invalid_argument("--threshold-c and --threshold-k go together");
                out["threshold"] = json::to_json(min_draw_threshold(*th_c, *th_k), *th_c, *th_k);
            }
            if (out.empty()) throw std::invalid_argument("analyze: nothing to do (no matrix, no threshold)");
            const std::string text = out.dump(2) + "\n";
            if (an_out) {
                io::write_file(*an_out, text);
            } else {
                std::cout << text;
            }
            return ok;
        }

        experiment::ExperimentConfig cfg =
            ef.paper_scale ? experiment::ExperimentConfig::paper_scale() : experiment::ExperimentConfig{};
        cfg.seed = seed;
        cfg.threads = threads;
        if (ef.rows) cfg.rows = *ef.rows;
        if (ef.cols) cfg.cols = *ef.cols;
        if (ef.matrix_file) cfg.matrix_file = *ef.matrix_file;
        if (ef.c_min) cfg.c_min = *ef.c_min;
        if (ef.c_max) cfg.c_max = *ef.c_max;
        if (ef.c_step) cfg.c_step = *ef.c_step;
        if (ef.trials) cfg.trials = *ef.trials;
        if (ef.runs) cfg.runs = *ef.runs;
        cfg.fig2_c = ef.fig2_c;
        if (ef.strategy == "finest") {
            cfg.strategy.reset();
        } else {
            cfg.strategy = PairingStrategy{*parse_pairing_kind(ef.strategy), seed};
        }

        ensure_dir(ef.out_dir);
        const fs::path dir(ef.out_dir);
        if (*fig1_cmd) {
            io::write_file(dir / "fig1.csv", experiment::run_fig1(cfg).to_csv());
        } else if (*fig2_cmd) {
            io::write_file(dir / "fig2.csv", experiment::run_fig2(cfg).to_csv());
        } else if (*table1_cmd) {
            write_json(dir / "table1.json", experiment::run_table1(cfg).to_json());
        }
        return ok;
    } catch (const io_error& e) {
        return report_error("I/O", e, io_failure);
    } catch (const nlohmann::json::exception& e) {
        return report_error("I/O", e, io_failure);
    } catch (const numeric_error& e) {
        return report_error("numeric", e, numeric_failure);
    } catch (const std::invalid_argument& e) {
        return report_error("config", e, config_failure);
    } catch (const std::out_of_range& e) {
        return report_error("config", e, config_failure);
    } catch (const std::exception& e) {
        return report_error("internal", e, numeric_failure);
    }
}
