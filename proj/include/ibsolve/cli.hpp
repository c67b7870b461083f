// Command-line front end: single solves, curve sweeps, ABP-vs-BA
// benchmarking, analytic-oracle emission, and sample ingestion.
//
// Exit codes: 0 success, 1 infeasible target, 2 numerical failure,
// 3 I/O, parse or validation error.
#ifndef IBSOLVE_CLI_HPP
#define IBSOLVE_CLI_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ibsolve/abp_solver.hpp"
#include "ibsolve/ba_baseline.hpp"
#include "ibsolve/ingest.hpp"
#include "ibsolve/oracles.hpp"
#include "ibsolve/prob_core.hpp"

namespace ibsolve::cli {

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Timestamps live only in this comment line so CSV bodies stay reproducible.
inline std::string meta_comment(const std::string& what) {
    std::time_t now = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return "# ibsolve " + what + " generated " + buf;
}

inline std::size_t worker_count() {
    if (const char* env = std::getenv("IB_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<std::size_t>(n);
    }
    return 1;
}

// Runs fn(i) for i in [0, n) on a bounded pool; results land by index.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

struct ModelOptions {
    std::string model;  // bernoulli | gaussian | file
    double e = 0.15;
    double snr = 1.0;
    double L = 10.0;
    std::size_t m = 100;
    std::size_t k = 100;
    std::string problem_path;

    void attach(CLI::App* cmd, bool required = true) {
        auto* opt = cmd->add_option("--model", model, "problem source: bernoulli|gaussian|file")
                        ->check(CLI::IsMember({"bernoulli", "gaussian", "file"}));
        if (required) opt->required();
        cmd->add_option("--e", e, "Bernoulli flip probability");
        cmd->add_option("--snr", snr, "Gaussian signal-to-noise ratio");
        cmd->add_option("--L", L, "Gaussian truncation half-width");
        cmd->add_option("--m", m, "Gaussian X grid size");
        cmd->add_option("--k", k, "Gaussian Y grid size");
        cmd->add_option("--problem", problem_path, "problem JSON (model=file)");
    }

    IBProblem build() const {
        if (model == "bernoulli") return bernoulli_problem(e);
        if (model == "gaussian") return gaussian_problem(snr, L, m, k);
        if (model == "file") {
            if (problem_path.empty())
                throw ParseError("--problem is required with --model file");
            return load_problem(problem_path);
        }
        throw ParseError("unknown model: " + model);
    }
};

struct SolverOptions {
    std::size_t cardinality_n = 0;  // 0: defaults to the source alphabet size
    std::uint64_t seed = 0;
    std::size_t max_iter = 3000;
    double objective_tol = 1e-6;
    double residual_tol = 1e-12;

    void attach(CLI::App* cmd) {
        cmd->add_option("--cardinality-n", cardinality_n,
                        "bottleneck alphabet size (default: source size)");
        cmd->add_option("--seed", seed, "RNG seed for the initial encoder");
        cmd->add_option("--max-iter", max_iter, "iteration cap");
        cmd->add_option("--objective-tol", objective_tol, "stop when decrease falls below");
        cmd->add_option("--residual-tol", residual_tol, "stop when KKT residual falls below");
    }

    SolverConfig build(const IBProblem& problem) const {
        SolverConfig cfg;
        cfg.cardinality_n = cardinality_n ? cardinality_n : problem.source_size();
        cfg.rng_seed = seed;
        cfg.max_iter = max_iter;
        cfg.objective_tol = objective_tol;
        cfg.residual_tol = residual_tol;
        return cfg;
    }
};

inline std::vector<double> parse_grid(const std::string& text) {
    // "start:stop:n" inclusive grid
    double start = 0.0, stop = 0.0;
    long n = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%ld", &start, &stop, &n) != 3 || n < 1)
        throw ParseError("grid must be start:stop:n, got '" + text + "'");
    std::vector<double> out(static_cast<std::size_t>(n));
    if (n == 1) {
        out[0] = start;
    } else {
        const double step = (stop - start) / static_cast<double>(n - 1);
        for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = start + step * i;
    }
    return out;
}

inline void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << body;
}

// Minimal SVG polyline plot of (I, R) sweep results. Presentation only.
inline std::string sweep_svg(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double W = 640, H = 480, m = 60;
    double xmax = 1e-12, ymax = 1e-12;
    for (double x : xs) xmax = std::max(xmax, x);
    for (double y : ys) ymax = std::max(ymax, y);
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<line x1='" << m << "' y1='" << H - m << "' x2='" << W - m / 2 << "' y2='" << H - m
        << "' stroke='black'/>\n"
        << "<line x1='" << m << "' y1='" << H - m << "' x2='" << m << "' y2='" << m / 2
        << "' stroke='black'/>\n"
        << "<text x='" << W / 2 << "' y='" << H - m / 3 << "' text-anchor='middle'>I(T;Y) [nats]"
        << "</text>\n"
        << "<text x='" << m / 3 << "' y='" << H / 2 << "' text-anchor='middle' transform='rotate(-90 "
        << m / 3 << " " << H / 2 << ")'>R = I(T;X) [nats]</text>\n<polyline fill='none' "
        << "stroke='steelblue' stroke-width='2' points='";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double px = m + (W - 1.5 * m) * (xs[i] / xmax);
        const double py = (H - m) - (H - 1.5 * m) * (ys[i] / ymax);
        svg << px << "," << py << " ";
    }
    svg << "'/>\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double px = m + (W - 1.5 * m) * (xs[i] / xmax);
        const double py = (H - m) - (H - 1.5 * m) * (ys[i] / ymax);
        svg << "<circle cx='" << px << "' cy='" << py << "' r='3' fill='crimson'/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace detail

/// Executes one CLI invocation; argv excludes the program name.
inline int run_command(const std::vector<std::string>& argv) {
    CLI::App app{"Information Bottleneck curve solver (alternating Bregman projections)"};
    app.require_subcommand(1);

    // ---- solve-ri / solve-ir ----
    detail::ModelOptions ri_model, ir_model;
    detail::SolverOptions ri_solver, ir_solver;
    double target_i = 0.0, target_r = 0.0;
    std::string ri_out, ir_out, traj_out;
    std::size_t max_traj = 0;

    auto* ri = app.add_subcommand("solve-ri", "compute R(I) at one relevance target");
    ri_model.attach(ri);
    ri_solver.attach(ri);
    ri->add_option("--target-i", target_i, "relevance target I in nats")->required();
    ri->add_option("--out", ri_out, "report JSON path");
    ri->add_option("--max-trajectory", max_traj, "truncate stored trajectories to this many points");
    ri->add_option("--trajectory-csv", traj_out,
                   "write per-iteration (iteration, objective, residual) rows");

    auto* ir = app.add_subcommand("solve-ir", "compute I(R) at one rate target");
    ir_model.attach(ir);
    ir_solver.attach(ir);
    ir->add_option("--target-r", target_r, "rate target R in nats")->required();
    ir->add_option("--out", ir_out, "report JSON path");
    ir->add_option("--max-trajectory", max_traj, "truncate stored trajectories to this many points");
    ir->add_option("--trajectory-csv", traj_out,
                   "write per-iteration (iteration, objective, residual) rows");

    // ---- sweep ----
    detail::ModelOptions sweep_model;
    detail::SolverOptions sweep_solver;
    std::string sweep_mode = "ri", sweep_targets_csv, sweep_out, sweep_svg_path;
    auto* sweep = app.add_subcommand("sweep", "solve a list of targets and emit a CSV curve");
    sweep_model.attach(sweep);
    sweep_solver.attach(sweep);
    sweep->add_option("--mode", sweep_mode, "ri|ir")->check(CLI::IsMember({"ri", "ir"}));
    sweep->add_option("--targets", sweep_targets_csv, "comma-separated increasing targets")
        ->required();
    sweep->add_option("--out", sweep_out, "output CSV path");
    sweep->add_option("--svg", sweep_svg_path, "optional SVG rendering of the curve");

    // ---- bench ----
    detail::ModelOptions bench_model;
    detail::SolverOptions bench_solver;
    std::string bench_targets_csv, bench_out;
    double bench_curve_tol = 1e-4;
    auto* bench = app.add_subcommand("bench", "ABP vs adaptive-BA comparison rows");
    bench_model.attach(bench);
    bench_solver.attach(bench);
    bench->add_option("--targets", bench_targets_csv, "comma-separated targets")->required();
    bench->add_option("--out", bench_out, "output CSV path");
    bench->add_option("--curve-tol", bench_curve_tol, "BA adaptive relevance tolerance");

    // ---- oracle ----
    std::string oracle_model = "bernoulli", oracle_grid, oracle_out;
    double oracle_e = 0.15, oracle_snr = 1.0;
    bool oracle_bits = false;
    auto* oracle = app.add_subcommand("oracle", "emit the analytic (I, R) curve as CSV");
    oracle->add_option("--model", oracle_model, "bernoulli|gaussian")
        ->check(CLI::IsMember({"bernoulli", "gaussian"}))
        ->required();
    oracle->add_option("--e", oracle_e, "Bernoulli flip probability");
    oracle->add_option("--snr", oracle_snr, "Gaussian SNR");
    oracle->add_option("--i-grid", oracle_grid, "targets start:stop:n")->required();
    oracle->add_option("--out", oracle_out, "output CSV path");
    oracle->add_flag("--bits", oracle_bits, "report in bits instead of nats");

    // ---- ingest ----
    std::string ingest_samples, ingest_out;
    double ingest_unit = 1.0;
    auto* ingest = app.add_subcommand("ingest", "bin a sample CSV into a problem JSON");
    ingest->add_option("--samples", ingest_samples, "sample CSV path")->required();
    ingest->add_option("--unit", ingest_unit, "bin width per feature coordinate");
    ingest->add_option("--out", ingest_out, "problem JSON path")->required();

    std::vector<const char*> cargs;
    cargs.push_back("ibsolve");
    for (const auto& a : argv) cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);  // prints usage/help
        return code == 0 ? 0 : 3;
    }

    auto parse_targets = [](const std::string& csv) {
        std::vector<double> out;
        std::stringstream ss(csv);
        std::string cell;
        while (std::getline(ss, cell, ','))
            if (!cell.empty()) out.push_back(std::stod(cell));
        if (out.empty()) throw ParseError("no targets given");
        for (std::size_t i = 1; i < out.size(); ++i)
            if (!(out[i] > out[i - 1])) throw ParseError("targets must be strictly increasing");
        return out;
    };

    try {
        if (ri->parsed() || ir->parsed()) {
            const bool is_ri = ri->parsed();
            const auto& model = is_ri ? ri_model : ir_model;
            const auto& solver = is_ri ? ri_solver : ir_solver;
            const IBProblem problem = model.build();
            const SolverConfig cfg = solver.build(problem);
            const SolveReport rep = is_ri ? solve_ri(problem, target_i, cfg)
                                          : solve_ir(problem, target_r, cfg);
            const nlohmann::json j = report_to_json(rep, max_traj);
            const std::string& out = is_ri ? ri_out : ir_out;
            if (out.empty()) std::cout << j.dump(2) << "\n";
            else detail::write_text(out, j.dump(2) + "\n");
            if (!traj_out.empty()) {
                std::ostringstream csv;
                csv << detail::meta_comment("trajectory") << "\n"
                    << "iteration,objective,residual\n";
                // Trajectories start at the first rooted cycle.
                const std::size_t first =
                    rep.iterations >= rep.objective_trajectory.size()
                        ? rep.iterations - rep.objective_trajectory.size() + 1
                        : 1;
                for (std::size_t n = 0; n < rep.objective_trajectory.size(); ++n)
                    csv << (first + n) << ',' << detail::fmt(rep.objective_trajectory[n]) << ','
                        << detail::fmt(rep.residual_trajectory[n]) << "\n";
                detail::write_text(traj_out, csv.str());
            }
            return 0;
        }

        if (sweep->parsed()) {
            const IBProblem problem = sweep_model.build();
            const SolverConfig cfg = sweep_solver.build(problem);
            const std::vector<double> targets = parse_targets(sweep_targets_csv);
            if (sweep_mode == "ri") {
                const double ixy = problem.mutual_information_xy();
                for (double t : targets)
                    if (t > ixy * (1.0 + 1e-9) + 1e-15)
                        throw InfeasibleTarget("sweep: target " + detail::fmt(t) +
                                               " exceeds I(X;Y) = " + detail::fmt(ixy));
            }
            std::vector<SolveReport> reports(targets.size());
            std::string failure;
            std::mutex failure_mu;
            detail::parallel_for(targets.size(), [&](std::size_t i) {
                try {
                    reports[i] = sweep_mode == "ri" ? solve_ri(problem, targets[i], cfg)
                                                    : solve_ir(problem, targets[i], cfg);
                } catch (const std::exception& ex) {
                    std::lock_guard<std::mutex> lock(failure_mu);
                    if (failure.empty()) failure = ex.what();
                }
            });
            if (!failure.empty()) throw NumericalFailure(failure);
            std::ostringstream csv;
            csv << detail::meta_comment("sweep") << "\n"
                << "target,value,i_tx,i_ty,lambda,iterations,converged,residual,wall_time_ms\n";
            for (std::size_t i = 0; i < targets.size(); ++i) {
                const auto& r = reports[i];
                csv << detail::fmt(targets[i]) << ',' << detail::fmt(r.value) << ','
                    << detail::fmt(r.i_tx) << ',' << detail::fmt(r.i_ty) << ','
                    << detail::fmt(r.lambda) << ',' << r.iterations << ','
                    << (r.converged ? 1 : 0) << ',' << detail::fmt(r.final_residual()) << ','
                    << detail::fmt(r.wall_time_ms) << "\n";
            }
            if (sweep_out.empty()) std::cout << csv.str();
            else detail::write_text(sweep_out, csv.str());
            if (!sweep_svg_path.empty()) {
                std::vector<double> xs, ys;
                for (std::size_t i = 0; i < targets.size(); ++i) {
                    xs.push_back(reports[i].i_ty);
                    ys.push_back(reports[i].i_tx);
                }
                detail::write_text(sweep_svg_path, detail::sweep_svg(xs, ys));
            }
            return 0;
        }

        if (bench->parsed()) {
            const IBProblem problem = bench_model.build();
            const SolverConfig cfg = bench_solver.build(problem);
            const std::vector<double> targets = parse_targets(bench_targets_csv);
            std::ostringstream csv;
            csv << detail::meta_comment("bench") << "\n"
                << "algorithm,target,value,i_tx,i_ty,iterations,trials,residual,wall_time_ms\n";
            for (double t : targets) {
                const SolveReport rep = solve_ri(problem, t, cfg);
                csv << "abp," << detail::fmt(t) << ',' << detail::fmt(rep.value) << ','
                    << detail::fmt(rep.i_tx) << ',' << detail::fmt(rep.i_ty) << ','
                    << rep.iterations << ",1," << detail::fmt(rep.final_residual()) << ','
                    << detail::fmt(rep.wall_time_ms) << "\n";
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    const auto [pt, trials] = ba_adaptive(problem, t, bench_curve_tol, cfg);
                    const double ms = std::chrono::duration<double, std::milli>(
                                          std::chrono::steady_clock::now() - t0)
                                          .count();
                    csv << "ba," << detail::fmt(t) << ',' << detail::fmt(pt.i_tx) << ','
                        << detail::fmt(pt.i_tx) << ',' << detail::fmt(pt.i_ty) << ','
                        << pt.iterations << ',' << trials << ",," << detail::fmt(ms) << "\n";
                } catch (const BracketFailure& ex) {
                    std::cerr << "bench: BA failed at target " << detail::fmt(t) << ": "
                              << ex.what() << "\n";
                    csv << "ba," << detail::fmt(t) << ",nan,nan,nan,0,0,,nan\n";
                }
            }
            if (bench_out.empty()) std::cout << csv.str();
            else detail::write_text(bench_out, csv.str());
            return 0;
        }

        if (oracle->parsed()) {
            const std::vector<double> grid = detail::parse_grid(oracle_grid);
            const AnalyticCurve curve = oracle_model == "bernoulli"
                                            ? AnalyticCurve::bernoulli(oracle_e)
                                            : AnalyticCurve::gaussian(oracle_snr);
            const double unit = oracle_bits ? 1.0 / std::log(2.0) : 1.0;
            std::ostringstream csv;
            csv << detail::meta_comment("oracle") << "\n"
                << "target_i,analytic_r\n";
            for (double I : grid)
                csv << detail::fmt(I * unit) << ',' << detail::fmt(curve.r_of_i(I) * unit) << "\n";
            if (oracle_out.empty()) std::cout << csv.str();
            else detail::write_text(oracle_out, csv.str());
            return 0;
        }

        if (ingest->parsed()) {
            const SampleTable t = read_samples_csv(ingest_samples);
            const IBProblem problem = bin_samples(t, ingest_unit);
            save_problem(problem, ingest_out);
            std::cerr << "ingested " << t.size() << " samples into " << problem.source_size()
                      << " bins, " << problem.relevance_size() << " labels\n";
            return 0;
        }
    } catch (const InfeasibleTarget& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const NumericalFailure& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const BracketFailure& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const ParseError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    }
    return 3;
}

}  // namespace ibsolve::cli

#endif  // IBSOLVE_CLI_HPP
