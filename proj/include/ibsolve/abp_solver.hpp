// Alternating Bregman projection loops for the relevance-compression
// function R(I) and its inverse I(R), with seeded initialization, stopping
// rules, and trajectory/diagnostic recording.
#ifndef IBSOLVE_ABP_SOLVER_HPP
#define IBSOLVE_ABP_SOLVER_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ibsolve/diagnostics.hpp"
#include "ibsolve/prob_core.hpp"
#include "ibsolve/projection_kernel.hpp"
#include "ibsolve/solver_types.hpp"

namespace ibsolve {

// Tolerance on the achieved target before a finished run may call itself
// converged (transiently capped multipliers can leave the target violated).
inline constexpr double kTargetSlack = 1e-4;

/// Shifted relevance threshold: i_hat = I - H(Y), so the constraint reads
/// sum p w s log z >= i_hat.
inline double hat_i(double target_i, const ProbVector& q) {
    return target_i - entropy(q);
}

namespace detail {

// Unit-rate exponential from explicit inverse-CDF so that states are
// reproducible across standard libraries, not just across runs.
inline double exponential_draw(std::mt19937_64& gen) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;  // [0,1)
    return -std::log1p(-u);
}

// Bottleneck masses this small only arise from exponent underflow on the way
// to cluster death (a capped multiplier tilts w by e^{-1e4 d}); letting them
// linger in the denormal range turns p_i w_ji products into 0 * inf hazards.
inline constexpr double kDeadClusterMass = 1e-250;

// Zeroes encoder rows whose bottleneck mass has underflowed below
// kDeadClusterMass and renormalizes the columns. A dead row stays dead under
// the tilt update, so this is a one-way snap.
inline CondMatrix snap_dead_clusters(CondMatrix w, const ProbVector& p) {
    const std::size_t N = w.rows(), M = w.cols();
    std::vector<double> mass(N, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        const double pi = p[i];
        const auto col = w.column(i);
        for (std::size_t j = 0; j < N; ++j) mass[j] += pi * col[j];
    }
    bool any = false;
    std::vector<bool> dying(N, false);
    for (std::size_t j = 0; j < N; ++j) {
        if (mass[j] >= kDeadClusterMass) continue;
        for (std::size_t i = 0; i < M && !dying[j]; ++i)
            if (w(j, i) != 0.0) dying[j] = any = true;
    }
    if (!any) return w;
    std::vector<double> a(w.data().begin(), w.data().end());
    for (std::size_t i = 0; i < M; ++i) {
        double* col = a.data() + i * N;
        double sum = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            if (dying[j]) col[j] = 0.0;
            sum += col[j];
        }
        if (sum > 0.0) {
            for (std::size_t j = 0; j < N; ++j) col[j] /= sum;
        } else {
            // Source symbol supported only by dead clusters (possible when
            // p_i == 0): any distribution works, make it uniform.
            for (std::size_t j = 0; j < N; ++j) col[j] = 1.0 / static_cast<double>(N);
        }
    }
    return CondMatrix(N, M, std::move(a));
}

}  // namespace detail

/// Random initial iterate: encoder columns drawn from a seeded symmetric
/// Dirichlet(1), then one consistency pass (r, z, d) and lambda = 1.
/// Identical seeds yield bitwise-identical states.
inline SolverState init_state(const IBProblem& problem, const SolverConfig& cfg) {
    if (cfg.cardinality_n < 1)
        throw std::invalid_argument("init_state: cardinality_n must be >= 1");
    const std::size_t M = problem.p.size(), N = cfg.cardinality_n;
    std::mt19937_64 gen(cfg.rng_seed);
    std::vector<double> w(N * M);
    for (std::size_t i = 0; i < M; ++i) {
        double* col = w.data() + i * N;
        double sum = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            col[j] = detail::exponential_draw(gen);
            sum += col[j];
        }
        if (sum == 0.0) { col[0] = 1.0; sum = 1.0; }
        for (std::size_t j = 0; j < N; ++j) col[j] /= sum;
    }
    CondMatrix wm(N, M, std::move(w));
    ProbVector r = marginal(wm, problem.p);
    CondMatrix z = posterior(wm, problem.p, problem.s);
    Metric d = compute_metric(z, problem.s, cfg.log_floor);
    return SolverState{std::move(wm), std::move(r), std::move(z), std::move(d), 1.0, 0};
}

/// One full R(I) cycle: multiplier from the root of G, then w, r, z, d.
/// When `root_out` is given, the multiplier solve's outcome is stored there.
inline SolverState abp_step_ri(const SolverState& state, const IBProblem& problem, double i_hat,
                               const SolverConfig& cfg, RootResult* root_out = nullptr) {
    const RootResult root = solve_lambda(
        [&](double lam) {
            return g_ri_with_derivative(lam, state.d, state.r, problem.p, i_hat);
        },
        cfg.root);
    if (root_out) *root_out = root;
    CondMatrix w =
        detail::snap_dead_clusters(bregman_update_w(root.lambda, state.d, state.r), problem.p);
    ProbVector r = marginal(w, problem.p);
    CondMatrix z = posterior(w, problem.p, problem.s);
    Metric d = compute_metric(z, problem.s, cfg.log_floor);
    return SolverState{std::move(w), std::move(r), std::move(z), std::move(d), root.lambda,
                       state.iter + 1};
}

/// One full I(R) cycle; identical to the R(I) cycle except the multiplier is
/// the root of G_IR. G_IR is non-decreasing, so its negation feeds the same
/// safeguarded solver.
inline SolverState abp_step_ir(const SolverState& state, const IBProblem& problem, double rate,
                               const SolverConfig& cfg, RootResult* root_out = nullptr) {
    RootResult root = solve_lambda(
        [&](double lam) {
            auto [v, dv] = g_ir_with_derivative(lam, state.d, state.r, problem.p, rate);
            return std::pair<double, double>{-v, -dv};
        },
        cfg.root);
    root.g_value = -root.g_value;
    if (root_out) *root_out = root;
    CondMatrix w =
        detail::snap_dead_clusters(bregman_update_w(root.lambda, state.d, state.r), problem.p);
    ProbVector r = marginal(w, problem.p);
    CondMatrix z = posterior(w, problem.p, problem.s);
    Metric d = compute_metric(z, problem.s, cfg.log_floor);
    return SolverState{std::move(w), std::move(r), std::move(z), std::move(d), root.lambda,
                       state.iter + 1};
}

/// Relevance objective f_IR(w,z) = -sum_ijk p_i w_ji s_ki log z_kj, in nats.
/// Equals H(Y|T) whenever z is the posterior of w. May return +infinity when
/// z lacks support the joint requires.
inline double objective_ir(const CondMatrix& w, const CondMatrix& z, const IBProblem& problem) {
    const std::size_t M = problem.p.size(), N = w.rows(), K = problem.s.rows();
    // joint_kj = sum_i p_i w_ji s_ki
    std::vector<double> joint(K * N, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        const double pi = problem.p[i];
        const auto wcol = w.column(i);
        const auto scol = problem.s.column(i);
        for (std::size_t j = 0; j < N; ++j) {
            const double a = pi * wcol[j];
            if (a == 0.0) continue;
            double* jj = joint.data() + j * K;
            for (std::size_t k = 0; k < K; ++k) jj[k] += a * scol[k];
        }
    }
    double total = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        const auto zcol = z.column(j);
        const double* jj = joint.data() + j * K;
        for (std::size_t k = 0; k < K; ++k) {
            if (jj[k] == 0.0) continue;
            if (zcol[k] <= 0.0) return std::numeric_limits<double>::infinity();
            total -= jj[k] * std::log(zcol[k]);
        }
    }
    return total < 0.0 ? 0.0 : total;
}

namespace detail {

inline double relevance_ty(const SolverState& st, const IBProblem& problem) {
    double hyt = 0.0;
    for (std::size_t j = 0; j < st.r.size(); ++j) hyt += st.r[j] * entropy(st.z.column(j));
    return std::max(0.0, problem.h_y - hyt);  // conditioning cannot raise entropy
}

// Residual recorded for I(R) runs: feasibility of the recovered constraints,
// encoder stationarity, rate-constraint violation and multiplier sign.
inline double ir_residual(const SolverState& st, const IBProblem& problem, double rate) {
    KktBreakdown b = kkt_residual_breakdown(st, problem, 0.0);
    const double itx = objective_ri(st.w, st.r, problem.p);
    return b.feas_r + b.feas_z + b.stationarity_w + std::max(0.0, itx - rate) +
           std::max(0.0, -st.lambda);
}

struct RunDiagnostics {
    double gap_max = 0.0;
    double slack_min = 0.0;
    double feas_max = 0.0;
};

}  // namespace detail

/// Computes R(target_i): the minimum I(T;X) subject to I(T;Y) >= target_i.
inline SolveReport solve_ri(const IBProblem& problem, double target_i, const SolverConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!(target_i >= 0.0)) throw InfeasibleTarget("solve_ri: target must be >= 0");
    const double ixy = problem.mutual_information_xy();
    if (target_i > ixy * (1.0 + 1e-9) + 1e-15)
        throw InfeasibleTarget("solve_ri: target " + std::to_string(target_i) +
                               " exceeds I(X;Y) = " + std::to_string(ixy));

    SolveReport rep;
    const double i_hat = hat_i(target_i, problem.q);

    if (target_i <= 1e-15) {
        // Independence is feasible and free: constant-column encoder, z = q.
        const std::size_t N = std::max<std::size_t>(cfg.cardinality_n, 1);
        CondMatrix w = CondMatrix::from_columns(std::vector<std::vector<double>>(
            problem.p.size(), std::vector<double>(N, 1.0 / static_cast<double>(N))));
        ProbVector r = marginal(w, problem.p);
        CondMatrix z = posterior(w, problem.p, problem.s);
        Metric d = compute_metric(z, problem.s, cfg.log_floor);
        SolverState st{std::move(w), std::move(r), std::move(z), std::move(d), 0.0, 0};
        rep.value = 0.0;
        rep.i_tx = 0.0;
        rep.i_ty = detail::relevance_ty(st, problem);
        rep.lambda = 0.0;
        rep.iterations = 0;
        rep.converged = true;
        rep.objective_trajectory = {0.0};
        rep.residual_trajectory = {kkt_residual(st, problem, i_hat)};
        rep.status_notes.push_back("trivial target: exact independent solution");
        rep.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        return rep;
    }

    SolverState state = init_state(problem, cfg);
    std::optional<CondMatrix> z_nm2;  // decoder of the cycle before `state`
    RootStatus prev_status = RootStatus::CappedInfeasible;  // no root yet
    bool recording = false;
    std::size_t capped = 0;
    std::size_t identity_undefined = 0;
    detail::RunDiagnostics diag;

    for (std::size_t n = 1; n <= cfg.max_iter; ++n) {
        RootResult root;
        SolverState next = abp_step_ri(state, problem, i_hat, cfg, &root);

        if (root.status == RootStatus::CappedInfeasible) {
            ++capped;
            if (capped == 1)
                rep.status_notes.push_back("lambda capped at iteration " + std::to_string(n) +
                                           " (target locally unreachable)");
        }
        if (!recording && root.status != RootStatus::CappedInfeasible) recording = true;

        if (recording) {
            rep.objective_trajectory.push_back(objective_ri(next.w, next.r, problem.p));
            const KktBreakdown kb = kkt_residual_breakdown(next, problem, i_hat);
            rep.residual_trajectory.push_back(kb.total());
            diag.feas_max = std::max(diag.feas_max, std::max(kb.feas_r, kb.feas_z));
            if (z_nm2 && root.status == RootStatus::Root && prev_status == RootStatus::Root) {
                // On extreme multipliers an encoder entry can underflow to an
                // exact zero, leaving one divergence of the identity
                // undefined for that step pair; record, don't abort.
                try {
                    const DescentBreakdown db = descent_identity(*z_nm2, state, next, problem);
                    diag.gap_max = std::max(diag.gap_max, db.gap);
                    diag.slack_min =
                        std::min(diag.slack_min, db.lhs - pinsker_bound(db, state, next, problem));
                } catch (const NumericalFailure&) {
                    ++identity_undefined;
                }
            }
        }

        z_nm2 = state.z;
        state = std::move(next);
        prev_status = root.status;

        const auto& traj = rep.objective_trajectory;
        if (traj.size() >= 2) {
            const double decrease = traj[traj.size() - 2] - traj.back();
            if (decrease < cfg.objective_tol || rep.residual_trajectory.back() < cfg.residual_tol) {
                rep.converged = true;
                break;
            }
        }
    }

    if (capped > 0)
        rep.status_notes.push_back("capped iterations total: " + std::to_string(capped));
    if (identity_undefined > 0)
        rep.status_notes.push_back("descent identity undefined on " +
                                   std::to_string(identity_undefined) +
                                   " step(s) (underflow support change)");
    rep.value = objective_ri(state.w, state.r, problem.p);
    rep.i_tx = rep.value;
    rep.i_ty = detail::relevance_ty(state, problem);
    rep.lambda = state.lambda;
    rep.iterations = state.iter;
    rep.descent_gap_max = diag.gap_max;
    rep.pinsker_slack_min = diag.slack_min;
    rep.feasibility_gap_max = diag.feas_max;
    if (rep.i_ty < target_i - kTargetSlack) {
        rep.converged = false;
        rep.status_notes.push_back("final iterate misses the relevance target by " +
                                   std::to_string(target_i - rep.i_ty));
    }
    rep.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

/// Computes I(target_r): the maximum I(T;Y) subject to I(T;X) <= target_r.
/// Reported as H(Y) - f_IR*, since f_IR equals H(Y|T) at consistency.
inline SolveReport solve_ir(const IBProblem& problem, double target_r, const SolverConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    if (!(target_r >= 0.0)) throw InfeasibleTarget("solve_ir: rate target must be >= 0");

    SolveReport rep;
    SolverState state = init_state(problem, cfg);
    bool recording = false;
    std::size_t capped = 0;
    double feas_max = 0.0;

    for (std::size_t n = 1; n <= cfg.max_iter; ++n) {
        RootResult root;
        SolverState next = abp_step_ir(state, problem, target_r, cfg, &root);
        if (root.status == RootStatus::CappedInfeasible) {
            ++capped;
            if (capped == 1)
                rep.status_notes.push_back("lambda capped at iteration " + std::to_string(n) +
                                           " (rate constraint slack at the cap)");
        }
        if (!recording && root.status != RootStatus::CappedInfeasible) recording = true;

        if (recording) {
            rep.objective_trajectory.push_back(objective_ir(next.w, next.z, problem));
            const double res = detail::ir_residual(next, problem, target_r);
            rep.residual_trajectory.push_back(res);
            const KktBreakdown kb = kkt_residual_breakdown(next, problem, 0.0);
            feas_max = std::max(feas_max, std::max(kb.feas_r, kb.feas_z));
        }

        state = std::move(next);

        const auto& traj = rep.objective_trajectory;
        if (traj.size() >= 2) {
            const double decrease = traj[traj.size() - 2] - traj.back();
            if (decrease < cfg.objective_tol || rep.residual_trajectory.back() < cfg.residual_tol) {
                rep.converged = true;
                break;
            }
        }
    }

    if (capped > 0)
        rep.status_notes.push_back("capped iterations total: " + std::to_string(capped));
    const double f_ir = objective_ir(state.w, state.z, problem);
    rep.value = problem.h_y - f_ir;
    rep.i_ty = rep.value;
    rep.i_tx = objective_ri(state.w, state.r, problem.p);
    rep.lambda = state.lambda;
    rep.iterations = state.iter;
    rep.feasibility_gap_max = feas_max;
    if (rep.i_tx > target_r + kTargetSlack) {
        rep.converged = false;
        rep.status_notes.push_back("final iterate exceeds the rate target by " +
                                   std::to_string(rep.i_tx - target_r));
    }
    rep.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace ibsolve

#endif  // IBSOLVE_ABP_SOLVER_HPP
