// Convergence instrumentation: the exact per-step descent identity, the
// Pinsker lower bound on the descent, and the KKT residual of the
// semi-relaxed model.
#ifndef IBSOLVE_DIAGNOSTICS_HPP
#define IBSOLVE_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "ibsolve/prob_core.hpp"
#include "ibsolve/projection_kernel.hpp"
#include "ibsolve/solver_types.hpp"

namespace ibsolve {

/// Compression objective f(w,r) = sum_ij p_i w_ji (log w_ji - log r_j).
/// Equals I(T;X) when r is the marginal of w under p.
inline double objective_ri(const CondMatrix& w, const ProbVector& r, const ProbVector& p) {
    const std::size_t M = p.size(), N = w.rows();
    double total = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        const double pi = p[i];
        const auto col = w.column(i);
        for (std::size_t j = 0; j < N; ++j) {
            const double pw = pi * col[j];  // guards 0 * log(0/0) and underflow
            if (pw > 0.0) total += pw * std::log(col[j] / r[j]);
        }
    }
    return total;
}

// The four quantities of the descent identity between consecutive iterates:
//   f^{(n-1)} - f^{(n)} = lambda^{(n)} sum_j r_j^{(n-1)} D(z_j^{(n-1)} || z_j^{(n-2)})
//                        + D(r^{(n)} || r^{(n-1)})
//                        + sum_i p_i D(w_i^{(n-1)} || w_i^{(n)})
struct DescentBreakdown {
    double lhs = 0.0;     // f^{(n-1)} - f^{(n)}
    double term_z = 0.0;
    double term_r = 0.0;
    double term_w = 0.0;
    double gap = 0.0;     // |lhs - (term_z + term_r + term_w)|
    // sum_j r_j^{(n-1)} ||z_j^{(n-1)} - z_j^{(n-2)}||_1^2, cached for the
    // Pinsker bound which otherwise has no access to z^{(n-2)}.
    double dz_l1sq_weighted = 0.0;
};

/// Evaluates the identity on iterates from two consecutive full cycles.
/// `prev2_z` is the decoder of the cycle before `prev` (z^{(n-2)}).
/// An infinite divergence is reported as a failure, never clamped.
inline DescentBreakdown descent_identity(const CondMatrix& prev2_z, const SolverState& prev,
                                         const SolverState& curr, const IBProblem& problem) {
    const std::size_t M = problem.p.size(), N = prev.w.rows();
    DescentBreakdown b;
    b.lhs = objective_ri(prev.w, prev.r, problem.p) - objective_ri(curr.w, curr.r, problem.p);
    for (std::size_t j = 0; j < N; ++j) {
        const double kl = kl_divergence(prev.z.column(j), prev2_z.column(j));
        if (!std::isfinite(kl))
            throw NumericalFailure("descent_identity: D(z||z_prev) infinite at column " +
                                   std::to_string(j));
        b.term_z += prev.r[j] * kl;
        double l1 = 0.0;
        const auto za = prev.z.column(j), zb = prev2_z.column(j);
        for (std::size_t k = 0; k < za.size(); ++k) l1 += std::abs(za[k] - zb[k]);
        b.dz_l1sq_weighted += prev.r[j] * l1 * l1;
    }
    b.term_z *= curr.lambda;
    b.term_r = kl_divergence(curr.r, prev.r);
    if (!std::isfinite(b.term_r)) throw NumericalFailure("descent_identity: D(r||r_prev) infinite");
    for (std::size_t i = 0; i < M; ++i) {
        const double kl = kl_divergence(prev.w.column(i), curr.w.column(i));
        if (!std::isfinite(kl))
            throw NumericalFailure("descent_identity: D(w_prev||w) infinite at column " +
                                   std::to_string(i));
        b.term_w += problem.p[i] * kl;
    }
    b.gap = std::abs(b.lhs - (b.term_z + b.term_r + b.term_w));
    return b;
}

/// Pinsker lower bound on the per-step descent:
/// 1/2 [ lambda sum_j r_j ||dz_j||_1^2 + ||dr||_1^2 + sum_i p_i ||dw_i||_1^2 ].
inline double pinsker_bound(const DescentBreakdown& b, const SolverState& prev,
                            const SolverState& curr, const IBProblem& problem) {
    double dr = 0.0;
    for (std::size_t j = 0; j < prev.r.size(); ++j) dr += std::abs(curr.r[j] - prev.r[j]);
    double wsum = 0.0;
    for (std::size_t i = 0; i < problem.p.size(); ++i) {
        double l1 = 0.0;
        const auto wa = prev.w.column(i), wb = curr.w.column(i);
        for (std::size_t j = 0; j < wa.size(); ++j) l1 += std::abs(wa[j] - wb[j]);
        wsum += problem.p[i] * l1 * l1;
    }
    return 0.5 * (curr.lambda * b.dz_l1sq_weighted + dr * dr + wsum);
}

// KKT residual split into its violation sources.
struct KktBreakdown {
    double feas_r = 0.0;          // ||r - marginal(w,p)||_1
    double feas_z = 0.0;          // sum_j ||z_j - posterior_j(w,p,s)||_1
    double stationarity_w = 0.0;  // sum_i p_i D(w_i || bregman_i(lambda,d,r))
    double constraint_gap = 0.0;  // |sum p w s log z - i_hat|
    double dual_sign = 0.0;       // max(0, -lambda)

    double total() const {
        return feas_r + feas_z + stationarity_w + constraint_gap + dual_sign;
    }
};

/// Residual of the first-order optimality system at a cycle-end state: primal
/// feasibility of the recovered constraints, stationarity of the encoder
/// against its own Bregman update (measured in the algorithm's KL geometry),
/// the active-constraint gap and the multiplier sign. Zero exactly at a KKT
/// point of the semi-relaxed model.
inline KktBreakdown kkt_residual_breakdown(const SolverState& state, const IBProblem& problem,
                                           double i_hat) {
    KktBreakdown out;
    const std::size_t M = problem.p.size(), N = state.w.rows(), K = problem.s.rows();

    const ProbVector rm = marginal(state.w, problem.p);
    for (std::size_t j = 0; j < N; ++j) out.feas_r += std::abs(state.r[j] - rm[j]);

    const CondMatrix zp = posterior(state.w, problem.p, problem.s);
    for (std::size_t j = 0; j < N; ++j) {
        const auto za = state.z.column(j), zb = zp.column(j);
        for (std::size_t k = 0; k < K; ++k) out.feas_z += std::abs(za[k] - zb[k]);
    }

    const CondMatrix wb = bregman_update_w(state.lambda, state.d, state.r);
    for (std::size_t i = 0; i < M; ++i)
        out.stationarity_w += problem.p[i] * kl_divergence(state.w.column(i), wb.column(i));

    double wd = 0.0;  // sum_ij p_i w_ji d_ij = -sum p w s log z (clamped log)
    for (std::size_t i = 0; i < M; ++i) {
        const auto col = state.w.column(i);
        const auto drow = state.d.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < N; ++j) acc += col[j] * drow[j];
        wd += problem.p[i] * acc;
    }
    out.constraint_gap = std::abs(-wd - i_hat);
    out.dual_sign = std::max(0.0, -state.lambda);
    return out;
}

inline double kkt_residual(const SolverState& state, const IBProblem& problem, double i_hat) {
    return kkt_residual_breakdown(state, problem, i_hat).total();
}

}  // namespace ibsolve

#endif  // IBSOLVE_DIAGNOSTICS_HPP
