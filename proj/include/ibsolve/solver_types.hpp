// State and report types shared by the solver loops and the diagnostics.
#ifndef IBSOLVE_SOLVER_TYPES_HPP
#define IBSOLVE_SOLVER_TYPES_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ibsolve/prob_core.hpp"
#include "ibsolve/projection_kernel.hpp"

namespace ibsolve {

// One full iterate of the alternating scheme. After a complete cycle,
// r == marginal(w,p), z == posterior(w,p,s) and d == compute_metric(z,s,floor)
// hold by construction: the iteration recovers the relaxed constraints.
struct SolverState {
    CondMatrix w;   // N x M encoder P(T|X)
    ProbVector r;   // bottleneck marginal P(T)
    CondMatrix z;   // K x N decoder P(Y|T)
    Metric d;       // M x N metric
    double lambda = 1.0;
    std::size_t iter = 0;
};

struct SolverConfig {
    std::size_t cardinality_n = 0;  // bottleneck alphabet size; must be >= 1
    std::size_t max_iter = 3000;
    double objective_tol = 1e-6;    // stop when the per-step decrease falls below
    double residual_tol = 1e-12;    // or the KKT residual does
    std::uint64_t rng_seed = 0;
    RootConfig root{};
    double log_floor = 1e-16;
};

// Outcome of one solve. `value` is R for RI mode and I for IR mode, in nats.
// Trajectories start at the first cycle whose multiplier solve found a root:
// earlier capped cycles (target locally unreachable under the initial random
// decoder) are outside the regime the descent theory covers and are reported
// in status_notes instead.
struct SolveReport {
    double value = 0.0;
    double i_tx = 0.0;
    double i_ty = 0.0;
    double lambda = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> objective_trajectory;
    std::vector<double> residual_trajectory;
    double wall_time_ms = 0.0;
    std::vector<std::string> status_notes;
    // Diagnostics accumulated over consecutive rooted steps (n >= 2):
    double descent_gap_max = 0.0;     // worst |descent - identity terms|
    double pinsker_slack_min = 0.0;   // worst (descent - Pinsker bound), >= 0 up to noise
    double feasibility_gap_max = 0.0; // worst L1 violation of the recovered constraints

    double final_residual() const {
        return residual_trajectory.empty() ? 0.0 : residual_trajectory.back();
    }
};

}  // namespace ibsolve

#endif  // IBSOLVE_SOLVER_TYPES_HPP
