// Per-iteration computational kernel: the metric d, the Bregman-projection
// update of the encoder w, the dual functions G(lambda) / G_IR(lambda), and a
// safeguarded Newton root finder for the multiplier.
#ifndef IBSOLVE_PROJECTION_KERNEL_HPP
#define IBSOLVE_PROJECTION_KERNEL_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <tuple>
#include <utility>
#include <vector>

#include "ibsolve/prob_core.hpp"

namespace ibsolve {

// Cross-entropy cost d_ij = -sum_k s_ki log z_kj, stored row-major (M x N) so
// the per-source row d_i. is contiguous for the softmax sweeps.
class Metric {
  public:
    Metric(std::size_t rows, std::size_t cols, std::vector<double> row_major)
        : rows_(rows), cols_(cols), a_(std::move(row_major)) {
        if (a_.size() != rows_ * cols_)
            throw std::invalid_argument("Metric: shape/storage mismatch");
        for (double x : a_)
            if (!std::isfinite(x) || x < 0.0)
                throw std::invalid_argument("Metric: entries must be finite and >= 0");
    }

    std::size_t rows() const { return rows_; }  // M, source symbols
    std::size_t cols() const { return cols_; }  // N, bottleneck symbols
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
    std::span<const double> row(std::size_t i) const { return {a_.data() + i * cols_, cols_}; }
    std::span<const double> data() const { return a_; }

    bool operator==(const Metric& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
    }

  private:
    std::size_t rows_, cols_;
    std::vector<double> a_;
};

struct RootConfig {
    double newton_tol = 1e-12;
    int max_newton_iters = 100;
    double lambda_cap = 1e4;
    double bracket_growth = 2.0;
};

enum class RootStatus {
    Root,              // |g(lambda)| <= newton_tol at the returned multiplier
    InactiveAtZero,    // g(0) <= 0: the constraint is slack, lambda = 0
    CappedInfeasible,  // g(lambda_cap) > 0: no root below the cap
};

struct RootResult {
    double lambda = 0.0;
    RootStatus status = RootStatus::Root;
    double g_value = 0.0;  // g at the returned lambda
};

/// d_ij = -sum_k s_ki log(max(z_kj, floor)).  The floor keeps every entry
/// finite; well-conditioned problems never touch it.
inline Metric compute_metric(const CondMatrix& z, const CondMatrix& s, double floor) {
    if (!(floor > 0.0)) throw std::invalid_argument("compute_metric: floor must be > 0");
    const std::size_t K = s.rows(), M = s.cols(), N = z.cols();
    if (z.rows() != K) throw std::invalid_argument("compute_metric: z/s row mismatch");
    // Row-major -log z once, then d = s^T . L with contiguous row updates.
    std::vector<double> L(K * N);
    for (std::size_t j = 0; j < N; ++j) {
        const auto zcol = z.column(j);
        for (std::size_t k = 0; k < K; ++k)
            L[k * N + j] = -std::log(zcol[k] > floor ? zcol[k] : floor);
    }
    std::vector<double> d(M * N, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        const double* Lrow = L.data() + k * N;
        for (std::size_t i = 0; i < M; ++i) {
            const double ski = s(k, i);
            if (ski == 0.0) continue;
            double* drow = d.data() + i * N;
            for (std::size_t j = 0; j < N; ++j) drow[j] += ski * Lrow[j];
        }
    }
    for (double& x : d)
        if (x < 0.0) x = 0.0;  // -log of a clamped z can round to -0
    return Metric(M, N, std::move(d));
}

namespace detail {

inline std::vector<double> log_masses(const ProbVector& r) {
    std::vector<double> logr(r.size());
    for (std::size_t j = 0; j < r.size(); ++j)
        logr[j] = r[j] > 0.0 ? std::log(r[j]) : -std::numeric_limits<double>::infinity();
    return logr;
}

// One softmax column: weights_j = exp(logr_j - lambda d_ij - max) normalized.
// Writes N weights into `out`; returns the log-partition log sum_j e^{...}.
inline double tilt_column(std::span<const double> logr, std::span<const double> drow,
                          double lambda, double* out) {
    const std::size_t N = logr.size();
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < N; ++j) {
        const double a = logr[j] - lambda * drow[j];
        out[j] = a;
        if (a > mx) mx = a;
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        out[j] = std::exp(out[j] - mx);
        sum += out[j];
    }
    const double inv = 1.0 / sum;
    for (std::size_t j = 0; j < N; ++j) out[j] *= inv;
    return mx + std::log(sum);
}

}  // namespace detail

/// Bregman projection of the exponential tilt onto column-stochastic
/// matrices: w_ji = e^{-lambda d_ij} r_j / sum_j' e^{-lambda d_ij'} r_j'.
inline CondMatrix bregman_update_w(double lambda, const Metric& d, const ProbVector& r) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("bregman_update_w: lambda must be >= 0");
    if (d.cols() != r.size()) throw std::invalid_argument("bregman_update_w: d/r shape mismatch");
    const std::size_t M = d.rows(), N = d.cols();
    const std::vector<double> logr = detail::log_masses(r);
    std::vector<double> w(N * M);
    std::vector<double> buf(N);
    for (std::size_t i = 0; i < M; ++i) {
        detail::tilt_column(logr, d.row(i), lambda, buf.data());
        double* col = w.data() + i * N;
        for (std::size_t j = 0; j < N; ++j) col[j] = buf[j];
    }
    return CondMatrix(N, M, std::move(w));
}

/// G(lambda) = sum_ij d_ij p_i w_ij(lambda) + i_hat for the R(I) model.
/// Non-increasing in lambda; its root makes the relevance constraint active.
inline double g_ri(double lambda, const Metric& d, const ProbVector& r, const ProbVector& p,
                   double i_hat) {
    const std::size_t M = d.rows(), N = d.cols();
    const std::vector<double> logr = detail::log_masses(r);
    std::vector<double> buf(N);
    double acc = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        const auto drow = d.row(i);
        detail::tilt_column(logr, drow, lambda, buf.data());
        double ed = 0.0;
        for (std::size_t j = 0; j < N; ++j) ed += buf[j] * drow[j];
        acc += p[i] * ed;
    }
    return acc + i_hat;
}

/// G_IR(lambda) = -sum_i p_i log sum_j e^{-lambda d_ij} r_j
///               - lambda sum_ij p_i d_ij w_ij(lambda) - rate.
/// Equals (achieved rate at lambda) - rate; non-decreasing in lambda.
inline double g_ir(double lambda, const Metric& d, const ProbVector& r, const ProbVector& p,
                   double rate) {
    const std::size_t M = d.rows(), N = d.cols();
    const std::vector<double> logr = detail::log_masses(r);
    std::vector<double> buf(N);
    double acc = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        const auto drow = d.row(i);
        const double logS = detail::tilt_column(logr, drow, lambda, buf.data());
        double ed = 0.0;
        for (std::size_t j = 0; j < N; ++j) ed += buf[j] * drow[j];
        acc += p[i] * (-logS - lambda * ed);
    }
    return acc - rate;
}

// Value and analytic derivative of a dual function at lambda. The derivative
// of g_ri is -sum_i p_i Var_{w_i}(d_i.), obtained in the same softmax pass.
using DualFunction = std::function<std::pair<double, double>(double)>;

/// g_ri together with its lambda-derivative, one softmax pass.
inline std::pair<double, double> g_ri_with_derivative(double lambda, const Metric& d,
                                                      const ProbVector& r, const ProbVector& p,
                                                      double i_hat) {
    const std::size_t M = d.rows(), N = d.cols();
    const std::vector<double> logr = detail::log_masses(r);
    std::vector<double> buf(N);
    double acc = 0.0, var = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        const auto drow = d.row(i);
        detail::tilt_column(logr, drow, lambda, buf.data());
        double ed = 0.0, ed2 = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            ed += buf[j] * drow[j];
            ed2 += buf[j] * drow[j] * drow[j];
        }
        acc += p[i] * ed;
        var += p[i] * (ed2 - ed * ed);
    }
    return {acc + i_hat, -var};
}

/// g_ir together with its lambda-derivative (+lambda sum_i p_i Var_{w_i}(d)).
inline std::pair<double, double> g_ir_with_derivative(double lambda, const Metric& d,
                                                      const ProbVector& r, const ProbVector& p,
                                                      double rate) {
    const std::size_t M = d.rows(), N = d.cols();
    const std::vector<double> logr = detail::log_masses(r);
    std::vector<double> buf(N);
    double acc = 0.0, var = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        const auto drow = d.row(i);
        const double logS = detail::tilt_column(logr, drow, lambda, buf.data());
        double ed = 0.0, ed2 = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            ed += buf[j] * drow[j];
            ed2 += buf[j] * drow[j] * drow[j];
        }
        acc += p[i] * (-logS - lambda * ed);
        var += p[i] * (ed2 - ed * ed);
    }
    return {acc - rate, lambda * var};
}

/// Root of a non-increasing g on [0, lambda_cap]. Newton steps with the
/// analytic derivative, accepted only inside the current sign-change bracket,
/// otherwise bisection; the bracket's upper end grows geometrically from 1.
inline RootResult solve_lambda(const DualFunction& g, const RootConfig& cfg) {
    if (!(cfg.newton_tol > 0.0) || cfg.max_newton_iters < 1 || !(cfg.lambda_cap > 0.0) ||
        !(cfg.bracket_growth > 1.0))
        throw std::invalid_argument("solve_lambda: invalid RootConfig");
    auto eval = [&](double lam) {
        const auto [v, dv] = g(lam);
        if (!std::isfinite(v))
            throw NumericalFailure("solve_lambda: non-finite dual value at lambda=" +
                                   std::to_string(lam));
        return std::pair<double, double>{v, dv};
    };
    // Over-resolve below newton_tol when possible so the reported root's
    // residual does not pollute downstream descent identities.
    const double aim = std::max(1e-15, cfg.newton_tol * 1e-3);

    const double g0 = eval(0.0).first;
    if (std::abs(g0) <= cfg.newton_tol) return {0.0, RootStatus::Root, g0};
    if (g0 < 0.0) return {0.0, RootStatus::InactiveAtZero, g0};

    double lo = 0.0;
    double hi = std::min(1.0, cfg.lambda_cap);
    auto [ghi, dghi] = eval(hi);
    while (ghi > 0.0 && hi < cfg.lambda_cap) {
        lo = hi;
        hi = std::min(hi * cfg.bracket_growth, cfg.lambda_cap);
        std::tie(ghi, dghi) = eval(hi);
    }
    if (ghi > cfg.newton_tol)  // no sign change up to the cap
        return {cfg.lambda_cap, RootStatus::CappedInfeasible, ghi};

    double lam = hi, glam = ghi, dglam = dghi;
    double best_lam = lam, best_gval = glam;
    for (int it = 0; it < cfg.max_newton_iters && std::abs(glam) > aim; ++it) {
        if (glam > 0.0) lo = lam;
        else hi = lam;
        double cand = dglam < 0.0 ? lam - glam / dglam : lo;
        if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
        lam = cand;
        std::tie(glam, dglam) = eval(lam);
        if (std::abs(glam) < std::abs(best_gval)) { best_lam = lam; best_gval = glam; }
        if (hi - lo < 1e-16 * std::max(1.0, hi)) break;
    }
    if (std::abs(glam) > std::abs(best_gval)) { lam = best_lam; glam = best_gval; }
    if (std::abs(glam) <= cfg.newton_tol) return {lam, RootStatus::Root, glam};
    throw NumericalFailure("solve_lambda: root not resolved to newton_tol (|g|=" +
                           std::to_string(std::abs(glam)) + ")");
}

}  // namespace ibsolve

#endif  // IBSOLVE_PROJECTION_KERNEL_HPP
