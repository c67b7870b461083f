// Closed-form ground truth and problem builders for the jointly Bernoulli
// and jointly Gaussian source models.
//
// Bernoulli: X ~ B(1/2), Y ~ B(1/2), X xor Y ~ B(e). The optimal encoder is a
// binary symmetric channel with flip probability u, which attains
//   I(T;X) = log 2 - h(u)   and   I(T;Y) = log 2 - h(v),  v = e + (1-2e)u.
// The curve therefore maps target I = log 2 - h(v(u)) to R = log 2 - h(u);
// u = 0 gives (I(X;Y), H(X)) and u = 1/2 gives (0, 0).
//
// Gaussian: Y, S ~ N(0,1) independent, X = sqrt(SNR) Y + S, truncated to
// [-L, L] and discretized on midpoint grids. Analytically
//   R(I) = -(1/2) log(((1+SNR) e^{-2I} - 1) / SNR),  0 <= I < (1/2) log(1+SNR).
#ifndef IBSOLVE_ORACLES_HPP
#define IBSOLVE_ORACLES_HPP

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ibsolve/prob_core.hpp"

namespace ibsolve {

/// Doubly symmetric binary source with flip probability e.
inline IBProblem bernoulli_problem(double e) {
    if (!(e >= 0.0 && e <= 0.5))
        throw std::invalid_argument("bernoulli_problem: e outside [0, 0.5]");
    ProbVector p({0.5, 0.5});
    CondMatrix s = CondMatrix::from_columns({{1.0 - e, e}, {e, 1.0 - e}});
    return IBProblem::from_parts(std::move(p), std::move(s));
}

/// Analytic curve point (I, R) for the Bernoulli model at encoder flip u.
inline std::pair<double, double> bernoulli_curve(double u, double e) {
    if (!(u >= 0.0 && u <= 0.5))
        throw std::invalid_argument("bernoulli_curve: u outside [0, 0.5]");
    if (!(e >= 0.0 && e <= 0.5))
        throw std::invalid_argument("bernoulli_curve: e outside [0, 0.5]");
    const double ln2 = std::log(2.0);
    const double v = e + (1.0 - 2.0 * e) * u;
    return {ln2 - binary_entropy(v), ln2 - binary_entropy(u)};
}

/// Discretized jointly Gaussian model on a symmetric midpoint grid.
/// p_i ~ N(0, 1+snr) at x_i; s_.i ~ N(sqrt(snr) x_i / (1+snr), 1/(1+snr))
/// on the y grid, column-normalized.
inline IBProblem gaussian_problem(double snr, double L, std::size_t M, std::size_t K) {
    if (!(snr > 0.0)) throw std::invalid_argument("gaussian_problem: snr must be > 0");
    if (!(L > 0.0)) throw std::invalid_argument("gaussian_problem: L must be > 0");
    if (M < 2 || K < 2) throw std::invalid_argument("gaussian_problem: M, K must be >= 2");

    // Mirrored grid so opposite points are exact negations and the even
    // densities come out exactly symmetric.
    auto midpoint_grid = [](double half_width, std::size_t n) {
        std::vector<double> x(n);
        const double step = 2.0 * half_width / static_cast<double>(n);
        for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
            const double v = -half_width + (static_cast<double>(i) + 0.5) * step;
            x[i] = v;
            x[n - 1 - i] = -v;
        }
        return x;
    };
    const std::vector<double> xg = midpoint_grid(L, M);
    const std::vector<double> yg = midpoint_grid(L, K);

    std::vector<double> p(M);
    const double var_x = 1.0 + snr;
    for (std::size_t i = 0; i < M; ++i) p[i] = std::exp(-xg[i] * xg[i] / (2.0 * var_x));
    double psum = 0.0;
    for (double v : p) psum += v;
    for (double& v : p) v /= psum;

    const double var_yx = 1.0 / (1.0 + snr);
    const double slope = std::sqrt(snr) / (1.0 + snr);
    std::vector<double> s(K * M);
    for (std::size_t i = 0; i < M; ++i) {
        const double mu = slope * xg[i];
        double* col = s.data() + i * K;
        double csum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double dyk = yg[k] - mu;
            col[k] = std::exp(-dyk * dyk / (2.0 * var_yx));
            csum += col[k];
        }
        for (std::size_t k = 0; k < K; ++k) col[k] /= csum;
    }
    return IBProblem::from_parts(ProbVector(std::move(p)), CondMatrix(K, M, std::move(s)));
}

/// Analytic R(I) of the Gaussian model, valid for 0 <= I < (1/2) log(1+snr).
inline double gaussian_curve(double target_i, double snr) {
    if (!(snr > 0.0)) throw std::invalid_argument("gaussian_curve: snr must be > 0");
    const double cap = 0.5 * std::log1p(snr);
    if (!(target_i >= 0.0 && target_i < cap))
        throw std::invalid_argument("gaussian_curve: target outside [0, (1/2)log(1+snr))");
    const double denom = (1.0 + snr) * std::exp(-2.0 * target_i) - 1.0;
    return -0.5 * std::log(denom / snr);
}

// R(I) evaluator for either model, used by curve-membership checks.
class AnalyticCurve {
  public:
    static AnalyticCurve bernoulli(double e) { return AnalyticCurve{Model::Bernoulli, e}; }
    static AnalyticCurve gaussian(double snr) { return AnalyticCurve{Model::Gaussian, snr}; }

    /// Maximum attainable target I (the source mutual information).
    double max_target() const {
        if (model_ == Model::Bernoulli) return std::log(2.0) - binary_entropy(param_);
        return 0.5 * std::log1p(param_);
    }

    /// R at a given target I. Bernoulli inverts I(u) by bisection on u.
    double r_of_i(double target_i) const {
        if (model_ == Model::Gaussian) return gaussian_curve(target_i, param_);
        if (!(target_i >= 0.0 && target_i <= max_target() * (1.0 + 1e-12)))
            throw std::invalid_argument("AnalyticCurve: target outside [0, I(X;Y)]");
        // I(u) = log2 - h(e + (1-2e)u) decreases from I(X;Y) at u=0 to 0 at u=1/2.
        double lo = 0.0, hi = 0.5;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (bernoulli_curve(mid, param_).first > target_i) lo = mid;
            else hi = mid;
        }
        return bernoulli_curve(0.5 * (lo + hi), param_).second;
    }

  private:
    enum class Model { Bernoulli, Gaussian };
    AnalyticCurve(Model m, double param) : model_(m), param_(param) {}
    Model model_;
    double param_;
};

}  // namespace ibsolve

#endif  // IBSOLVE_ORACLES_HPP
