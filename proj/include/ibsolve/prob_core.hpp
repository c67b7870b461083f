// Probability-simplex data types and the discrete information-theoretic
// primitives used by every other part of the library.
//
// Conventions:
//   * all logarithms are natural, all information quantities are in nats;
//   * 0 * log 0 == 0 everywhere (continuous extension);
//   * conditional distributions are stored column-stochastic: column i of a
//     CondMatrix is the distribution of the output given input symbol i.
#ifndef IBSOLVE_PROB_CORE_HPP
#define IBSOLVE_PROB_CORE_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ibsolve/errors.hpp"

namespace ibsolve {

// Inputs whose mass is within this distance of 1 are renormalized; anything
// worse is rejected as a genuine contract violation rather than drift.
inline constexpr double kStochasticTol = 1e-9;
// Post-construction invariant: masses sum to 1 within this.
inline constexpr double kStochasticStrict = 1e-12;

namespace detail {

// Normalizes `v` in place to unit sum. Returns false when the input is not
// within `kStochasticTol` of a probability vector (negative mass or bad sum).
inline bool normalize_simplex(std::vector<double>& v) {
    double sum = 0.0;
    for (double& x : v) {
        if (!(x >= -kStochasticTol) || !std::isfinite(x)) return false;
        if (x < 0.0) x = 0.0;
        sum += x;
    }
    if (std::abs(sum - 1.0) > kStochasticTol) return false;
    for (double& x : v) x /= sum;
    return true;
}

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace detail

// A point on the probability simplex. Immutable after construction.
class ProbVector {
  public:
    explicit ProbVector(std::vector<double> values) : v_(std::move(values)) {
        if (v_.empty()) throw std::invalid_argument("ProbVector: empty");
        if (!detail::normalize_simplex(v_))
            throw std::invalid_argument(describe_violation(v_, "ProbVector"));
    }

    static ProbVector uniform(std::size_t n) {
        return ProbVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    std::span<const double> values() const { return v_; }

    bool operator==(const ProbVector& o) const { return v_ == o.v_; }

    static std::string describe_violation(const std::vector<double>& v, const std::string& who) {
        double sum = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i] >= -kStochasticTol) || !std::isfinite(v[i]))
                return who + ": negative or non-finite entry at index " + std::to_string(i);
            sum += std::max(v[i], 0.0);
        }
        return who + ": mass sums to " + std::to_string(sum) + ", expected 1";
    }

  private:
    std::vector<double> v_;
};

// Column-stochastic conditional distribution, stored column-major so that
// each input symbol's distribution is contiguous.
class CondMatrix {
  public:
    CondMatrix(std::size_t rows, std::size_t cols, std::vector<double> column_major)
        : rows_(rows), cols_(cols), a_(std::move(column_major)) {
        if (rows_ == 0 || cols_ == 0 || a_.size() != rows_ * cols_)
            throw std::invalid_argument("CondMatrix: shape/storage mismatch");
        for (std::size_t c = 0; c < cols_; ++c) {
            std::span<double> col(a_.data() + c * rows_, rows_);
            double sum = 0.0;
            for (double& x : col) {
                if (!(x >= -kStochasticTol) || !std::isfinite(x))
                    throw std::invalid_argument(
                        "CondMatrix: negative or non-finite entry in column " + std::to_string(c));
                if (x < 0.0) x = 0.0;
                sum += x;
            }
            if (std::abs(sum - 1.0) > kStochasticTol)
                throw std::invalid_argument("CondMatrix: column " + std::to_string(c) +
                                            " sums to " + std::to_string(sum) + ", expected 1");
            for (double& x : col) x /= sum;
        }
    }

    static CondMatrix from_columns(const std::vector<std::vector<double>>& cols) {
        if (cols.empty()) throw std::invalid_argument("CondMatrix: no columns");
        const std::size_t rows = cols.front().size();
        std::vector<double> a;
        a.reserve(rows * cols.size());
        for (const auto& col : cols) {
            if (col.size() != rows) throw std::invalid_argument("CondMatrix: ragged columns");
            a.insert(a.end(), col.begin(), col.end());
        }
        return CondMatrix(rows, cols.size(), std::move(a));
    }

    static CondMatrix identity(std::size_t n) {
        std::vector<double> a(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
        return CondMatrix(n, n, std::move(a));
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t r, std::size_t c) const { return a_[c * rows_ + r]; }
    std::span<const double> column(std::size_t c) const {
        return {a_.data() + c * rows_, rows_};
    }
    std::span<const double> data() const { return a_; }

    bool operator==(const CondMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
    }

  private:
    std::size_t rows_, cols_;
    std::vector<double> a_;
};

/// Shannon entropy of a distribution, in nats.
inline double entropy(const ProbVector& v) {
    double h = 0.0;
    for (double x : v.values()) h -= detail::xlogx(x);
    return h;
}

inline double entropy(std::span<const double> v) {
    double h = 0.0;
    for (double x : v) h -= detail::xlogx(x);
    return h;
}

/// Binary entropy h(x) = -x log x - (1-x) log(1-x), in nats.
inline double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("binary_entropy: argument outside [0,1]");
    return -detail::xlogx(x) - detail::xlogx(1.0 - x);
}

/// Kullback-Leibler divergence D(a||b) in nats; +infinity when a puts mass
/// where b has none.
inline double kl_divergence(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("kl_divergence: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > 0.0) {
            if (b[i] <= 0.0) return std::numeric_limits<double>::infinity();
            d += a[i] * std::log(a[i] / b[i]);
        }
    }
    return d < 0.0 ? 0.0 : d;  // guard tiny negative float noise at a == b
}

inline double kl_divergence(const ProbVector& a, const ProbVector& b) {
    return kl_divergence(a.values(), b.values());
}

/// Output marginal r_j = sum_i p_i w_ji of a channel w applied to p.
inline ProbVector marginal(const CondMatrix& w, const ProbVector& p) {
    if (w.cols() != p.size()) throw std::invalid_argument("marginal: shape mismatch");
    std::vector<double> r(w.rows(), 0.0);
    for (std::size_t i = 0; i < w.cols(); ++i) {
        const double pi = p[i];
        const auto col = w.column(i);
        for (std::size_t j = 0; j < w.rows(); ++j) r[j] += pi * col[j];
    }
    return ProbVector(std::move(r));
}

// Source model for one solve: source distribution p over X, channel s = P(Y|X)
// column-stochastic, with the derived Y-marginal q and its entropy cached.
struct IBProblem {
    ProbVector p;
    CondMatrix s;
    ProbVector q;
    double h_y;

    static IBProblem from_parts(ProbVector p, CondMatrix s) {
        if (s.cols() != p.size())
            throw std::invalid_argument("IBProblem: channel width != source alphabet size");
        std::vector<double> q(s.rows(), 0.0);
        for (std::size_t i = 0; i < s.cols(); ++i) {
            const double pi = p[i];
            const auto col = s.column(i);
            for (std::size_t k = 0; k < s.rows(); ++k) q[k] += pi * col[k];
        }
        ProbVector qv{std::move(q)};
        const double hy = entropy(qv);
        return IBProblem{std::move(p), std::move(s), std::move(qv), hy};
    }

    std::size_t source_size() const { return p.size(); }
    std::size_t relevance_size() const { return s.rows(); }

    /// I(X;Y) of the source model, in nats.
    double mutual_information_xy() const;
};

/// Posterior z = P(Y|T) of the joint induced by p, w and s:
/// z_kj = sum_i p_i w_ji s_ki / sum_i p_i w_ji.
/// A bottleneck symbol with zero mass gets the column q: any distribution
/// satisfies the constraints vacuously there and q adds no information.
inline CondMatrix posterior(const CondMatrix& w, const ProbVector& p, const CondMatrix& s) {
    if (w.cols() != p.size() || s.cols() != p.size())
        throw std::invalid_argument("posterior: shape mismatch");
    const std::size_t M = p.size(), N = w.rows(), K = s.rows();
    std::vector<double> z(K * N, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        const double pi = p[i];
        const auto wcol = w.column(i);
        const auto scol = s.column(i);
        for (std::size_t j = 0; j < N; ++j) {
            const double a = pi * wcol[j];
            if (a == 0.0) continue;
            double* zj = z.data() + j * K;
            for (std::size_t k = 0; k < K; ++k) zj[k] += a * scol[k];
        }
    }
    // Normalize each column by its own accumulated mass (equal to r_j in
    // exact arithmetic; using the same sum keeps columns stochastic even
    // when a dying cluster's products underflow to denormals).
    std::vector<double> q(K, 0.0);
    bool q_ready = false;
    for (std::size_t j = 0; j < N; ++j) {
        double* zj = z.data() + j * K;
        double mass = 0.0;
        for (std::size_t k = 0; k < K; ++k) mass += zj[k];
        if (mass > 0.0) {
            for (std::size_t k = 0; k < K; ++k) zj[k] /= mass;
        } else {
            if (!q_ready) {
                for (std::size_t i = 0; i < M; ++i) {
                    const auto scol = s.column(i);
                    for (std::size_t k = 0; k < K; ++k) q[k] += p[i] * scol[k];
                }
                q_ready = true;
            }
            for (std::size_t k = 0; k < K; ++k) zj[k] = q[k];
        }
    }
    return CondMatrix(K, N, std::move(z));
}

/// I(T;X) = sum_ij p_i w_ji log(w_ji / r_j) evaluated at r = marginal(w,p).
inline double mutual_information_tx(const CondMatrix& w, const ProbVector& p) {
    if (w.cols() != p.size()) throw std::invalid_argument("mutual_information_tx: shape mismatch");
    const std::size_t M = p.size(), N = w.rows();
    std::vector<double> r(N, 0.0);
    for (std::size_t i = 0; i < M; ++i) {
        const double pi = p[i];
        const auto col = w.column(i);
        for (std::size_t j = 0; j < N; ++j) r[j] += pi * col[j];
    }
    double total = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        const double pi = p[i];
        const auto col = w.column(i);
        for (std::size_t j = 0; j < N; ++j) {
            const double pw = pi * col[j];
            if (pw > 0.0) total += pw * std::log(col[j] / r[j]);
        }
    }
    return total < 0.0 ? 0.0 : total;
}

inline double IBProblem::mutual_information_xy() const {
    return mutual_information_tx(s, p);
}

}  // namespace ibsolve

#endif  // IBSOLVE_PROB_CORE_HPP
