// Shared helpers for the test suite: seeded random simplices and problems,
// kept independent of the library's own initialization path.
#ifndef IBSOLVE_TEST_UTIL_HPP
#define IBSOLVE_TEST_UTIL_HPP

#include <cmath>
#include <random>
#include <vector>

#include "ibsolve/prob_core.hpp"

namespace test_util {

inline std::vector<double> random_simplex(std::mt19937_64& gen, std::size_t n) {
    std::uniform_real_distribution<double> uni(1e-12, 1.0);
    std::vector<double> v(n);
    double sum = 0.0;
    for (auto& x : v) {
        x = -std::log(uni(gen));
        sum += x;
    }
    for (auto& x : v) x /= sum;
    return v;
}

inline ibsolve::ProbVector random_prob(std::mt19937_64& gen, std::size_t n) {
    return ibsolve::ProbVector(random_simplex(gen, n));
}

inline ibsolve::CondMatrix random_cond(std::mt19937_64& gen, std::size_t rows, std::size_t cols) {
    std::vector<std::vector<double>> c;
    c.reserve(cols);
    for (std::size_t i = 0; i < cols; ++i) c.push_back(random_simplex(gen, rows));
    return ibsolve::CondMatrix::from_columns(c);
}

inline ibsolve::IBProblem random_problem(std::mt19937_64& gen, std::size_t M, std::size_t K) {
    return ibsolve::IBProblem::from_parts(random_prob(gen, M), random_cond(gen, K, M));
}

}  // namespace test_util

#endif  // IBSOLVE_TEST_UTIL_HPP
