#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ibsolve/oracles.hpp"

using namespace ibsolve;
using Catch::Matchers::WithinAbs;

TEST_CASE("bernoulli_problem") {
    SECTION("noiseless channel") {
        const IBProblem prob = bernoulli_problem(0.0);
        CHECK(prob.s(0, 0) == 1.0);
        CHECK(prob.s(1, 0) == 0.0);
        CHECK_THAT(prob.mutual_information_xy(), WithinAbs(std::log(2.0), 1e-12));
    }
    SECTION("independent at e = 1/2") {
        CHECK_THAT(bernoulli_problem(0.5).mutual_information_xy(), WithinAbs(0.0, 1e-12));
    }
    SECTION("e = 0.15") {
        CHECK_THAT(bernoulli_problem(0.15).mutual_information_xy(),
                   WithinAbs(0.2704380927539544, 1e-12));
    }
    SECTION("domain") { CHECK_THROWS_AS(bernoulli_problem(0.6), std::invalid_argument); }
}

TEST_CASE("bernoulli_curve anchor points") {
    SECTION("u = 1/2 is the origin") {
        const auto [I, R] = bernoulli_curve(0.5, 0.15);
        CHECK_THAT(I, WithinAbs(0.0, 1e-14));
        CHECK_THAT(R, WithinAbs(0.0, 1e-14));
    }
    SECTION("u = 0.25 gives the Table-I point (0.0626, lambda 2.1478)") {
        const auto [I, R] = bernoulli_curve(0.25, 0.15);
        CHECK_THAT(I, WithinAbs(0.06256615217393058, 1e-12));
        CHECK_THAT(R, WithinAbs(0.130812035941137, 1e-12));
    }
    SECTION("u = 0.1 gives the Table-I point (0.1662, lambda 2.4800)") {
        const auto [I, R] = bernoulli_curve(0.1, 0.15);
        CHECK_THAT(I, WithinAbs(0.16623921912856499, 1e-12));
        CHECK_THAT(R, WithinAbs(0.3680642071684971, 1e-12));
    }
    SECTION("u = 0 is the full-information endpoint") {
        const auto [I, R] = bernoulli_curve(0.0, 0.15);
        CHECK_THAT(I, WithinAbs(0.2704380927539544, 1e-12));  // I(X;Y)
        CHECK_THAT(R, WithinAbs(std::log(2.0), 1e-12));       // H(X)
    }
    SECTION("domain") {
        CHECK_THROWS_AS(bernoulli_curve(0.7, 0.15), std::invalid_argument);
        CHECK_THROWS_AS(bernoulli_curve(0.3, -0.1), std::invalid_argument);
    }
}

TEST_CASE("gaussian_problem") {
    SECTION("independence limit as snr -> 0") {
        const IBProblem prob = gaussian_problem(1e-8, 10.0, 40, 40);
        CHECK(prob.mutual_information_xy() < 1e-6);
    }
    SECTION("snr = 1 grid reproduces the analytic mutual information") {
        const IBProblem prob = gaussian_problem(1.0, 10.0, 100, 100);
        CHECK_THAT(prob.mutual_information_xy(), WithinAbs(0.34657359027997264, 2e-3));
    }
    SECTION("source symmetry is exact") {
        const IBProblem prob = gaussian_problem(1.0, 10.0, 100, 100);
        for (std::size_t i = 0; i < 100; ++i) CHECK(prob.p[i] == prob.p[99 - i]);
    }
    SECTION("q matches the directly discretized standard normal") {
        const IBProblem prob = gaussian_problem(1.0, 10.0, 100, 100);
        const double step = 20.0 / 100.0;
        std::vector<double> qd(100);
        double sum = 0.0;
        for (std::size_t k = 0; k < 100; ++k) {
            const double y = -10.0 + (k + 0.5) * step;
            qd[k] = std::exp(-0.5 * y * y);
            sum += qd[k];
        }
        double l1 = 0.0;
        for (std::size_t k = 0; k < 100; ++k) l1 += std::abs(prob.q[k] - qd[k] / sum);
        CHECK(l1 <= 1e-6);
    }
}

TEST_CASE("gaussian_curve") {
    CHECK_THAT(gaussian_curve(0.0, 1.0), WithinAbs(0.0, 1e-14));
    CHECK_THAT(gaussian_curve(0.04, 1.0), WithinAbs(0.0834804533179808, 1e-12));
    CHECK_THAT(gaussian_curve(0.20, 1.0), WithinAbs(0.5384644037739527, 1e-12));
    CHECK_THROWS_AS(gaussian_curve(0.5 * std::log(2.0), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_curve(-0.01, 1.0), std::invalid_argument);
}

TEST_CASE("curves are increasing, convex, and bounded by H(X) on sampled grids") {
    SECTION("bernoulli") {
        const AnalyticCurve c = AnalyticCurve::bernoulli(0.15);
        double prev = c.r_of_i(0.0);
        CHECK_THAT(prev, WithinAbs(0.0, 1e-9));
        std::vector<double> rs{prev};
        for (int g = 1; g <= 10; ++g) {
            const double I = 0.9 * c.max_target() * g / 10.0;
            const double R = c.r_of_i(I);
            CHECK(R > prev);
            CHECK(R <= std::log(2.0) + 1e-12);
            CHECK(R >= I);  // data-processing: I(T;X) >= I(T;Y)
            prev = R;
            rs.push_back(R);
        }
        for (std::size_t k = 2; k < rs.size(); ++k)  // equispaced grid: convexity
            CHECK(rs[k] - 2 * rs[k - 1] + rs[k - 2] >= -1e-9);
    }
    SECTION("gaussian") {
        const AnalyticCurve c = AnalyticCurve::gaussian(1.0);
        double prev = -1.0;
        std::vector<double> rs;
        for (int g = 0; g <= 5; ++g) {
            const double I = 0.04 + 0.032 * g;
            const double R = c.r_of_i(I);
            CHECK(R > prev);
            CHECK(R >= I);
            prev = R;
            rs.push_back(R);
        }
        for (std::size_t k = 2; k < rs.size(); ++k)
            CHECK(rs[k] - 2 * rs[k - 1] + rs[k - 2] >= -1e-9);
    }
}

TEST_CASE("AnalyticCurve inverts the Bernoulli parametrization") {
    const AnalyticCurve c = AnalyticCurve::bernoulli(0.15);
    for (double u : {0.05, 0.1, 0.2, 0.3, 0.45}) {
        const auto [I, R] = bernoulli_curve(u, 0.15);
        CHECK_THAT(c.r_of_i(I), WithinAbs(R, 1e-10));
    }
}
