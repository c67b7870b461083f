#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ibsolve/oracles.hpp"
#include "ibsolve/projection_kernel.hpp"
#include "test_util.hpp"

using namespace ibsolve;
using Catch::Matchers::WithinAbs;

namespace {

// Plain bisection on the same dual function, used as the root oracle.
double bisect_root(const DualFunction& g, double lo, double hi, int iters = 200) {
    for (int it = 0; it < iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid).first > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("compute_metric examples") {
    SECTION("K = 1 gives all zeros") {
        const CondMatrix s(1, 3, {1.0, 1.0, 1.0});
        const CondMatrix z(1, 2, {1.0, 1.0});
        const Metric d = compute_metric(z, s, 1e-16);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 2; ++j) CHECK_THAT(d(i, j), WithinAbs(0.0, 1e-15));
    }
    SECTION("uniform z gives ln K everywhere") {
        std::mt19937_64 gen(2);
        const std::size_t K = 4;
        const CondMatrix s = test_util::random_cond(gen, K, 3);
        const CondMatrix z(K, 2, std::vector<double>(K * 2, 1.0 / K));
        const Metric d = compute_metric(z, s, 1e-16);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                CHECK_THAT(d(i, j), WithinAbs(std::log(double(K)), 1e-12));
    }
    SECTION("exact zero entry is clamped to the floor") {
        const CondMatrix s = CondMatrix::from_columns({{0.3, 0.7}});
        const CondMatrix z = CondMatrix::from_columns({{0.0, 1.0}});
        const Metric d = compute_metric(z, s, 1e-16);
        // -ln(1e-16) = 36.8413614879047; the zero contributes s_0i * that
        CHECK_THAT(d(0, 0), WithinAbs(0.3 * 36.841361487904734 + 0.7 * 0.0, 1e-10));
    }
    SECTION("floor must be positive") {
        const CondMatrix z = CondMatrix::identity(2);
        CHECK_THROWS_AS(compute_metric(z, z, 0.0), std::invalid_argument);
    }
}

TEST_CASE("bregman_update_w examples") {
    std::mt19937_64 gen(4);
    SECTION("lambda = 0 reproduces r in every column") {
        const ProbVector r = test_util::random_prob(gen, 3);
        const Metric d(2, 3, {0.4, 1.1, 0.2, 2.0, 0.3, 0.9});
        const CondMatrix w = bregman_update_w(0.0, d, r);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK_THAT(w(j, i), WithinAbs(r[j], 1e-14));
    }
    SECTION("constant metric row is shift-invariant") {
        const ProbVector r = test_util::random_prob(gen, 3);
        const Metric d(1, 3, {0.7, 0.7, 0.7});
        const CondMatrix w = bregman_update_w(5.0, d, r);
        for (std::size_t j = 0; j < 3; ++j) CHECK_THAT(w(j, 0), WithinAbs(r[j], 1e-13));
    }
    SECTION("large lambda concentrates on the argmin of d") {
        const Metric d(2, 2, {0.2, 1.0, 0.9, 0.1});
        const CondMatrix w = bregman_update_w(1e3, d, ProbVector({0.5, 0.5}));
        CHECK(w(0, 0) > 1.0 - 1e-10);  // row i=0: argmin_j d = 0
        CHECK(w(1, 1) > 1.0 - 1e-10);  // row i=1: argmin_j d = 1
    }
    SECTION("columns stay stochastic in the log domain up to the cap") {
        const std::size_t M = 4, N = 5;
        std::vector<double> draw(M * N);
        for (auto& x : draw) x = 40.0 * double(gen() % 1000) / 1000.0;
        const Metric d(M, N, std::move(draw));
        const ProbVector r = test_util::random_prob(gen, N);
        for (double lam : {0.0, 1.0, 50.0, 1e4}) {
            const CondMatrix w = bregman_update_w(lam, d, r);
            for (std::size_t i = 0; i < M; ++i) {
                double sum = 0.0;
                for (std::size_t j = 0; j < N; ++j) sum += w(j, i);
                CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
            }
        }
    }
}

TEST_CASE("g_ri examples and properties") {
    std::mt19937_64 gen(6);
    const std::size_t M = 3, N = 4;
    std::vector<double> draw(M * N);
    for (auto& x : draw) x = 3.0 * double(gen() % 1000) / 1000.0;
    const Metric d(M, N, std::move(draw));
    const ProbVector r = test_util::random_prob(gen, N);
    const ProbVector p = test_util::random_prob(gen, M);
    const double i_hat = -0.8;

    SECTION("lambda = 0 reduces to the r-average") {
        double expect = i_hat;
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = 0; j < N; ++j) expect += p[i] * r[j] * d(i, j);
        CHECK_THAT(g_ri(0.0, d, r, p, i_hat), WithinAbs(expect, 1e-12));
    }
    SECTION("large-lambda asymptote is the p-average of row minima") {
        double expect = i_hat;
        for (std::size_t i = 0; i < M; ++i) {
            double mn = d(i, 0);
            for (std::size_t j = 1; j < N; ++j) mn = std::min(mn, d(i, j));
            expect += p[i] * mn;
        }
        CHECK_THAT(g_ri(1e6, d, r, p, i_hat), WithinAbs(expect, 1e-6));
    }
    SECTION("analytic derivative matches central differences") {
        const double h = 1e-5;
        const auto [v, dv] = g_ri_with_derivative(1.0, d, r, p, i_hat);
        CHECK_THAT(v, WithinAbs(g_ri(1.0, d, r, p, i_hat), 1e-14));
        const double fd = (g_ri(1.0 + h, d, r, p, i_hat) - g_ri(1.0 - h, d, r, p, i_hat)) / (2 * h);
        CHECK_THAT(dv, WithinAbs(fd, 1e-6 * std::max(1.0, std::abs(fd))));
    }
    SECTION("non-increasing in lambda") {
        std::uniform_real_distribution<double> uni(0.0, 100.0);
        for (int t = 0; t < 100; ++t) {
            double l1 = uni(gen), l2 = uni(gen);
            if (l1 > l2) std::swap(l1, l2);
            CHECK(g_ri(l1, d, r, p, i_hat) >= g_ri(l2, d, r, p, i_hat) - 1e-12);
        }
    }
}

TEST_CASE("g_ir examples") {
    std::mt19937_64 gen(8);
    const Metric d(2, 2, {0.3, 1.2, 0.8, 0.4});
    const ProbVector r = test_util::random_prob(gen, 2);
    const ProbVector p = test_util::random_prob(gen, 2);

    SECTION("lambda = 0 gives -rate") {
        CHECK_THAT(g_ir(0.0, d, r, p, 0.7), WithinAbs(-0.7, 1e-13));
        CHECK_THAT(g_ir(0.0, d, r, p, 0.0), WithinAbs(0.0, 1e-13));
    }
    SECTION("matches an independent evaluation of the formula") {
        const double lam = 1.0, R = 0.25;
        double expect = -R;
        for (std::size_t i = 0; i < 2; ++i) {
            double S = 0.0, num = 0.0;
            for (std::size_t j = 0; j < 2; ++j) {
                const double e = std::exp(-lam * d(i, j)) * r[j];
                S += e;
                num += d(i, j) * e;
            }
            expect += p[i] * (-std::log(S) - lam * num / S);
        }
        CHECK_THAT(g_ir(lam, d, r, p, R), WithinAbs(expect, 1e-12));
        const auto [v, dv] = g_ir_with_derivative(lam, d, r, p, R);
        CHECK_THAT(v, WithinAbs(expect, 1e-12));
        const double h = 1e-5;
        const double fd = (g_ir(lam + h, d, r, p, R) - g_ir(lam - h, d, r, p, R)) / (2 * h);
        CHECK_THAT(dv, WithinAbs(fd, 1e-6));
    }
}

TEST_CASE("solve_lambda statuses") {
    RootConfig cfg;
    SECTION("linear root") {
        const auto res = solve_lambda([](double l) { return std::pair{1.0 - l, -1.0}; }, cfg);
        CHECK(res.status == RootStatus::Root);
        CHECK_THAT(res.lambda, WithinAbs(1.0, 1e-12));
    }
    SECTION("slack constraint at zero") {
        const auto res = solve_lambda([](double l) { return std::pair{-0.3 - l, -1.0}; }, cfg);
        CHECK(res.status == RootStatus::InactiveAtZero);
        CHECK(res.lambda == 0.0);
    }
    SECTION("no root below the cap") {
        const auto res =
            solve_lambda([](double l) { return std::pair{1.0 + 1.0 / (1.0 + l), -1.0}; }, cfg);
        CHECK(res.status == RootStatus::CappedInfeasible);
        CHECK(res.lambda == cfg.lambda_cap);
    }
    SECTION("non-finite evaluation fails loudly") {
        CHECK_THROWS_AS(solve_lambda(
                            [](double l) {
                                return std::pair{l < 0.5 ? 1.0 : std::nan(""), -1.0};
                            },
                            cfg),
                        NumericalFailure);
    }
    SECTION("configuration invariants are enforced") {
        RootConfig bad = cfg;
        bad.bracket_growth = 1.0;
        CHECK_THROWS_AS(solve_lambda([](double) { return std::pair{0.0, -1.0}; }, bad),
                        std::invalid_argument);
        bad = cfg;
        bad.newton_tol = 0.0;
        CHECK_THROWS_AS(solve_lambda([](double) { return std::pair{0.0, -1.0}; }, bad),
                        std::invalid_argument);
    }
}

TEST_CASE("solve_lambda agrees with a bisection oracle on the first ABP iteration") {
    const IBProblem prob = bernoulli_problem(0.15);
    // Deterministic non-trivial starting decoder: z columns biased either way.
    const CondMatrix z = CondMatrix::from_columns({{0.7, 0.3}, {0.2, 0.8}});
    const Metric d = compute_metric(z, prob.s, 1e-16);
    const ProbVector r({0.5, 0.5});
    const double i_hat = 0.06256615217393058 - prob.h_y;

    const DualFunction g = [&](double lam) {
        return g_ri_with_derivative(lam, d, r, prob.p, i_hat);
    };
    RootConfig cfg;
    const auto res = solve_lambda(g, cfg);
    REQUIRE(res.status == RootStatus::Root);

    // Bracket for the oracle: g(0) > 0 and g decreasing.
    double hi = 1.0;
    while (g(hi).first > 0.0) hi *= 2.0;
    const double oracle = bisect_root(g, 0.0, hi);
    CHECK_THAT(res.lambda, WithinAbs(oracle, 1e-10));

    // Active-constraint recovery at the new encoder.
    const CondMatrix w = bregman_update_w(res.lambda, d, r);
    double wd = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) wd += prob.p[i] * w(j, i) * d(i, j);
    CHECK_THAT(wd + i_hat, WithinAbs(0.0, cfg.newton_tol));
}

TEST_CASE("Newton equals bisection on random instances") {
    std::mt19937_64 gen(21);
    RootConfig cfg;
    int roots_checked = 0;
    for (int t = 0; t < 30; ++t) {
        const std::size_t M = 2 + gen() % 3, N = 2 + gen() % 3, K = 2 + gen() % 3;
        const IBProblem prob = test_util::random_problem(gen, M, K);
        const CondMatrix w0 = test_util::random_cond(gen, N, M);
        const ProbVector r = marginal(w0, prob.p);
        const CondMatrix z = posterior(w0, prob.p, prob.s);
        const Metric d = compute_metric(z, prob.s, 1e-16);
        const double target = 0.5 * prob.mutual_information_xy();
        const double i_hat = target - prob.h_y;
        const DualFunction g = [&](double lam) {
            return g_ri_with_derivative(lam, d, r, prob.p, i_hat);
        };
        const auto res = solve_lambda(g, cfg);
        if (res.status != RootStatus::Root) continue;
        double hi = 1.0;
        while (g(hi).first > 0.0 && hi < cfg.lambda_cap) hi *= 2.0;
        CHECK_THAT(res.lambda, WithinAbs(bisect_root(g, 0.0, hi), 1e-9));
        ++roots_checked;
    }
    CHECK(roots_checked > 5);
}
