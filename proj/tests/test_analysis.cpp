#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "refill/analysis.hpp"
#include "refill/rng.hpp"

using namespace refill;
using namespace refill::analysis;

namespace {

// Independent evaluation of the level-sum condition sum_k z0 (beta/g)^k - 1.
double level_sum(double z0, double a, double beta, int K) {
    const double x = beta / match_intensity(z0, a);
    double term = z0, sum = 0;
    for (int k = 0; k <= K; ++k) {
        sum += term;
        term *= x;
    }
    return sum - 1.0;
}

std::vector<double> random_simplex(RngStream& rng, int K) {
    std::vector<double> z(static_cast<size_t>(K) + 1);
    double sum = 0;
    for (auto& v : z) {
        v = rng.uniform() + 1e-3;
        sum += v;
    }
    for (auto& v : z) v /= sum;
    // keep z0 away from the pole
    if (z[0] > 0.9) {
        z[1] += z[0] - 0.5;
        z[0] = 0.5;
    }
    return z;
}

} // namespace

TEST_CASE("match intensity") {
    CHECK(match_intensity(0.0, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    // Removable singularity: g -> a as z0 -> 1.
    CHECK(match_intensity(1.0, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(match_intensity(1.0 - 1e-9, 2.0) == doctest::Approx(2.0).epsilon(1e-8));
    // Monotone in z0 on (0,1): (1-e^{-aw})/w falls in w = 1-z0, so g rises
    // from 1-e^{-a} toward a.
    double prev = match_intensity(0.0, 2.0);
    for (int i = 1; i <= 100; ++i) {
        const double g = match_intensity(i / 101.0, 2.0);
        CHECK(g > prev);
        prev = g;
    }
}

TEST_CASE("ode right-hand side telescopes exactly") {
    RngStream rng(8);
    for (int iter = 0; iter < 100; ++iter) {
        const int K = 1 + static_cast<int>(rng.below(6));
        const auto z = random_simplex(rng, K);
        const auto rhs = ode_rhs(z, 0.5 + 3 * rng.uniform(), 2 * rng.uniform());
        CHECK(std::accumulate(rhs.begin(), rhs.end(), 0.0) == 0.0);
    }
}

TEST_CASE("ode right-hand side rows") {
    SUBCASE("K=1 reduces to the scalar equation") {
        const double a = 2.0, beta = 0.5;
        for (const double z0 : {0.1, 0.4, 0.75}) {
            const std::vector<double> z{z0, 1.0 - z0};
            const auto rhs = ode_rhs(z, a, beta);
            CHECK(rhs[0] ==
                  doctest::Approx(-beta * z0 + 1.0 - std::exp(-a * (1.0 - z0))).epsilon(1e-12));
            CHECK(rhs[1] == doctest::Approx(-rhs[0]).epsilon(1e-12));
        }
    }
    SUBCASE("vanishes at the stationary profile") {
        for (const int K : {1, 3, 7}) {
            const auto sp = stationary_point(2.0, 0.5, K);
            const auto rhs = ode_rhs(sp.profile, 2.0, 0.5);
            for (const double r : rhs) CHECK(std::fabs(r) <= 1e-10);
        }
    }
    SUBCASE("pole guard") {
        const std::vector<double> z{1.0 - 1e-13, 1e-13};
        CHECK_THROWS_AS(ode_rhs(z, 2.0, 0.5), std::domain_error);
    }
}

TEST_CASE("integrator") {
    SUBCASE("refill-free run agrees with a tenth-step reference") {
        const std::vector<double> init{0.0, 1.0};
        const auto sol = integrate_ode(init, 2.0, 0.0, 1, 4.0, 1e-3);
        const auto ref = integrate_ode(init, 2.0, 0.0, 1, 4.0, 1e-4);
        CHECK(sol.h_at(4.0) == doctest::Approx(ref.h_at(4.0)).epsilon(1e-9));
        CHECK(sol.tau.back() == doctest::Approx(4.0));
    }
    SUBCASE("mass conservation along the trajectory") {
        const auto init = initial_levels(3, 1);
        const auto sol = integrate_ode(init, 2.0, 0.5, 3, 10.0, 1e-3);
        for (const auto& z : sol.z) {
            const double sum = std::accumulate(z.begin(), z.end(), 0.0);
            CHECK(std::fabs(sum - 1.0) <= 1e-9);
        }
        // h is non-decreasing.
        for (size_t i = 1; i < sol.h.size(); ++i) CHECK(sol.h[i] >= sol.h[i - 1]);
    }
    SUBCASE("long-horizon trajectory reaches the stationary profile") {
        const auto init = initial_levels(3, 1);
        const auto sol = integrate_ode(init, 2.0, 0.5, 3, 50.0, 1e-3);
        const auto sp = stationary_point(2.0, 0.5, 3);
        const auto z_end = sol.z.back();
        for (size_t k = 0; k < z_end.size(); ++k)
            CHECK(std::fabs(z_end[k] - sp.profile[k]) <= 1e-3);
    }
    SUBCASE("argument checks") {
        const auto init = initial_levels(1, 1);
        CHECK_THROWS_AS(integrate_ode(init, 2.0, 0.5, 1, 1.0, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(integrate_ode(init, 2.0, 0.5, 2, 1.0, 1e-3), std::invalid_argument);
    }
}

TEST_CASE("lambert w") {
    CHECK(lambert_w(0.0) == 0.0);
    CHECK(lambert_w(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(lambert_w(-1.0 / std::exp(1.0)) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(lambert_w(-1.0), std::invalid_argument);

    RngStream rng(4);
    for (int iter = 0; iter < 200; ++iter) {
        const double x = std::exp(12.0 * rng.uniform() - 2.0) - 0.36;
        const double w = lambert_w(x);
        CHECK(std::fabs(w * std::exp(w) - x) <= 1e-14 * std::max(1.0, std::fabs(x)));
    }
    // Large-argument path through the log form.
    const double w = lambert_w_exp(1000.0);
    CHECK(w + std::log(w) == doctest::Approx(1000.0).epsilon(1e-12));
}

TEST_CASE("stationary point") {
    SUBCASE("K=1 bisection agrees with the closed form to 1e-10") {
        for (const auto& [a, beta] :
             std::vector<std::pair<double, double>>{{1.0, 0.5}, {2.0, 0.5}, {2.0, 1.0}}) {
            const auto sp = stationary_point(a, beta, 1);
            CHECK(std::fabs(sp.z0 - stationary_z0_cap1(a, beta)) <= 1e-10);
            CHECK(sp.residual <= 1e-12);
        }
    }
    SUBCASE("closed form satisfies the scalar fixed-point identity") {
        for (const auto& [a, beta] :
             std::vector<std::pair<double, double>>{{1.0, 0.5}, {2.0, 0.5}, {2.0, 1.0}, {3.0, 0.8}}) {
            const double z0 = stationary_z0_cap1(a, beta);
            CHECK(std::fabs(-beta * z0 + 1.0 - std::exp(-a * (1.0 - z0))) <= 1e-12);
        }
    }
    SUBCASE("large a pushes the cap-1 point toward 1/beta from inside (0,1)") {
        const double beta = 1.5;
        double prev = 0.0;
        for (const double a : {5.0, 10.0, 20.0, 40.0}) {
            const double z0 = stationary_z0_cap1(a, beta);
            CHECK(z0 > 0.0);
            CHECK(z0 < 1.0);
            CHECK(z0 > prev);
            CHECK(z0 < 1.0 / beta);
            prev = z0;
        }
    }
    SUBCASE("K=200 approaches the uncapped limit") {
        const auto sp = stationary_point(2.0, 0.5, 200);
        CHECK(std::fabs(sp.z0 - stationary_z0_uncapped(2.0, 0.5)) <= 1e-4);
    }
    SUBCASE("uncapped limit") {
        CHECK(stationary_z0_uncapped(2.0, 1e-12) == doctest::Approx(1.0)); // boundary
        CHECK(stationary_z0_uncapped(2.0, 1.0 - std::exp(-2.0)) == doctest::Approx(0.0));
        for (const auto& [a, beta] :
             std::vector<std::pair<double, double>>{{2.0, 0.5}, {1.0, 0.3}, {4.0, 0.9}}) {
            const double z0 = stationary_z0_uncapped(a, beta);
            CHECK(1.0 - std::exp(-a * (1.0 - z0)) == doctest::Approx(beta).epsilon(1e-12));
        }
        CHECK_THROWS_AS(stationary_z0_uncapped(2.0, 1.0), std::invalid_argument);
    }
    SUBCASE("geometric profile and uniqueness") {
        for (const double a : {1.0, 2.0, 4.0}) {
            for (const double beta : {0.25, 0.5, 0.9}) {
                for (const int K : {1, 3, 10}) {
                    const auto sp = stationary_point(a, beta, K);
                    const double x = beta / sp.g;
                    for (size_t k = 0; k < sp.profile.size(); ++k)
                        CHECK(sp.profile[k] ==
                              doctest::Approx(sp.z0 * std::pow(x, static_cast<double>(k)))
                                  .epsilon(1e-10));
                    CHECK(std::fabs(std::accumulate(sp.profile.begin(), sp.profile.end(), 0.0) -
                                    1.0) <= 1e-10);
                    // P changes sign exactly once on (0,1).
                    int sign_changes = 0;
                    double prev = level_sum(1e-6, a, beta, K);
                    for (int i = 1; i <= 1000; ++i) {
                        const double cur = level_sum(i / 1001.0, a, beta, K);
                        if ((prev < 0) != (cur < 0)) ++sign_changes;
                        prev = cur;
                    }
                    CHECK(sign_changes == 1);
                }
            }
        }
    }
}

TEST_CASE("cap-1 trajectory converges exponentially") {
    // Start above the stationary point; the envelope rate is the documented
    // beta (1 + W(e^{-a(1-1/beta)})).
    const double a = 2.0, beta = 0.5;
    const double z0_star = stationary_z0_cap1(a, beta);
    const double omega = convergence_rate_cap1(a, beta);
    const std::vector<double> init{0.99, 0.01};
    const auto sol = integrate_ode(init, a, beta, 1, 12.0, 1e-3);
    const double eps0 = std::fabs(init[0] - z0_star);
    for (size_t i = 0; i < sol.tau.size(); ++i) {
        const double envelope = eps0 * std::exp(-omega * sol.tau[i]);
        CHECK(std::fabs(sol.z[i][0] - z0_star) <= envelope * (1.0 + 1e-9) + 1e-14);
    }
}

TEST_CASE("alpha constant and the frequent-refill ceiling") {
    const double alpha = solve_alpha();
    CHECK(std::fabs(alpha - 0.603) < 1e-3);
    // Residual of the defining integral equation.
    const double residual =
        integrate_simpson([](double x) { return x * std::exp(x) / (1.0 - x); }, 0.0, alpha) - 0.5;
    CHECK(std::fabs(residual) <= 1e-9);
    // The integrand is positive, so the root is unique in the bracket.
    CHECK(integrate_simpson([](double x) { return x * std::exp(x) / (1.0 - x); }, 0.0, 0.3) < 0.5);
    CHECK(integrate_simpson([](double x) { return x * std::exp(x) / (1.0 - x); }, 0.0, 0.9) > 0.5);

    const double bound = cr_bound_frequent_refill();
    CHECK(std::fabs(bound - 0.73325) < 5e-4);
    CHECK(bound > 1.0 - 1.0 / std::exp(1.0));
    CHECK(bound < 1.0);
    // Stability under alpha perturbation.
    const auto eval = [](double al) { return 1.0 - (1.0 - al) * std::exp(-(1.0 - al)); };
    CHECK(std::fabs(eval(alpha + 1e-8) - eval(alpha)) <= 1e-8);
    CHECK(std::fabs(eval(alpha - 1e-8) - eval(alpha)) <= 1e-8);
}

TEST_CASE("finite-parameter frequent-refill bound") {
    const double limit = cr_bound_frequent_refill();
    // mb0/t0 -> 0 recovers the asymptotic constant.
    CHECK(std::fabs(cr_bound_frequent_refill_finite(10, 1, 100000000) - limit) < 1e-5);
    double prev = cr_bound_frequent_refill_finite(20, 1, 400);
    for (const int64_t t0 : {2000, 10000, 50000, 250000}) {
        const double cur = cr_bound_frequent_refill_finite(20, 1, t0);
        CHECK(cur < prev); // decreasing toward the limit on this grid
        prev = cur;
    }
    CHECK(prev > limit);
}

TEST_CASE("scarce-refill ceiling") {
    CHECK(cr_bound_bmatching(1) == doctest::Approx(0.5));
    CHECK(cr_bound_bmatching(2) == doctest::Approx(1.0 - 4.0 / 9.0).epsilon(1e-15));
    CHECK(cr_bound_bmatching(3) == doctest::Approx(1.0 - 27.0 / 64.0).epsilon(1e-15));
    // b0 -> infinity approaches 1 - 1/e from below.
    double prev = 0.0;
    for (const int32_t b0 : {1, 2, 5, 20, 100, 10000}) {
        const double v = cr_bound_bmatching(b0);
        CHECK(v > prev);
        prev = v;
    }
    CHECK(std::fabs(prev - (1.0 - std::exp(-1.0))) < 1e-4);
}

TEST_CASE("stochastic competitive-ratio lower bound") {
    SUBCASE("matches the pole form when g != beta") {
        const auto sp = stationary_point(2.0, 0.5, 3);
        const double g = sp.g, beta = 0.5;
        const int K = 3;
        const double pole_form =
            beta / (g - beta) -
            (K + 1) * std::pow(beta, K + 1) / (std::pow(g, K + 1) - std::pow(beta, K + 1));
        const double T = 1e5, n = 1e3, b0 = 1;
        const double expected =
            (T * g * (1 - sp.z0) + n * b0 - n * pole_form) / (n * b0 + beta * T);
        CHECK(cr_lower_bound_stochastic(T, K, n, b0, beta, 2.0) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("T -> infinity limit is g*(1-z0*)/beta") {
        const auto sp = stationary_point(2.0, 0.5, 4);
        const double limit = sp.g * (1 - sp.z0) / 0.5;
        CHECK(cr_lower_bound_stochastic(1e12, 4, 100, 1, 0.5, 2.0) ==
              doctest::Approx(limit).epsilon(1e-6));
    }
    SUBCASE("grows toward 1 along growing T and K at fixed n") {
        double prev = 0.0;
        for (const auto& [T, K] : std::vector<std::pair<double, int>>{
                 {1e4, 2}, {1e5, 5}, {1e6, 10}, {1e7, 25}, {1e8, 50}}) {
            const double v = cr_lower_bound_stochastic(T, K, 500, 1, 0.5, 2.0);
            CHECK(v > prev);
            prev = v;
        }
        CHECK(prev > 0.99);
    }
    SUBCASE("never exceeds 1 on a parameter grid") {
        for (const double a : {1.0, 2.0, 4.0})
            for (const double beta : {0.25, 0.5, 0.9, 1.5})
                for (const int K : {1, 3, 10})
                    for (const double T : {1e3, 1e5})
                        CHECK(cr_lower_bound_stochastic(T, K, 200, 1, beta, a) <= 1.0 + 1e-12);
    }
}

TEST_CASE("budget pool closed form") {
    CHECK(budget_pool_closed_form(2, 1, 3, 0, 4) == 0);
    // j = 0 branch before the drain time: Z0 - t + k floor(t/m).
    CHECK(budget_pool_closed_form(10, 1, 3, 0, 6) == 10 - 6 + 2);
    SUBCASE("exhaustive sweep against the recurrence") {
        for (int64_t Z0 = 0; Z0 <= 5; ++Z0)
            for (int64_t k = 1; k <= 4; ++k)
                for (int64_t m = 1; m <= 5; ++m)
                    for (int64_t j = 0; j < m; ++j)
                        for (int64_t t = 0; t <= 60; ++t)
                            CHECK(budget_pool_closed_form(Z0, k, m, j, t) ==
                                  budget_pool_by_recurrence(Z0, k, m, j, t));
    }
}

TEST_CASE("greedy drift matches a simulation oracle") {
    CHECK(greedy_match_probability(10, 10, 2.0) == 0.0);
    CHECK(greedy_match_probability(0, 10, 10.0) == 1.0);

    const int64_t n = 40, Y0 = 25;
    const double a = 3.0;
    const double predicted = greedy_match_probability(Y0, n, a);
    RngStream rng(64);
    const double p = a / static_cast<double>(n);
    int64_t matched = 0;
    const int64_t trials = 100000;
    for (int64_t i = 0; i < trials; ++i) {
        bool any = false;
        for (int64_t u = 0; u < n - Y0; ++u) any = any || rng.uniform() < p;
        if (any) ++matched;
    }
    const double freq = static_cast<double>(matched) / trials;
    const double sigma3 = 3.0 * std::sqrt(predicted * (1 - predicted) / trials);
    CHECK(std::fabs(freq - predicted) <= sigma3);
}

TEST_CASE("selection factor") {
    CHECK(selection_factor(1, 0.3) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(selection_factor(50, 1e-12) == doctest::Approx(1.0).epsilon(1e-6));

    // P(a fixed available node is matched)/p should equal the factor.
    const int64_t C = 12;
    const double p = 0.2;
    const double predicted = selection_factor(C, p);
    RngStream rng(65);
    int64_t hits = 0;
    const int64_t trials = 200000;
    for (int64_t i = 0; i < trials; ++i) {
        std::vector<int> adjacent;
        for (int u = 0; u < C; ++u)
            if (rng.uniform() < p) adjacent.push_back(u);
        if (!adjacent.empty() &&
            adjacent[rng.below(adjacent.size())] == 0)
            ++hits;
    }
    const double freq = static_cast<double>(hits) / trials / p;
    const double sigma3 = 3.0 * std::sqrt(predicted * p * (1 - predicted * p) / trials) / p;
    CHECK(std::fabs(freq - predicted) <= sigma3);
}

TEST_CASE("concentration envelope") {
    // n^{3/4} scaling at fixed T/n.
    const double b1 = wormald_deviation_bound(1000, 5000, 2.0, 0.1);
    const double b16 = wormald_deviation_bound(16000, 80000, 2.0, 0.1);
    CHECK(b16 / b1 == doctest::Approx(std::pow(16.0, 0.75)).epsilon(1e-12));
    // Monotone in T.
    CHECK(wormald_deviation_bound(1000, 6000, 2.0, 0.1) > b1);
    CHECK_THROWS_AS(wormald_deviation_bound(1000, 5000, 2.0, 0.0), std::invalid_argument);
}
