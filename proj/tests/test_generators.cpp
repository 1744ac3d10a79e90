#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "refill/analysis.hpp"
#include "refill/core.hpp"
#include "refill/generators.hpp"
#include "refill/policies.hpp"

using namespace refill;

TEST_CASE("erdos-renyi edge cases") {
    const auto empty = gen_erdos_renyi(5, 8, 0.0, 0.0, 1, Cap{}, 1);
    for (const auto& nb : empty.neighbors) CHECK(nb.empty());

    const auto complete = gen_erdos_renyi(4, 6, 4.0, 0.0, 1, Cap{}, 1);
    for (const auto& nb : complete.neighbors) CHECK(nb == std::vector<int32_t>{1, 2, 3, 4});

    CHECK_THROWS_AS(gen_erdos_renyi(4, 6, 5.0, 0.0, 1, Cap{}, 1), std::invalid_argument);
    CHECK_THROWS_AS(gen_erdos_renyi(4, 6, 1.0, 5.0, 1, Cap{}, 1), std::invalid_argument);
}

TEST_CASE("erdos-renyi mean degree matches the binomial oracle") {
    const int32_t n = 10000;
    const int64_t T = 10000;
    const double a = 2.0;
    const auto inst = gen_erdos_renyi(n, T, a, 0.0, 1, Cap{}, 99);
    int64_t edges = 0;
    for (const auto& nb : inst.neighbors) edges += static_cast<int64_t>(nb.size());
    const double mean = static_cast<double>(edges) / static_cast<double>(T);
    // Binomial(n, a/n): sd ~ sqrt(a) per arrival, three standard errors.
    const double se = std::sqrt(a) / std::sqrt(static_cast<double>(T));
    CHECK(std::fabs(mean - a) < 3 * se);
}

TEST_CASE("bernoulli refill events are threshold-coupled across beta") {
    const int32_t n = 50;
    const int64_t T = 400;
    const auto lo = RefillSchedule::bernoulli(0.3, 77).materialize(n, T);
    const auto hi = RefillSchedule::bernoulli(0.9, 77).materialize(n, T);
    int64_t lo_total = 0, hi_total = 0;
    for (int64_t t = 0; t < T; ++t) {
        for (const auto& ev : lo[static_cast<size_t>(t)]) {
            const bool present = std::any_of(hi[static_cast<size_t>(t)].begin(),
                                             hi[static_cast<size_t>(t)].end(),
                                             [&](const RefillEvent& e) { return e.node == ev.node; });
            CHECK(present); // raising beta only adds events
        }
        lo_total += static_cast<int64_t>(lo[static_cast<size_t>(t)].size());
        hi_total += static_cast<int64_t>(hi[static_cast<size_t>(t)].size());
    }
    CHECK(lo_total < hi_total);
}

TEST_CASE("depletion block phase arithmetic") {
    for (int32_t b0 = 1; b0 <= 4; ++b0) {
        const KpParams params = KpParams::make(b0);
        CHECK(params.k == static_cast<int64_t>(std::llround(std::pow(b0 + 1, b0))));
        int64_t arrivals = params.tail_size;
        int64_t alive = params.k;
        for (size_t j = 0; j < params.phase_sizes.size(); ++j) {
            CHECK(params.phase_sizes[j] == b0 * params.removal_sizes[j]);
            CHECK(params.removal_sizes[j] * (b0 + 1) == alive);
            arrivals += params.phase_sizes[j];
            alive -= params.removal_sizes[j];
        }
        CHECK(arrivals == params.v_count);
    }
}

TEST_CASE("depletion block against balance matches the closed-form counts") {
    // ALG = k b0 - b0^(b0+1), OPT = k b0, ratio = the b-matching constant.
    for (int32_t b0 = 1; b0 <= 3; ++b0) {
        const KpParams params = KpParams::make(b0);
        auto adversary = kp_adversary(b0);
        BalancePolicy balance;
        const auto result = run_online(*adversary, balance, 5 + b0);
        const int64_t expected_alg = params.v_count - params.tail_size;
        CHECK(result.trace.size() == expected_alg);
        const double ratio =
            static_cast<double>(expected_alg) / static_cast<double>(kp_opt_value(b0));
        CHECK(ratio == doctest::Approx(analysis::cr_bound_bmatching(b0)).epsilon(1e-12));
    }
}

TEST_CASE("depletion block b0=2 against balance: 6+4 matched, final 8 unmatched") {
    auto adversary = kp_adversary(2);
    BalancePolicy balance;
    const auto result = run_online(*adversary, balance, 123);
    CHECK(result.trace.size() == 10);
    // The last 8 arrivals see only drained servers.
    for (int64_t t = 11; t <= 18; ++t) CHECK(result.trace.choices[static_cast<size_t>(t - 1)] == 0);
    CHECK(result.trace.size_over_time[9] == 10);
}

TEST_CASE("block-plus-tail generator on a small horizon") {
    // b0=1, m=4, T=40: two blocks of 2 arrivals, then 36 tail arrivals on a
    // drained block-1 server refilled every 4 steps.
    auto adversary = gen_kp_tail(1, 4, 40);
    CHECK(adversary->n() == 4);
    BalancePolicy balance;
    const auto result = run_online(*adversary, balance, 9, {.record_instance = true});

    // Engine-replay oracle: one match per block, one per usable tail refill.
    int64_t tail_matches = 0;
    for (int64_t t = 5; t <= 40; ++t)
        if (result.trace.choices[static_cast<size_t>(t - 1)] != 0) ++tail_matches;
    CHECK(result.trace.size() == 2 + tail_matches);
    CHECK(tail_matches == 9); // refills at 4,8,...,36; the one at 40 is unusable
    CHECK(tail_matches <= 40 / 4);

    // All tail arrivals point at one block-1 server.
    const int32_t tail_node = result.frozen->neighbors[4][0];
    CHECK(tail_node <= 2);
    for (int64_t t = 5; t <= 40; ++t)
        CHECK(result.frozen->neighbors[static_cast<size_t>(t - 1)] ==
              std::vector<int32_t>{tail_node});

    CHECK(kp_tail_opt_value(1, 4, 40) == 13);
    CHECK_THROWS_AS(gen_kp_tail(1, 1, 40), std::invalid_argument); // m < k*b0
}

TEST_CASE("phase time recurrence") {
    SUBCASE("worked example") {
        const auto sched = phase_times(1, 5, 10, 2);
        CHECK(sched.times[0] == 13);
        CHECK(sched.approx[0] == doctest::Approx(12.75));
        CHECK(sched.times[0] - sched.approx[0] == doctest::Approx(0.25));
        CHECK(sched.times[0] - sched.approx[0] < 4.0 * (std::pow(1.25, 1) - 1.0));
    }
    SUBCASE("recurrence equals the inf-definition search") {
        for (int32_t b0 = 1; b0 <= 3; ++b0) {
            for (int64_t m = 2; m <= 12; ++m) {
                for (int64_t t0 : {1, 3, 10, 47, 200}) {
                    const auto sched = phase_times(b0, m, t0, static_cast<int32_t>(m - 1));
                    int64_t prev = t0;
                    for (int64_t ti : sched.times) {
                        CHECK(ti == phase_time_by_search(b0, m, prev));
                        prev = ti;
                    }
                }
            }
        }
    }
    SUBCASE("approximation error bound") {
        for (int32_t b0 = 1; b0 <= 3; ++b0) {
            for (int64_t m : {5, 20, 50}) {
                const auto sched = phase_times(b0, m, 1000, static_cast<int32_t>(m - 1));
                const double ratio = 1.0 + 1.0 / static_cast<double>(m - 1);
                for (size_t i = 0; i < sched.times.size(); ++i) {
                    const double err = static_cast<double>(sched.times[i]) - sched.approx[i];
                    CHECK(err >= -1e-9);
                    CHECK(err < static_cast<double>(m - 1) *
                                    (std::pow(ratio, static_cast<double>(i + 1)) - 1.0) + 1e-9);
                }
            }
        }
    }
}

TEST_CASE("phased elimination smoke run") {
    auto adversary = gen_phased_elimination(1, 3, 200, 4);
    CHECK(adversary->n() == 5);
    BalancePolicy balance;
    // The engine rejects empty neighbor sets, so completing the run is the
    // model-membership check.
    const auto result = run_online(*adversary, balance, 21, {.record_instance = true});
    CHECK(result.trace.size() > 0);
    CHECK(static_cast<int64_t>(result.frozen->neighbors.size()) == 200);

    // Arrivals up to t0 see every server, later ones a shrinking subset.
    const int64_t t0 = 200 / std::exp(1.0);
    for (int64_t t = 1; t <= t0; ++t)
        CHECK(result.frozen->neighbors[static_cast<size_t>(t - 1)].size() == 5);
    CHECK(result.frozen->neighbors[static_cast<size_t>(t0)].size() == 2); // m-1 survivors
    CHECK(result.frozen->neighbors.back().size() == 1);

    CHECK_THROWS_AS(gen_phased_elimination(1, 50, 60, 1), std::invalid_argument);
}

TEST_CASE("adaptive transcripts replay identically") {
    for (const char* policy_name : {"balance", "greedy"}) {
        auto first = gen_phased_elimination(1, 4, 300, 8);
        auto second = gen_phased_elimination(1, 4, 300, 8);
        auto p1 = make_policy(policy_name);
        auto p2 = make_policy(policy_name);
        const auto r1 = run_online(*first, *p1, 31, {.record_instance = true});
        const auto r2 = run_online(*second, *p2, 31, {.record_instance = true});
        CHECK(r1.frozen->neighbors == r2.frozen->neighbors);
        CHECK(r1.trace.choices == r2.trace.choices);

        // Replaying the recorded choices on the frozen instance reproduces
        // the trace bit for bit.
        FixedScriptPolicy script(r1.trace.choices);
        const MatchTrace replay = run_online(*r1.frozen, script, 31);
        CHECK(replay.choices == r1.trace.choices);
        CHECK(replay.size_over_time == r1.trace.size_over_time);
        CHECK(replay.final_budgets == r1.trace.final_budgets);
    }
}
