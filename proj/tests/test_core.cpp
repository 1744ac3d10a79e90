#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numeric>

#include "refill/core.hpp"
#include "refill/generators.hpp"
#include "refill/policies.hpp"
#include "test_util.hpp"

using namespace refill;

TEST_CASE("step_budget follows match-then-refill-then-cap") {
    CHECK(step_budget(1, true, 0, 3) == 0);  // depletion
    CHECK(step_budget(3, false, 1, 3) == 3); // refill lost at the cap
    CHECK(step_budget(2, true, 1, 3) == 2);  // match and refill cancel
    CHECK(step_budget(2, true, 5, std::nullopt) == 6);
    CHECK(step_budget(0, false, 2, 1) == 1);
    CHECK_THROWS_AS(step_budget(0, true, 1, 3), std::logic_error);
    CHECK_THROWS_AS(step_budget(-1, false, 0, std::nullopt), std::invalid_argument);
}

TEST_CASE("single arrival is matched by greedy") {
    OnlineInstance inst;
    inst.n = 1;
    inst.T = 1;
    inst.b0 = 1;
    inst.neighbors = {{1}};
    inst.refills = RefillSchedule::none();
    GreedyPolicy greedy;
    const MatchTrace trace = run_online(inst, greedy, 7);
    CHECK(trace.size() == 1);
    CHECK(trace.choices[0] == 1);
    CHECK(trace.final_budgets[1] == 0);
}

TEST_CASE("the two-server depletion trace yields size 1 for any deterministic policy") {
    // Arrival 1 sees both servers, arrival 2 sees only whichever was chosen.
    for (const int32_t first_choice : {1, 2}) {
        auto adversary = kp_adversary(1);
        FixedScriptPolicy script({first_choice, 0});
        const auto result = run_online(*adversary, script, 0, {.record_instance = true});
        CHECK(result.trace.size() == 1);
        CHECK(result.frozen->neighbors[0] == std::vector<int32_t>{1, 2});
        CHECK(result.frozen->neighbors[1] == std::vector<int32_t>{first_choice});
        // The second arrival's only neighbor is depleted.
        CHECK(result.trace.choices[1] == 0);
    }
}

namespace {

// Hand simulation of the single-server budget recurrence with periodic
// refills: matches whenever the pre-step budget is positive.
int64_t single_server_matches(int64_t T, int64_t m, int32_t b0) {
    int64_t b = b0;
    int64_t matched = 0;
    for (int64_t t = 1; t <= T; ++t) {
        bool match = b >= 1;
        if (match) ++matched;
        b = step_budget(b, match, t % m == 0 ? 1 : 0, std::nullopt);
    }
    return matched;
}

} // namespace

TEST_CASE("periodic refills on one fully-connected server match the recurrence oracle") {
    // A refill lands after the step's matching decision, so the refill at
    // t = 2m cannot be spent within a horizon of 2m.
    for (const int64_t m : {2, 4, 7}) {
        OnlineInstance inst;
        inst.n = 1;
        inst.T = 2 * m;
        inst.b0 = 1;
        inst.refills = RefillSchedule::periodic(m);
        inst.neighbors.assign(static_cast<size_t>(inst.T), {1});
        GreedyPolicy greedy;
        const MatchTrace trace = run_online(inst, greedy, 3);
        CHECK(trace.size() == single_server_matches(inst.T, m, inst.b0));
        CHECK(trace.size() == 2); // initial budget + the refill at t = m
    }
}

TEST_CASE("a same-step refill never enables a same-step match") {
    OnlineInstance inst;
    inst.n = 1;
    inst.T = 1;
    inst.b0 = 0;
    inst.neighbors = {{1}};
    std::vector<std::vector<RefillEvent>> events(1);
    events[0].push_back({1, 1});
    inst.refills = RefillSchedule::explicit_schedule(std::move(events));
    GreedyPolicy greedy;
    const MatchTrace trace = run_online(inst, greedy, 1);
    CHECK(trace.size() == 0);
    CHECK(trace.final_budgets[1] == 1);
}

TEST_CASE("budget histogram") {
    SUBCASE("hand example") {
        BudgetState state(3, 0, 1);
        state.apply_refill(3, 1);
        const auto counts = budget_histogram(state);
        CHECK(counts == std::vector<int64_t>{2, 1});
    }
    SUBCASE("initialization puts all mass at b0") {
        BudgetState state(7, 2, 5);
        const auto counts = budget_histogram(state);
        CHECK(counts[2] == 7);
        CHECK(std::accumulate(counts.begin(), counts.end(), int64_t{0}) == 7);
    }
    SUBCASE("incremental histogram equals the recount scan after random updates") {
        RngStream rng(99);
        BudgetState state(6, 1, 4);
        for (int step = 0; step < 500; ++step) {
            const int32_t u = static_cast<int32_t>(1 + rng.below(6));
            if (rng.below(2) == 0 && state.budget(u) >= 1)
                state.apply_match(u);
            else
                state.apply_refill(u, static_cast<int32_t>(1 + rng.below(2)));
            if (rng.below(7) == 0) state.apply_refill_all(1);
        }
        const auto scan = budget_histogram(state);
        const auto& incremental = state.histogram();
        for (size_t k = 0; k < std::max(scan.size(), incremental.size()); ++k) {
            const int64_t a = k < scan.size() ? scan[k] : 0;
            const int64_t b = k < incremental.size() ? incremental[k] : 0;
            CHECK(a == b);
        }
        CHECK(std::accumulate(scan.begin(), scan.end(), int64_t{0}) == 6);
    }
}

TEST_CASE("policy faults abort the run") {
    OnlineInstance inst;
    inst.n = 2;
    inst.T = 1;
    inst.b0 = 1;
    inst.neighbors = {{1}};
    inst.refills = RefillSchedule::none();
    SUBCASE("out of neighborhood") {
        FixedScriptPolicy script({2});
        CHECK_THROWS_AS(run_online(inst, script, 0), PolicyFault);
    }
    SUBCASE("zero budget") {
        inst.b0 = 0;
        FixedScriptPolicy script({1});
        CHECK_THROWS_AS(run_online(inst, script, 0), PolicyFault);
    }
}

TEST_CASE("engine invariants hold on fuzzed instances") {
    RngStream rng(2024);
    GreedyPolicy greedy;
    for (int iter = 0; iter < 150; ++iter) {
        const OnlineInstance inst = testutil::random_tiny_instance(rng);
        const uint64_t seed = rng.next_u64();
        const MatchTrace trace = run_online(inst, greedy, seed, {.sample_stride = 2});

        // Budget replay reproduces final budgets exactly.
        const auto replayed = testutil::replay_budgets(inst, trace);
        CHECK(replayed == trace.final_budgets);

        // Conservation without a cap.
        if (!inst.cap) {
            const int64_t total = std::accumulate(trace.final_budgets.begin(),
                                                  trace.final_budgets.end(), int64_t{0});
            CHECK(total == static_cast<int64_t>(inst.n) * inst.b0 +
                               inst.refills.total_amount(inst.n, inst.T) - trace.size());
        }

        // Determinism: identical (instance, policy, seed) gives an identical trace.
        GreedyPolicy greedy2;
        const MatchTrace again = run_online(inst, greedy2, seed, {.sample_stride = 2});
        CHECK(again.choices == trace.choices);
        CHECK(again.final_budgets == trace.final_budgets);

        // Histogram snapshots are consistent with a replay scan.
        for (const auto& sample : trace.histogram_samples)
            CHECK(std::accumulate(sample.counts.begin(), sample.counts.end(), int64_t{0}) ==
                  inst.n);
    }
}

TEST_CASE("instance and trace serialization round-trips") {
    RngStream rng(5);
    for (int iter = 0; iter < 20; ++iter) {
        const OnlineInstance inst = testutil::random_tiny_instance(rng);
        const OnlineInstance back = instance_from_json(to_json(inst));
        CHECK(back.n == inst.n);
        CHECK(back.T == inst.T);
        CHECK(back.b0 == inst.b0);
        CHECK(back.cap == inst.cap);
        CHECK(back.neighbors == inst.neighbors);

        GreedyPolicy greedy;
        const uint64_t seed = rng.next_u64();
        const MatchTrace trace = run_online(inst, greedy, seed, {.sample_stride = 3});
        const MatchTrace trace_back = run_online(back, greedy, seed, {.sample_stride = 3});
        CHECK(trace_back.choices == trace.choices);

        const MatchTrace parsed = trace_from_json(to_json(trace));
        CHECK(parsed.choices == trace.choices);
        CHECK(parsed.size_over_time == trace.size_over_time);
        CHECK(parsed.final_budgets == trace.final_budgets);
        CHECK(parsed.histogram_samples.size() == trace.histogram_samples.size());
    }
}

TEST_CASE("instance json schema accepts the documented field shapes") {
    const std::string text = R"({
        "n": 2, "T": 2, "b0": 1, "cap": "unbounded",
        "refills": {"kind": "explicit", "matrix": [[0, 1], [0, 0]]},
        "neighbors": [[1, 2], [1]]
    })";
    const OnlineInstance inst = instance_from_json(text);
    CHECK(inst.n == 2);
    CHECK(!inst.cap);
    CHECK(inst.refills.kind == RefillSchedule::Kind::explicit_events);
    CHECK(inst.refills.events[1].size() == 1);
    CHECK(inst.refills.events[1][0].node == 1);

    const std::string csv = trace_to_csv(run_online(inst, *make_policy("balance-lowest"), 0,
                                                    {.sample_stride = 1}));
    CHECK(csv.find("# source=online") == 0);
    CHECK(csv.find("t,choice,size,y0,y1") != std::string::npos);
}

TEST_CASE("instance validation rejects malformed inputs") {
    OnlineInstance inst;
    inst.n = 1;
    inst.T = 1;
    inst.b0 = 2;
    inst.cap = 1;
    inst.neighbors = {{1}};
    inst.refills = RefillSchedule::none();
    CHECK_THROWS_AS(inst.validate(), std::invalid_argument); // b0 above cap

    inst.b0 = 1;
    inst.neighbors = {{1, 1}};
    CHECK_THROWS_AS(inst.validate(), std::invalid_argument); // duplicate neighbor
}
