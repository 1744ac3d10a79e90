#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refill/core.hpp"
#include "refill/rng.hpp"

namespace refill {

// An online matching policy: a pure decision function over the revealed
// neighbor set, a read-only budget view and a per-run RNG stream.
// Returning 0 means "pass".
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string_view name() const = 0;
    virtual int32_t decide(std::span<const int32_t> neighbors, const BudgetView& budgets,
                           RngStream& rng) = 0;
};

enum class TieBreak { random, lowest_index };

// Uniform random choice among available neighbors; pass iff none available.
class GreedyPolicy final : public Policy {
public:
    std::string_view name() const override { return "greedy"; }
    int32_t decide(std::span<const int32_t> neighbors, const BudgetView& budgets,
                   RngStream& rng) override;
};

// Highest remaining budget among available neighbors, ties broken at random
// (or by lowest index, for reproducing hand traces).
class BalancePolicy final : public Policy {
public:
    explicit BalancePolicy(TieBreak tie_break = TieBreak::random) : tie_break_(tie_break) {}
    std::string_view name() const override { return "balance"; }
    int32_t decide(std::span<const int32_t> neighbors, const BudgetView& budgets,
                   RngStream& rng) override;

private:
    TieBreak tie_break_;
};

// Always passes. Legal because passing freely is allowed for test policies.
class LazyPolicy final : public Policy {
public:
    std::string_view name() const override { return "lazy"; }
    int32_t decide(std::span<const int32_t>, const BudgetView&, RngStream&) override { return 0; }
};

// Picks a neighbor uniformly among all revealed ones and passes when the
// pick has no budget.
class UniformPolicy final : public Policy {
public:
    std::string_view name() const override { return "uniform"; }
    int32_t decide(std::span<const int32_t> neighbors, const BudgetView& budgets,
                   RngStream& rng) override;
};

// Replays a fixed list of choices (0 = pass); used to re-run witnesses and
// recorded traces through the engine's feasibility checks.
class FixedScriptPolicy final : public Policy {
public:
    explicit FixedScriptPolicy(std::vector<int32_t> choices) : choices_(std::move(choices)) {}
    std::string_view name() const override { return "fixed-script"; }
    int32_t decide(std::span<const int32_t> neighbors, const BudgetView& budgets,
                   RngStream& rng) override;

private:
    std::vector<int32_t> choices_;
    size_t next_ = 0;
};

// Stateless decision helpers behind the policy classes.
int32_t greedy_decide(std::span<const int32_t> neighbors, const BudgetView& budgets, RngStream& rng);
int32_t balance_decide(std::span<const int32_t> neighbors, const BudgetView& budgets, RngStream& rng,
                       TieBreak tie_break = TieBreak::random);

// Factory for the CLI/harness names: greedy | balance | lazy | uniform |
// fixed-script (the last needs a script, see FixedScriptPolicy).
std::unique_ptr<Policy> make_policy(const std::string& name);

} // namespace refill
