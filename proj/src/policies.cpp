#include "refill/policies.hpp"

#include <algorithm>
#include <stdexcept>

namespace refill {

int32_t greedy_decide(std::span<const int32_t> neighbors, const BudgetView& budgets,
                      RngStream& rng) {
    // Reservoir pick: uniform among available neighbors in one pass.
    int32_t picked = 0;
    uint64_t seen = 0;
    for (int32_t u : neighbors) {
        if (budgets.budget(u) < 1) continue;
        ++seen;
        if (seen == 1 || rng.below(seen) == 0) picked = u;
    }
    return picked;
}

int32_t balance_decide(std::span<const int32_t> neighbors, const BudgetView& budgets,
                       RngStream& rng, TieBreak tie_break) {
    int32_t picked = 0;
    int64_t best = 0;
    uint64_t ties = 0;
    for (int32_t u : neighbors) {
        const int64_t b = budgets.budget(u);
        if (b < 1) continue;
        if (b > best) {
            best = b;
            picked = u;
            ties = 1;
        } else if (b == best && tie_break == TieBreak::random) {
            ++ties;
            if (rng.below(ties) == 0) picked = u;
        }
        // lowest_index: first maximum wins, nothing to do
    }
    return picked;
}

int32_t GreedyPolicy::decide(std::span<const int32_t> neighbors, const BudgetView& budgets,
                             RngStream& rng) {
    return greedy_decide(neighbors, budgets, rng);
}

int32_t BalancePolicy::decide(std::span<const int32_t> neighbors, const BudgetView& budgets,
                              RngStream& rng) {
    return balance_decide(neighbors, budgets, rng, tie_break_);
}

int32_t UniformPolicy::decide(std::span<const int32_t> neighbors, const BudgetView& budgets,
                              RngStream& rng) {
    if (neighbors.empty()) return 0;
    const int32_t u = neighbors[rng.below(neighbors.size())];
    return budgets.budget(u) >= 1 ? u : 0;
}

int32_t FixedScriptPolicy::decide(std::span<const int32_t>, const BudgetView&, RngStream&) {
    if (next_ >= choices_.size()) throw std::runtime_error("fixed script exhausted");
    return choices_[next_++];
}

std::unique_ptr<Policy> make_policy(const std::string& name) {
    if (name == "greedy") return std::make_unique<GreedyPolicy>();
    if (name == "balance") return std::make_unique<BalancePolicy>();
    if (name == "balance-lowest") return std::make_unique<BalancePolicy>(TieBreak::lowest_index);
    if (name == "lazy") return std::make_unique<LazyPolicy>();
    if (name == "uniform") return std::make_unique<UniformPolicy>();
    throw std::invalid_argument("unknown policy: " + name);
}

} // namespace refill
