#pragma once

#include <cstdint>
#include <vector>

#include "refill/core.hpp"

namespace refill {

// Exact offline optimum via a time-expanded max-flow network. Budget carried
// across steps is a chain of arcs per server (capped at K after each refill
// injection), arrivals are unit-capacity nodes, and a match at t draws from
// the budget available at the end of t-1. Runs of steps where a server has
// neither an incident edge nor a refill are contracted away.
struct MaxflowResult {
    int64_t value = 0;
    std::vector<int32_t> witness; // indexed by t-1; matched node or 0
};

MaxflowResult opt_maxflow(const OnlineInstance& inst);

// Exhaustive search over all feasible assignment sequences, memoized on
// (t, budget vector). Guarded to T <= 20, n <= 8, budgets < 16.
int64_t brute_force_opt(const OnlineInstance& inst);

// n*b0 + beta*T, the supply-side bound on the stochastic optimum.
double opt_upper_bound_sto(int32_t n, int32_t b0, double beta, int64_t T);

} // namespace refill
