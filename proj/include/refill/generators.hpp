#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "refill/core.hpp"

namespace refill {

// ---------------------------------------------------------------------------
// Stochastic instances
// ---------------------------------------------------------------------------

// Bipartite Erdos-Renyi instance: each (u,t) adjacency present independently
// with probability a/n, refills Bernoulli(beta/n) per (u,t). Empty neighbor
// sets are allowed (the arrival simply goes unmatched).
OnlineInstance gen_erdos_renyi(int32_t n, int64_t T, double a, double beta, int32_t b0, Cap cap,
                               uint64_t seed);

// ---------------------------------------------------------------------------
// Adversarial constructions
// ---------------------------------------------------------------------------

// Size parameters of the nested-phase depletion block on k = (1+b0)^b0
// servers and k*b0 arrivals.
struct KpParams {
    int32_t b0 = 1;
    int64_t k = 0;       // number of servers
    int64_t v_count = 0; // number of arrivals = k*b0
    std::vector<int64_t> phase_sizes;   // arrivals per phase 1..b0
    std::vector<int64_t> removal_sizes; // servers removed after each phase
    int64_t tail_size = 0;              // final arrivals = b0^(b0+1)

    static KpParams make(int32_t b0);
};

// The nested-phase adaptive block: phase j presents b0*|A|/(b0+1) arrivals
// adjacent to the whole alive set A, then removes the |A|/(b0+1) servers
// with the highest remaining budget (ties to the lowest index). The final
// b0^(b0+1) arrivals see only the fully drained survivors. No refills.
std::unique_ptr<AdaptiveInstance> kp_adversary(int32_t b0);

// Low-refill-rate adversary: j = floor(m/(k*b0)) disjoint depletion blocks
// followed by a long tail in which every arrival sees only one server
// (a server of block 1 that was drained during its block). Periodic(m)
// refills. Requires k*b0 <= m <= T.
std::unique_ptr<AdaptiveInstance> gen_kp_tail(int32_t b0, int64_t m, int64_t T);

// Exact matching size the offline optimum attains on these constructions.
int64_t kp_opt_value(int32_t b0);
int64_t kp_tail_opt_value(int32_t b0, int64_t m, int64_t T);

// ---------------------------------------------------------------------------
// Phase times of the elimination adversary
// ---------------------------------------------------------------------------

// Exact elimination times t_i (integer recurrence
// t_{i+1} = b0 - 1 + t_i + ceil((b0 + t_i)/(m-1))) together with the
// arithmetic-geometric approximation
// ~t_i = (1 + 1/(m-1))^i (t0 + m b0 - m + 1) - m b0 + m - 1.
// Always 0 <= t_i - ~t_i < (m-1)((1 + 1/(m-1))^i - 1).
struct PhaseSchedule {
    int64_t t0 = 0;
    std::vector<int64_t> times;  // t_1..t_count
    std::vector<double> approx;  // ~t_1..~t_count
};

PhaseSchedule phase_times(int32_t b0, int64_t m, int64_t t0, int32_t count);

// Search form of the same quantity: inf{t > prev : b0 + floor(t/m) == t - prev}.
// Test oracle for the recurrence.
int64_t phase_time_by_search(int32_t b0, int64_t m, int64_t prev);

// High-refill-rate adversary: a long fully-connected warm-up of t0 arrivals
// on n servers, then all but the m-1 lowest-budget servers are dropped
// (ties uniform from the adversary stream) and the survivors are eliminated
// one by one at the times t_i, always removing the highest-budget one
// (ties to the lowest index). Periodic(m) refills.
std::unique_ptr<AdaptiveInstance> gen_phased_elimination(int32_t b0, int64_t m, int64_t T,
                                                         uint64_t seed,
                                                         std::optional<int64_t> t0 = {});

// Offline optimum of the phased-elimination graph up to the usual +-1 refill
// boundary slop: t_{m-1} plus one tail match per refill landing in
// [t_{m-1}, T-1].
int64_t phased_elimination_opt_value(int32_t b0, int64_t m, int64_t T,
                                     std::optional<int64_t> t0 = {});
int32_t phased_elimination_n(int32_t b0, int64_t m, int64_t t0);

} // namespace refill
