#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "refill/rng.hpp"

namespace refill {

class Policy;

// Thrown when a policy returns a node it is not allowed to match
// (out of neighborhood or zero budget). Never silently repaired.
class PolicyFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Cap = std::optional<int32_t>; // nullopt = unbounded stored budget

// ---------------------------------------------------------------------------
// Refill schedules
// ---------------------------------------------------------------------------

struct RefillEvent {
    int32_t node;   // 1-based
    int32_t amount; // >= 1
};

// Per-(u,t) refill process. `periodic(m)` adds one unit to every node at
// t mod m == 0. `bernoulli(beta, seed)` draws eta_{u,t} ~ B(beta/n)
// independently per pair; the draw is a threshold test on a hashed uniform
// keyed by (seed, u, t), so increasing beta only ever adds refill events.
struct RefillSchedule {
    enum class Kind { periodic, bernoulli, explicit_events };

    Kind kind = Kind::explicit_events;
    int64_t period = 0;  // periodic
    double beta = 0.0;   // bernoulli
    uint64_t seed = 0;   // bernoulli
    std::vector<std::vector<RefillEvent>> events; // explicit, indexed by t-1

    static RefillSchedule periodic(int64_t m);
    static RefillSchedule bernoulli(double beta, uint64_t seed);
    static RefillSchedule explicit_schedule(std::vector<std::vector<RefillEvent>> events);
    static RefillSchedule none(); // explicit schedule with no events

    // Materialized per-step event lists over a horizon; empty for periodic.
    std::vector<std::vector<RefillEvent>> materialize(int32_t n, int64_t T) const;
    int64_t total_amount(int32_t n, int64_t T) const;
};

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

// A fully materialized instance. Nodes are 1..n, arrivals are 1..T
// (1-based so that "refill at t mod m == 0" reads exactly as stated).
struct OnlineInstance {
    int32_t n = 0;
    int64_t T = 0;
    std::vector<std::vector<int32_t>> neighbors; // indexed by t-1, sorted unique
    RefillSchedule refills;
    int32_t b0 = 1;
    Cap cap;

    void validate() const; // throws std::invalid_argument
};

std::string to_json(const OnlineInstance& inst);
OnlineInstance instance_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Budget state
// ---------------------------------------------------------------------------

// Budgets plus an incrementally maintained histogram Y_k (count of nodes
// with budget exactly k). Invariant: sum_k Y_k == n.
class BudgetState {
public:
    BudgetState(int32_t n, int32_t b0, Cap cap);

    int32_t n() const { return n_; }
    Cap cap() const { return cap_; }
    int32_t budget(int32_t u) const { return budgets_[static_cast<size_t>(u)]; }
    // Index 0 is unused; nodes are 1..n.
    const std::vector<int32_t>& budgets() const { return budgets_; }
    const std::vector<int64_t>& histogram() const { return counts_; }
    int64_t available_count() const { return n_ - counts_[0]; }

    void apply_match(int32_t u);
    void apply_refill(int32_t u, int32_t amount);
    void apply_refill_all(int32_t amount);

private:
    void move_count(int32_t from, int32_t to);

    int32_t n_;
    Cap cap_;
    std::vector<int32_t> budgets_;
    std::vector<int64_t> counts_;
};

// Budget evolution for one node over one step: decide the match, then apply
// the refill, then the cap. Matching with zero budget is a contract error.
int64_t step_budget(int64_t b_prev, bool matched, int64_t refill, std::optional<int64_t> cap);

// Recount Y_0..Y_K by direct scan (independent of the incremental histogram).
std::vector<int64_t> budget_histogram(const BudgetState& state);

// Read-only budget lookup handed to policies. An interface rather than a raw
// span so tests can inject transformed views.
class BudgetView {
public:
    virtual ~BudgetView() = default;
    virtual int64_t budget(int32_t u) const = 0;
};

class StateBudgetView final : public BudgetView {
public:
    explicit StateBudgetView(const BudgetState& state) : state_(&state) {}
    int64_t budget(int32_t u) const override { return state_->budget(u); }

private:
    const BudgetState* state_;
};

// ---------------------------------------------------------------------------
// Adaptive instances
// ---------------------------------------------------------------------------

// A reactive instance: arrival neighborhoods are revealed one at a time and
// may depend on the history of observed choices (but never on the policy's
// future randomness). Single-consumer: one state machine per run.
class AdaptiveInstance {
public:
    virtual ~AdaptiveInstance() = default;

    virtual int32_t n() const = 0;
    virtual int64_t T() const = 0;
    virtual const RefillSchedule& refills() const = 0;
    virtual int32_t b0() const = 0;
    virtual Cap cap() const = 0;

    // Called exactly once per t, in order. `state` reflects budgets at the
    // end of step t-1. The returned set must be sorted, unique, non-empty.
    virtual const std::vector<int32_t>& reveal(int64_t t, const BudgetState& state) = 0;
    // Called after the decision at t has been applied; choice 0 = unmatched.
    virtual void observe(int64_t t, int32_t choice) = 0;
};

// ---------------------------------------------------------------------------
// Traces
// ---------------------------------------------------------------------------

struct TraceSample {
    int64_t t;
    std::vector<int64_t> counts; // Y_0..Y_max at time t
};

struct MatchTrace {
    std::vector<int32_t> choices;        // indexed by t-1; 0 = unmatched
    std::vector<int64_t> size_over_time; // cumulative matching size
    std::vector<TraceSample> histogram_samples;
    std::vector<int32_t> final_budgets;  // index 0 unused
    uint64_t rng_seed = 0;

    int64_t size() const { return size_over_time.empty() ? 0 : size_over_time.back(); }
};

std::string to_json(const MatchTrace& trace);
MatchTrace trace_from_json(const std::string& text);
// Columns: t, choice, size, y0..yK (budget histogram columns filled on
// sampled rows). `source` tags the first comment line (online/offline).
std::string trace_to_csv(const MatchTrace& trace, const std::string& source = "online");

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

struct RunOptions {
    int64_t sample_stride = 0;   // >0: record histogram every stride steps
    bool record_instance = false; // adaptive runs: freeze revealed sets
};

MatchTrace run_online(const OnlineInstance& inst, Policy& policy, uint64_t seed,
                      const RunOptions& options = {});

struct AdaptiveRunResult {
    MatchTrace trace;
    std::optional<OnlineInstance> frozen; // present when record_instance
};

AdaptiveRunResult run_online(AdaptiveInstance& inst, Policy& policy, uint64_t seed,
                             const RunOptions& options = {});

} // namespace refill
