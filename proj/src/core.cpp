#include "refill/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "refill/policies.hpp"

namespace refill {

using nlohmann::json;

// ---------------------------------------------------------------------------
// RefillSchedule
// ---------------------------------------------------------------------------

RefillSchedule RefillSchedule::periodic(int64_t m) {
    if (m < 1) throw std::invalid_argument("periodic refill period must be >= 1");
    RefillSchedule s;
    s.kind = Kind::periodic;
    s.period = m;
    return s;
}

RefillSchedule RefillSchedule::bernoulli(double beta, uint64_t seed) {
    if (beta < 0) throw std::invalid_argument("bernoulli refill rate must be >= 0");
    RefillSchedule s;
    s.kind = Kind::bernoulli;
    s.beta = beta;
    s.seed = seed;
    return s;
}

RefillSchedule RefillSchedule::explicit_schedule(std::vector<std::vector<RefillEvent>> events) {
    RefillSchedule s;
    s.kind = Kind::explicit_events;
    s.events = std::move(events);
    return s;
}

RefillSchedule RefillSchedule::none() { return explicit_schedule({}); }

std::vector<std::vector<RefillEvent>> RefillSchedule::materialize(int32_t n, int64_t T) const {
    std::vector<std::vector<RefillEvent>> out;
    switch (kind) {
        case Kind::periodic: {
            out.resize(static_cast<size_t>(T));
            for (int64_t t = period; t <= T; t += period) {
                auto& step = out[static_cast<size_t>(t - 1)];
                step.reserve(static_cast<size_t>(n));
                for (int32_t u = 1; u <= n; ++u) step.push_back({u, 1});
            }
            return out;
        }
        case Kind::explicit_events:
            out = events;
            out.resize(static_cast<size_t>(T));
            return out;
        case Kind::bernoulli: {
            if (beta > n) throw std::invalid_argument("bernoulli refill rate beta must be <= n");
            out.resize(static_cast<size_t>(T));
            const double p = beta / n;
            const uint64_t base = rng::mix(seed, static_cast<uint64_t>(Stream::refill));
            for (int32_t u = 1; u <= n; ++u) {
                const uint64_t key = rng::mix(base, static_cast<uint64_t>(u));
                for (int64_t t = 1; t <= T; ++t) {
                    if (rng::indexed_unit(key, static_cast<uint64_t>(t)) < p) {
                        out[static_cast<size_t>(t - 1)].push_back({u, 1});
                    }
                }
            }
            return out;
        }
    }
    return out;
}

int64_t RefillSchedule::total_amount(int32_t n, int64_t T) const {
    if (kind == Kind::periodic) return static_cast<int64_t>(n) * (T / period);
    int64_t total = 0;
    if (kind == Kind::explicit_events) {
        for (size_t i = 0; i < events.size() && static_cast<int64_t>(i) < T; ++i)
            for (const auto& ev : events[i]) total += ev.amount;
        return total;
    }
    for (const auto& step : materialize(n, T))
        for (const auto& ev : step) total += ev.amount;
    return total;
}

// ---------------------------------------------------------------------------
// OnlineInstance
// ---------------------------------------------------------------------------

void OnlineInstance::validate() const {
    if (n < 1) throw std::invalid_argument("instance needs n >= 1");
    if (T < 0) throw std::invalid_argument("instance needs T >= 0");
    if (b0 < 0) throw std::invalid_argument("initial budget must be >= 0");
    if (cap && *cap < 1) throw std::invalid_argument("budget cap must be >= 1");
    if (cap && b0 > *cap) throw std::invalid_argument("initial budget exceeds cap");
    if (static_cast<int64_t>(neighbors.size()) != T)
        throw std::invalid_argument("neighbors must have one entry per arrival");
    for (const auto& nb : neighbors) {
        for (size_t i = 0; i < nb.size(); ++i) {
            if (nb[i] < 1 || nb[i] > n) throw std::invalid_argument("neighbor index out of range");
            if (i > 0 && nb[i] <= nb[i - 1])
                throw std::invalid_argument("neighbor sets must be sorted and duplicate-free");
        }
    }
    if (refills.kind == RefillSchedule::Kind::bernoulli && refills.beta > n)
        throw std::invalid_argument("bernoulli refill rate beta must be <= n");
}

// ---------------------------------------------------------------------------
// BudgetState
// ---------------------------------------------------------------------------

BudgetState::BudgetState(int32_t n, int32_t b0, Cap cap) : n_(n), cap_(cap) {
    if (n < 1) throw std::invalid_argument("budget state needs n >= 1");
    if (b0 < 0) throw std::invalid_argument("initial budget must be >= 0");
    if (cap_ && b0 > *cap_) throw std::invalid_argument("initial budget exceeds cap");
    budgets_.assign(static_cast<size_t>(n) + 1, b0);
    budgets_[0] = 0;
    counts_.assign(static_cast<size_t>(std::max(b0, cap_ ? *cap_ : b0)) + 1, 0);
    counts_[static_cast<size_t>(b0)] = n;
}

void BudgetState::move_count(int32_t from, int32_t to) {
    if (static_cast<size_t>(to) >= counts_.size()) counts_.resize(static_cast<size_t>(to) + 1, 0);
    --counts_[static_cast<size_t>(from)];
    ++counts_[static_cast<size_t>(to)];
}

void BudgetState::apply_match(int32_t u) {
    int32_t& b = budgets_[static_cast<size_t>(u)];
    if (b < 1) throw std::logic_error("matched a node with zero budget");
    move_count(b, b - 1);
    --b;
}

void BudgetState::apply_refill(int32_t u, int32_t amount) {
    if (amount <= 0) return;
    int32_t& b = budgets_[static_cast<size_t>(u)];
    int32_t next = b + amount;
    if (cap_) next = std::min(next, *cap_);
    if (next != b) {
        move_count(b, next);
        b = next;
    }
}

void BudgetState::apply_refill_all(int32_t amount) {
    for (int32_t u = 1; u <= n_; ++u) apply_refill(u, amount);
}

// ---------------------------------------------------------------------------
// step_budget / budget_histogram
// ---------------------------------------------------------------------------

int64_t step_budget(int64_t b_prev, bool matched, int64_t refill, std::optional<int64_t> cap) {
    if (b_prev < 0) throw std::invalid_argument("budget must be non-negative");
    if (refill < 0) throw std::invalid_argument("refill must be non-negative");
    if (matched && b_prev < 1) throw std::logic_error("matched a node with zero budget");
    int64_t next = b_prev - (matched ? 1 : 0) + refill;
    if (cap) next = std::min(next, *cap);
    return next;
}

std::vector<int64_t> budget_histogram(const BudgetState& state) {
    int32_t max_b = state.cap() ? *state.cap() : 0;
    for (int32_t u = 1; u <= state.n(); ++u) max_b = std::max(max_b, state.budget(u));
    std::vector<int64_t> counts(static_cast<size_t>(max_b) + 1, 0);
    for (int32_t u = 1; u <= state.n(); ++u) ++counts[static_cast<size_t>(state.budget(u))];
    return counts;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

namespace {

bool contains(std::span<const int32_t> sorted, int32_t u) {
    return std::binary_search(sorted.begin(), sorted.end(), u);
}

// Shared step loop; `reveal` yields the neighbor set of arrival t and
// `observe` is told the applied choice.
template <class RevealFn, class ObserveFn>
MatchTrace engine_run(int32_t n, int64_t T, const RefillSchedule& schedule, int32_t b0, Cap cap,
                      Policy& policy, uint64_t seed, const RunOptions& options, RevealFn&& reveal,
                      ObserveFn&& observe) {
    BudgetState state(n, b0, cap);
    StateBudgetView view(state);
    RngStream policy_rng = RngStream::derive(seed, Stream::policy);

    // Periodic refills are applied as a bulk pass; other schedules go through
    // per-step event lists.
    const bool periodic = schedule.kind == RefillSchedule::Kind::periodic;
    const auto step_events =
        periodic ? std::vector<std::vector<RefillEvent>>{} : schedule.materialize(n, T);

    MatchTrace trace;
    trace.rng_seed = seed;
    trace.choices.resize(static_cast<size_t>(T), 0);
    trace.size_over_time.resize(static_cast<size_t>(T), 0);

    const int64_t stride = options.sample_stride;
    if (stride > 0) trace.histogram_samples.push_back({0, state.histogram()});

    int64_t matched_total = 0;
    for (int64_t t = 1; t <= T; ++t) {
        const std::vector<int32_t>& nb = reveal(t, state);
        const int32_t choice = policy.decide(nb, view, policy_rng);
        if (choice != 0) {
            if (!contains(nb, choice))
                throw PolicyFault("policy chose a node outside the neighborhood at t=" +
                                  std::to_string(t));
            if (state.budget(choice) < 1)
                throw PolicyFault("policy chose a zero-budget node at t=" + std::to_string(t));
            state.apply_match(choice);
            ++matched_total;
        }
        trace.choices[static_cast<size_t>(t - 1)] = choice;
        trace.size_over_time[static_cast<size_t>(t - 1)] = matched_total;

        if (periodic) {
            if (t % schedule.period == 0) state.apply_refill_all(1);
        } else {
            for (const auto& ev : step_events[static_cast<size_t>(t - 1)])
                state.apply_refill(ev.node, ev.amount);
        }

        observe(t, choice);
        if (stride > 0 && (t % stride == 0 || t == T))
            trace.histogram_samples.push_back({t, state.histogram()});
    }

    trace.final_budgets = state.budgets();
    return trace;
}

} // namespace

MatchTrace run_online(const OnlineInstance& inst, Policy& policy, uint64_t seed,
                      const RunOptions& options) {
    inst.validate();
    return engine_run(
        inst.n, inst.T, inst.refills, inst.b0, inst.cap, policy, seed, options,
        [&](int64_t t, const BudgetState&) -> const std::vector<int32_t>& {
            return inst.neighbors[static_cast<size_t>(t - 1)];
        },
        [](int64_t, int32_t) {});
}

AdaptiveRunResult run_online(AdaptiveInstance& inst, Policy& policy, uint64_t seed,
                             const RunOptions& options) {
    AdaptiveRunResult result;
    std::vector<std::vector<int32_t>>* recorded = nullptr;
    if (options.record_instance) {
        result.frozen.emplace();
        result.frozen->n = inst.n();
        result.frozen->T = inst.T();
        result.frozen->refills = inst.refills();
        result.frozen->b0 = inst.b0();
        result.frozen->cap = inst.cap();
        result.frozen->neighbors.reserve(static_cast<size_t>(inst.T()));
        recorded = &result.frozen->neighbors;
    }
    result.trace = engine_run(
        inst.n(), inst.T(), inst.refills(), inst.b0(), inst.cap(), policy, seed, options,
        [&](int64_t t, const BudgetState& state) -> const std::vector<int32_t>& {
            const std::vector<int32_t>& nb = inst.reveal(t, state);
            if (nb.empty()) throw std::logic_error("adaptive instance revealed an empty set");
            if (recorded) recorded->push_back(nb);
            return recorded ? recorded->back() : nb;
        },
        [&](int64_t t, int32_t choice) { inst.observe(t, choice); });
    return result;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

json schedule_to_json(const RefillSchedule& s, int32_t n, int64_t T) {
    json j;
    switch (s.kind) {
        case RefillSchedule::Kind::periodic:
            j["kind"] = "periodic";
            j["m"] = s.period;
            break;
        case RefillSchedule::Kind::bernoulli:
            j["kind"] = "bernoulli";
            j["beta"] = s.beta;
            j["seed"] = s.seed;
            break;
        case RefillSchedule::Kind::explicit_events: {
            j["kind"] = "explicit";
            std::vector<std::vector<int64_t>> matrix(
                static_cast<size_t>(n), std::vector<int64_t>(static_cast<size_t>(T), 0));
            for (size_t i = 0; i < s.events.size() && static_cast<int64_t>(i) < T; ++i)
                for (const auto& ev : s.events[i])
                    matrix[static_cast<size_t>(ev.node - 1)][i] += ev.amount;
            j["matrix"] = matrix;
            break;
        }
    }
    return j;
}

RefillSchedule schedule_from_json(const json& j, int64_t T) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "periodic") return RefillSchedule::periodic(j.at("m").get<int64_t>());
    if (kind == "bernoulli")
        return RefillSchedule::bernoulli(j.at("beta").get<double>(), j.at("seed").get<uint64_t>());
    if (kind == "explicit") {
        std::vector<std::vector<RefillEvent>> events(static_cast<size_t>(T));
        const auto& matrix = j.at("matrix");
        for (size_t u = 0; u < matrix.size(); ++u) {
            const auto& row = matrix[u];
            for (size_t i = 0; i < row.size(); ++i) {
                const int64_t amount = row[i].get<int64_t>();
                if (amount < 0) throw std::invalid_argument("refill amounts must be >= 0");
                if (amount > 0)
                    events[i].push_back({static_cast<int32_t>(u + 1), static_cast<int32_t>(amount)});
            }
        }
        return RefillSchedule::explicit_schedule(std::move(events));
    }
    throw std::invalid_argument("unknown refill schedule kind: " + kind);
}

} // namespace

std::string to_json(const OnlineInstance& inst) {
    json j;
    j["n"] = inst.n;
    j["T"] = inst.T;
    j["b0"] = inst.b0;
    if (inst.cap)
        j["cap"] = *inst.cap;
    else
        j["cap"] = "unbounded";
    j["refills"] = schedule_to_json(inst.refills, inst.n, inst.T);
    j["neighbors"] = inst.neighbors;
    return j.dump();
}

OnlineInstance instance_from_json(const std::string& text) {
    const json j = json::parse(text);
    OnlineInstance inst;
    inst.n = j.at("n").get<int32_t>();
    inst.T = j.at("T").get<int64_t>();
    inst.b0 = j.at("b0").get<int32_t>();
    if (j.at("cap").is_string()) {
        if (j.at("cap").get<std::string>() != "unbounded")
            throw std::invalid_argument("cap must be an integer or \"unbounded\"");
    } else {
        inst.cap = j.at("cap").get<int32_t>();
    }
    inst.refills = schedule_from_json(j.at("refills"), inst.T);
    inst.neighbors = j.at("neighbors").get<std::vector<std::vector<int32_t>>>();
    inst.validate();
    return inst;
}

std::string to_json(const MatchTrace& trace) {
    json j;
    j["rng_seed"] = trace.rng_seed;
    j["choices"] = trace.choices;
    j["size_over_time"] = trace.size_over_time;
    j["final_budgets"] = trace.final_budgets;
    json samples = json::array();
    for (const auto& s : trace.histogram_samples) samples.push_back({{"t", s.t}, {"counts", s.counts}});
    j["histogram_samples"] = samples;
    return j.dump();
}

MatchTrace trace_from_json(const std::string& text) {
    const json j = json::parse(text);
    MatchTrace trace;
    trace.rng_seed = j.at("rng_seed").get<uint64_t>();
    trace.choices = j.at("choices").get<std::vector<int32_t>>();
    trace.size_over_time = j.at("size_over_time").get<std::vector<int64_t>>();
    trace.final_budgets = j.at("final_budgets").get<std::vector<int32_t>>();
    for (const auto& s : j.at("histogram_samples"))
        trace.histogram_samples.push_back(
            {s.at("t").get<int64_t>(), s.at("counts").get<std::vector<int64_t>>()});
    return trace;
}

std::string trace_to_csv(const MatchTrace& trace, const std::string& source) {
    size_t levels = 0;
    for (const auto& s : trace.histogram_samples) levels = std::max(levels, s.counts.size());

    std::ostringstream out;
    out << "# source=" << source << "\n";
    out << "t,choice,size";
    for (size_t k = 0; k < levels; ++k) out << ",y" << k;
    out << "\n";

    size_t sample_idx = 0;
    // skip a possible t=0 snapshot; CSV rows start at t=1
    while (sample_idx < trace.histogram_samples.size() && trace.histogram_samples[sample_idx].t < 1)
        ++sample_idx;
    for (size_t i = 0; i < trace.choices.size(); ++i) {
        const int64_t t = static_cast<int64_t>(i) + 1;
        out << t << ',' << trace.choices[i] << ',' << trace.size_over_time[i];
        if (sample_idx < trace.histogram_samples.size() &&
            trace.histogram_samples[sample_idx].t == t) {
            const auto& counts = trace.histogram_samples[sample_idx].counts;
            for (size_t k = 0; k < levels; ++k)
                out << ',' << (k < counts.size() ? counts[k] : 0);
            ++sample_idx;
        } else {
            for (size_t k = 0; k < levels; ++k) out << ',';
        }
        out << "\n";
    }
    return out.str();
}

} // namespace refill
