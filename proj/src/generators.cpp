#include "refill/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace refill {

namespace {

int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

int64_t ipow(int64_t base, int32_t exp) {
    int64_t r = 1;
    for (int32_t i = 0; i < exp; ++i) {
        if (r > (int64_t{1} << 60) / base) throw std::invalid_argument("construction size overflows");
        r *= base;
    }
    return r;
}

} // namespace

// ---------------------------------------------------------------------------
// Erdos-Renyi
// ---------------------------------------------------------------------------

OnlineInstance gen_erdos_renyi(int32_t n, int64_t T, double a, double beta, int32_t b0, Cap cap,
                               uint64_t seed) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (a < 0 || a > n) throw std::invalid_argument("edge rate a must satisfy 0 <= a <= n");
    if (beta < 0 || beta > n) throw std::invalid_argument("refill rate beta must satisfy 0 <= beta <= n");

    OnlineInstance inst;
    inst.n = n;
    inst.T = T;
    inst.b0 = b0;
    inst.cap = cap;
    inst.refills = RefillSchedule::bernoulli(beta, seed);
    inst.neighbors.resize(static_cast<size_t>(T));

    const double p = a / n;
    const uint64_t edge_base = rng::mix(seed, static_cast<uint64_t>(Stream::edges));
    if (p >= 1.0) {
        std::vector<int32_t> all(static_cast<size_t>(n));
        std::iota(all.begin(), all.end(), 1);
        for (auto& nb : inst.neighbors) nb = all;
    } else if (p > 0.0) {
        // Geometric skipping: gaps between present edges within each arrival.
        const double log1mp = std::log1p(-p);
        for (int64_t t = 1; t <= T; ++t) {
            const uint64_t key = rng::mix(edge_base, static_cast<uint64_t>(t));
            auto& nb = inst.neighbors[static_cast<size_t>(t - 1)];
            int64_t u = 0;
            uint64_t draw = 0;
            while (true) {
                const double v = rng::indexed_unit(key, draw++);
                u += 1 + static_cast<int64_t>(std::floor(std::log1p(-v) / log1mp));
                if (u > n) break;
                nb.push_back(static_cast<int32_t>(u));
            }
        }
    }
    inst.validate();
    return inst;
}

// ---------------------------------------------------------------------------
// Nested-phase depletion block
// ---------------------------------------------------------------------------

KpParams KpParams::make(int32_t b0) {
    if (b0 < 1) throw std::invalid_argument("b0 must be >= 1");
    KpParams p;
    p.b0 = b0;
    p.k = ipow(b0 + 1, b0);
    p.v_count = p.k * b0;
    p.tail_size = ipow(b0, b0 + 1);

    int64_t alive = p.k;
    int64_t arrivals = 0;
    for (int32_t j = 1; j <= b0; ++j) {
        if (alive % (b0 + 1) != 0)
            throw std::logic_error("phase sizes are not integral"); // cannot happen for k=(b0+1)^b0
        const int64_t removed = alive / (b0 + 1);
        const int64_t phase = b0 * removed;
        p.phase_sizes.push_back(phase);
        p.removal_sizes.push_back(removed);
        arrivals += phase;
        alive -= removed;
    }
    if (arrivals + p.tail_size != p.v_count)
        throw std::logic_error("phase arithmetic does not sum to k*b0");
    return p;
}

namespace {

// One depletion block on servers base+1 .. base+k, arrivals offset+1 ..
// offset+k*b0. Phase transitions fire lazily on reveal; removals take the
// highest-budget servers, ties to the lowest index.
class KpBlock {
public:
    KpBlock(const KpParams& params, int32_t server_base, int64_t arrival_offset)
        : params_(params), server_base_(server_base), arrival_offset_(arrival_offset) {
        alive_.resize(static_cast<size_t>(params_.k));
        std::iota(alive_.begin(), alive_.end(), server_base_ + 1);
        int64_t boundary = arrival_offset_;
        for (int64_t size : params_.phase_sizes) {
            boundary += size;
            boundaries_.push_back(boundary); // last arrival of each phase
        }
    }

    int64_t last_arrival() const { return arrival_offset_ + params_.v_count; }

    const std::vector<int32_t>& reveal(int64_t t, const BudgetState& state) {
        while (next_boundary_ < boundaries_.size() && t > boundaries_[next_boundary_]) {
            remove_top(state, params_.removal_sizes[next_boundary_]);
            ++next_boundary_;
        }
        return alive_;
    }

private:
    void remove_top(const BudgetState& state, int64_t count) {
        std::vector<int32_t> order = alive_;
        std::stable_sort(order.begin(), order.end(), [&](int32_t lhs, int32_t rhs) {
            return state.budget(lhs) > state.budget(rhs); // stable: ties keep index order
        });
        order.resize(static_cast<size_t>(count));
        std::sort(order.begin(), order.end());
        std::vector<int32_t> kept;
        kept.reserve(alive_.size() - order.size());
        std::set_difference(alive_.begin(), alive_.end(), order.begin(), order.end(),
                            std::back_inserter(kept));
        alive_ = std::move(kept);
    }

    KpParams params_;
    int32_t server_base_;
    int64_t arrival_offset_;
    std::vector<int32_t> alive_;
    std::vector<int64_t> boundaries_;
    size_t next_boundary_ = 0;
};

class KpAdversary final : public AdaptiveInstance {
public:
    explicit KpAdversary(int32_t b0)
        : params_(KpParams::make(b0)), refills_(RefillSchedule::none()), block_(params_, 0, 0) {}

    int32_t n() const override { return static_cast<int32_t>(params_.k); }
    int64_t T() const override { return params_.v_count; }
    const RefillSchedule& refills() const override { return refills_; }
    int32_t b0() const override { return params_.b0; }
    Cap cap() const override { return Cap{}; }

    const std::vector<int32_t>& reveal(int64_t t, const BudgetState& state) override {
        return block_.reveal(t, state);
    }
    void observe(int64_t, int32_t) override {}

private:
    KpParams params_;
    RefillSchedule refills_;
    KpBlock block_;
};

class KpTailAdversary final : public AdaptiveInstance {
public:
    KpTailAdversary(int32_t b0, int64_t m, int64_t T)
        : params_(KpParams::make(b0)), m_(m), T_(T), refills_(RefillSchedule::periodic(m)) {
        if (m < params_.v_count)
            throw std::invalid_argument("period m too small: no complete block fits");
        if (T < m) throw std::invalid_argument("horizon must satisfy m <= T");
        blocks_ = m / params_.v_count;
        n_ = static_cast<int32_t>(blocks_ * params_.k);
        if (n_ > (int64_t{1} << 30)) throw std::invalid_argument("construction size overflows");
        block_matches_.assign(static_cast<size_t>(params_.k) + 1, 0);
        blocks_storage_.reserve(static_cast<size_t>(blocks_));
        for (int64_t i = 0; i < blocks_; ++i)
            blocks_storage_.emplace_back(params_, static_cast<int32_t>(i * params_.k),
                                         i * params_.v_count);
    }

    int32_t n() const override { return static_cast<int32_t>(n_); }
    int64_t T() const override { return T_; }
    const RefillSchedule& refills() const override { return refills_; }
    int32_t b0() const override { return params_.b0; }
    Cap cap() const override { return Cap{}; }

    const std::vector<int32_t>& reveal(int64_t t, const BudgetState& state) override {
        const int64_t block_span = blocks_ * params_.v_count;
        if (t <= block_span) {
            const int64_t i = (t - 1) / params_.v_count;
            return blocks_storage_[static_cast<size_t>(i)].reveal(t, state);
        }
        if (tail_node_ == 0) {
            // Lowest-index server of block 1 drained during its block; if a
            // pathological policy drained none, fall back to server 1.
            tail_node_ = 1;
            for (int32_t u = 1; u <= params_.k; ++u) {
                if (block_matches_[static_cast<size_t>(u)] >= params_.b0) {
                    tail_node_ = u;
                    break;
                }
            }
            tail_set_ = {tail_node_};
        }
        return tail_set_;
    }

    void observe(int64_t t, int32_t choice) override {
        if (choice >= 1 && choice <= params_.k && t <= params_.v_count)
            ++block_matches_[static_cast<size_t>(choice)];
    }

private:
    KpParams params_;
    int64_t m_;
    int64_t T_;
    RefillSchedule refills_;
    int64_t blocks_ = 0;
    int64_t n_ = 0;
    std::vector<KpBlock> blocks_storage_;
    std::vector<int32_t> block_matches_;
    int32_t tail_node_ = 0;
    std::vector<int32_t> tail_set_;
};

} // namespace

std::unique_ptr<AdaptiveInstance> kp_adversary(int32_t b0) {
    return std::make_unique<KpAdversary>(b0);
}

std::unique_ptr<AdaptiveInstance> gen_kp_tail(int32_t b0, int64_t m, int64_t T) {
    return std::make_unique<KpTailAdversary>(b0, m, T);
}

int64_t kp_opt_value(int32_t b0) { return KpParams::make(b0).v_count; }

int64_t kp_tail_opt_value(int32_t b0, int64_t m, int64_t T) {
    const KpParams params = KpParams::make(b0);
    const int64_t blocks = m / params.v_count;
    const int64_t block_span = blocks * params.v_count;
    // One tail match per refill time in [block_span, T-1].
    const int64_t first = ceil_div(block_span, m);
    const int64_t last = (T - 1) / m;
    return blocks * params.v_count + std::max<int64_t>(0, last - first + 1);
}

// ---------------------------------------------------------------------------
// Phase times
// ---------------------------------------------------------------------------

PhaseSchedule phase_times(int32_t b0, int64_t m, int64_t t0, int32_t count) {
    if (m < 2) throw std::invalid_argument("m must be >= 2");
    if (t0 < 1) throw std::invalid_argument("t0 must be >= 1");
    if (b0 < 1) throw std::invalid_argument("b0 must be >= 1");
    if (count < 0 || count > m - 1) throw std::invalid_argument("count must be in [0, m-1]");

    PhaseSchedule sched;
    sched.t0 = t0;
    int64_t t = t0;
    const double ratio = 1.0 + 1.0 / static_cast<double>(m - 1);
    const double base = static_cast<double>(t0) + static_cast<double>(m) * b0 - m + 1;
    for (int32_t i = 1; i <= count; ++i) {
        t = b0 - 1 + t + ceil_div(b0 + t, m - 1);
        sched.times.push_back(t);
        sched.approx.push_back(std::pow(ratio, i) * base - static_cast<double>(m) * b0 + m - 1);
    }
    return sched;
}

int64_t phase_time_by_search(int32_t b0, int64_t m, int64_t prev) {
    if (m < 2) throw std::invalid_argument("m must be >= 2");
    const int64_t limit = prev + (b0 * m + prev) / (m - 1) + 2 * m + b0 + 4;
    for (int64_t t = prev + 1; t <= limit; ++t) {
        if (b0 + t / m == t - prev) return t;
    }
    throw std::logic_error("phase time search exceeded its bound");
}

// ---------------------------------------------------------------------------
// Phased elimination
// ---------------------------------------------------------------------------

int32_t phased_elimination_n(int32_t b0, int64_t m, int64_t t0) {
    if (m < 2) throw std::invalid_argument("m must be >= 2");
    if (t0 < m) throw std::invalid_argument("t0 must be >= m");
    const int64_t q = t0 / m;
    const int64_t opt_pool =
        std::max(ceil_div(t0, b0 + q), ceil_div(m * q, b0 + q - 1));
    const int64_t n = m - 1 + opt_pool;
    if (n > (int64_t{1} << 30)) throw std::invalid_argument("construction size overflows");
    return static_cast<int32_t>(n);
}

namespace {

class PhasedEliminationAdversary final : public AdaptiveInstance {
public:
    PhasedEliminationAdversary(int32_t b0, int64_t m, int64_t T, uint64_t seed,
                               std::optional<int64_t> t0_override)
        : b0_(b0), m_(m), T_(T), refills_(RefillSchedule::periodic(m)),
          rng_(RngStream::derive(seed, Stream::adversary)) {
        t0_ = t0_override ? *t0_override : static_cast<int64_t>(std::floor(T / std::exp(1.0)));
        if (t0_ < m) throw std::invalid_argument("horizon too small for t0 >= m");
        if (t0_ > T) throw std::invalid_argument("t0 must be <= T");
        n_ = phased_elimination_n(b0, m, t0_);
        times_ = phase_times(b0, m, t0_, static_cast<int32_t>(m - 1)).times;
        current_.resize(static_cast<size_t>(n_));
        std::iota(current_.begin(), current_.end(), 1);
    }

    int32_t n() const override { return n_; }
    int64_t T() const override { return T_; }
    const RefillSchedule& refills() const override { return refills_; }
    int32_t b0() const override { return b0_; }
    Cap cap() const override { return Cap{}; }

    const std::vector<int32_t>& reveal(int64_t t, const BudgetState& state) override {
        if (!survivors_selected_ && t == t0_ + 1) {
            select_survivors(state);
            survivors_selected_ = true;
        }
        while (next_removal_ + 2 <= static_cast<size_t>(m_ - 1) &&
               t > times_[next_removal_]) {
            remove_highest(state);
            ++next_removal_;
        }
        return current_;
    }

    void observe(int64_t, int32_t) override {}

    int64_t t0() const { return t0_; }

private:
    // Keep the m-1 lowest-budget servers at t0, ties uniform.
    void select_survivors(const BudgetState& state) {
        std::vector<std::pair<double, int32_t>> order;
        order.reserve(current_.size());
        for (int32_t u : current_) order.emplace_back(rng_.uniform(), u);
        std::sort(order.begin(), order.end(), [&](const auto& lhs, const auto& rhs) {
            const int32_t bl = state.budget(lhs.second);
            const int32_t br = state.budget(rhs.second);
            if (bl != br) return bl < br;
            return lhs.first < rhs.first;
        });
        std::vector<int32_t> kept;
        kept.reserve(static_cast<size_t>(m_ - 1));
        for (size_t i = 0; i < static_cast<size_t>(m_ - 1); ++i) kept.push_back(order[i].second);
        std::sort(kept.begin(), kept.end());
        current_ = std::move(kept);
    }

    void remove_highest(const BudgetState& state) {
        size_t victim = 0;
        for (size_t i = 1; i < current_.size(); ++i) {
            if (state.budget(current_[i]) > state.budget(current_[victim])) victim = i;
        }
        current_.erase(current_.begin() + static_cast<ptrdiff_t>(victim));
    }

    int32_t b0_;
    int64_t m_;
    int64_t T_;
    int64_t t0_ = 0;
    int32_t n_ = 0;
    RefillSchedule refills_;
    RngStream rng_;
    std::vector<int64_t> times_;
    std::vector<int32_t> current_;
    bool survivors_selected_ = false;
    size_t next_removal_ = 0;
};

} // namespace

std::unique_ptr<AdaptiveInstance> gen_phased_elimination(int32_t b0, int64_t m, int64_t T,
                                                         uint64_t seed,
                                                         std::optional<int64_t> t0) {
    return std::make_unique<PhasedEliminationAdversary>(b0, m, T, seed, t0);
}

int64_t phased_elimination_opt_value(int32_t b0, int64_t m, int64_t T,
                                     std::optional<int64_t> t0_override) {
    const int64_t t0 =
        t0_override ? *t0_override : static_cast<int64_t>(std::floor(T / std::exp(1.0)));
    const auto sched = phase_times(b0, m, t0, static_cast<int32_t>(m - 1));
    const int64_t t_last = sched.times.empty() ? t0 : sched.times.back();
    if (t_last >= T) return std::min(t_last, T);
    const int64_t first = ceil_div(t_last, m);
    const int64_t last = (T - 1) / m;
    return t_last + std::max<int64_t>(0, last - first + 1);
}

} // namespace refill
