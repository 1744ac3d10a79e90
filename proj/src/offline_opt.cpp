#include "refill/offline_opt.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <unordered_map>

namespace refill {

namespace {

constexpr int32_t kInfCap = 1 << 30;
constexpr int64_t kMaxArcs = 80'000'000;

// Dinic with paired arcs (reverse of arc i is i^1) and linked adjacency.
class Dinic {
public:
    int32_t add_node() { return head_.emplace_back(-1), static_cast<int32_t>(head_.size() - 1); }

    int64_t add_edge(int32_t from, int32_t to, int32_t cap) {
        if (static_cast<int64_t>(arc_to_.size()) + 2 > kMaxArcs)
            throw std::runtime_error("flow network exceeds the configured arc limit");
        const int64_t id = static_cast<int64_t>(arc_to_.size());
        push_arc(from, to, cap);
        push_arc(to, from, 0);
        return id;
    }

    int64_t max_flow(int32_t s, int32_t t) {
        int64_t flow = 0;
        std::vector<int32_t> level(head_.size());
        std::vector<int64_t> iter(head_.size());
        std::vector<int32_t> queue(head_.size());
        while (bfs(s, t, level, queue)) {
            iter = head_;
            flow += blocking_flow(s, t, level, iter);
        }
        return flow;
    }

    int32_t residual(int64_t arc) const { return arc_cap_[static_cast<size_t>(arc)]; }

private:
    void push_arc(int32_t from, int32_t to, int32_t cap) {
        arc_to_.push_back(to);
        arc_cap_.push_back(cap);
        arc_next_.push_back(head_[static_cast<size_t>(from)]);
        head_[static_cast<size_t>(from)] = static_cast<int64_t>(arc_to_.size()) - 1;
    }

    bool bfs(int32_t s, int32_t t, std::vector<int32_t>& level, std::vector<int32_t>& queue) {
        std::fill(level.begin(), level.end(), -1);
        int32_t qh = 0, qt = 0;
        queue[qt++] = s;
        level[static_cast<size_t>(s)] = 0;
        while (qh < qt) {
            const int32_t v = queue[qh++];
            for (int64_t a = head_[static_cast<size_t>(v)]; a >= 0; a = arc_next_[static_cast<size_t>(a)]) {
                const int32_t to = arc_to_[static_cast<size_t>(a)];
                if (arc_cap_[static_cast<size_t>(a)] > 0 && level[static_cast<size_t>(to)] < 0) {
                    level[static_cast<size_t>(to)] = level[static_cast<size_t>(v)] + 1;
                    queue[qt++] = to;
                }
            }
        }
        return level[static_cast<size_t>(t)] >= 0;
    }

    // Iterative blocking flow; carry chains can be millions of nodes long,
    // which rules out a recursive DFS.
    int64_t blocking_flow(int32_t s, int32_t t, std::vector<int32_t>& level,
                          std::vector<int64_t>& iter) {
        int64_t total = 0;
        std::vector<int64_t> path_arcs;
        std::vector<int32_t> path_nodes{s};
        while (true) {
            const int32_t v = path_nodes.back();
            if (v == t) {
                int32_t bottleneck = kInfCap;
                for (int64_t a : path_arcs)
                    bottleneck = std::min(bottleneck, arc_cap_[static_cast<size_t>(a)]);
                size_t cut = path_arcs.size();
                for (size_t i = 0; i < path_arcs.size(); ++i) {
                    const size_t a = static_cast<size_t>(path_arcs[i]);
                    arc_cap_[a] -= bottleneck;
                    arc_cap_[a ^ 1] += bottleneck;
                    if (arc_cap_[a] == 0 && i < cut) cut = i;
                }
                total += bottleneck;
                path_arcs.resize(cut);
                path_nodes.resize(cut + 1);
                continue;
            }
            bool advanced = false;
            for (int64_t& a = iter[static_cast<size_t>(v)]; a >= 0;
                 a = arc_next_[static_cast<size_t>(a)]) {
                const int32_t to = arc_to_[static_cast<size_t>(a)];
                if (arc_cap_[static_cast<size_t>(a)] > 0 &&
                    level[static_cast<size_t>(to)] == level[static_cast<size_t>(v)] + 1) {
                    path_arcs.push_back(a);
                    path_nodes.push_back(to);
                    advanced = true;
                    break;
                }
            }
            if (!advanced) {
                level[static_cast<size_t>(v)] = -1; // dead end for this phase
                if (path_nodes.size() == 1) break;
                path_arcs.pop_back();
                path_nodes.pop_back();
            }
        }
        return total;
    }

    std::vector<int64_t> head_;
    std::vector<int32_t> arc_to_;
    std::vector<int32_t> arc_cap_;
    std::vector<int64_t> arc_next_;
};

struct NodeEvent {
    int64_t t;
    int32_t refill = 0;
    bool adjacency = false;
};

} // namespace

MaxflowResult opt_maxflow(const OnlineInstance& inst) {
    inst.validate();
    const int32_t n = inst.n;
    const int64_t T = inst.T;

    // Per-server event sequences: times with an incident edge or a refill.
    // Steps in between carry the budget unchanged and are contracted away.
    std::vector<std::vector<NodeEvent>> events(static_cast<size_t>(n) + 1);
    for (int64_t t = 1; t <= T; ++t)
        for (int32_t u : inst.neighbors[static_cast<size_t>(t - 1)])
            events[static_cast<size_t>(u)].push_back({t, 0, true});

    if (inst.refills.kind == RefillSchedule::Kind::periodic) {
        const int64_t m = inst.refills.period;
        for (int32_t u = 1; u <= n; ++u) {
            auto& ev = events[static_cast<size_t>(u)];
            const size_t adj_count = ev.size();
            for (int64_t t = m; t <= T; t += m) ev.push_back({t, 1, false});
            std::inplace_merge(ev.begin(), ev.begin() + static_cast<ptrdiff_t>(adj_count), ev.end(),
                               [](const NodeEvent& a, const NodeEvent& b) { return a.t < b.t; });
        }
    } else {
        const auto by_step = inst.refills.materialize(n, T);
        std::vector<std::vector<NodeEvent>> refill_events(static_cast<size_t>(n) + 1);
        for (int64_t t = 1; t <= T; ++t)
            for (const auto& ev : by_step[static_cast<size_t>(t - 1)])
                refill_events[static_cast<size_t>(ev.node)].push_back({t, ev.amount, false});
        for (int32_t u = 1; u <= n; ++u) {
            auto& ev = events[static_cast<size_t>(u)];
            const size_t adj_count = ev.size();
            ev.insert(ev.end(), refill_events[static_cast<size_t>(u)].begin(),
                      refill_events[static_cast<size_t>(u)].end());
            std::inplace_merge(ev.begin(), ev.begin() + static_cast<ptrdiff_t>(adj_count), ev.end(),
                               [](const NodeEvent& a, const NodeEvent& b) { return a.t < b.t; });
        }
    }
    // Coalesce same-time adjacency + refill entries.
    for (int32_t u = 1; u <= n; ++u) {
        auto& ev = events[static_cast<size_t>(u)];
        size_t out = 0;
        for (size_t i = 0; i < ev.size(); ++i) {
            if (out > 0 && ev[out - 1].t == ev[i].t) {
                ev[out - 1].refill += ev[i].refill;
                ev[out - 1].adjacency |= ev[i].adjacency;
            } else {
                ev[out++] = ev[i];
            }
        }
        ev.resize(out);
    }

    Dinic dinic;
    const int32_t source = dinic.add_node();
    const int32_t sink = dinic.add_node();

    std::vector<int32_t> arrival_node(static_cast<size_t>(T) + 1, -1);
    for (int64_t t = 1; t <= T; ++t) {
        if (!inst.neighbors[static_cast<size_t>(t - 1)].empty()) {
            arrival_node[static_cast<size_t>(t)] = dinic.add_node();
            dinic.add_edge(arrival_node[static_cast<size_t>(t)], sink, 1);
        }
    }

    const int32_t chain_cap = inst.cap ? *inst.cap : kInfCap;
    struct MatchArc {
        int64_t t;
        int32_t u;
        int64_t arc;
    };
    std::vector<MatchArc> match_arcs;

    for (int32_t u = 1; u <= n; ++u) {
        const auto& ev = events[static_cast<size_t>(u)];
        if (ev.empty()) continue;
        int32_t node = dinic.add_node();
        if (inst.b0 > 0) dinic.add_edge(source, node, inst.b0);
        for (size_t i = 0; i < ev.size(); ++i) {
            if (ev[i].adjacency) {
                const int64_t arc =
                    dinic.add_edge(node, arrival_node[static_cast<size_t>(ev[i].t)], 1);
                match_arcs.push_back({ev[i].t, u, arc});
            }
            if (i + 1 == ev.size()) break; // budget after the last event is unusable
            const int32_t next = dinic.add_node();
            if (ev[i].refill > 0) {
                if (inst.cap) {
                    // Refill joins the carried budget, then the cap bites.
                    const int32_t merge = dinic.add_node();
                    dinic.add_edge(node, merge, chain_cap);
                    dinic.add_edge(source, merge, ev[i].refill);
                    dinic.add_edge(merge, next, chain_cap);
                } else {
                    dinic.add_edge(node, next, kInfCap);
                    dinic.add_edge(source, next, ev[i].refill);
                }
            } else {
                dinic.add_edge(node, next, chain_cap);
            }
            node = next;
        }
    }

    MaxflowResult result;
    result.value = dinic.max_flow(source, sink);
    result.witness.assign(static_cast<size_t>(T), 0);
    for (const auto& arc : match_arcs) {
        if (dinic.residual(arc.arc) == 0) result.witness[static_cast<size_t>(arc.t - 1)] = arc.u;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Brute force
// ---------------------------------------------------------------------------

int64_t brute_force_opt(const OnlineInstance& inst) {
    inst.validate();
    if (inst.T > 20 || inst.n > 8)
        throw std::invalid_argument("brute force is limited to T <= 20, n <= 8");

    const int32_t n = inst.n;
    const int64_t T = inst.T;
    const auto by_step = inst.refills.materialize(n, T);

    const int64_t budget_limit = inst.b0 + inst.refills.total_amount(n, T);
    if (!inst.cap && budget_limit > 15)
        throw std::invalid_argument("brute force needs budgets below 16");

    const auto pack = [&](const std::vector<int32_t>& b) {
        uint64_t key = 0;
        for (int32_t u = 1; u <= n; ++u)
            key = key << 4 | static_cast<uint64_t>(std::min(b[static_cast<size_t>(u)], 15));
        return key;
    };

    std::unordered_map<uint64_t, int64_t> memo;

    const std::function<int64_t(int64_t, std::vector<int32_t>&)> best =
        [&](int64_t t, std::vector<int32_t>& budgets) -> int64_t {
        if (t > T) return 0;
        const uint64_t key = static_cast<uint64_t>(t) << 36 | pack(budgets);
        if (const auto it = memo.find(key); it != memo.end()) return it->second;

        const auto advance = [&](std::vector<int32_t>& b) {
            for (const auto& ev : by_step[static_cast<size_t>(t - 1)])
                b[static_cast<size_t>(ev.node)] = static_cast<int32_t>(step_budget(
                    b[static_cast<size_t>(ev.node)], false, ev.amount,
                    inst.cap ? std::optional<int64_t>(*inst.cap) : std::nullopt));
        };

        std::vector<int32_t> scratch = budgets;
        advance(scratch);
        int64_t value = best(t + 1, scratch); // leave arrival t unmatched

        for (int32_t u : inst.neighbors[static_cast<size_t>(t - 1)]) {
            if (budgets[static_cast<size_t>(u)] < 1) continue;
            scratch = budgets;
            --scratch[static_cast<size_t>(u)];
            advance(scratch);
            value = std::max(value, 1 + best(t + 1, scratch));
        }
        memo.emplace(key, value);
        return value;
    };

    std::vector<int32_t> budgets(static_cast<size_t>(n) + 1, inst.b0);
    budgets[0] = 0;
    return best(1, budgets);
}

double opt_upper_bound_sto(int32_t n, int32_t b0, double beta, int64_t T) {
    if (n < 0 || b0 < 0 || beta < 0 || T < 0)
        throw std::invalid_argument("parameters must be non-negative");
    return static_cast<double>(n) * b0 + beta * static_cast<double>(T);
}

} // namespace refill
