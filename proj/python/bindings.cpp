#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "refill/analysis.hpp"
#include "refill/core.hpp"
#include "refill/generators.hpp"
#include "refill/harness.hpp"
#include "refill/offline_opt.hpp"
#include "refill/policies.hpp"

namespace py = pybind11;
using namespace refill;

namespace {

Cap cap_from(std::optional<int32_t> cap) { return cap ? Cap(*cap) : Cap{}; }

std::unique_ptr<AdaptiveInstance> adversary_by_name(const std::string& name, int32_t b0, int64_t m,
                                                    int64_t T, uint64_t seed,
                                                    std::optional<int64_t> t0) {
    if (name == "kp") return kp_adversary(b0);
    if (name == "kp-tail") return gen_kp_tail(b0, m, T);
    if (name == "phased-elimination") return gen_phased_elimination(b0, m, T, seed, t0);
    throw std::invalid_argument("unknown adversarial generator: " + name);
}

py::dict trace_to_dict(const MatchTrace& trace) {
    py::dict out;
    out["alg_size"] = trace.size();
    out["choices"] = trace.choices;
    out["size_over_time"] = trace.size_over_time;
    out["final_budgets"] = trace.final_budgets;
    py::list samples;
    for (const auto& s : trace.histogram_samples) {
        py::dict d;
        d["t"] = s.t;
        d["counts"] = s.counts;
        samples.append(d);
    }
    out["histogram_samples"] = samples;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "online bipartite matching with budget refills";

    // engine
    m.def(
        "step_budget",
        [](int64_t b_prev, bool matched, int64_t refill, std::optional<int64_t> cap) {
            return step_budget(b_prev, matched, refill, cap);
        },
        py::arg("b_prev"), py::arg("matched"), py::arg("refill"), py::arg("cap") = py::none());

    m.def(
        "simulate",
        [](const std::string& instance_json, const std::string& policy, uint64_t seed,
           int64_t stride) {
            const OnlineInstance inst = instance_from_json(instance_json);
            auto p = make_policy(policy);
            return trace_to_dict(run_online(inst, *p, seed, {.sample_stride = stride}));
        },
        py::arg("instance_json"), py::arg("policy") = "greedy", py::arg("seed") = 0,
        py::arg("stride") = 0);

    m.def(
        "simulate_adversarial",
        [](const std::string& generator, const std::string& policy, int32_t b0, int64_t m,
           int64_t T, uint64_t seed, std::optional<int64_t> t0, bool freeze) {
            auto adversary = adversary_by_name(generator, b0, m, T, seed, t0);
            auto p = make_policy(policy);
            const auto result = run_online(*adversary, *p, seed, {.record_instance = freeze});
            py::dict out = trace_to_dict(result.trace);
            if (freeze) out["instance_json"] = to_json(*result.frozen);
            return out;
        },
        py::arg("generator"), py::arg("policy") = "balance", py::arg("b0") = 1, py::arg("m") = 10,
        py::arg("T") = 100, py::arg("seed") = 0, py::arg("t0") = py::none(),
        py::arg("freeze") = false);

    // generators
    m.def(
        "gen_erdos_renyi",
        [](int32_t n, int64_t T, double a, double beta, int32_t b0, std::optional<int32_t> cap,
           uint64_t seed) { return to_json(gen_erdos_renyi(n, T, a, beta, b0, cap_from(cap), seed)); },
        py::arg("n"), py::arg("T"), py::arg("a"), py::arg("beta"), py::arg("b0") = 1,
        py::arg("cap") = py::none(), py::arg("seed") = 0);
    m.def("kp_opt_value", &kp_opt_value, py::arg("b0"));
    m.def("kp_tail_opt_value", &kp_tail_opt_value, py::arg("b0"), py::arg("m"), py::arg("T"));
    m.def(
        "phased_elimination_opt_value",
        [](int32_t b0, int64_t m, int64_t T, std::optional<int64_t> t0) {
            return phased_elimination_opt_value(b0, m, T, t0);
        },
        py::arg("b0"), py::arg("m"), py::arg("T"), py::arg("t0") = py::none());
    m.def(
        "phase_times",
        [](int32_t b0, int64_t m, int64_t t0, int32_t count) {
            const auto sched = phase_times(b0, m, t0, count);
            return py::make_tuple(sched.times, sched.approx);
        },
        py::arg("b0"), py::arg("m"), py::arg("t0"), py::arg("count"));

    // offline optimum
    m.def("opt_maxflow", [](const std::string& instance_json) {
        const auto result = opt_maxflow(instance_from_json(instance_json));
        return py::make_tuple(result.value, result.witness);
    });
    m.def("brute_force_opt", [](const std::string& instance_json) {
        return brute_force_opt(instance_from_json(instance_json));
    });
    m.def("opt_upper_bound_sto", &opt_upper_bound_sto, py::arg("n"), py::arg("b0"),
          py::arg("beta"), py::arg("T"));

    // analysis
    m.def("lambert_w", &analysis::lambert_w, py::arg("x"));
    m.def("match_intensity", &analysis::match_intensity, py::arg("z0"), py::arg("a"));
    m.def(
        "ode_rhs",
        [](const std::vector<double>& z, double a, double beta) {
            return analysis::ode_rhs(z, a, beta);
        },
        py::arg("z"), py::arg("a"), py::arg("beta"));
    m.def(
        "integrate_ode",
        [](double a, double beta, int K, int32_t b0, double tau_end, double dt) {
            const auto sol =
                analysis::integrate_ode(analysis::initial_levels(K, b0), a, beta, K, tau_end, dt);
            py::dict out;
            out["tau"] = sol.tau;
            out["z"] = sol.z;
            out["h"] = sol.h;
            return out;
        },
        py::arg("a"), py::arg("beta"), py::arg("K"), py::arg("b0") = 1, py::arg("tau_end") = 5.0,
        py::arg("dt") = 1e-3);
    m.def(
        "stationary_point",
        [](double a, double beta, int K) {
            const auto sp = analysis::stationary_point(a, beta, K);
            py::dict out;
            out["z0"] = sp.z0;
            out["g"] = sp.g;
            out["profile"] = sp.profile;
            out["residual"] = sp.residual;
            out["geometric_ratio_ok"] = sp.geometric_ratio_ok;
            return out;
        },
        py::arg("a"), py::arg("beta"), py::arg("K"));
    m.def("stationary_z0_cap1", &analysis::stationary_z0_cap1, py::arg("a"), py::arg("beta"));
    m.def("stationary_z0_uncapped", &analysis::stationary_z0_uncapped, py::arg("a"),
          py::arg("beta"));
    m.def("convergence_rate_cap1", &analysis::convergence_rate_cap1, py::arg("a"), py::arg("beta"));
    m.def("solve_alpha", &analysis::solve_alpha);
    m.def("cr_bound_frequent_refill", &analysis::cr_bound_frequent_refill);
    m.def("cr_bound_frequent_refill_finite", &analysis::cr_bound_frequent_refill_finite,
          py::arg("m"), py::arg("b0"), py::arg("t0"));
    m.def("cr_bound_bmatching", &analysis::cr_bound_bmatching, py::arg("b0"));
    m.def("cr_lower_bound_stochastic", &analysis::cr_lower_bound_stochastic, py::arg("T"),
          py::arg("K"), py::arg("n"), py::arg("b0"), py::arg("beta"), py::arg("a"));
    m.def("budget_pool_closed_form", &analysis::budget_pool_closed_form, py::arg("Z0"),
          py::arg("k"), py::arg("m"), py::arg("j"), py::arg("t"));
    m.def("budget_pool_by_recurrence", &analysis::budget_pool_by_recurrence, py::arg("Z0"),
          py::arg("k"), py::arg("m"), py::arg("j"), py::arg("t"));
    m.def("greedy_match_probability", &analysis::greedy_match_probability, py::arg("Y0"),
          py::arg("n"), py::arg("a"));
    m.def("selection_factor", &analysis::selection_factor, py::arg("C"), py::arg("p"));
    m.def("wormald_deviation_bound", &analysis::wormald_deviation_bound, py::arg("n"),
          py::arg("T"), py::arg("a"), py::arg("eps") = 0.1);

    // harness
    m.def("run_experiment", [](const std::string& spec_json) {
        return to_json(run_experiment(spec_from_json(spec_json)));
    });
    m.def(
        "dominance_check",
        [](int32_t b0, int64_t m, int64_t T, const std::vector<std::string>& policies,
           uint64_t seed, int32_t runs) {
            return to_json(dominance_check(b0, m, T, policies, seed, runs));
        },
        py::arg("b0"), py::arg("m"), py::arg("T"), py::arg("policies"), py::arg("seed") = 0,
        py::arg("runs") = 20);
}
