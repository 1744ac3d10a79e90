#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "refill/analysis.hpp"
#include "refill/core.hpp"
#include "refill/generators.hpp"
#include "refill/harness.hpp"
#include "refill/offline_opt.hpp"
#include "refill/policies.hpp"

using nlohmann::json;
using namespace refill;

namespace {

int default_jobs() {
    if (const char* env = std::getenv("REFILL_MATCH_JOBS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

struct GeneratorArgs {
    std::string name = "erdos-renyi";
    int32_t n = 100;
    int64_t T = 100;
    double a = 2.0;
    double beta = 0.5;
    int32_t b0 = 1;
    int32_t cap = 0; // 0 = unbounded
    int64_t m = 10;
    int64_t t0 = 0; // 0 = default floor(T/e)
};

void add_generator_flags(CLI::App* cmd, GeneratorArgs& args) {
    cmd->add_option("--generator", args.name,
                    "erdos-renyi | kp | kp-tail | phased-elimination");
    cmd->add_option("--n", args.n, "offline nodes (erdos-renyi)");
    cmd->add_option("--T", args.T, "arrivals / horizon");
    cmd->add_option("--a", args.a, "edge rate: edge probability a/n");
    cmd->add_option("--beta", args.beta, "refill rate: refill probability beta/n");
    cmd->add_option("--b0", args.b0, "initial budget");
    cmd->add_option("--cap", args.cap, "budget cap K; 0 means unbounded");
    cmd->add_option("--m", args.m, "refill period of the adversarial constructions");
    cmd->add_option("--t0", args.t0, "warm-up length override (phased-elimination)");
}

Cap cap_of(const GeneratorArgs& args) { return args.cap > 0 ? Cap(args.cap) : Cap{}; }

std::unique_ptr<AdaptiveInstance> make_adversary(const GeneratorArgs& args, uint64_t seed) {
    if (args.name == "kp") return kp_adversary(args.b0);
    if (args.name == "kp-tail") return gen_kp_tail(args.b0, args.m, args.T);
    if (args.name == "phased-elimination")
        return gen_phased_elimination(args.b0, args.m, args.T, seed,
                                      args.t0 > 0 ? std::optional<int64_t>(args.t0) : std::nullopt);
    throw std::runtime_error("unknown adversarial generator: " + args.name);
}

int run_gen(const GeneratorArgs& args, const std::string& vs_policy, uint64_t seed,
            const std::string& out) {
    OnlineInstance inst;
    if (args.name == "erdos-renyi") {
        inst = gen_erdos_renyi(args.n, args.T, args.a, args.beta, args.b0, cap_of(args), seed);
    } else {
        auto adversary = make_adversary(args, seed);
        auto policy = make_policy(vs_policy);
        inst = *run_online(*adversary, *policy, seed, {.record_instance = true}).frozen;
    }
    const std::string text = to_json(inst);
    if (out.empty())
        std::cout << text << "\n";
    else
        write_file(out, text);
    return 0;
}

int run_sim(const GeneratorArgs& args, const std::string& instance_path,
            const std::string& policy_name, const std::string& script_path, uint64_t seed,
            int64_t stride, const std::string& trace_out) {
    std::unique_ptr<Policy> policy;
    if (policy_name == "fixed-script") {
        if (script_path.empty())
            throw std::runtime_error("fixed-script needs --script <trace.json>");
        policy = std::make_unique<FixedScriptPolicy>(
            trace_from_json(read_file(script_path)).choices);
    } else {
        policy = make_policy(policy_name);
    }
    RunOptions options;
    options.sample_stride = stride;

    MatchTrace trace;
    int32_t n = 0;
    if (!instance_path.empty()) {
        const OnlineInstance inst = instance_from_json(read_file(instance_path));
        n = inst.n;
        trace = run_online(inst, *policy, seed, options);
    } else if (args.name == "erdos-renyi") {
        const OnlineInstance inst =
            gen_erdos_renyi(args.n, args.T, args.a, args.beta, args.b0, cap_of(args), seed);
        n = inst.n;
        trace = run_online(inst, *policy, seed, options);
    } else {
        auto adversary = make_adversary(args, seed);
        n = adversary->n();
        trace = run_online(*adversary, *policy, seed, options).trace;
    }

    if (!trace_out.empty()) {
        if (trace_out.size() > 5 && trace_out.substr(trace_out.size() - 5) == ".json")
            write_file(trace_out, to_json(trace));
        else
            write_file(trace_out, trace_to_csv(trace));
    }
    json summary;
    summary["alg_size"] = trace.size();
    summary["T"] = trace.choices.size();
    summary["n"] = n;
    summary["policy"] = policy_name;
    summary["seed"] = seed;
    std::cout << summary.dump() << "\n";
    return 0;
}

int run_opt(const std::string& instance_path, const std::string& method,
            const std::string& witness_out) {
    const OnlineInstance inst = instance_from_json(read_file(instance_path));
    json out;
    if (method == "brute-force") {
        out["value"] = brute_force_opt(inst);
    } else if (method == "maxflow") {
        const auto result = opt_maxflow(inst);
        out["value"] = result.value;
        if (!witness_out.empty()) {
            FixedScriptPolicy script(result.witness);
            const MatchTrace replay = run_online(inst, script, 0);
            write_file(witness_out, trace_to_csv(replay, "offline"));
        }
    } else {
        throw std::runtime_error("unknown opt method: " + method);
    }
    out["method"] = method;
    std::cout << out.dump() << "\n";
    return 0;
}

int run_ode(double a, double beta, int K, int b0, double tau_end, double dt,
            const std::string& out) {
    const auto init = analysis::initial_levels(K, b0);
    const auto sol = analysis::integrate_ode(init, a, beta, K, tau_end, dt);
    std::ostringstream csv;
    csv << "tau";
    for (int k = 0; k <= K; ++k) csv << ",z" << k;
    csv << ",h\n";
    char buf[40];
    for (size_t i = 0; i < sol.tau.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g", sol.tau[i]);
        csv << buf;
        for (const double z : sol.z[i]) {
            std::snprintf(buf, sizeof(buf), "%.12g", z);
            csv << ',' << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.12g", sol.h[i]);
        csv << ',' << buf << "\n";
    }
    if (out.empty())
        std::cout << csv.str();
    else
        write_file(out, csv.str());
    json summary;
    summary["tau_end"] = sol.tau.back();
    summary["h"] = sol.h.back();
    summary["z"] = sol.z.back();
    std::cerr << summary.dump() << "\n";
    return 0;
}

int run_stationary(double a, double beta, int K) {
    const auto sp = analysis::stationary_point(a, beta, K);
    json out;
    out["z0"] = sp.z0;
    out["g"] = sp.g;
    out["profile"] = sp.profile;
    out["residual"] = sp.residual;
    out["geometric_ratio_ok"] = sp.geometric_ratio_ok;
    if (K == 1) out["z0_closed_form"] = analysis::stationary_z0_cap1(a, beta);
    if (beta < 1) out["z0_uncapped_limit"] = analysis::stationary_z0_uncapped(a, beta);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_constants(int b0, double a, double beta, int K, double T, double n, int64_t m,
                  int64_t t0, const std::string& format) {
    const double alpha = analysis::solve_alpha();
    json out;
    out["alpha"] = alpha;
    out["cr_bound_frequent_refill"] = analysis::cr_bound_frequent_refill();
    out["cr_bound_bmatching"] = analysis::cr_bound_bmatching(b0);
    out["b0"] = b0;
    if (m >= 2 && t0 >= 1)
        out["cr_bound_frequent_refill_finite"] =
            analysis::cr_bound_frequent_refill_finite(m, b0, t0);
    if (a > 0 && beta > 0 && K >= 1) {
        const auto sp = analysis::stationary_point(a, beta, K);
        out["z0_star"] = sp.z0;
        out["g_star"] = sp.g;
        out["z_star"] = sp.profile;
        if (T > 0 && n > 0)
            out["cr_lower_bound"] = analysis::cr_lower_bound_stochastic(T, K, n, b0, beta, a);
    }
    if (format == "json") {
        std::cout << out.dump(2) << "\n";
    } else {
        for (const auto& [key, value] : out.items())
            std::cout << key << std::string(key.size() < 26 ? 26 - key.size() : 1, ' ')
                      << value.dump() << "\n";
    }
    return 0;
}

int run_experiment_cmd(const std::string& config_path, const json& overrides,
                       const std::string& out_prefix, const std::string& formats) {
    json config = config_path.empty() ? json::object() : json::parse(read_file(config_path));
    for (const auto& [key, value] : overrides.items()) config[key] = value;
    const ExperimentSpec spec = spec_from_json(config.dump());
    std::cerr << "config: " << to_json(spec) << "\n"; // resolved full config
    const ExperimentReport report = run_experiment(spec);

    if (!out_prefix.empty()) {
        std::stringstream list(formats);
        std::string fmt;
        while (std::getline(list, fmt, ',')) {
            for (const std::string& f : emit(report, fmt, out_prefix))
                std::cerr << "wrote " << f << "\n";
        }
    }
    json summary;
    summary["alg_mean"] = report.alg_mean;
    summary["opt_mean"] = report.opt_mean;
    summary["cr_of_means"] = report.cr_of_means;
    summary["cr_mean"] = report.cr_mean;
    summary["cr_ci95_half"] = report.cr_ci95_half;
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_dominance(int b0, int64_t m, int64_t T, const std::string& policies, uint64_t seed,
                  int runs) {
    std::vector<std::string> names;
    std::stringstream list(policies);
    std::string name;
    while (std::getline(list, name, ',')) names.push_back(name);
    const DominanceReport report = dominance_check(b0, m, T, names, seed, runs);
    std::cout << to_json(report) << "\n";
    return report.all_within ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"online bipartite matching with budget refills: simulation and analysis"};
    app.require_subcommand(1);
    app.fallthrough(); // global --seed/--jobs may follow the subcommand

    uint64_t seed = 0;
    int jobs = default_jobs();
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_option("--jobs", jobs, "parallel replicates (env REFILL_MATCH_JOBS)")
        ->capture_default_str();

    auto* gen_cmd = app.add_subcommand("gen", "write an instance JSON");
    GeneratorArgs gen_args;
    add_generator_flags(gen_cmd, gen_args);
    std::string vs_policy = "balance";
    std::string gen_out;
    gen_cmd->add_option("--vs", vs_policy, "policy the adaptive adversary reacts to");
    gen_cmd->add_option("--out", gen_out, "output path (stdout if omitted)");

    auto* sim_cmd = app.add_subcommand("sim", "run a policy on an instance or named adversary");
    GeneratorArgs sim_args;
    add_generator_flags(sim_cmd, sim_args);
    std::string sim_instance, sim_policy = "greedy", sim_script, trace_out;
    int64_t sim_stride = 0;
    sim_cmd->add_option("--instance", sim_instance, "instance JSON path");
    sim_cmd->add_option("--policy", sim_policy,
                        "greedy | balance | balance-lowest | lazy | uniform | fixed-script");
    sim_cmd->add_option("--script", sim_script, "trace JSON replayed by fixed-script");
    sim_cmd->add_option("--stride", sim_stride, "histogram sampling stride");
    sim_cmd->add_option("--trace-out", trace_out, "trace output (.csv or .json)");

    auto* opt_cmd = app.add_subcommand("opt", "offline optimum of a materialized instance");
    std::string opt_instance, opt_method = "maxflow", witness_out;
    opt_cmd->add_option("--instance", opt_instance, "instance JSON path")->required();
    opt_cmd->add_option("--method", opt_method, "maxflow | brute-force");
    opt_cmd->add_option("--witness-out", witness_out, "witness trace CSV path");

    auto* ode_cmd = app.add_subcommand("ode", "integrate the budget-level ODE system");
    double ode_a = 2.0, ode_beta = 0.5, ode_tau = 5.0, ode_dt = 1e-3;
    int ode_K = 1, ode_b0 = 1;
    std::string ode_out;
    ode_cmd->add_option("--a", ode_a)->capture_default_str();
    ode_cmd->add_option("--beta", ode_beta)->capture_default_str();
    ode_cmd->add_option("--K", ode_K)->capture_default_str();
    ode_cmd->add_option("--b0", ode_b0)->capture_default_str();
    ode_cmd->add_option("--tau-end", ode_tau)->capture_default_str();
    ode_cmd->add_option("--dt", ode_dt)->capture_default_str();
    ode_cmd->add_option("--out", ode_out, "trajectory CSV path (stdout if omitted)");

    auto* st_cmd = app.add_subcommand("stationary", "stationary budget-level profile");
    double st_a = 2.0, st_beta = 0.5;
    int st_K = 1;
    st_cmd->add_option("--a", st_a)->capture_default_str();
    st_cmd->add_option("--beta", st_beta)->capture_default_str();
    st_cmd->add_option("--K", st_K)->capture_default_str();

    auto* const_cmd = app.add_subcommand("constants", "competitive-ratio constants and bounds");
    int c_b0 = 1, c_K = 0;
    double c_a = 0, c_beta = 0, c_T = 0, c_n = 0;
    int64_t c_m = 0, c_t0 = 0;
    std::string c_format = "text";
    const_cmd->add_option("--b0", c_b0)->capture_default_str();
    const_cmd->add_option("--m", c_m, "with --t0: finite-parameter frequent-refill bound");
    const_cmd->add_option("--t0", c_t0);
    const_cmd->add_option("--a", c_a);
    const_cmd->add_option("--beta", c_beta);
    const_cmd->add_option("--K", c_K);
    const_cmd->add_option("--T", c_T);
    const_cmd->add_option("--n", c_n);
    const_cmd->add_option("--format", c_format, "text | json");

    auto* exp_cmd = app.add_subcommand("experiment", "replicated pipeline from a JSON config");
    std::string config_path, out_prefix, formats = "json";
    int32_t override_reps = 0;
    exp_cmd->add_option("--config", config_path, "experiment config JSON");
    exp_cmd->add_option("--out", out_prefix, "output path prefix");
    exp_cmd->add_option("--emit", formats, "comma list of csv,json,svg")->capture_default_str();
    exp_cmd->add_option("--replicates", override_reps, "override replicate count");

    auto* dom_cmd = app.add_subcommand("dominance", "no-policy-beats-balance check");
    int d_b0 = 1, d_runs = 20;
    int64_t d_m = 20, d_T = 100000;
    std::string d_policies = "greedy,lazy,uniform";
    dom_cmd->add_option("--b0", d_b0)->capture_default_str();
    dom_cmd->add_option("--m", d_m)->capture_default_str();
    dom_cmd->add_option("--T", d_T)->capture_default_str();
    dom_cmd->add_option("--policies", d_policies)->capture_default_str();
    dom_cmd->add_option("--runs", d_runs, "seeds averaged for randomized policies")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen_cmd) return run_gen(gen_args, vs_policy, seed, gen_out);
        if (*sim_cmd)
            return run_sim(sim_args, sim_instance, sim_policy, sim_script, seed, sim_stride,
                           trace_out);
        if (*opt_cmd) return run_opt(opt_instance, opt_method, witness_out);
        if (*ode_cmd) return run_ode(ode_a, ode_beta, ode_K, ode_b0, ode_tau, ode_dt, ode_out);
        if (*st_cmd) return run_stationary(st_a, st_beta, st_K);
        if (*const_cmd)
            return run_constants(c_b0, c_a, c_beta, c_K, c_T, c_n, c_m, c_t0, c_format);
        if (*exp_cmd) {
            json overrides;
            overrides["seed"] = seed;
            overrides["jobs"] = jobs;
            if (override_reps > 0) overrides["replicates"] = override_reps;
            return run_experiment_cmd(config_path, overrides, out_prefix, formats);
        }
        if (*dom_cmd) return run_dominance(d_b0, d_m, d_T, d_policies, seed, d_runs);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
