#include "refill/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "refill/generators.hpp"
#include "refill/offline_opt.hpp"
#include "refill/policies.hpp"

namespace refill {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Spec plumbing
// ---------------------------------------------------------------------------

void ExperimentSpec::validate() const {
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    if (sample_stride < 0) throw std::invalid_argument("sample stride must be >= 0");
    if (generator != "erdos-renyi" && generator != "kp" && generator != "kp-tail" &&
        generator != "phased-elimination")
        throw std::invalid_argument("unknown generator: " + generator);
    if (trajectory) {
        if (generator != "erdos-renyi")
            throw std::invalid_argument("trajectory comparison needs the erdos-renyi generator");
        if (!cap) throw std::invalid_argument("trajectory comparison needs a finite cap");
    }
}

std::string opt_mode_name(OptMode mode) {
    switch (mode) {
        case OptMode::maxflow: return "maxflow";
        case OptMode::closed_form: return "closed-form";
        case OptMode::bound: return "bound";
    }
    return "maxflow";
}

OptMode opt_mode_from_name(const std::string& name) {
    if (name == "maxflow") return OptMode::maxflow;
    if (name == "closed-form") return OptMode::closed_form;
    if (name == "bound") return OptMode::bound;
    throw std::invalid_argument("unknown opt mode: " + name);
}

std::string to_json(const ExperimentSpec& spec) {
    json j;
    j["generator"] = spec.generator;
    j["n"] = spec.n;
    j["T"] = spec.T;
    j["a"] = spec.a;
    j["beta"] = spec.beta;
    j["b0"] = spec.b0;
    if (spec.cap)
        j["cap"] = *spec.cap;
    else
        j["cap"] = "unbounded";
    j["m"] = spec.m;
    if (spec.t0) j["t0"] = *spec.t0;
    j["policy"] = spec.policy;
    j["replicates"] = spec.replicates;
    j["seed"] = spec.seed;
    j["opt_mode"] = opt_mode_name(spec.opt_mode);
    j["trajectory"] = spec.trajectory;
    j["sample_stride"] = spec.sample_stride;
    j["ode_dt"] = spec.ode_dt;
    j["jobs"] = spec.jobs;
    return j.dump();
}

ExperimentSpec spec_from_json(const std::string& text) {
    const json j = json::parse(text);
    static const std::vector<std::string> known = {
        "generator", "n",    "T",          "a",          "beta",          "b0",
        "cap",       "m",    "t0",         "policy",     "replicates",    "seed",
        "opt_mode",  "jobs", "trajectory", "sample_stride", "ode_dt"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::invalid_argument("unknown config key: " + key);
    }
    ExperimentSpec spec;
    if (j.contains("generator")) spec.generator = j["generator"].get<std::string>();
    if (j.contains("n")) spec.n = j["n"].get<int32_t>();
    if (j.contains("T")) spec.T = j["T"].get<int64_t>();
    if (j.contains("a")) spec.a = j["a"].get<double>();
    if (j.contains("beta")) spec.beta = j["beta"].get<double>();
    if (j.contains("b0")) spec.b0 = j["b0"].get<int32_t>();
    if (j.contains("cap") && !j["cap"].is_string()) spec.cap = j["cap"].get<int32_t>();
    if (j.contains("m")) spec.m = j["m"].get<int64_t>();
    if (j.contains("t0")) spec.t0 = j["t0"].get<int64_t>();
    if (j.contains("policy")) spec.policy = j["policy"].get<std::string>();
    if (j.contains("replicates")) spec.replicates = j["replicates"].get<int32_t>();
    if (j.contains("seed")) spec.seed = j["seed"].get<uint64_t>();
    if (j.contains("opt_mode")) spec.opt_mode = opt_mode_from_name(j["opt_mode"].get<std::string>());
    if (j.contains("trajectory")) spec.trajectory = j["trajectory"].get<bool>();
    if (j.contains("sample_stride")) spec.sample_stride = j["sample_stride"].get<int64_t>();
    if (j.contains("ode_dt")) spec.ode_dt = j["ode_dt"].get<double>();
    if (j.contains("jobs")) spec.jobs = j["jobs"].get<int32_t>();
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Replicates
// ---------------------------------------------------------------------------

namespace {

struct ReplicateOutcome {
    int64_t alg = 0;
    double opt = 0;
    TrajectoryDeviation deviation;
    std::vector<TrajectoryRow> rows;
    bool has_deviation = false;
};

int64_t supply_bound(const ExperimentSpec& spec) {
    if (spec.generator == "kp") return static_cast<int64_t>(KpParams::make(spec.b0).v_count);
    // Periodic refills: initial budgets plus every refill.
    int64_t n = 0;
    if (spec.generator == "kp-tail") {
        const auto params = KpParams::make(spec.b0);
        n = (spec.m / params.v_count) * params.k;
    } else {
        const int64_t t0 = spec.t0 ? *spec.t0
                                   : static_cast<int64_t>(std::floor(spec.T / std::exp(1.0)));
        n = phased_elimination_n(spec.b0, spec.m, t0);
    }
    return n * spec.b0 + n * (spec.T / spec.m);
}

double closed_form_opt(const ExperimentSpec& spec) {
    if (spec.generator == "kp") return static_cast<double>(kp_opt_value(spec.b0));
    if (spec.generator == "kp-tail")
        return static_cast<double>(kp_tail_opt_value(spec.b0, spec.m, spec.T));
    if (spec.generator == "phased-elimination")
        return static_cast<double>(phased_elimination_opt_value(spec.b0, spec.m, spec.T, spec.t0));
    throw std::invalid_argument("no closed-form optimum for generator " + spec.generator);
}

ReplicateOutcome run_replicate(const ExperimentSpec& spec, uint64_t rep_seed, bool want_rows,
                               const analysis::OdeSolution* ode) {
    ReplicateOutcome out;
    auto policy = make_policy(spec.policy);

    RunOptions options;
    if (spec.trajectory)
        options.sample_stride =
            spec.sample_stride > 0 ? spec.sample_stride : std::max<int64_t>(1, spec.T / 2000);

    MatchTrace trace;
    std::optional<OnlineInstance> frozen;
    if (spec.generator == "erdos-renyi") {
        const OnlineInstance inst =
            gen_erdos_renyi(spec.n, spec.T, spec.a, spec.beta, spec.b0, spec.cap, rep_seed);
        trace = run_online(inst, *policy, rep_seed, options);
        if (spec.opt_mode == OptMode::maxflow) frozen = inst;
    } else {
        std::unique_ptr<AdaptiveInstance> inst;
        if (spec.generator == "kp")
            inst = kp_adversary(spec.b0);
        else if (spec.generator == "kp-tail")
            inst = gen_kp_tail(spec.b0, spec.m, spec.T);
        else
            inst = gen_phased_elimination(spec.b0, spec.m, spec.T, rep_seed, spec.t0);
        options.record_instance = spec.opt_mode == OptMode::maxflow;
        auto result = run_online(*inst, *policy, rep_seed, options);
        trace = std::move(result.trace);
        frozen = std::move(result.frozen);
    }

    out.alg = trace.size();
    switch (spec.opt_mode) {
        case OptMode::maxflow:
            out.opt = static_cast<double>(opt_maxflow(*frozen).value);
            break;
        case OptMode::closed_form:
            out.opt = closed_form_opt(spec);
            break;
        case OptMode::bound:
            out.opt = spec.generator == "erdos-renyi"
                          ? opt_upper_bound_sto(spec.n, spec.b0, spec.beta, spec.T)
                          : static_cast<double>(supply_bound(spec));
            break;
    }

    if (spec.trajectory && ode != nullptr) {
        const double bound = analysis::wormald_deviation_bound(
            static_cast<double>(spec.n), static_cast<double>(spec.T), spec.a);
        out.deviation = compare_trajectory(trace, spec.n, *ode, bound);
        out.has_deviation = true;
        if (want_rows) {
            for (const auto& sample : trace.histogram_samples) {
                TrajectoryRow row;
                row.t = sample.t;
                row.tau = static_cast<double>(sample.t) / spec.n;
                row.size_over_n =
                    sample.t == 0
                        ? 0.0
                        : static_cast<double>(trace.size_over_time[static_cast<size_t>(sample.t - 1)]) /
                              spec.n;
                row.h_tau = ode->h_at(row.tau);
                row.z = ode->z_at(row.tau);
                row.y_over_n.assign(row.z.size(), 0.0);
                for (size_t k = 0; k < sample.counts.size() && k < row.y_over_n.size(); ++k)
                    row.y_over_n[k] = static_cast<double>(sample.counts[k]) / spec.n;
                out.rows.push_back(std::move(row));
            }
        }
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

} // namespace

TrajectoryDeviation compare_trajectory(const MatchTrace& trace, int32_t n,
                                       const analysis::OdeSolution& ode, double bound) {
    if (trace.histogram_samples.empty())
        throw std::invalid_argument("trace has no sampled histograms to compare");
    TrajectoryDeviation dev;
    dev.wormald_bound = bound;
    dev.per_k_sup.assign(static_cast<size_t>(ode.K) + 1, 0.0);
    for (const auto& sample : trace.histogram_samples) {
        const double tau = static_cast<double>(sample.t) / n;
        const double size =
            sample.t == 0
                ? 0.0
                : static_cast<double>(trace.size_over_time[static_cast<size_t>(sample.t - 1)]);
        dev.size_sup = std::max(dev.size_sup, std::fabs(size / n - ode.h_at(tau)));
        const std::vector<double> z = ode.z_at(tau);
        for (size_t k = 0; k < z.size(); ++k) {
            const double y =
                k < sample.counts.size() ? static_cast<double>(sample.counts[k]) : 0.0;
            dev.per_k_sup[k] = std::max(dev.per_k_sup[k], std::fabs(y / n - z[k]));
        }
    }
    dev.within_bound = dev.size_sup * n <= bound;
    return dev;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();

    ExperimentReport report;
    report.spec = spec;

    std::optional<analysis::OdeSolution> ode;
    if (spec.trajectory) {
        const auto init = analysis::initial_levels(*spec.cap, spec.b0);
        ode = analysis::integrate_ode(init, spec.a, spec.beta, *spec.cap,
                                      static_cast<double>(spec.T) / spec.n, spec.ode_dt);
    }

    const int32_t R = spec.replicates;
    report.replicate_seeds.resize(static_cast<size_t>(R));
    for (int32_t i = 0; i < R; ++i)
        report.replicate_seeds[static_cast<size_t>(i)] =
            RngStream::derive(spec.seed, Stream::replicate, static_cast<uint64_t>(i)).key();

    std::vector<ReplicateOutcome> outcomes(static_cast<size_t>(R));
    const int32_t jobs = std::max(1, std::min(spec.jobs, R));
    std::mutex error_mutex;
    std::string first_error;

    auto worker = [&](int32_t tid) {
        for (int32_t i = tid; i < R; i += jobs) {
            try {
                outcomes[static_cast<size_t>(i)] =
                    run_replicate(spec, report.replicate_seeds[static_cast<size_t>(i)], i == 0,
                                  ode ? &*ode : nullptr);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error.empty())
                    first_error = "replicate " + std::to_string(i) + " (seed " +
                                  std::to_string(report.replicate_seeds[static_cast<size_t>(i)]) +
                                  ") failed: " + e.what();
            }
        }
    };
    if (jobs == 1) {
        worker(0);
    } else {
        std::vector<std::thread> threads;
        for (int32_t tid = 0; tid < jobs; ++tid) threads.emplace_back(worker, tid);
        for (auto& th : threads) th.join();
    }
    if (!first_error.empty()) throw std::runtime_error(first_error);

    for (int32_t i = 0; i < R; ++i) {
        const auto& o = outcomes[static_cast<size_t>(i)];
        report.alg_sizes.push_back(o.alg);
        report.opt_values.push_back(o.opt);
        report.cr_values.push_back(o.opt > 0 ? static_cast<double>(o.alg) / o.opt : 1.0);
        if (o.has_deviation) report.trajectory_deviations.push_back(o.deviation);
        if (i == 0) report.trajectory_rows = std::move(outcomes[0].rows);
    }
    finalize_stats(report);
    return report;
}

void finalize_stats(ExperimentReport& report) {
    std::vector<double> alg_d(report.alg_sizes.begin(), report.alg_sizes.end());
    report.alg_mean = mean_of(alg_d);
    report.alg_sd = sd_of(alg_d, report.alg_mean);
    report.opt_mean = mean_of(report.opt_values);
    report.cr_of_means = report.opt_mean > 0 ? report.alg_mean / report.opt_mean : 1.0;
    report.cr_mean = mean_of(report.cr_values);
    report.cr_sd = sd_of(report.cr_values, report.cr_mean);
    report.cr_ci95_half =
        report.cr_values.size() > 1
            ? 1.96 * report.cr_sd / std::sqrt(static_cast<double>(report.cr_values.size()))
            : 0.0;
}

// ---------------------------------------------------------------------------
// Dominance
// ---------------------------------------------------------------------------

DominanceReport dominance_check(int32_t b0, int64_t m, int64_t T,
                                const std::vector<std::string>& policies, uint64_t seed,
                                int32_t average_runs) {
    DominanceReport report;
    report.slack = m * m;
    report.opt_value = phased_elimination_opt_value(b0, m, T);

    const auto run_one = [&](const std::string& name, uint64_t run_seed) {
        auto adversary = gen_phased_elimination(b0, m, T, run_seed);
        auto policy = make_policy(name);
        return run_online(*adversary, *policy, run_seed).trace.size();
    };

    report.balance_size = run_one("balance", RngStream::derive(seed, Stream::replicate, 0).key());

    for (const auto& name : policies) {
        DominanceEntry entry;
        entry.policy = name;
        const bool randomized = name == "greedy" || name == "uniform" || name == "balance";
        entry.runs = randomized ? average_runs : 1;
        double total = 0.0;
        for (int32_t i = 0; i < entry.runs; ++i)
            total += static_cast<double>(
                run_one(name, RngStream::derive(seed, Stream::replicate, static_cast<uint64_t>(i)).key()));
        entry.alg_size = total / entry.runs;
        entry.within =
            entry.alg_size <= static_cast<double>(report.balance_size) + static_cast<double>(report.slack);
        report.all_within = report.all_within && entry.within;
        report.entries.push_back(entry);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Reports and emission
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

json deviation_to_json(const TrajectoryDeviation& dev) {
    return json{{"size_sup", dev.size_sup},
                {"per_k_sup", dev.per_k_sup},
                {"wormald_bound", dev.wormald_bound},
                {"within_bound", dev.within_bound}};
}

} // namespace

std::string to_json(const ExperimentReport& report) {
    json j;
    j["spec"] = json::parse(to_json(report.spec));
    j["replicate_seeds"] = report.replicate_seeds;
    j["alg_sizes"] = report.alg_sizes;
    j["opt_values"] = report.opt_values;
    j["cr_values"] = report.cr_values;
    j["alg_mean"] = report.alg_mean;
    j["alg_sd"] = report.alg_sd;
    j["opt_mean"] = report.opt_mean;
    j["cr_of_means"] = report.cr_of_means;
    j["cr_mean"] = report.cr_mean;
    j["cr_sd"] = report.cr_sd;
    j["cr_ci95_half"] = report.cr_ci95_half;
    json devs = json::array();
    for (const auto& d : report.trajectory_deviations) devs.push_back(deviation_to_json(d));
    j["trajectory_deviations"] = devs;
    json rows = json::array();
    for (const auto& r : report.trajectory_rows)
        rows.push_back(json{{"t", r.t},
                            {"tau", r.tau},
                            {"size_over_n", r.size_over_n},
                            {"h_tau", r.h_tau},
                            {"y_over_n", r.y_over_n},
                            {"z", r.z}});
    j["trajectory_rows"] = rows;
    return j.dump(2);
}

ExperimentReport report_from_json(const std::string& text) {
    const json j = json::parse(text);
    ExperimentReport report;
    report.spec = spec_from_json(j.at("spec").dump());
    report.replicate_seeds = j.at("replicate_seeds").get<std::vector<uint64_t>>();
    report.alg_sizes = j.at("alg_sizes").get<std::vector<int64_t>>();
    report.opt_values = j.at("opt_values").get<std::vector<double>>();
    report.cr_values = j.at("cr_values").get<std::vector<double>>();
    report.alg_mean = j.at("alg_mean").get<double>();
    report.alg_sd = j.at("alg_sd").get<double>();
    report.opt_mean = j.at("opt_mean").get<double>();
    report.cr_of_means = j.at("cr_of_means").get<double>();
    report.cr_mean = j.at("cr_mean").get<double>();
    report.cr_sd = j.at("cr_sd").get<double>();
    report.cr_ci95_half = j.at("cr_ci95_half").get<double>();
    for (const auto& d : j.at("trajectory_deviations")) {
        TrajectoryDeviation dev;
        dev.size_sup = d.at("size_sup").get<double>();
        dev.per_k_sup = d.at("per_k_sup").get<std::vector<double>>();
        dev.wormald_bound = d.at("wormald_bound").get<double>();
        dev.within_bound = d.at("within_bound").get<bool>();
        report.trajectory_deviations.push_back(std::move(dev));
    }
    for (const auto& r : j.at("trajectory_rows")) {
        TrajectoryRow row;
        row.t = r.at("t").get<int64_t>();
        row.tau = r.at("tau").get<double>();
        row.size_over_n = r.at("size_over_n").get<double>();
        row.h_tau = r.at("h_tau").get<double>();
        row.y_over_n = r.at("y_over_n").get<std::vector<double>>();
        row.z = r.at("z").get<std::vector<double>>();
        report.trajectory_rows.push_back(std::move(row));
    }
    return report;
}

std::string to_json(const DominanceReport& report) {
    json j;
    j["balance_size"] = report.balance_size;
    j["opt_value"] = report.opt_value;
    j["slack"] = report.slack;
    j["all_within"] = report.all_within;
    json entries = json::array();
    for (const auto& e : report.entries)
        entries.push_back(json{{"policy", e.policy},
                               {"alg_size", e.alg_size},
                               {"runs", e.runs},
                               {"within", e.within}});
    j["entries"] = entries;
    return j.dump(2);
}

std::string ratios_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << "replicate,seed,alg_size,opt_value,cr\n";
    for (size_t i = 0; i < report.alg_sizes.size(); ++i) {
        out << i << ',' << report.replicate_seeds[i] << ',' << report.alg_sizes[i] << ','
            << fmt_double(report.opt_values[i]) << ',' << fmt_double(report.cr_values[i]) << "\n";
    }
    return out.str();
}

std::string trajectory_csv(const ExperimentReport& report) {
    std::ostringstream out;
    const size_t levels = report.trajectory_rows.empty() ? 0 : report.trajectory_rows[0].z.size();
    out << "t,tau,size_over_n,h_tau";
    for (size_t k = 0; k < levels; ++k) out << ",y" << k << "_over_n";
    for (size_t k = 0; k < levels; ++k) out << ",z" << k;
    out << "\n";
    for (const auto& r : report.trajectory_rows) {
        out << r.t << ',' << fmt_double(r.tau) << ',' << fmt_double(r.size_over_n) << ','
            << fmt_double(r.h_tau);
        for (size_t k = 0; k < levels; ++k) out << ',' << fmt_double(r.y_over_n[k]);
        for (size_t k = 0; k < levels; ++k) out << ',' << fmt_double(r.z[k]);
        out << "\n";
    }
    return out.str();
}

namespace {

void write_file(const std::string& path, const std::string& content,
                std::vector<std::string>& written) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    written.push_back(path);
}

// Minimal polyline chart; fixed-precision coordinates keep the bytes stable.
std::string svg_chart(const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>&
                          series,
                      const std::string& title) {
    constexpr double W = 640, H = 420, ML = 60, MR = 20, MT = 30, MB = 40;
    double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
    for (const auto& [name, pts] : series) {
        for (const auto& [x, y] : pts) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    const auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
    const auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    char buf[64];
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
           "viewBox=\"0 0 640 420\">\n";
    out << "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    out << "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"14\">"
        << title << "</text>\n";
    out << "<line x1=\"60\" y1=\"380\" x2=\"620\" y2=\"380\" stroke=\"black\"/>\n";
    out << "<line x1=\"60\" y1=\"30\" x2=\"60\" y2=\"380\" stroke=\"black\"/>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", ymax);
    out << "<text x=\"55\" y=\"35\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.4g", xmax);
    out << "<text x=\"620\" y=\"395\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << buf << "</text>\n";
    size_t idx = 0;
    for (const auto& [name, pts] : series) {
        const char* color = colors[idx % 8];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : pts) {
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(x), py(y));
            out << buf;
        }
        out << "\"/>\n";
        out << "<text x=\"" << 70 + 130 * (idx % 4) << "\" y=\"" << 405 + 12 * (idx / 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">" << name
            << "</text>\n";
        ++idx;
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace

std::vector<std::string> emit(const ExperimentReport& report, const std::string& format,
                              const std::string& path) {
    std::vector<std::string> written;
    if (format == "json") {
        write_file(path + ".json", to_json(report), written);
    } else if (format == "csv") {
        write_file(path + ".csv", ratios_csv(report), written);
        if (!report.trajectory_rows.empty())
            write_file(path + "_trajectory.csv", trajectory_csv(report), written);
    } else if (format == "svg") {
        if (report.trajectory_rows.empty())
            throw std::invalid_argument("svg emission needs trajectory rows");
        std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> h_series(2);
        h_series[0].first = "size/n";
        h_series[1].first = "h";
        for (const auto& r : report.trajectory_rows) {
            h_series[0].second.emplace_back(r.tau, r.size_over_n);
            h_series[1].second.emplace_back(r.tau, r.h_tau);
        }
        write_file(path + "_h.svg", svg_chart(h_series, "matched mass vs fluid limit"), written);

        const size_t levels = report.trajectory_rows[0].z.size();
        std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> z_series;
        for (size_t k = 0; k < levels; ++k) {
            z_series.push_back({"y" + std::to_string(k) + "/n", {}});
            z_series.push_back({"z" + std::to_string(k), {}});
            for (const auto& r : report.trajectory_rows) {
                z_series[2 * k].second.emplace_back(r.tau, r.y_over_n[k]);
                z_series[2 * k + 1].second.emplace_back(r.tau, r.z[k]);
            }
        }
        write_file(path + "_zk.svg", svg_chart(z_series, "budget level occupancy"), written);
    } else {
        throw std::invalid_argument("unknown emission format: " + format);
    }
    return written;
}

} // namespace refill
