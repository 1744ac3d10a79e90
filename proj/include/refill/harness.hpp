#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "refill/analysis.hpp"
#include "refill/core.hpp"

namespace refill {

// ---------------------------------------------------------------------------
// Experiment specification
// ---------------------------------------------------------------------------

enum class OptMode { maxflow, closed_form, bound };

struct ExperimentSpec {
    std::string generator = "erdos-renyi"; // erdos-renyi | kp | kp-tail | phased-elimination
    int32_t n = 0;
    int64_t T = 0;
    double a = 0.0;
    double beta = 0.0;
    int32_t b0 = 1;
    Cap cap;          // erdos-renyi only
    int64_t m = 0;    // adversarial generators
    std::optional<int64_t> t0; // phased-elimination override

    std::string policy = "greedy";
    int32_t replicates = 1;
    uint64_t seed = 0;
    OptMode opt_mode = OptMode::maxflow;

    bool trajectory = false;     // compare Y_k/n and size/n against the ODE
    int64_t sample_stride = 0;   // 0 -> max(1, T/2000) when trajectory is on
    double ode_dt = 1e-3;
    int32_t jobs = 1;

    void validate() const;
};

std::string opt_mode_name(OptMode mode);
OptMode opt_mode_from_name(const std::string& name);

std::string to_json(const ExperimentSpec& spec);
// Rejects unknown keys.
ExperimentSpec spec_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct TrajectoryDeviation {
    double size_sup = 0;             // sup_t |size(t)/n - h(t/n)|
    std::vector<double> per_k_sup;   // sup_t |Y_k(t)/n - z_k(t/n)|
    double wormald_bound = 0;        // envelope on n * size_sup
    bool within_bound = true;
};

struct TrajectoryRow {
    int64_t t = 0;
    double tau = 0;
    double size_over_n = 0;
    double h_tau = 0;
    std::vector<double> y_over_n;
    std::vector<double> z;
};

struct ExperimentReport {
    ExperimentSpec spec;
    std::vector<uint64_t> replicate_seeds;
    std::vector<int64_t> alg_sizes;
    std::vector<double> opt_values;
    std::vector<double> cr_values;

    double alg_mean = 0, alg_sd = 0;
    double opt_mean = 0;
    double cr_of_means = 0; // mean(ALG)/mean(OPT), the ratio-of-means estimator
    double cr_mean = 0, cr_sd = 0, cr_ci95_half = 0;

    std::vector<TrajectoryDeviation> trajectory_deviations; // per replicate
    std::vector<TrajectoryRow> trajectory_rows;             // replicate 0
};

std::string to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

// Recomputes the aggregate fields from the per-replicate vectors.
void finalize_stats(ExperimentReport& report);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Seeded replicate runs: replicate i draws its streams from (seed, i);
// aggregation is a fold in replicate order, so the report is identical for
// any jobs count.
ExperimentReport run_experiment(const ExperimentSpec& spec);

// Sup-deviations of a sampled trace against an ODE solution.
TrajectoryDeviation compare_trajectory(const MatchTrace& trace, int32_t n,
                                       const analysis::OdeSolution& ode, double bound);

struct DominanceEntry {
    std::string policy;
    double alg_size = 0; // mean over seeds for randomized policies
    int32_t runs = 1;
    bool within = true;  // alg_size <= balance_size + m^2
};

struct DominanceReport {
    int64_t balance_size = 0;
    int64_t opt_value = 0;
    int64_t slack = 0; // m^2
    std::vector<DominanceEntry> entries;
    bool all_within = true;
};

// Runs each policy against its own phased-elimination adversary and checks
// ALG <= BALANCE + m^2. Randomized policies are averaged over `average_runs`
// seeds.
DominanceReport dominance_check(int32_t b0, int64_t m, int64_t T,
                                const std::vector<std::string>& policies, uint64_t seed,
                                int32_t average_runs = 20);

std::string to_json(const DominanceReport& report);

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

// format: "csv" writes <path>.csv (+ <path>_trajectory.csv when present),
// "json" writes <path>.json, "svg" writes <path>_h.svg and <path>_zk.svg.
// Byte-stable given an identical report.
std::vector<std::string> emit(const ExperimentReport& report, const std::string& format,
                              const std::string& path);

std::string ratios_csv(const ExperimentReport& report);
std::string trajectory_csv(const ExperimentReport& report);

} // namespace refill
