#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace refill::analysis {

// ---------------------------------------------------------------------------
// Quadrature and root finding
// ---------------------------------------------------------------------------

// Adaptive Simpson with absolute tolerance.
double integrate_simpson(const std::function<double(double)>& f, double lo, double hi,
                         double tol = 1e-12);

// Bisection on a bracketing interval; stops when the interval is below xtol
// or |f| below ftol. Throws if [lo,hi] does not bracket a sign change.
double bisect(const std::function<double(double)>& f, double lo, double hi, double xtol = 1e-15,
              double ftol = 0.0);

// Principal branch of w e^w = x for x >= -1/e; Halley iteration, relative
// residual 1e-14.
double lambert_w(double x);
// W(e^y), safe for large y where e^y would overflow.
double lambert_w_exp(double y);

// ---------------------------------------------------------------------------
// Fluid limit of Greedy on the Erdos-Renyi model
// ---------------------------------------------------------------------------

// g(z0) = (1 - e^{-a(1-z0)}) / (1 - z0): matching intensity per available
// node mass. Series evaluation near the removable singularity at z0 = 1.
double match_intensity(double z0, double a);

// Right-hand side of the budget-level ODE system for z_0..z_K; components
// sum to zero exactly (shared flux terms telescope).
std::vector<double> ode_rhs(std::span<const double> z, double a, double beta);

struct OdeSolution {
    std::vector<double> tau;
    std::vector<std::vector<double>> z; // one vector of size K+1 per grid point
    std::vector<double> h;
    double a = 0, beta = 0, dt = 0;
    int K = 0;

    double h_at(double tau) const;               // linear interpolation
    std::vector<double> z_at(double tau) const;  // linear interpolation
};

// Fixed-step classical RK4 on (z, h) jointly, h' = 1 - e^{-a(1-z0)}.
// The grid starts at 0 and includes tau_end.
OdeSolution integrate_ode(std::span<const double> init, double a, double beta, int K,
                          double tau_end, double dt = 1e-3);

// Simplex initial condition with all mass on level b0.
std::vector<double> initial_levels(int K, int32_t b0);

// ---------------------------------------------------------------------------
// Stationary profile
// ---------------------------------------------------------------------------

struct StationaryPoint {
    double z0 = 0;
    double g = 0;                // match_intensity(z0)
    std::vector<double> profile; // z_k = z0 (beta/g)^k, k = 0..K
    double residual = 0;         // |sum_k profile - 1|
    bool geometric_ratio_ok = true; // |beta/g| <= 1
};

// Unique root of sum_{k=0}^K z0 (beta/g(z0))^k = 1 by bisection on (0,1).
StationaryPoint stationary_point(double a, double beta, int K);

// Closed form for K = 1: z0* = 1/beta - W((a/beta) e^{-a(1-1/beta)}) / a.
double stationary_z0_cap1(double a, double beta);

// K -> infinity limit: z0* = 1 + ln(1-beta)/a, for beta in (0,1).
double stationary_z0_uncapped(double a, double beta);

// Exponential convergence rate of z0 toward the K=1 stationary point:
// omega = beta (1 + W(e^{-a(1-1/beta)})).
double convergence_rate_cap1(double a, double beta);

// ---------------------------------------------------------------------------
// Competitive-ratio constants and bounds
// ---------------------------------------------------------------------------

// Root of int_0^alpha x e^x/(1-x) dx = 1/2; about 0.603.
double solve_alpha();

// 1 - (1-alpha) e^{-(1-alpha)}; the ceiling for any algorithm when refills
// are frequent. About 0.73325.
double cr_bound_frequent_refill();

// Finite-parameter version of the same bound with the instance-level alpha
// solving int_0^alpha x e^x/(1-x) dx = 1 - t0/(m b0 + 2 t0).
double cr_bound_frequent_refill_finite(int64_t m, int32_t b0, int64_t t0);

// 1 - 1/(1 + 1/b0)^b0; the ceiling when refills are scarce (the b-matching
// constant).
double cr_bound_bmatching(int32_t b0);

// Lower bound on the stochastic competitive ratio of Greedy,
// [T g*(1-z0*) + n b0 - n (beta/(g*-beta) - (K+1) beta^{K+1}/(g*^{K+1}-beta^{K+1}))]
// / (n b0 + beta T), with the bracket evaluated through its pole-free series
// so g* = beta needs no special casing.
double cr_lower_bound_stochastic(double T, int K, double n, double b0, double beta, double a);

// ---------------------------------------------------------------------------
// Discrete dynamics and drift oracles
// ---------------------------------------------------------------------------

// Closed form of Z_t = Z_{t-1} - 1{Z_{t-1} >= 1} + k 1{t mod m == j}:
// the total budget of a fully-connected pool of k servers refilled in bulk
// every m steps with phase offset j.
int64_t budget_pool_closed_form(int64_t Z0, int64_t k, int64_t m, int64_t j, int64_t t);
// Step-by-step evaluation of the same recurrence (oracle).
int64_t budget_pool_by_recurrence(int64_t Z0, int64_t k, int64_t m, int64_t j, int64_t t);

// P(arrival is matched | Y0 nodes empty) = 1 - (1 - a/n)^(n - Y0).
double greedy_match_probability(int64_t Y0, int64_t n, double a);

// Selection factor Sigma = (1 - (1-p)^C) / (p C): probability a given
// available node is matched, divided by the edge probability p.
double selection_factor(int64_t C, double p);

// Concentration envelope for |GREEDY(G,t) - n h(t/n)|:
// 3 e^{L' T/n} a n^{3/4} with L' = a e^{a eps}.
double wormald_deviation_bound(double n, double T, double a, double eps = 0.1);

} // namespace refill::analysis
