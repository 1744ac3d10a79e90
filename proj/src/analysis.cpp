#include "refill/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace refill::analysis {

// ---------------------------------------------------------------------------
// Quadrature and root finding
// ---------------------------------------------------------------------------

namespace {

double simpson_rule(double fa, double fm, double fb, double h) {
    return h / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_recurse(const std::function<double(double)>& f, double a, double b, double fa,
                       double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_rule(fa, flm, fm, m - a);
    const double right = simpson_rule(fm, frm, fb, b - m);
    const double err = left + right - whole;
    if (depth <= 0 || std::fabs(err) <= 15.0 * tol) return left + right + err / 15.0;
    return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate_simpson(const std::function<double(double)>& f, double lo, double hi, double tol) {
    if (lo == hi) return 0.0;
    const double fa = f(lo);
    const double fb = f(hi);
    const double fm = f(0.5 * (lo + hi));
    const double whole = simpson_rule(fa, fm, fb, hi - lo);
    return simpson_recurse(f, lo, hi, fa, fm, fb, whole, tol, 60);
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double xtol,
              double ftol) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo < 0) == (fhi < 0))
        throw std::invalid_argument("bisect: interval does not bracket a sign change (f(lo)=" +
                                    std::to_string(flo) + ", f(hi)=" + std::to_string(fhi) + ")");
    while (hi - lo > xtol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break; // interval at floating-point resolution
        const double fmid = f(mid);
        if (fmid == 0 || (ftol > 0 && std::fabs(fmid) <= ftol)) return mid;
        if ((fmid < 0) == (flo < 0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Lambert W
// ---------------------------------------------------------------------------

namespace {

double halley_w(double w, double x) {
    for (int i = 0; i < 50; ++i) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double step = f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0));
        w -= step;
        if (std::fabs(step) <= 1e-16 * (1.0 + std::fabs(w))) break;
    }
    return w;
}

} // namespace

double lambert_w(double x) {
    constexpr double inv_e = 0.36787944117144233;
    if (x < -inv_e - 1e-14) throw std::invalid_argument("lambert_w: x must be >= -1/e");
    if (x <= -inv_e) return -1.0;
    if (x == 0.0) return 0.0;

    double w;
    if (x < -0.25) {
        // Branch-point series in p = sqrt(2(e x + 1)).
        const double p = std::sqrt(2.0 * (std::exp(1.0) * x + 1.0));
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    } else if (x < 3.0) {
        w = std::log1p(x) * (1.0 - std::log1p(std::log1p(x)) / (2.0 + std::log1p(x)));
    } else {
        const double l1 = std::log(x);
        const double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }
    return halley_w(w, x);
}

double lambert_w_exp(double y) {
    if (y <= 700.0) return lambert_w(std::exp(y));
    // Solve w + log w = y by Newton for very large arguments.
    double w = y - std::log(y);
    for (int i = 0; i < 20; ++i) {
        const double step = (w + std::log(w) - y) * w / (w + 1.0);
        w -= step;
        if (std::fabs(step) <= 1e-15 * w) break;
    }
    return w;
}

// ---------------------------------------------------------------------------
// Fluid limit
// ---------------------------------------------------------------------------

double match_intensity(double z0, double a) {
    if (z0 >= 1.0 && z0 <= 1.0 + 1e-12) z0 = 1.0;
    if (z0 < 0.0 || z0 > 1.0) throw std::invalid_argument("match_intensity: z0 must be in [0,1]");
    const double w = 1.0 - z0;
    if (w < 1e-8) {
        // (1 - e^{-a w})/w, six series terms around w = 0.
        double term = a;
        double sum = 0.0;
        for (int i = 1; i <= 6; ++i) {
            sum += term;
            term *= -a * w / (i + 1);
        }
        return sum;
    }
    return -std::expm1(-a * w) / w;
}

std::vector<double> ode_rhs(std::span<const double> z, double a, double beta) {
    const int K = static_cast<int>(z.size()) - 1;
    if (K < 1) throw std::invalid_argument("ode_rhs: need K >= 1 budget levels");
    if (z[0] >= 1.0 - 1e-12)
        throw std::domain_error("ode_rhs: z0 at the 1 - z0 singularity");
    const double g = match_intensity(z[0], a);

    // Flux form: refills move mass k -> k+1 at rate beta z_k (k < K), matches
    // move mass k -> k-1 at rate g z_k (k >= 1). Each flux value appears once
    // with each sign, and the last row closes the telescoping sum, so the
    // components add to zero exactly.
    std::vector<double> out(static_cast<size_t>(K) + 1);
    double partial = 0.0;
    for (int k = 0; k < K; ++k) {
        const double refill_out = beta * z[static_cast<size_t>(k)];
        const double refill_in = k > 0 ? beta * z[static_cast<size_t>(k - 1)] : 0.0;
        const double match_in = g * z[static_cast<size_t>(k + 1)];
        const double match_out = k > 0 ? g * z[static_cast<size_t>(k)] : 0.0;
        out[static_cast<size_t>(k)] = refill_in - refill_out + match_in - match_out;
        partial += out[static_cast<size_t>(k)];
    }
    out[static_cast<size_t>(K)] = -partial;
    return out;
}

std::vector<double> initial_levels(int K, int32_t b0) {
    if (K < 1) throw std::invalid_argument("need K >= 1");
    if (b0 < 0 || b0 > K) throw std::invalid_argument("initial budget must lie in [0, K]");
    std::vector<double> z(static_cast<size_t>(K) + 1, 0.0);
    z[static_cast<size_t>(b0)] = 1.0;
    return z;
}

double OdeSolution::h_at(double t) const {
    if (tau.empty()) throw std::logic_error("empty solution");
    if (t <= tau.front()) return h.front();
    if (t >= tau.back()) return h.back();
    const auto it = std::upper_bound(tau.begin(), tau.end(), t);
    const size_t i = static_cast<size_t>(it - tau.begin());
    const double w = (t - tau[i - 1]) / (tau[i] - tau[i - 1]);
    return h[i - 1] + w * (h[i] - h[i - 1]);
}

std::vector<double> OdeSolution::z_at(double t) const {
    if (tau.empty()) throw std::logic_error("empty solution");
    size_t i;
    double w;
    if (t <= tau.front()) {
        i = 1;
        w = 0.0;
    } else if (t >= tau.back()) {
        i = tau.size() - 1;
        w = 1.0;
    } else {
        const auto it = std::upper_bound(tau.begin(), tau.end(), t);
        i = static_cast<size_t>(it - tau.begin());
        w = (t - tau[i - 1]) / (tau[i] - tau[i - 1]);
    }
    std::vector<double> out(z[i].size());
    for (size_t k = 0; k < out.size(); ++k) out[k] = z[i - 1][k] + w * (z[i][k] - z[i - 1][k]);
    return out;
}

OdeSolution integrate_ode(std::span<const double> init, double a, double beta, int K,
                          double tau_end, double dt) {
    if (static_cast<int>(init.size()) != K + 1)
        throw std::invalid_argument("integrate_ode: init must have K+1 components");
    if (dt <= 0) throw std::invalid_argument("integrate_ode: dt must be > 0");
    if (tau_end < 0) throw std::invalid_argument("integrate_ode: tau_end must be >= 0");

    OdeSolution sol;
    sol.a = a;
    sol.beta = beta;
    sol.K = K;
    sol.dt = dt;

    // State y = (z_0..z_K, h).
    std::vector<double> y(init.begin(), init.end());
    y.push_back(0.0);

    auto deriv = [&](const std::vector<double>& s) {
        std::vector<double> d = ode_rhs(std::span<const double>(s.data(), static_cast<size_t>(K + 1)),
                                        a, beta);
        d.push_back(-std::expm1(-a * (1.0 - s[0])));
        return d;
    };

    const auto record = [&](double t) {
        sol.tau.push_back(t);
        sol.z.emplace_back(y.begin(), y.begin() + K + 1);
        sol.h.push_back(y.back());
    };

    record(0.0);
    double t = 0.0;
    const size_t dim = y.size();
    std::vector<double> tmp(dim);
    while (t < tau_end - 1e-15 * std::max(1.0, tau_end)) {
        const double step = std::min(dt, tau_end - t);
        const auto k1 = deriv(y);
        for (size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * step * k1[i];
        const auto k2 = deriv(tmp);
        for (size_t i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * step * k2[i];
        const auto k3 = deriv(tmp);
        for (size_t i = 0; i < dim; ++i) tmp[i] = y[i] + step * k3[i];
        const auto k4 = deriv(tmp);
        for (size_t i = 0; i < dim; ++i)
            y[i] += step / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        t += step;
        record(t);
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Stationary profile
// ---------------------------------------------------------------------------

namespace {

// P(z0) = sum_{k=0}^K z0 (beta/g(z0))^k - 1; strictly increasing from -1.
double level_sum_residual(double z0, double a, double beta, int K) {
    if (z0 == 0.0) return -1.0;
    const double x = beta / match_intensity(z0, a);
    double term = z0;
    double sum = 0.0;
    for (int k = 0; k <= K; ++k) {
        sum += term;
        if (sum > 1e12) return sum; // diverging geometric tail; sign is all we need
        term *= x;
    }
    return sum - 1.0;
}

} // namespace

StationaryPoint stationary_point(double a, double beta, int K) {
    if (a <= 0 || beta <= 0) throw std::invalid_argument("stationary_point: need a, beta > 0");
    if (K < 1) throw std::invalid_argument("stationary_point: need K >= 1");

    const auto P = [&](double z0) { return level_sum_residual(z0, a, beta, K); };
    const double hi = 1.0 - 1e-12;
    if (P(hi) < 0)
        throw std::runtime_error("stationary_point: no bracket, P(0)=" + std::to_string(P(0.0)) +
                                 " P(1-)=" + std::to_string(P(hi)));
    const double z0 = bisect(P, 0.0, hi, 0.0, 0.0);

    StationaryPoint sp;
    sp.z0 = z0;
    sp.g = match_intensity(z0, a);
    const double x = beta / sp.g;
    sp.geometric_ratio_ok = std::fabs(x) <= 1.0 + 1e-12;
    double term = z0;
    double sum = 0.0;
    for (int k = 0; k <= K; ++k) {
        sp.profile.push_back(term);
        sum += term;
        term *= x;
    }
    sp.residual = std::fabs(sum - 1.0);
    return sp;
}

double stationary_z0_cap1(double a, double beta) {
    if (a <= 0 || beta <= 0) throw std::invalid_argument("need a, beta > 0");
    // z0* = 1/beta - W((a/beta) e^{-a(1-1/beta)})/a, evaluated through
    // W(e^y) so extreme exponents cannot overflow.
    const double y = std::log(a / beta) - a * (1.0 - 1.0 / beta);
    return 1.0 / beta - lambert_w_exp(y) / a;
}

double stationary_z0_uncapped(double a, double beta) {
    if (a <= 0) throw std::invalid_argument("need a > 0");
    if (beta <= 0 || beta >= 1)
        throw std::invalid_argument("the uncapped stationary point needs beta in (0,1)");
    return 1.0 + std::log1p(-beta) / a;
}

double convergence_rate_cap1(double a, double beta) {
    if (a <= 0 || beta <= 0) throw std::invalid_argument("need a, beta > 0");
    return beta * (1.0 + lambert_w_exp(-a * (1.0 - 1.0 / beta)));
}

// ---------------------------------------------------------------------------
// Competitive-ratio constants
// ---------------------------------------------------------------------------

namespace {

double half_integrand(double x) { return x * std::exp(x) / (1.0 - x); }

} // namespace

double solve_alpha() {
    const auto F = [](double alpha) {
        return integrate_simpson(half_integrand, 0.0, alpha, 1e-12) - 0.5;
    };
    return bisect(F, 1e-12, 0.98, 1e-12, 0.0);
}

double cr_bound_frequent_refill() {
    const double alpha = solve_alpha();
    return 1.0 - (1.0 - alpha) * std::exp(-(1.0 - alpha));
}

double cr_bound_frequent_refill_finite(int64_t m, int32_t b0, int64_t t0) {
    if (m < 2 || b0 < 1 || t0 < 1) throw std::invalid_argument("need m >= 2, b0 >= 1, t0 >= 1");
    const double mb0 = static_cast<double>(m) * b0;
    const double target = 1.0 - static_cast<double>(t0) / (mb0 + 2.0 * static_cast<double>(t0));

    double hi = 0.9;
    while (integrate_simpson(half_integrand, 0.0, hi, 1e-12) < target && hi < 1.0 - 1e-9)
        hi = 1.0 - 0.25 * (1.0 - hi);
    const double alpha = bisect(
        [&](double x) { return integrate_simpson(half_integrand, 0.0, x, 1e-12) - target; }, 1e-12,
        hi, 1e-12, 0.0);

    const double e = std::exp(1.0);
    const double i2 = integrate_simpson(
        [](double x) { return x * x * std::exp(x) / (1.0 - x); }, 0.0, alpha, 1e-12);
    const double i3 = integrate_simpson(
        [alpha](double x) { return x * (alpha - x) * std::exp(x) / (1.0 - x); }, 0.0, alpha, 1e-12);
    return 1.0 - (mb0 + t0) / (e * (mb0 + 2.0 * t0)) - i2 / e +
           mb0 / static_cast<double>(t0) * (1.0 - 1.0 / e + i3 / e);
}

double cr_bound_bmatching(int32_t b0) {
    if (b0 < 1) throw std::invalid_argument("need b0 >= 1");
    if (b0 <= 24) {
        // exact rational: 1 - b0^b0 / (b0+1)^b0
        double num = 1.0, den = 1.0;
        for (int32_t i = 0; i < b0; ++i) {
            num *= b0;
            den *= b0 + 1;
        }
        return 1.0 - num / den;
    }
    return 1.0 - std::exp(-static_cast<double>(b0) * std::log1p(1.0 / b0));
}

double cr_lower_bound_stochastic(double T, int K, double n, double b0, double beta, double a) {
    const StationaryPoint sp = stationary_point(a, beta, K);
    const double x = beta / sp.g;
    // z0* sum_{k=1}^K k x^k: the pole-free form of
    // beta/(g-beta) - (K+1) beta^{K+1}/(g^{K+1} - beta^{K+1}).
    double weighted = 0.0;
    double term = x;
    for (int k = 1; k <= K; ++k) {
        weighted += k * term;
        term *= x;
    }
    const double bracket = sp.z0 * weighted;
    return (T * sp.g * (1.0 - sp.z0) + n * b0 - n * bracket) / (n * b0 + beta * T);
}

// ---------------------------------------------------------------------------
// Discrete dynamics and drift oracles
// ---------------------------------------------------------------------------

namespace {

void check_pool_args(int64_t Z0, int64_t k, int64_t m, int64_t j, int64_t t) {
    if (Z0 < 0 || k < 1 || m < 1 || t < 0) throw std::invalid_argument("pool parameters out of range");
    if (j < 0 || j >= m) throw std::invalid_argument("pool phase offset must satisfy 0 <= j < m");
}

} // namespace

int64_t budget_pool_by_recurrence(int64_t Z0, int64_t k, int64_t m, int64_t j, int64_t t) {
    check_pool_args(Z0, k, m, j, t);
    int64_t z = Z0;
    for (int64_t s = 1; s <= t; ++s) {
        z -= (z >= 1) ? 1 : 0;
        if (s % m == j % m) z += k;
    }
    return z;
}

int64_t budget_pool_closed_form(int64_t Z0, int64_t k, int64_t m, int64_t j, int64_t t) {
    check_pool_args(Z0, k, m, j, t);
    if (t == 0) return Z0;
    if (j >= 1 && t <= j) return std::max<int64_t>(Z0 - t, 0) + (t == j ? k : 0);

    // Shift so refills land at multiples of m; Zj includes the bulk at t = j.
    const int64_t zj = (j == 0) ? Z0 : std::max<int64_t>(Z0 - j, 0) + k;
    const int64_t delta = t - j;

    // First hitting time of zero for the shifted process, then the next
    // refill time after it.
    int64_t t_star;
    if (zj == 0) {
        t_star = 0;
    } else if (m > k) {
        const int64_t num = zj + 1 - m;
        const int64_t c = num <= 0 ? 0 : (num + (m - k) - 1) / (m - k);
        t_star = zj + k * c;
    } else if (zj < m) {
        t_star = zj;
    } else {
        t_star = -1; // never drains: saturating branch below never fires
    }

    if (t_star < 0 || delta <= t_star) return zj + k * (delta / m) - delta;

    const int64_t t_tilde = t_star == 0 ? m : m * ((t_star + m - 1) / m);
    if (delta < t_tilde) return 0;
    if (k < m) return std::max<int64_t>(k - delta % m, 0);
    return k * (1 + (delta - t_tilde) / m) - (delta - t_tilde);
}

double greedy_match_probability(int64_t Y0, int64_t n, double a) {
    if (n < 1 || Y0 < 0 || Y0 > n) throw std::invalid_argument("need 0 <= Y0 <= n");
    if (a < 0 || a > n) throw std::invalid_argument("need 0 <= a <= n");
    const int64_t available = n - Y0;
    if (available == 0 || a == 0) return 0.0;
    if (a == n) return 1.0;
    return -std::expm1(static_cast<double>(available) * std::log1p(-a / n));
}

double selection_factor(int64_t C, double p) {
    if (C < 1) throw std::invalid_argument("need C >= 1");
    if (p <= 0 || p > 1) throw std::invalid_argument("need 0 < p <= 1");
    if (p == 1.0) return 1.0 / static_cast<double>(C);
    return -std::expm1(static_cast<double>(C) * std::log1p(-p)) / (p * static_cast<double>(C));
}

double wormald_deviation_bound(double n, double T, double a, double eps) {
    if (eps <= 0) throw std::invalid_argument("need eps > 0");
    const double lipschitz = a * std::exp(a * eps);
    return 3.0 * std::exp(lipschitz * T / n) * a * std::pow(n, 0.75);
}

} // namespace refill::analysis
