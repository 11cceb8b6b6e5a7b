#pragma once
// Parameter-limit scans: concentration of the source-type profiles as m -> m_c or p -> p_c,
// and the 1D p -> 1 limit of the p-Laplacian fundamental solution. Everything in log form.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "masslab/closed_forms.hpp"
#include "masslab/errors.hpp"
#include "masslab/quadrature.hpp"
#include "masslab/special.hpp"

namespace masslab {

enum class ScanFamily { PME, PLE };

inline ScanFamily scan_family_from_string(const std::string& s) {
    if (s == "pme" || s == "PME") return ScanFamily::PME;
    if (s == "ple" || s == "PLE") return ScanFamily::PLE;
    throw ValidationError("scan family must be pme or ple, got '" + s + "'");
}

struct ScanRow {
    double eps = 0;
    double param = 0;  // m or p
    double log_C = 0, C = 0;
    double log_K = 0, K = 0;  // K = profile peak F(0)
    double log_d = 0, d = 0;  // F(d) = F(0)/2
    double outer_mass_frac = 0;
    double log_value_x0 = 0;  // log F(x0)
    double mass_check = 0;    // re-quadrature of the profile mass
    double c8 = 0;            // eps log C / log eps
    double c9 = 0;            // eps log K / log(1/eps)
    std::vector<std::string> flags;

    std::string flag_string() const {
        std::string s;
        for (const auto& f : flags) s += (s.empty() ? "" : ";") + f;
        return s;
    }
};

struct ScanOptions {
    double M = 1;
    double R = 1;   // ball radius for the outer mass fraction
    double x0 = 0.5;  // fixed point for the frozen-Dirac proxy
};

namespace detail {

inline void require_scan_list(const std::vector<double>& eps) {
    if (eps.empty()) throw ValidationError("scan: empty eps list");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0)) throw ValidationError("scan: eps values must be positive");
        if (i > 0 && !(eps[i] < eps[i - 1])) throw ValidationError("scan: eps values must be strictly decreasing");
    }
}

// log of (C + k r^theta) without forming C.
inline double log_base(double logC, double logk, double theta, double r) {
    if (r <= 0) return logC;
    return logaddexp(logC, logk + theta * std::log(r));
}

// Regularized incomplete beta I_x(a,b) from log x; asymptotic x^a/(a B(a,b)) once x underflows.
inline double ibeta_from_log(double a, double b, double log_x) {
    if (log_x > -700) return boost::math::ibeta(a, b, std::exp(log_x));
    return std::exp(a * log_x - std::log(a) - log_beta(a, b));
}

// Profile mass omega_N C^{gamma+N/theta} k^{-N/theta} int_0^inf (1+s^theta)^gamma s^{N-1} ds by quadrature.
inline double scaled_profile_mass(const ProfileShape& sh, int N, double logC) {
    auto f = [&](double s) { return std::pow(1 + std::pow(s, sh.theta), sh.gamma) * std::pow(s, N - 1); };
    // f = s^{-1-q} (1 + s^{-theta})^gamma; the s^{-1-q} part of the tail integrates to 1/q.
    const double q = sh.theta * std::abs(sh.gamma) - N;
    auto corr = [&](double s) { return std::pow(s, -1 - q) * std::expm1(sh.gamma * std::log1p(std::pow(s, -sh.theta))); };
    const auto in = quad::tanh_sinh(f, 0.0, 1.0, 1e-13);
    const auto out = quad::power_tail(corr, 1.0, q + sh.theta, 1e-13);
    const double I = in.value + out.value + 1 / q;
    const double nt = N / sh.theta;
    return std::exp(std::log(surface_area(N)) + (sh.gamma + nt) * logC - nt * sh.log_k + std::log(I));
}

}  // namespace detail

inline std::vector<ScanRow> concentration_scan(ScanFamily family, int N, const std::vector<double>& eps_list,
                                               ScanOptions opt = {}) {
    detail::require_scan_list(eps_list);
    std::vector<ScanRow> rows;
    for (double eps : eps_list) {
        ScanRow row;
        row.eps = eps;
        EquationSpec spec;
        SolutionKind kind;
        if (family == ScanFamily::PME) {
            if (N < 3) throw ValidationError("PME concentration scan needs N >= 3 (m_c > 0)");
            const double m = (N - 2.0) / N + eps;
            if (!(m < 1)) throw RangeError("scan: m = m_c + eps must stay below 1");
            spec = EquationSpec::pme(m, N);
            kind = SolutionKind::BarenblattFDE;
            row.param = m;
        } else {
            if (N < 2) throw ValidationError("PLE concentration scan needs N >= 2");
            const double p = 2.0 * N / (N + 1) + eps;
            if (!(p < 2)) throw RangeError("scan: p = p_c + eps must stay below 2");
            spec = EquationSpec::ple(p, N);
            kind = SolutionKind::BarenblattPLE;
            row.param = p;
        }
        const auto sh = profile_shape(kind, spec);
        const double logk = sh.log_k;
        row.log_C = log_normalization_beta(kind, spec, opt.M);
        row.C = std::exp(row.log_C);
        row.log_K = sh.gamma * row.log_C;
        row.K = std::exp(row.log_K);
        // (1 + k d^theta / C) = 2^{-1/gamma}
        row.log_d = (row.log_C + std::log(std::pow(2.0, -1 / sh.gamma) - 1) - logk) / sh.theta;
        row.d = std::exp(row.log_d);
        const double nt = N / sh.theta;
        const double log_u0 = row.log_C - detail::log_base(row.log_C, logk, sh.theta, opt.R);
        row.outer_mass_frac = detail::ibeta_from_log(std::abs(sh.gamma) - nt, nt, log_u0);
        row.log_value_x0 = sh.gamma * detail::log_base(row.log_C, logk, sh.theta, opt.x0);
        row.mass_check = detail::scaled_profile_mass(sh, N, row.log_C);
        row.c8 = eps * row.log_C / std::log(eps);
        row.c9 = eps * row.log_K / std::log(1 / eps);

        if (row.C == 0) row.flags.push_back("C_underflow");
        if (!std::isfinite(row.K)) row.flags.push_back("K_overflow");
        if (!(row.outer_mass_frac > 0)) row.flags.push_back("outer_fraction_underflow");
        if (!(std::abs(row.mass_check - opt.M) <= 1e-6 * opt.M)) row.flags.push_back("mass_check_failed");
        if (row.C > 1e-200 && row.C < 1e200) {
            try {
                const auto nc = normalization_check(kind, spec, opt.M);
                if (!(nc.rel_diff <= 1e-8)) row.flags.push_back("normalization_mismatch");
            } catch (const Error&) {
                row.flags.push_back("normalization_quadrature_failed");
            }
        } else {
            row.flags.push_back("normalization_cross_check_skipped");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Closed-form p-Laplacian source solution in N=1 evaluated in log form.
struct PLE1D {
    double eps = 0, p = 0, M = 1;
    ProfileShape sh;
    double log_C = 0, log_k = 0;

    PLE1D(double eps_, double M_) : eps(eps_), p(1 + eps_), M(M_) {
        if (!(eps > 0 && eps < 1)) throw RangeError("PLE 1D limit needs 0 < p-1 < 1");
        const auto spec = EquationSpec::ple(p, 1);
        sh = profile_shape(SolutionKind::BarenblattPLE, spec);
        log_C = log_normalization_beta(SolutionKind::BarenblattPLE, spec, M);
        log_k = sh.log_k;
    }
    double log_base(double x, double t) const {
        const double y = std::abs(x) * std::pow(t, -sh.beta);
        return detail::log_base(log_C, log_k, sh.theta, y);
    }
    double log_value(double x, double t) const { return -sh.alpha * std::log(t) + sh.gamma * log_base(x, t); }
    // log |B_x| for x != 0
    double log_slope(double x, double t) const {
        const double ax = std::abs(x);
        const double logy = std::log(ax) - sh.beta * std::log(t);
        return -sh.alpha * std::log(t) + std::log(std::abs(sh.gamma)) + (sh.gamma - 1) * log_base(x, t) + log_k +
               std::log(sh.theta) + (sh.theta - 1) * logy - sh.beta * std::log(t);
    }
    // Mass flux out of (-R, R): 2 |B_x|^{p-1} at x = R.
    double outflux(double R, double t) const { return 2 * std::exp((p - 1) * log_slope(R, t)); }
    // B(x,t) (|x|^p / (2 eps t))^{1/(2-p)}
    double bound_ratio(double x, double t) const {
        return std::exp(log_value(x, t) + (p * std::log(std::abs(x)) - std::log(2 * eps * t)) / (2 - p));
    }
};

struct PLE1DRow {
    ScanRow row;
    double bound_ratio_max = 0;  // over the x grid at t = 1
    std::vector<double> flux;    // at (R_i, t_flux)
    std::vector<double> sup;     // B(0, t_j)
};

struct PLE1DOptions {
    double M = 1;
    std::vector<double> flux_radii = {2, 5, 10};
    double flux_time = 0.2;
    std::vector<double> sup_times = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    double x_min = 0.01, x_max = 10;
    int x_points = 2000;
};

inline std::vector<PLE1DRow> ple1d_limit_scan(const std::vector<double>& eps_list, PLE1DOptions opt = {}) {
    detail::require_scan_list(eps_list);
    std::vector<PLE1DRow> rows;
    for (double eps : eps_list) {
        PLE1DRow r;
        r.row.eps = eps;
        r.row.param = 1 + eps;
        try {
            const PLE1D B(eps, opt.M);
            r.row.log_C = B.log_C;
            r.row.C = std::exp(B.log_C);
            r.row.log_K = B.log_value(0, 1);
            r.row.K = std::exp(r.row.log_K);
            r.row.log_d = (B.log_C + std::log(std::pow(2.0, -1 / B.sh.gamma) - 1) - B.log_k) / B.sh.theta;
            r.row.d = std::exp(r.row.log_d);
            const double log_u0 = B.log_C - B.log_base(1.0, 1.0);
            const double nt = 1 / B.sh.theta;
            r.row.outer_mass_frac = detail::ibeta_from_log(std::abs(B.sh.gamma) - nt, nt, log_u0);
            r.row.log_value_x0 = B.log_value(0.5, 1);
            r.row.mass_check = detail::scaled_profile_mass(B.sh, 1, B.log_C);
            // Log-spaced x grid, extended until k y^theta exceeds C by e^20 (the ratio increases in |x|).
            const double log_far = std::max(std::log(opt.x_max), (B.log_C - B.log_k + 20) / B.sh.theta);
            const double log_lo = std::log(opt.x_min);
            for (int i = 0; i < opt.x_points; ++i) {
                const double x = std::exp(log_lo + (log_far - log_lo) * i / (opt.x_points - 1.0));
                r.bound_ratio_max = std::max(r.bound_ratio_max, B.bound_ratio(x, 1.0));
            }
            for (double R : opt.flux_radii) r.flux.push_back(B.outflux(R, opt.flux_time));
            for (double t : opt.sup_times) r.sup.push_back(std::exp(B.log_value(0, t)));
            if (r.row.C == std::numeric_limits<double>::infinity() || r.row.C == 0) r.row.flags.push_back("C_out_of_range");
            if (!(std::abs(r.row.mass_check - opt.M) <= 1e-6 * opt.M)) r.row.flags.push_back("mass_check_failed");
        } catch (const Error& e) {
            r.row.flags.push_back(std::string("normalization_failed:") + e.what());
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace masslab
