#pragma once
// Acceptance criteria as callable checks; shared by the verify command and the acceptance test binary.

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "masslab/closed_forms.hpp"
#include "masslab/diagnostics.hpp"
#include "masslab/fractional.hpp"
#include "masslab/grid_solver.hpp"
#include "masslab/limits.hpp"
#include "masslab/regimes.hpp"

namespace masslab::acceptance {

struct Options {
    double beta_fault = 0;  // added to every computed beta in criterion 1 (fault injection)
    std::uint64_t seed = 20240611;
};

struct Result {
    int id = 0;
    std::string name;
    std::string measured;
    std::string expected;
    std::string tolerance;
    bool pass = false;
    double seconds = 0;
    std::vector<std::string> details;
};

namespace detail {

inline std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

// Observed order: least-squares slope of log(residual) against log(h).
inline double observed_order(const std::vector<double>& h, const std::vector<double>& r) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < h.size(); ++i) {
        x.push_back(std::log(h[i]));
        y.push_back(std::log(r[i]));
    }
    return least_squares(x, y).slope;
}

inline bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

inline std::string join(const std::vector<double>& v, int prec = 4) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ", ") + fmt(x, prec);
    return "[" + s + "]";
}

inline double smooth_bump(double r, double H, double a = 1) {
    const double q = 1 - (r / a) * (r / a);
    return r < a ? H * q * q : 0.0;
}

inline double dirichlet_loss(const EquationSpec& spec, int N, double R, double h, double H, double horizon) {
    const auto g = RadialGrid::uniform(N, R, static_cast<int>(std::lround(R / h)));
    const auto f = init_state(g, [&](double r) { return smooth_bump(r, H); });
    SolverConfig c;
    c.dt = 1e-5;
    c.dt_max = 0.01;
    c.checkpoint_times = {horizon};
    const auto rec = run(spec, f, g, c);
    return rec.ledger.boundary_outflux.back() / rec.ledger.masses.front();
}

inline std::optional<double> fde_extinction(double m, double lambda, double R, int cells, double dt_max) {
    const auto spec = EquationSpec::pme(m, 3);
    const auto g = RadialGrid::uniform(3, R, cells);
    const auto f = init_state(g, [&](double r) { return smooth_bump(r, lambda); });
    SolverConfig c;
    c.dt = 1e-5;
    c.dt_max = dt_max;
    c.checkpoint_times = {2.0};
    return extinction_time(run(spec, f, g, c), 1e-6 * lambda);
}

}  // namespace detail

// 1. Exponent identities and regime boundaries on random in-range specs.
inline Result exponent_identities(const Options& opt) {
    detail::Timer timer;
    Result res{1, "exponent identities", "", "alpha = N beta, family identity = 1; boundaries coincide", "1e-12", false};
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::uniform_int_distribution<int> Nd(1, 6);
    auto uni = [&](double a, double b) { return a + (b - a) * (0.001 + 0.998 * U(rng)); };

    double worst = 0;
    std::string worst_case;
    auto check = [&](const EquationSpec& spec, double identity_lhs, double alpha, double beta) {
        const double e1 = std::abs(alpha - spec.N * beta);
        const double e2 = std::abs(identity_lhs - 1);
        if (std::max(e1, e2) > worst) {
            worst = std::max(e1, e2);
            worst_case = spec.describe() + ": alpha=" + detail::fmt(alpha, 17) + " N*beta=" +
                         detail::fmt(spec.N * beta, 17) + " identity=" + detail::fmt(identity_lhs, 17);
        }
    };
    const int samples = 200;
    int count = 0;
    const Family fams[] = {Family::PME_FDE, Family::PLE,  Family::FHE,       Family::FPME,
                           Family::FPLE,    Family::DNLE, Family::ANISO_PME, Family::ANISO_PLE};
    for (Family fam : fams) {
        for (int k = 0; k < samples; ++k) {
            const int N = Nd(rng);
            const double n = N;
            const double s = uni(0.05, 0.95);
            EquationSpec spec;
            switch (fam) {
                case Family::PME_FDE: spec = EquationSpec::pme(uni(std::max(0.0, (n - 2) / n), 4.0), N); break;
                case Family::PLE: spec = EquationSpec::ple(uni(2 * n / (n + 1), 5.0), N); break;
                case Family::FHE: spec = EquationSpec::fhe(s, N); break;
                case Family::FPME: spec = EquationSpec::fpme(uni(std::max(0.0, (n - 2 * s) / n), 4.0), s, N); break;
                case Family::FPLE: spec = EquationSpec::fple(uni(2 * n / (n + s), 5.0), s, N); break;
                case Family::DNLE: {
                    double m, p;
                    do {
                        m = uni(0.1, 3.0);
                        p = uni(1.1, 4.0);
                    } while (!(m * (p - 1) + p / n > 1 + 1e-6));
                    spec = EquationSpec::dnle(m, p, N);
                    break;
                }
                case Family::ANISO_PME: {
                    const int Na = 1 + N % 5 + (N == 1);
                    std::vector<double> ms(Na);
                    double mean;
                    do {
                        mean = 0;
                        for (auto& mi : ms) mean += (mi = uni(0.05, 0.95)) / Na;
                    } while (!(mean > (Na - 2.0) / Na + 1e-6));
                    spec = EquationSpec::aniso_pme(ms);
                    break;
                }
                case Family::ANISO_PLE: {
                    const int Na = 1 + N % 5 + (N == 1);
                    std::vector<double> ps(Na);
                    double inv;
                    do {
                        inv = 0;
                        for (auto& pi : ps) inv += 1 / (pi = uni(1.05, 1.95));
                    } while (!(inv < (Na + 1) / 2.0 - 1e-6));
                    spec = EquationSpec::aniso_ple(ps);
                    break;
                }
                default: break;
            }
            const auto ex = similarity_exponents(spec);
            const double a = ex.alpha, b = ex.beta + opt.beta_fault;
            ++count;
            switch (fam) {
                case Family::PME_FDE: check(spec, a * (spec.mv() - 1) + 2 * b, a, b); break;
                case Family::PLE: check(spec, a * (spec.pv() - 2) + spec.pv() * b, a, b); break;
                case Family::FHE: check(spec, 2 * spec.sv() * b, a, b); break;
                case Family::FPME: check(spec, a * (spec.mv() - 1) + 2 * spec.sv() * b, a, b); break;
                case Family::FPLE: check(spec, a * (spec.pv() - 2) + spec.sv() * spec.pv() * b, a, b); break;
                case Family::DNLE: check(spec, a * (spec.mv() * (spec.pv() - 1) - 1) + spec.pv() * b, a, b); break;
                case Family::ANISO_PME:
                case Family::ANISO_PLE: {
                    // Per direction: alpha(m_i - 1) + 2 a_i = 1 or alpha(p_i - 2) + p_i a_i = 1, a_i = sigma_i alpha;
                    // sum of sigma_i = 1 carries alpha = N beta.
                    double ssum = 0, worst_dir = 1;
                    for (std::size_t i = 0; i < spec.exps.size(); ++i) {
                        const double ai = (*ex.sigmas)[i] * a, e = spec.exps[i];
                        ssum += (*ex.sigmas)[i];
                        const double lhs = fam == Family::ANISO_PME ? a * (e - 1) + 2 * ai : a * (e - 2) + e * ai;
                        if (std::abs(lhs - 1) > std::abs(worst_dir - 1)) worst_dir = lhs;
                    }
                    check(spec, worst_dir, a, b);
                    check(spec, ssum * a / (spec.N * b), a, b);
                    break;
                }
                default: break;
            }
        }
    }
    // Boundaries: classify and similarity_exponents must switch exactly at critical_exponent.
    int mismatches = 0, boundary_checks = 0;
    for (int k = 0; k < samples; ++k) {
        const int N = Nd(rng);
        const double s = uni(0.05, 0.95);
        struct B {
            Family f;
            std::function<EquationSpec(double)> make;
        };
        const B bs[] = {{Family::PME_FDE, [&](double x) { return EquationSpec::pme(x, N); }},
                        {Family::PLE, [&](double x) { return EquationSpec::ple(x, N); }},
                        {Family::FPME, [&](double x) { return EquationSpec::fpme(x, s, N); }},
                        {Family::FPLE, [&](double x) { return EquationSpec::fple(x, s, N); }}};
        for (const auto& b : bs) {
            const double c = critical_exponent(b.f, N, is_fractional(b.f) ? std::optional<double>(s) : std::nullopt);
            if (!(c > (b.f == Family::PLE || b.f == Family::FPLE ? 1.0 : 0.0))) continue;  // outside parameter range
            ++boundary_checks;
            const double up = c * (1 + 1e-9), down = c * (1 - 1e-9);
            bool ok = classify(b.make(c)).regime == Regime::Critical &&
                      classify(b.make(up)).regime == Regime::GoodFast &&
                      classify(b.make(down)).regime == Regime::VeryFast;
            try {
                similarity_exponents(b.make(c));
                ok = false;
            } catch (const NoFiniteMassSelfSimilar&) {
            }
            try {
                similarity_exponents(b.make(up));
            } catch (const Error&) {
                ok = false;
            }
            if (!ok) {
                ++mismatches;
                res.details.push_back("boundary mismatch: " + b.make(c).describe());
            }
        }
    }
    res.seconds = timer.seconds();
    res.measured = "max identity error " + detail::fmt(worst, 3) + " over " + std::to_string(count) +
                   " specs; boundary mismatches " + std::to_string(mismatches) + "/" + std::to_string(boundary_checks);
    res.pass = worst <= 1e-12 && mismatches == 0 && res.seconds < 1.0;
    if (worst > 1e-12) res.details.push_back("worst: " + worst_case);
    res.details.push_back("runtime " + detail::fmt(res.seconds, 3) + " s (limit 1 s)");
    return res;
}

struct ResidualCase {
    SolutionKind kind;
    EquationSpec spec;
    Extras extras;
    double R;
    std::vector<int> cells;
};

inline std::vector<ResidualCase> residual_cases() {
    return {
        {SolutionKind::Gaussian, EquationSpec::heat(1), {}, 10, {100, 200, 400}},
        {SolutionKind::BarenblattPME, EquationSpec::pme(2, 1), {}, 3, {200, 400, 800}},
        {SolutionKind::BarenblattFDE, EquationSpec::pme(0.75, 3), {}, 10, {100, 200, 400}},
        {SolutionKind::BarenblattPLE, EquationSpec::ple(3, 2), {}, 10, {100, 200, 400}},
        {SolutionKind::BarenblattPLE, EquationSpec::ple(1.5, 2), {}, 10, {100, 200, 400}},
        {SolutionKind::DNLEProfile, EquationSpec::dnle(0.8, 1.8, 2), {}, 10, {100, 200, 400}},
        {SolutionKind::FracKernelHalf, EquationSpec::fhe(0.5, 1), {}, 20, {100, 200, 400}},
        {SolutionKind::FracKernelNumeric, EquationSpec::fhe(0.3, 1), {}, 5, {200, 400, 800}},
        {SolutionKind::LogDiffExplicit, EquationSpec::logdiff(), {.T = 2.0}, 10, {100, 200, 400}},
        {SolutionKind::FracExplicitS12, EquationSpec::fpme(0.5, 0.5, 1), {.T = 2.0}, 20, {100, 200, 400}},
        {SolutionKind::PMEBlowupM2, EquationSpec::pme(2, 2), {.C = 1.0, .T = 2.0}, 4, {100, 200, 400}},
    };
}

// 2. Residual of every closed form converges at second order.
inline Result closed_form_residuals(const Options&) {
    detail::Timer timer;
    Result res{2, "closed-form residuals", "", "observed order in [1.7, 2.3] for every kind", "[1.7, 2.3]", true};
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& c : residual_cases()) {
        const auto sol = make_solution(c.kind, c.spec, 1, c.extras);
        std::vector<double> h, r;
        for (int n : c.cells) {
            const auto g = RadialGrid::uniform(c.spec.N, c.R, n);
            h.push_back(g.spacing());
            r.push_back(residual_norm(sol, g, 1.0));
        }
        const double p = detail::observed_order(h, r);
        const bool ok = p >= 1.7 && p <= 2.3;
        lo = std::min(lo, p);
        hi = std::max(hi, p);
        res.pass = res.pass && ok;
        res.details.push_back(std::string(ok ? "ok   " : "FAIL ") + to_string(c.kind) + " " + c.spec.describe() +
                              " residuals " + detail::join(r, 3) + " order " + detail::fmt(p, 3));
    }
    res.seconds = timer.seconds();
    res.measured = "orders in [" + detail::fmt(lo, 3) + ", " + detail::fmt(hi, 3) + "]";
    res.pass = res.pass && res.seconds < 120;
    return res;
}

// 3. Beta-identity and quadrature values of C agree.
inline Result normalization_crosscheck(const Options& opt) {
    detail::Timer timer;
    Result res{3, "normalization cross-check", "", "Beta and quadrature C agree", "1e-8 relative", false};
    std::mt19937_64 rng(opt.seed + 3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::uniform_int_distribution<int> Nd(1, 5);
    double worst = 0;
    std::string worst_case;
    int count = 0;
    for (int k = 0; k < 100; ++k) {
        const int N = Nd(rng);
        const double n = N;
        SolutionKind kind;
        EquationSpec spec;
        if (k < 50) {  // (m, N)
            const bool slow = k % 2 == 0;
            const double mc = std::max(0.0, (n - 2) / n);
            const double m = slow ? 1.02 + 2.98 * U(rng) : mc + 0.02 + (0.98 - mc - 0.02) * U(rng);
            spec = EquationSpec::pme(m, N);
            kind = slow ? SolutionKind::BarenblattPME : SolutionKind::BarenblattFDE;
        } else {  // (p, N)
            const bool slow = k % 2 == 0;
            const double pc = 2 * n / (n + 1);
            const double p = slow ? 2.02 + 2.98 * U(rng) : pc + 0.02 + (1.98 - pc - 0.02) * U(rng);
            spec = EquationSpec::ple(p, N);
            kind = SolutionKind::BarenblattPLE;
        }
        const auto nc = normalization_check(kind, spec, 1.0);
        ++count;
        if (!(nc.rel_diff <= worst)) {
            worst = nc.rel_diff;
            worst_case = spec.describe() + " C_beta=" + detail::fmt(nc.C_beta, 17) + " C_quad=" +
                         detail::fmt(nc.C_quadrature, 17);
        }
    }
    res.seconds = timer.seconds();
    res.measured = "max relative difference " + detail::fmt(worst, 3) + " over " + std::to_string(count) + " samples";
    res.pass = worst <= 1e-8 && res.seconds < 30;
    res.details.push_back("worst: " + worst_case);
    return res;
}

// 4. Barenblatt regression for the PME.
inline Result barenblatt_regression(const Options&) {
    detail::Timer timer;
    Result res{4, "Barenblatt regression", "", "L1 error <= 0.02 M; ZeroFlux drift <= 1e-8", "0.02 M, 1e-8", false};
    const auto spec = EquationSpec::pme(2, 1);
    const auto sol = make_solution(SolutionKind::BarenblattPME, spec, 1);
    const auto g = RadialGrid::uniform(1, 4, 400);
    SolverConfig c;
    c.outer_bc = OuterBC::ZeroFlux;
    c.dt = 1e-3;
    c.dt_max = 0.01;
    c.checkpoint_times = {2.0};
    const auto rec = run(spec, init_state(g, sol, 1.0), g, c, &sol);
    const double l1 = rec.ledger.l1_to_reference.back();
    double drift = 0;
    for (double m : rec.ledger.masses) drift = std::max(drift, std::abs(m - rec.ledger.masses.front()));
    res.seconds = timer.seconds();
    res.measured = "L1 " + detail::fmt(l1, 4) + ", drift " + detail::fmt(drift, 3);
    res.pass = l1 <= 0.02 && drift <= 1e-8 && res.seconds < 60;
    res.details.push_back(std::to_string(rec.steps) + " steps, 400 cells, R=4, t: 1 -> 2");
    return res;
}

// 5. FDE conservation dichotomy and extinction scaling.
inline Result conservation_dichotomy(const Options&) {
    detail::Timer timer;
    Result res{5, "conservation dichotomy", "",
               "m=0.75 loss decreasing in R, final < 1%; m=0.2 loss > 10%; T(2u0)/T(u0) = 2^0.8",
               "1%, 10%, 5%", false};
    const std::vector<double> Rs = {20, 40, 80};
    std::vector<double> good, bad;
    for (double R : Rs) {
        good.push_back(detail::dirichlet_loss(EquationSpec::pme(0.75, 3), 3, R, 0.05, 1.0, 1.0));
        bad.push_back(detail::dirichlet_loss(EquationSpec::pme(0.2, 3), 3, R, 0.05, 1.0, 1.0));
    }
    const auto T1 = detail::fde_extinction(0.2, 1.0, 20, 400, 2e-3);
    const auto T2 = detail::fde_extinction(0.2, 2.0, 20, 400, 2e-3);
    const double target = std::pow(2.0, 0.8);
    const double ratio = T1 && T2 ? *T2 / *T1 : std::nan("");
    const bool ok_good = detail::strictly_decreasing(good) && good.back() < 0.01;
    bool ok_bad = true;
    for (double b : bad) ok_bad = ok_bad && b > 0.1;
    const bool ok_T = T1 && T2 && std::abs(ratio / target - 1) <= 0.05;
    res.seconds = timer.seconds();
    res.measured = "loss(m=0.75) " + detail::join(good, 3) + ", loss(m=0.2) " + detail::join(bad, 3) +
                   ", T ratio " + detail::fmt(ratio, 5);
    res.expected += " = " + detail::fmt(target, 5);
    res.pass = ok_good && ok_bad && ok_T && res.seconds < 600;
    res.details.push_back("R = {20, 40, 80}, h = 0.05, data (1-r^2)_+^2, Dirichlet0, horizon 1");
    res.details.push_back("extinction times " + (T1 ? detail::fmt(*T1, 5) : "none") + ", " +
                          (T2 ? detail::fmt(*T2, 5) : "none"));
    return res;
}

// 6. Conservation at the critical exponents, as loss decreasing in R.
inline Result critical_conservation(const Options&) {
    detail::Timer timer;
    Result res{6, "critical-exponent conservation", "", "mass loss over [0,1] strictly decreasing in R",
               "strict monotonicity over three radii", false};
    std::vector<double> fde, ple;
    for (double R : {20.0, 40.0, 80.0})
        fde.push_back(detail::dirichlet_loss(EquationSpec::pme(1.0 / 3, 3), 3, R, 0.05, 100.0, 1.0));
    for (double R : {10.0, 20.0, 40.0})
        ple.push_back(detail::dirichlet_loss(EquationSpec::ple(4.0 / 3, 2), 2, R, 0.025, 100.0, 1.0));
    res.seconds = timer.seconds();
    res.measured = "FDE m=1/3 N=3 loss " + detail::join(fde, 4) + "; PLE p=4/3 N=2 loss " + detail::join(ple, 4);
    res.pass = detail::strictly_decreasing(fde) && detail::strictly_decreasing(ple) && res.seconds < 600;
    res.details.push_back("FDE R = {20, 40, 80}, PLE R = {10, 20, 40}; data 100 (1-r^2)_+^2; fractions of initial mass");
    res.details.push_back("the approach to 0 is slow (roughly logarithmic in R)");
    return res;
}

// 7. Logarithmic diffusion rate and TVF slope trend.
inline Result singular_mass_loss(const Options&) {
    detail::Timer timer;
    Result res{7, "logarithmic diffusion and TVF", "", "LOGDIFF slope -8 pi; TVF slope -> -2", "2%, 5%", false};
    const auto spec = EquationSpec::logdiff();
    const auto sol = make_solution(SolutionKind::LogDiffExplicit, spec, 0, {.T = 1.0});
    const auto g = RadialGrid::uniform(2, 20, 800);
    SolverConfig c;
    c.outer_bc = OuterBC::DirichletFn;
    c.boundary_value = [&](double t) { return evaluate(sol, g.R, t); };
    c.dt = 1e-3;
    c.dt_max = 0.005;
    c.checkpoint_times = {0.5};
    const auto rec = run(spec, init_state(g, sol, 0.0), g, c);
    const auto fit = loss_rate(rec.ledger, {0.05, 0.5});
    const double target = -8 * std::numbers::pi;
    const bool ok_log = std::abs(fit.slope / target - 1) <= 0.02;

    std::vector<double> slopes;
    for (double eps : {4e-3, 2e-3, 1e-3}) {
        const auto gt = RadialGrid::uniform(1, 2, 800);
        SolverConfig ct;
        ct.dt = 1e-4;
        ct.dt_max = 2e-3;
        ct.reg_eps = eps;
        ct.checkpoint_times = {0.4};
        const auto f = init_state(gt, [](double r) { return r < 0.5 ? 1.0 : 0.0; });
        slopes.push_back(loss_rate(run(EquationSpec::tvf(), f, gt, ct).ledger, {0.05, 0.3}).slope);
    }
    bool ok_tvf = std::abs(slopes.back() / -2.0 - 1) <= 0.05;
    for (std::size_t i = 1; i < slopes.size(); ++i) ok_tvf = ok_tvf && std::abs(slopes[i] + 2) < std::abs(slopes[i - 1] + 2);
    res.seconds = timer.seconds();
    res.measured = "LOGDIFF slope " + detail::fmt(fit.slope, 6) + " (rel " + detail::fmt(fit.slope / target - 1, 3) +
                   "); TVF slopes " + detail::join(slopes, 5);
    res.pass = ok_log && ok_tvf && res.seconds < 300;
    res.details.push_back("LOGDIFF: a=1, T=1, R=20, exact values at r=R; fit " + fit.str());
    res.details.push_back("TVF: eps = {4e-3, 2e-3, 1e-3}, R=2, box of mass 1, fit window [0.05, 0.3]");
    return res;
}

// 8. Relative mass for ordered pairs; blow-up family differences.
inline Result relative_mass(const Options&) {
    detail::Timer timer;
    Result res{8, "relative mass", "", "int(u-v) constant; blow-up difference constant and exact",
               "1e-5 M; 1e-12", false};
    auto pair_drift = [](const EquationSpec& spec, int N, double R, double h) {
        const auto g = RadialGrid::uniform(N, R, static_cast<int>(std::lround(R / h)));
        // identical fixed steps so both runs share time levels
        SolverConfig c;
        c.dt = 2e-3;
        c.dt_max = 2e-3;
        c.dt_growth = 1;
        c.checkpoint_times = {0.5, 1.0};
        const auto v0 = init_state(g, [](double r) { return detail::smooth_bump(r, 1.0); });
        const auto u0 = init_state(g, [](double r) { return detail::smooth_bump(r, 1.0) + detail::smooth_bump(r, 0.5, 0.5); });
        const auto A = run(spec, u0, g, c), B = run(spec, v0, g, c);
        const auto rm = relative_mass_series(A, B);
        double drift = 0;
        for (double m : rm.series.masses) drift = std::max(drift, std::abs(m - rm.series.masses.front()));
        return drift / A.ledger.masses.front();
    };
    const double d_pme = pair_drift(EquationSpec::pme(2, 1), 1, 10, 0.01);
    const double d_fde = pair_drift(EquationSpec::pme(0.75, 3), 3, 80, 0.05);

    const int N = 2;
    const double C1 = 2, C2 = 1, T = 1;
    const auto U1 = make_solution(SolutionKind::PMEBlowupM2, EquationSpec::pme(2, N), 0, {.C = C1, .T = T});
    const auto U2 = make_solution(SolutionKind::PMEBlowupM2, EquationSpec::pme(2, N), 0, {.C = C2, .T = T});
    double spread = 0, law_err = 0;
    for (double t : {0.0, 0.5, 0.9, 0.99}) {
        double lo = INFINITY, hi = -INFINITY;
        for (int i = 0; i <= 500; ++i) {
            const double r = 5.0 * i / 500;
            const double d = evaluate(U1, r, t) - evaluate(U2, r, t);
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        spread = std::max(spread, hi - lo);
        const double law = difference_law(C1, C2, N, T, t);
        law_err = std::max(law_err, std::abs(0.5 * (lo + hi) - law) / law);
    }
    res.seconds = timer.seconds();
    res.measured = "drift PME " + detail::fmt(d_pme, 3) + ", FDE " + detail::fmt(d_fde, 3) + "; blow-up spread " +
                   detail::fmt(spread, 3) + ", law error " + detail::fmt(law_err, 3);
    res.pass = d_pme <= 1e-5 && d_fde <= 1e-5 && spread < 1e-12 && law_err < 1e-12 && res.seconds < 180;
    res.details.push_back("PME m=2 N=1 R=10; FDE m=0.75 N=3 R=80; u0 = v0 + bump; Dirichlet0; t in [0,1]");
    res.details.push_back("blow-up: N=2, C1=2, C2=1, T=1, r in [0,5], t in {0, 0.5, 0.9, 0.99}");
    return res;
}

// 9. Fractional kernel: Poisson match and tail exponents.
inline Result fractional_kernel_check(const Options&) {
    detail::Timer timer;
    Result res{9, "fractional kernel", "", "s=1/2 N=1 equals the Poisson kernel; tail slope -(N+2s)", "1e-4; 0.1",
               false};
    const auto K = fractional_kernel(0.5, 1);
    double sup = 0;
    for (int i = 0; i <= 20000; ++i) {
        const double x = 10.0 * i / 20000;
        sup = std::max(sup, std::abs((*K)(x) - 1 / (std::numbers::pi * (x * x + 1))));
    }
    bool ok = sup <= 1e-4;
    double worst_slope = 0;
    for (int N : {1, 2})
        for (double s : {0.3, 0.5, 0.7}) {
            const auto k = fractional_kernel(s, N);
            const double R = k->table_radius();
            std::vector<double> r, u;
            for (int i = 0; i <= 200; ++i) {
                r.push_back(0.1 * R * std::pow(10.0, i / 200.0));
                u.push_back((*k)(r.back()));
            }
            const double slope = tail_exponent(r, u, {0.1 * R, R});
            const double err = std::abs(slope + N + 2 * s);
            worst_slope = std::max(worst_slope, err);
            ok = ok && err <= 0.1;
            res.details.push_back("N=" + std::to_string(N) + " s=" + detail::fmt(s, 2) + " slope " +
                                  detail::fmt(slope, 5) + " (target " + detail::fmt(-(N + 2 * s), 3) + ") mass " +
                                  detail::fmt(k->diagnostics().raw_mass, 10));
        }
    res.seconds = timer.seconds();
    res.measured = "Poisson sup error " + detail::fmt(sup, 3) + ", worst tail slope error " + detail::fmt(worst_slope, 3);
    res.pass = ok && res.seconds < 120;
    return res;
}

// 10. Concentration scans and the 1D p -> 1 limit.
inline Result concentration_scans(const Options&) {
    detail::Timer timer;
    Result res{10, "concentration scans", "",
               "C down, K up along eps halvings; outer-mass ratio within 30% of 2^{-(N-2)/4}; PLE 1D bound and flux -> 2",
               "30%; 1%; 10%", false};
    const int N = 3;
    std::vector<double> eps;
    for (int k = 0; k < 7; ++k) eps.push_back(2e-3 * std::pow(0.5, k));
    const auto pme = concentration_scan(ScanFamily::PME, N, eps);
    const auto ple = concentration_scan(ScanFamily::PLE, N, eps);
    bool mono = true;
    for (const auto* rows : {&pme, &ple})
        for (std::size_t i = 1; i < rows->size(); ++i)
            mono = mono && (*rows)[i].log_C < (*rows)[i - 1].log_C && (*rows)[i].log_K > (*rows)[i - 1].log_K;
    const double target = std::pow(2.0, -(N - 2) / 4.0);
    std::vector<double> ratios;
    bool ok_ratio = true;
    for (std::size_t i = 1; i < pme.size(); ++i) {
        ratios.push_back(pme[i].outer_mass_frac / pme[i - 1].outer_mass_frac);
        ok_ratio = ok_ratio && std::abs(ratios.back() / target - 1) <= 0.3;
    }
    bool ok_mass = true;
    for (const auto* rows : {&pme, &ple})
        for (const auto& r : *rows) ok_mass = ok_mass && std::abs(r.mass_check - 1) <= 1e-6;

    const auto p1 = ple1d_limit_scan({0.05, 0.02, 0.01});
    bool ok_bound = true;
    for (const auto& r : p1) ok_bound = ok_bound && r.bound_ratio_max <= 1.01;
    const double flux = p1.back().flux[1];  // R = 5, t = 0.2 at the smallest eps
    bool flux_trend = true;
    for (std::size_t i = 1; i < p1.size(); ++i) flux_trend = flux_trend && p1[i].flux[1] > p1[i - 1].flux[1];
    const bool ok_flux = std::abs(flux / 2 - 1) <= 0.1 && flux_trend;
    res.seconds = timer.seconds();
    res.measured = "monotone " + std::string(mono ? "yes" : "no") + "; PME N=3 outer ratios " + detail::join(ratios, 4) +
                   "; PLE1D max bound ratio " + detail::fmt(p1.back().bound_ratio_max, 6) + ", flux " +
                   detail::fmt(flux, 4);
    res.expected = "C down, K up along eps halvings; outer-mass ratio within 30% of 2^{-(N-2)/4} = " +
                   detail::fmt(target, 4) + "; PLE 1D bound ratio <= 1.01 and flux -> 2";
    res.pass = mono && ok_ratio && ok_mass && ok_bound && ok_flux && res.seconds < 120;
    res.details.push_back("eps = 2e-3 * 2^-k, k = 0..6 (asymptotic regime; for eps >~ 5e-3 log C is not yet monotone)");
    std::vector<double> lit;
    for (double r : ratios) lit.push_back(r / std::pow(2.0, -(N - 2) / 2.0));
    res.details.push_back("ratios relative to 2^{-(N-2)/2} (measured asymptote): " + detail::join(lit, 4));
    std::vector<double> fl;
    for (const auto& r : p1) fl.push_back(r.flux[1]);
    res.details.push_back("PLE1D eps = {0.05, 0.02, 0.01}: flux at R=5, t=0.2 " + detail::join(fl, 4));
    return res;
}

// 11. Sharp constants replaced by trend tests.
inline Result trend_replacements(const Options&) {
    detail::Timer timer;
    Result res{11, "sharp constants (trend tests)", "",
               "trends only: superlinear log(1/sup u); extinction exponent 1-m; c8, c9 rising toward 2/9, 1/3",
               "r2 > 0.9; exponent within 5%; monotone", false};
    res.details.push_back("sharp constants of the critical decay rate, of the extinction bound and single-point "
                          "values of the log C, log K asymptotics are not reproducible at desk scale; "
                          "replaced by the trend tests below");
    // (a) critical FDE sup decay
    const auto spec = EquationSpec::pme(1.0 / 3, 3);
    const auto g = RadialGrid::uniform(3, 80, 1600);
    SolverConfig c;
    c.dt = 1e-5;
    c.dt_max = 0.005;
    c.checkpoint_times = {1.3};
    const auto rec = run(spec, init_state(g, [](double r) { return detail::smooth_bump(r, 10.0); }), g, c);
    const auto fit = sup_decay_check(rec, {0.3, 1.3});
    std::vector<double> y;
    for (double t : {0.3, 0.6, 0.9, 1.2}) {
        std::size_t i = 0;
        while (i + 1 < rec.ledger.size() && rec.ledger.times[i] < t) ++i;
        y.push_back(-std::log(rec.ledger.sup_u[i]));
    }
    bool convex = true;
    for (std::size_t i = 2; i < y.size(); ++i) convex = convex && (y[i] - y[i - 1]) > (y[i - 1] - y[i - 2]);
    const bool ok_a = fit.r2 > 0.9 && convex;
    // (b) extinction exponent from lambda = 1, 2, 4
    std::vector<double> ll, lt;
    for (double lam : {1.0, 2.0, 4.0}) {
        const auto T = detail::fde_extinction(0.2, lam, 20, 400, 2e-3);
        if (T) {
            ll.push_back(std::log(lam));
            lt.push_back(std::log(*T));
        }
    }
    const double expo = ll.size() == 3 ? least_squares(ll, lt).slope : std::nan("");
    const bool ok_b = std::abs(expo / 0.8 - 1) <= 0.05;
    // (c) asymptotic constants drift toward their limits
    std::vector<double> eps;
    for (int k = 0; k < 7; ++k) eps.push_back(2e-3 * std::pow(0.5, k));
    const auto rows = concentration_scan(ScanFamily::PME, 3, eps);
    bool ok_c = true;
    std::vector<double> c8, c9;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        c8.push_back(rows[i].c8);
        c9.push_back(rows[i].c9);
        if (i > 0) ok_c = ok_c && c8[i] > c8[i - 1] && c8[i] < 2.0 / 9 && c9[i] > c9[i - 1] && c9[i] < 1.0 / 3;
    }
    res.seconds = timer.seconds();
    res.measured = "sup-decay r2 " + detail::fmt(fit.r2, 4) + (convex ? " convex" : " not convex") +
                   "; extinction exponent " + detail::fmt(expo, 4) + "; c8 " + detail::join(c8, 3) + ", c9 " +
                   detail::join(c9, 3);
    res.pass = ok_a && ok_b && ok_c;
    res.details.push_back("(a) FDE m=1/3 N=3 R=80, data 10 (1-r^2)_+^2, fit of log(1/sup u) on t^3 over [0.3, 1.3]: " +
                          fit.str());
    res.details.push_back("(b) FDE m=0.2 N=3, extinction time vs data scale lambda in {1,2,4}: expected exponent 0.8");
    res.details.push_back("(c) eps log C / log eps and eps log K / log(1/eps) along the PME N=3 scan");
    return res;
}

struct Entry {
    int id;
    bool fast;
    std::function<Result(const Options&)> fn;
};

inline std::vector<Entry> registry() {
    return {{1, true, exponent_identities},       {2, true, closed_form_residuals},
            {3, true, normalization_crosscheck},  {4, false, barenblatt_regression},
            {5, false, conservation_dichotomy},   {6, false, critical_conservation},
            {7, false, singular_mass_loss},       {8, false, relative_mass},
            {9, true, fractional_kernel_check},   {10, true, concentration_scans},
            {11, true, trend_replacements}};
}

// Runs one criterion; any exception becomes a failure.
inline Result run_guarded(const Entry& e, const Options& opt) {
    detail::Timer timer;
    try {
        return e.fn(opt);
    } catch (const std::exception& ex) {
        Result r;
        r.id = e.id;
        r.name = "criterion " + std::to_string(e.id);
        r.measured = std::string("exception: ") + ex.what();
        r.pass = false;
        r.seconds = timer.seconds();
        return r;
    }
}

inline std::string line(const Result& r) {
    std::ostringstream os;
    os << (r.pass ? "[PASS] " : "[FAIL] ") << r.id << ". " << r.name << " | measured: " << r.measured
       << " | expected: " << r.expected << " | tol: " << r.tolerance << " | " << detail::fmt(r.seconds, 3) << " s";
    return os.str();
}

}  // namespace masslab::acceptance
