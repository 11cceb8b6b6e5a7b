#pragma once
// Explicit solutions: constructors, evaluation, mass integrals, residual checks.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "masslab/equation.hpp"
#include "masslab/errors.hpp"
#include "masslab/frac_kernel.hpp"
#include "masslab/frac_operator.hpp"
#include "masslab/grid.hpp"
#include "masslab/quadrature.hpp"
#include "masslab/regimes.hpp"
#include "masslab/special.hpp"

namespace masslab {

enum class SolutionKind {
    Gaussian,
    BarenblattPME,
    BarenblattFDE,
    BarenblattPLE,
    DNLEProfile,
    FracKernelHalf,
    FracKernelNumeric,
    LogDiffExplicit,
    FracExplicitS12,
    PMEBlowupM2
};

inline const char* to_string(SolutionKind k) {
    switch (k) {
        case SolutionKind::Gaussian: return "Gaussian";
        case SolutionKind::BarenblattPME: return "BarenblattPME";
        case SolutionKind::BarenblattFDE: return "BarenblattFDE";
        case SolutionKind::BarenblattPLE: return "BarenblattPLE";
        case SolutionKind::DNLEProfile: return "DNLEProfile";
        case SolutionKind::FracKernelHalf: return "FracKernelHalf";
        case SolutionKind::FracKernelNumeric: return "FracKernelNumeric";
        case SolutionKind::LogDiffExplicit: return "LogDiffExplicit";
        case SolutionKind::FracExplicitS12: return "FracExplicitS12";
        case SolutionKind::PMEBlowupM2: return "PMEBlowupM2";
    }
    return "?";
}

inline SolutionKind solution_kind_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(SolutionKind::PMEBlowupM2); ++i) {
        const auto k = static_cast<SolutionKind>(i);
        std::string a = to_string(k), b = s;
        auto lower = [](std::string& x) {
            for (auto& c : x) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            x.erase(std::remove(x.begin(), x.end(), '_'), x.end());
        };
        lower(a);
        lower(b);
        if (a == b) return k;
    }
    throw ValidationError("unknown solution kind '" + s + "'");
}

// Profile (C + sigma k y^theta)_+^gamma in the similarity variable y = r t^{-beta}.
struct ProfileShape {
    double alpha = 0, beta = 0;
    double theta = 2, gamma = 0, k = 0;
    double log_k = 0;  // k overflows as p -> 1
    int sigma = 0;  // +1 decaying (fast), -1 compact support (slow)
};

struct Extras {
    std::optional<double> C;  // free constant where the kind has one (PMEBlowupM2)
    std::optional<double> T;  // extinction / blow-up time
    std::optional<double> a;  // LogDiffExplicit width
};

struct ClosedFormSolution {
    SolutionKind kind = SolutionKind::Gaussian;
    EquationSpec spec;
    double C = 0;
    double k = 0;
    double mass = 0;  // total mass (at t=0 for loss kinds; NaN when infinite)
    std::optional<double> T;
    std::optional<double> a;
    ProfileShape shape;
    std::shared_ptr<const FractionalKernel> kernel;

    // Structured one-line record for reproducibility.
    std::string record() const {
        std::ostringstream os;
        os.precision(17);
        os << "kind=" << to_string(kind) << " spec=" << spec.describe() << " C=" << C << " k=" << k
           << " M=" << mass;
        if (T) os << " T=" << *T;
        if (a) os << " a=" << *a;
        return os.str();
    }
};

struct MassLaw {
    enum class Kind { Constant, LinearLoss, Extinct };
    Kind kind = Kind::Constant;
    double M0 = 0;
    double rate = 0;
    std::optional<double> T;

    double at(double t) const {
        switch (kind) {
            case Kind::Constant: return M0;
            case Kind::LinearLoss: return std::max(0.0, M0 - rate * t);
            case Kind::Extinct: return T && t < *T ? M0 : 0.0;
        }
        return M0;
    }
    static MassLaw linear_loss(double M0, double rate) { return {Kind::LinearLoss, M0, rate, M0 / rate}; }
};

// One-dimensional TVF mass law M(t) = (M0 - 2t)_+.
inline MassLaw tvf_mass_law(double M0) { return MassLaw::linear_loss(M0, 2.0); }

namespace detail {

inline bool is_profile_kind(SolutionKind k) {
    return k == SolutionKind::BarenblattPME || k == SolutionKind::BarenblattFDE ||
           k == SolutionKind::BarenblattPLE || k == SolutionKind::DNLEProfile;
}

inline void require_family(const EquationSpec& spec, Family f, SolutionKind k) {
    if (spec.family != f)
        throw RangeError(std::string(to_string(k)) + " requires family " + to_string(f) + ", got " +
                         to_string(spec.family));
}

}  // namespace detail

// Exponents and profile constants of the self-similar kinds; validates the range.
inline ProfileShape profile_shape(SolutionKind kind, const EquationSpec& spec) {
    spec.validate();
    const double n = spec.N;
    ProfileShape sh;
    switch (kind) {
        case SolutionKind::BarenblattPME: {
            detail::require_family(spec, Family::PME_FDE, kind);
            const double m = spec.mv();
            if (!(m > 1)) throw RangeError("BarenblattPME requires m > 1");
            sh.beta = 1 / (n * (m - 1) + 2);
            sh.alpha = n * sh.beta;
            sh.theta = 2;
            sh.gamma = 1 / (m - 1);
            sh.k = sh.beta * (m - 1) / (2 * m);
            sh.log_k = std::log(sh.k);
            sh.sigma = -1;
            return sh;
        }
        case SolutionKind::BarenblattFDE: {
            detail::require_family(spec, Family::PME_FDE, kind);
            const double m = spec.mv(), mc = (n - 2) / n;
            if (!(m < 1)) throw RangeError("BarenblattFDE requires m < 1");
            if (!(m > mc) || detail::near(m, mc)) throw RangeError("BarenblattFDE requires m > m_c = (N-2)/N");
            sh.beta = 1 / (n * (m - 1) + 2);
            sh.alpha = n * sh.beta;
            sh.theta = 2;
            sh.gamma = -1 / (1 - m);
            sh.k = sh.beta * (1 - m) / (2 * m);
            sh.log_k = std::log(sh.k);
            sh.sigma = 1;
            return sh;
        }
        case SolutionKind::BarenblattPLE: {
            detail::require_family(spec, Family::PLE, kind);
            const double p = spec.pv(), pc = 2 * n / (n + 1);
            if (detail::near(p, 2.0)) throw RangeError("BarenblattPLE requires p != 2 (use Gaussian)");
            if (!(p > pc) || detail::near(p, pc)) throw RangeError("BarenblattPLE requires p > p_c = 2N/(N+1)");
            const double lambda = n * (p - 2) + p;
            sh.beta = 1 / lambda;
            sh.alpha = n * sh.beta;
            sh.theta = p / (p - 1);
            const double kb = std::pow(sh.beta, 1 / (p - 1));  // lambda^{-1/(p-1)}
            if (p > 2) {
                sh.gamma = (p - 1) / (p - 2);
                sh.k = (p - 2) / p * kb;
                sh.sigma = -1;
            } else {
                sh.gamma = -(p - 1) / (2 - p);
                sh.k = (2 - p) / p * kb;
                sh.sigma = 1;
            }
            sh.log_k = std::log(std::abs(p - 2) / p) + std::log(sh.beta) / (p - 1);
            return sh;
        }
        case SolutionKind::DNLEProfile: {
            detail::require_family(spec, Family::DNLE, kind);
            const double m = spec.mv(), p = spec.pv();
            const auto ex = dnle_exponents(m, p, spec.N);
            const double mp = m * (p - 1);
            if (detail::near(mp, 1.0)) throw RangeError("DNLEProfile requires m(p-1) != 1");
            sh.alpha = ex.alpha;
            sh.beta = ex.beta;
            sh.theta = p / (p - 1);
            const double kb = std::pow(sh.beta, 1 / (p - 1));
            if (mp < 1) {
                sh.gamma = -(p - 1) / (1 - mp);
                sh.k = (1 - mp) / (m * p) * kb;
                sh.sigma = 1;
            } else {
                sh.gamma = (p - 1) / (mp - 1);
                sh.k = (mp - 1) / (m * p) * kb;
                sh.sigma = -1;
            }
            sh.log_k = std::log(std::abs(1 - mp) / (m * p)) + std::log(sh.beta) / (p - 1);
            return sh;
        }
        default: break;
    }
    throw NotApplicable(std::string(to_string(kind)) + " has no power profile");
}

// log C from the mass condition via the Beta identities (safe near critical exponents).
inline double log_normalization_beta(SolutionKind kind, const EquationSpec& spec, double M) {
    if (!(M > 0)) throw RangeError("mass must be > 0");
    const double n = spec.N;
    if (kind == SolutionKind::Gaussian) return std::log(M) - 0.5 * n * std::log(4 * std::numbers::pi);
    if (kind == SolutionKind::FracKernelHalf)
        return std::log(M) - std::log(surface_area(spec.N)) - std::log(0.5) - log_beta(0.5 * n, 0.5);
    const auto sh = profile_shape(kind, spec);
    const double nt = n / sh.theta;
    const double a = std::abs(sh.gamma);
    // mass = omega_N C^{gamma + N/theta} k^{-N/theta} B(.,.)/theta
    const double lb = sh.sigma > 0 ? log_beta(nt, a - nt) : log_beta(nt, a + 1);
    const double e = sh.gamma + nt;
    if (sh.sigma > 0 && !(a - nt > 0)) throw DivergentMass("profile mass diverges");
    return (std::log(M) - std::log(surface_area(spec.N)) + nt * sh.log_k + std::log(sh.theta) - lb) / e;
}

namespace detail {

// Radial mass of (C + sigma k r^theta)_+^gamma by adaptive quadrature.
inline double profile_mass_quadrature(const ProfileShape& sh, int N, double C) {
    auto F = [&](double r) {
        const double arg = C + sh.sigma * sh.k * std::pow(r, sh.theta);
        return arg > 0 ? std::pow(arg, sh.gamma) * std::pow(r, N - 1) : 0.0;
    };
    const double scale = std::pow(C / sh.k, 1 / sh.theta);
    quad::Result res;
    if (sh.sigma < 0) {
        res = quad::tanh_sinh(F, 0.0, scale, 1e-14);
    } else {
        // Beyond the scale the integrand is k^gamma r^{-1-q} (1 + C/(k r^theta))^gamma; the leading
        // power is integrated exactly so a slowly decaying tail (q -> 0) stays well conditioned.
        const double q = sh.theta * std::abs(sh.gamma) - N;
        if (!(q > 0)) throw DivergentMass("profile mass diverges");
        const double kg = std::pow(sh.k, sh.gamma);
        auto corr = [&](double r) {
            const double x = C / (sh.k * std::pow(r, sh.theta));
            return kg * std::pow(r, -1 - q) * std::expm1(sh.gamma * std::log1p(x));
        };
        const auto inner = quad::tanh_sinh(F, 0.0, scale, 1e-14);
        const auto outer = quad::power_tail(corr, scale, q + sh.theta, 1e-14);
        res = {inner.value + outer.value + kg * std::pow(scale, -q) / q, inner.error + outer.error};
    }
    quad::require(res, 1e-9, "profile mass");
    return surface_area(N) * res.value;
}

}  // namespace detail

struct Normalization {
    double C = 0;
    double C_beta = 0;
    double C_quadrature = 0;
    double rel_diff = 0;
};

// C solving the mass condition, by the Beta identity and by quadrature plus root finding.
inline Normalization normalization_check(SolutionKind kind, const EquationSpec& spec, double M) {
    Normalization out;
    const double logC = log_normalization_beta(kind, spec, M);
    out.C_beta = std::exp(logC);
    if (kind == SolutionKind::Gaussian) {
        auto f = [](double r) { return std::exp(-r * r / 4); };
        const auto res = quad::gauss_kronrod(f, 0.0, 80.0, 1e-15);
        out.C_quadrature = M / (surface_area(spec.N) * quad::gauss_kronrod([&](double r) {
                                    return f(r) * std::pow(r, spec.N - 1);
                                }, 0.0, 80.0, 1e-15).value);
        (void)res;
    } else if (kind == SolutionKind::FracKernelHalf) {
        auto f = [&](double r) { return std::pow(1 + r * r, -0.5 * (spec.N + 1)) * std::pow(r, spec.N - 1); };
        const auto in = quad::tanh_sinh(f, 0.0, 1.0, 1e-14);
        const auto tl = quad::power_tail(f, 1.0, 1.0, 1e-14);
        out.C_quadrature = M / (surface_area(spec.N) * (in.value + tl.value));
    } else {
        const auto sh = profile_shape(kind, spec);
        auto g = [&](double lc) {
            return std::log(detail::profile_mass_quadrature(sh, spec.N, std::exp(lc))) - std::log(M);
        };
        // Bracket around the Beta value; the quadrature route never sees its result otherwise.
        double lo = logC - 2, hi = logC + 2;
        const double e = sh.gamma + spec.N / sh.theta;
        const bool increasing = e > 0;
        auto glo = g(lo), ghi = g(hi);
        for (int i = 0; i < 60 && glo * ghi > 0; ++i) {
            lo -= 4;
            hi += 4;
            glo = g(lo);
            ghi = g(hi);
        }
        if (glo * ghi > 0) throw NumericalError("normalization: could not bracket the mass condition");
        (void)increasing;
        boost::uintmax_t iters = 200;
        auto tol = [](double x, double y) { return std::abs(x - y) <= 1e-14 * std::max(1.0, std::abs(x)); };
        const auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, tol, iters);
        out.C_quadrature = std::exp(0.5 * (r.first + r.second));
    }
    out.C = out.C_beta;
    out.rel_diff = std::abs(out.C_quadrature - out.C_beta) / out.C_beta;
    return out;
}

inline double normalization_constant(SolutionKind kind, const EquationSpec& spec, double M) {
    const auto n = normalization_check(kind, spec, M);
    if (!(n.rel_diff <= 1e-8))
        throw NumericalError("normalization: Beta value " + std::to_string(n.C_beta) + " and quadrature value " +
                             std::to_string(n.C_quadrature) + " disagree");
    return n.C;
}

inline ClosedFormSolution make_solution(SolutionKind kind, const EquationSpec& spec, double M, Extras ex = {}) {
    spec.validate();
    ClosedFormSolution sol;
    sol.kind = kind;
    sol.spec = spec;
    sol.mass = M;
    const double n = spec.N;
    const bool loss_kind = kind == SolutionKind::LogDiffExplicit || kind == SolutionKind::FracExplicitS12;
    // Loss kinds accept T in place of M; the blow-up family has no finite mass.
    if (kind != SolutionKind::PMEBlowupM2 && !(loss_kind && ex.T) && !(M > 0)) throw RangeError("mass must be > 0");
    switch (kind) {
        case SolutionKind::Gaussian:
            detail::require_family(spec, Family::HE, kind);
            sol.C = M * std::pow(4 * std::numbers::pi, -0.5 * n);
            sol.k = 0.25;
            sol.shape = {0.5 * n, 0.5, 2, 0, 0.25, 0};
            return sol;
        case SolutionKind::BarenblattPME:
        case SolutionKind::BarenblattFDE:
        case SolutionKind::BarenblattPLE:
        case SolutionKind::DNLEProfile:
            sol.shape = profile_shape(kind, spec);
            sol.k = sol.shape.k;
            sol.C = normalization_constant(kind, spec, M);
            return sol;
        case SolutionKind::FracKernelHalf:
            if (spec.family != Family::FHE || !detail::near(spec.sv(), 0.5))
                throw RangeError("FracKernelHalf requires FHE with s = 1/2");
            sol.C = std::exp(log_normalization_beta(kind, spec, M));
            sol.k = 1;
            sol.shape = {n, 1, 2, -(n + 1) / 2, 1, 1};
            return sol;
        case SolutionKind::FracKernelNumeric:
            detail::require_family(spec, Family::FHE, kind);
            if (spec.N > 2) throw RangeError("FracKernelNumeric requires N <= 2");
            sol.kernel = fractional_kernel(spec.sv(), spec.N);
            sol.C = M;
            sol.k = 1;
            sol.shape = {n / (2 * spec.sv()), 1 / (2 * spec.sv()), 2, 0, 1, 1};
            return sol;
        case SolutionKind::LogDiffExplicit: {
            detail::require_family(spec, Family::LOGDIFF, kind);
            const double a = ex.a.value_or(1.0);
            if (!(a > 0)) throw RangeError("LogDiffExplicit requires a > 0");
            sol.a = a;
            sol.T = ex.T.value_or(M / (8 * std::numbers::pi));
            if (ex.T) sol.mass = 8 * std::numbers::pi * *sol.T;
            if (!(*sol.T > 0)) throw RangeError("LogDiffExplicit requires T > 0");
            sol.C = 8 * a * a;
            sol.k = a * a;
            return sol;
        }
        case SolutionKind::FracExplicitS12:
            if (spec.family != Family::FPME || spec.N != 1 || !detail::near(spec.sv(), 0.5))
                throw RangeError("FracExplicitS12 requires FPME with N=1, s=1/2 (m -> 0 limit, logarithmic)");
            sol.T = ex.T.value_or(M / (2 * std::numbers::pi));
            if (ex.T) sol.mass = 2 * std::numbers::pi * *sol.T;
            if (!(*sol.T > 0)) throw RangeError("FracExplicitS12 requires T > 0");
            sol.C = 2;
            sol.k = 1;
            return sol;
        case SolutionKind::PMEBlowupM2:
            detail::require_family(spec, Family::PME_FDE, kind);
            if (!detail::near(spec.mv(), 2.0)) throw RangeError("PMEBlowupM2 requires m = 2");
            sol.C = ex.C.value_or(1.0);
            if (!(sol.C > 0)) throw RangeError("PMEBlowupM2 requires C > 0");
            sol.T = ex.T.value_or(1.0);
            sol.k = 1 / (4 * (n + 2));
            sol.mass = std::numeric_limits<double>::infinity();
            return sol;
    }
    throw NotApplicable("unhandled kind");
}

inline void check_time(const ClosedFormSolution& sol, double t) {
    switch (sol.kind) {
        case SolutionKind::LogDiffExplicit:
        case SolutionKind::FracExplicitS12:
            if (t > *sol.T) throw TimeWindowError("t beyond extinction time T");
            return;
        case SolutionKind::PMEBlowupM2:
            if (!(t < *sol.T)) throw TimeWindowError("t must precede blow-up time T");
            return;
        default:
            if (!(t > 0)) throw TimeWindowError("source-type solutions need t > 0");
    }
}

// Value at radius r = |x| and time t.
inline double evaluate(const ClosedFormSolution& sol, double r, double t) {
    check_time(sol, t);
    r = std::abs(r);
    const auto& sh = sol.shape;
    switch (sol.kind) {
        case SolutionKind::Gaussian:
            return sol.C * std::pow(t, -sh.alpha) * std::exp(-r * r / (4 * t));
        case SolutionKind::BarenblattPME:
        case SolutionKind::BarenblattFDE:
        case SolutionKind::BarenblattPLE:
        case SolutionKind::DNLEProfile: {
            const double y = r * std::pow(t, -sh.beta);
            const double arg = sol.C + sh.sigma * sh.k * std::pow(y, sh.theta);
            if (arg <= 0) return 0.0;
            return std::pow(t, -sh.alpha) * std::pow(arg, sh.gamma);
        }
        case SolutionKind::FracKernelHalf: {
            const double y = r / t;
            return sol.C * std::pow(t, -sh.alpha) * std::pow(1 + y * y, sh.gamma);
        }
        case SolutionKind::FracKernelNumeric:
            return sol.C * std::pow(t, -sh.alpha) * (*sol.kernel)(r * std::pow(t, -sh.beta));
        case SolutionKind::LogDiffExplicit: {
            const double a2 = *sol.a * *sol.a, d = a2 + r * r;
            return 8 * a2 * (*sol.T - t) / (d * d);
        }
        case SolutionKind::FracExplicitS12:
            return 2 * (*sol.T - t) / (1 + r * r);
        case SolutionKind::PMEBlowupM2: {
            const double tau = *sol.T - t;
            return sol.k * r * r / tau + sol.C * std::pow(tau, -sol.spec.N / (sol.spec.N + 2.0));
        }
    }
    return 0.0;
}

inline double evaluate(const ClosedFormSolution& sol, std::span<const double> x, double t) {
    double r2 = 0;
    for (double v : x) r2 += v * v;
    return evaluate(sol, std::sqrt(r2), t);
}

// Support radius at time t (infinity for positive solutions).
inline double support_radius(const ClosedFormSolution& sol, double t) {
    if (detail::is_profile_kind(sol.kind) && sol.shape.sigma < 0)
        return std::pow(sol.C / sol.shape.k, 1 / sol.shape.theta) * std::pow(t, sol.shape.beta);
    return std::numeric_limits<double>::infinity();
}

inline MassLaw mass_law(const ClosedFormSolution& sol) {
    switch (sol.kind) {
        case SolutionKind::LogDiffExplicit: return MassLaw::linear_loss(sol.mass, 8 * std::numbers::pi);
        case SolutionKind::FracExplicitS12: return MassLaw::linear_loss(sol.mass, 2 * std::numbers::pi);
        case SolutionKind::PMEBlowupM2: throw DivergentMass("blow-up family has infinite mass");
        default: return {MassLaw::Kind::Constant, sol.mass, 0, std::nullopt};
    }
}

// Total mass at time t by radial quadrature of evaluate, tails by their power decay.
inline double mass(const ClosedFormSolution& sol, double t) {
    check_time(sol, t);
    const int N = sol.spec.N;
    auto integrand = [&](double r) { return evaluate(sol, r, t) * std::pow(r, N - 1); };
    quad::Result res;
    double scale = 1, q = 0;
    switch (sol.kind) {
        case SolutionKind::PMEBlowupM2:
            throw DivergentMass("PMEBlowupM2 grows like |x|^2: mass is infinite");
        case SolutionKind::Gaussian:
            res = quad::gauss_kronrod(integrand, 0.0, 80 * std::sqrt(t), 1e-14);
            quad::require(res, 1e-10, "mass");
            return surface_area(N) * res.value;
        case SolutionKind::LogDiffExplicit:
            if (t == *sol.T) return 0.0;
            scale = *sol.a;
            q = 2;
            break;
        case SolutionKind::FracExplicitS12:
            if (t == *sol.T) return 0.0;
            q = 1;
            break;
        case SolutionKind::FracKernelHalf:
            scale = t;
            q = 1;
            break;
        case SolutionKind::FracKernelNumeric:
            scale = std::pow(t, sol.shape.beta);
            q = 2 * sol.spec.sv();
            break;
        default: {
            const auto& sh = sol.shape;
            scale = std::pow(sol.C / sh.k, 1 / sh.theta) * std::pow(t, sh.beta);
            if (sh.sigma < 0) {
                res = quad::tanh_sinh(integrand, 0.0, scale, 1e-14);
                quad::require(res, 1e-9, "mass");
                return surface_area(N) * res.value;
            }
            q = sh.theta * std::abs(sh.gamma) - N;
        }
    }
    if (!(q > 0)) throw DivergentMass("tail decay too slow: mass integral diverges");
    const auto in = quad::tanh_sinh(integrand, 0.0, scale, 1e-13);
    const auto out = quad::power_tail(integrand, scale, q, 1e-13);
    res = {in.value + out.value, in.error + out.error};
    quad::require(res, 1e-9, "mass");
    return surface_area(N) * res.value;
}

// Exact sup-norm of the difference of two blow-up family members.
inline double difference_law(double C1, double C2, int N, double T, double t) {
    if (!(C1 > C2 && C2 > 0)) throw RangeError("difference_law requires C1 > C2 > 0");
    if (!(t < T)) throw TimeWindowError("difference_law requires t < T");
    return (C1 - C2) * std::pow(T - t, -N / (N + 2.0));
}

// Blow-up rate mu of ||U1 - U2||_p for the m > 2 family: ||.||_p ~ (T-t)^{-mu}.
inline double lp_blowup_exponent(double m, int N, double p) {
    if (!(m > 2)) throw RangeError("L^p blow-up exponent needs m > 2");
    const double pstar = N * (m - 1) / (2 * (m - 2));
    if (!(p > pstar && p > 1)) throw RangeError("need p > p* = N(m-1)/(2(m-2)) and p > 1");
    const double beta = 1 / (N * (m - 1) + 2);
    return N * beta * (p - 1) / p;
}

namespace detail {

// Radial divergence r^{1-N} (r^{N-1} Phi)_r by centred differences of step h.
template <class Flux>
double radial_div(Flux&& phi, double r, double h, int N) {
    const double rp = r + h / 2, rm = r - h / 2;
    return (std::pow(rp, N - 1) * phi(rp) - std::pow(rm, N - 1) * phi(rm)) / (std::pow(r, N - 1) * h);
}

}  // namespace detail

// max |u_t - RHS(u)| over interior grid points, centred differences of step h in x and t.
inline double residual_norm(const ClosedFormSolution& sol, const RadialGrid& grid, double t) {
    grid.validate();
    if (grid.N != sol.spec.N) throw ValidationError("residual: grid dimension differs from the solution");
    const double h = grid.spacing();
    auto u = [&](double r, double tt) { return evaluate(sol, r, tt); };
    auto dudt = [&](double r) { return (u(r, t + h) - u(r, t - h)) / (2 * h); };

    const bool fractional = sol.kind == SolutionKind::FracKernelHalf || sol.kind == SolutionKind::FracKernelNumeric ||
                            sol.kind == SolutionKind::FracExplicitS12;
    if (fractional) {
        if (grid.N != 1) throw NotApplicable("fractional residual is implemented for N=1");
        const FracGrid fg{1, grid.R, 2 * grid.cells};
        const FracOperator op(sol.spec.sv(), fg);
        const bool logarithmic = sol.kind == SolutionKind::FracExplicitS12;
        auto A = [&](double x) { return logarithmic ? std::log(u(x, t)) : u(x, t); };
        std::vector<double> f(fg.size());
        std::vector<int> rows;
        for (int i = 0; i < fg.n; ++i) {
            f[i] = A(fg.center(i));
            if (std::abs(fg.center(i)) <= 0.5 * grid.R) rows.push_back(i);
        }
        if (rows.size() < 8) throw ResolutionError("residual: too few interior points");
        const auto Lf = op.apply_analytic(f, A, rows);
        double worst = 0;
        for (std::size_t j = 0; j < rows.size(); ++j)
            worst = std::max(worst, std::abs(dudt(fg.center(rows[j])) + Lf[j]));
        return worst;
    }

    // Local kinds: evaluation window away from the axis and any free boundary.
    double rho = grid.R;
    if (detail::is_profile_kind(sol.kind) && sol.shape.sigma < 0)
        rho = std::min(rho, support_radius(sol, t - h));
    const double lo = std::max(0.1 * rho, 2 * h), hi = 0.9 * rho - h;
    if (h > 0.05 * rho) throw ResolutionError("residual: grid spacing too coarse for the profile");

    const int N = grid.N;
    std::function<double(double)> phi;
    switch (sol.kind) {
        case SolutionKind::Gaussian:
            phi = [&](double r) { return (u(r + h / 2, t) - u(r - h / 2, t)) / h; };
            break;
        case SolutionKind::BarenblattPME:
        case SolutionKind::BarenblattFDE:
        case SolutionKind::PMEBlowupM2: {
            const double m = sol.spec.mv();
            phi = [&, m](double r) { return (std::pow(u(r + h / 2, t), m) - std::pow(u(r - h / 2, t), m)) / h; };
            break;
        }
        case SolutionKind::LogDiffExplicit:
            phi = [&](double r) { return (std::log(u(r + h / 2, t)) - std::log(u(r - h / 2, t))) / h; };
            break;
        case SolutionKind::BarenblattPLE: {
            const double p = sol.spec.pv();
            phi = [&, p](double r) {
                const double g = (u(r + h / 2, t) - u(r - h / 2, t)) / h;
                return std::pow(std::abs(g), p - 2) * g;
            };
            break;
        }
        case SolutionKind::DNLEProfile: {
            const double m = sol.spec.mv(), p = sol.spec.pv();
            phi = [&, m, p](double r) {
                const double g = (std::pow(u(r + h / 2, t), m) - std::pow(u(r - h / 2, t), m)) / h;
                return std::pow(std::abs(g), p - 2) * g;
            };
            break;
        }
        default: throw NotApplicable("no residual for this kind");
    }
    double worst = 0;
    int count = 0;
    for (int i = 0; i < grid.cells; ++i) {
        const double r = grid.center(i);
        if (r < lo || r > hi) continue;
        worst = std::max(worst, std::abs(dudt(r) - detail::radial_div(phi, r, h, N)));
        ++count;
    }
    if (count < 8) throw ResolutionError("residual: too few interior points");
    return worst;
}

// Samples of the solution at the cell centres, as CSV rows (r, t, u).
inline std::string sample_csv(const ClosedFormSolution& sol, const RadialGrid& grid, double t) {
    std::ostringstream os;
    os.precision(17);
    os << "r,t,u\n";
    for (int i = 0; i < grid.cells; ++i) os << grid.center(i) << ',' << t << ',' << evaluate(sol, grid.center(i), t) << '\n';
    return os.str();
}

}  // namespace masslab
