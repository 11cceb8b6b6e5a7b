#pragma once
// Exponent algebra: critical exponents, self-similar exponents, regimes.

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "masslab/equation.hpp"
#include "masslab/errors.hpp"

namespace masslab {

enum class Regime { Slow, Linear, GoodFast, Critical, VeryFast };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::Slow: return "Slow";
        case Regime::Linear: return "Linear";
        case Regime::GoodFast: return "GoodFast";
        case Regime::Critical: return "Critical";
        case Regime::VeryFast: return "VeryFast";
    }
    return "?";
}

struct SimilarityExponents {
    double alpha = 0;
    double beta = 0;
    std::optional<std::vector<double>> sigmas;
};

struct RegimeReport {
    Regime regime = Regime::Linear;
    double critical_value = std::numeric_limits<double>::quiet_NaN();  // NaN: no critical value
    std::optional<SimilarityExponents> exponents;
    bool conserves_mass = true;
    std::string note;
};

enum class AnisoKind { PME, PLE };

namespace detail {

inline bool near(double a, double b) {
    return std::abs(a - b) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(b));
}

// Position of x relative to a threshold, with the boundary snapped.
inline int side(double x, double c) {
    if (near(x, c)) return 0;
    return x > c ? 1 : -1;
}

inline double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace detail

// Sentinel NaN for families with no critical exponent (HE, FHE, LOGDIFF, TVF).
inline double critical_exponent(Family family, int N, std::optional<double> s = {}) {
    if (N < 1) throw ValidationError("N must be >= 1");
    if (is_fractional(family) != s.has_value())
        throw ValidationError(is_fractional(family) ? "s required for fractional family"
                                                    : "s given for local family");
    if (s && !(*s > 0 && *s < 1)) throw ValidationError("s must lie in (0,1)");
    const double n = N;
    switch (family) {
        case Family::PME_FDE: return (n - 2) / n;
        case Family::PLE: return 2 * n / (n + 1);
        case Family::FPME: return (n - 2 * *s) / n;
        case Family::FPLE: return 2 * n / (n + *s);
        case Family::HE:
        case Family::FHE:
        case Family::LOGDIFF:
        case Family::TVF: return std::numeric_limits<double>::quiet_NaN();
        default: break;
    }
    throw NotApplicable(std::string("no scalar critical exponent for ") + to_string(family));
}

// DNLE u_t = div(|grad u^m|^{p-2} grad u^m).
inline SimilarityExponents dnle_exponents(double m, double p, int N) {
    if (!(m > 0) || !(p > 1) || N < 1) throw ValidationError("DNLE needs m>0, p>1, N>=1");
    const double d = m * (p - 1) - 1 + p / N;
    if (detail::side(m * (p - 1) + p / N, 1.0) <= 0)
        throw NoFiniteMassSelfSimilar("m(p-1)+p/N <= 1: on or below the critical line");
    const double alpha = 1 / d;
    return {alpha, alpha / N, std::nullopt};
}

inline SimilarityExponents anisotropic_exponents(AnisoKind kind, std::span<const double> exps, int N) {
    if (N < 1 || static_cast<int>(exps.size()) != N)
        throw ValidationError("exps must have length N");
    const double n = N;
    std::vector<double> sig(exps.size());
    double alpha = 0;
    if (kind == AnisoKind::PME) {
        for (double mi : exps)
            if (!(mi > 0 && mi < 1)) throw PreconditionFailed("H1", "every m_i must lie in (0,1)");
        const double mbar = detail::mean(exps);
        if (detail::side(mbar, (n - 2) / n) <= 0)
            throw PreconditionFailed("H2", "mean(m_i) must exceed (N-2)/N");
        alpha = n / (n * (mbar - 1) + 2);
        for (std::size_t i = 0; i < exps.size(); ++i) sig[i] = 1 / n + (mbar - exps[i]) / 2;
    } else {
        for (double pi : exps)
            if (!(pi > 1 && pi < 2)) throw PreconditionFailed("H1p", "every p_i must lie in (1,2)");
        double inv = 0;
        for (double pi : exps) inv += 1 / pi;
        if (detail::side(inv, (n + 1) / 2) >= 0)
            throw PreconditionFailed("H2p", "sum of 1/p_i must be below (N+1)/2");
        const double pbar = n / inv;
        // a_i = sigma_i*alpha solves alpha(p_i-2) + p_i a_i = 1 with sum a_i = alpha.
        alpha = n / (pbar * (n + 1) - 2 * n);
        for (std::size_t i = 0; i < exps.size(); ++i) sig[i] = (1 / alpha + 2 - exps[i]) / exps[i];
    }
    return {alpha, alpha / n, std::move(sig)};
}

inline SimilarityExponents similarity_exponents(const EquationSpec& spec) {
    spec.validate();
    const double n = spec.N;
    auto make = [&](double denom, const char* what) {
        if (!(denom > 0) || detail::near(denom, 0.0))
            throw NoFiniteMassSelfSimilar(std::string(what) + " at or below critical value");
        return SimilarityExponents{n / denom, 1 / denom, std::nullopt};
    };
    switch (spec.family) {
        case Family::HE: return {n / 2, 0.5, std::nullopt};
        case Family::FHE: return {n / (2 * spec.sv()), 1 / (2 * spec.sv()), std::nullopt};
        case Family::PME_FDE: {
            const double m = spec.mv();
            if (detail::side(m, (n - 2) / n) <= 0) throw NoFiniteMassSelfSimilar("m <= m_c");
            return make(n * (m - 1) + 2, "m");
        }
        case Family::PLE: {
            const double p = spec.pv();
            if (detail::side(p, 2 * n / (n + 1)) <= 0) throw NoFiniteMassSelfSimilar("p <= p_c");
            return make(n * (p - 2) + p, "p");
        }
        case Family::FPME: {
            const double m = spec.mv(), s = spec.sv();
            if (detail::side(m, (n - 2 * s) / n) <= 0) throw NoFiniteMassSelfSimilar("m <= (N-2s)/N");
            return make(n * (m - 1) + 2 * s, "m");
        }
        case Family::FPLE: {
            const double p = spec.pv(), s = spec.sv();
            if (detail::side(p, 2 * n / (n + s)) <= 0) throw NoFiniteMassSelfSimilar("p <= 2N/(N+s)");
            return make(n * (p - 2) + s * p, "p");
        }
        case Family::DNLE: return dnle_exponents(spec.mv(), spec.pv(), spec.N);
        case Family::ANISO_PME: return anisotropic_exponents(AnisoKind::PME, spec.exps, spec.N);
        case Family::ANISO_PLE: return anisotropic_exponents(AnisoKind::PLE, spec.exps, spec.N);
        case Family::LOGDIFF:
        case Family::TVF:
            throw NoFiniteMassSelfSimilar(std::string(to_string(spec.family)) +
                                          " is a singular borderline family");
    }
    throw NotApplicable("unhandled family");
}

inline RegimeReport classify(const EquationSpec& spec) {
    spec.validate();
    RegimeReport rep;
    const double n = spec.N;

    // side > 0 above the linear value, < 0 below; crit compares against critical value.
    auto by_parameter = [&](double x, double linear, double crit) {
        rep.critical_value = crit;
        const int lin = detail::side(x, linear);
        if (lin > 0) rep.regime = Regime::Slow;
        else if (lin == 0) rep.regime = Regime::Linear;
        else {
            const int c = detail::side(x, crit);
            rep.regime = c > 0 ? Regime::GoodFast : (c == 0 ? Regime::Critical : Regime::VeryFast);
        }
    };

    switch (spec.family) {
        case Family::HE:
        case Family::FHE:
            rep.regime = Regime::Linear;
            break;
        case Family::PME_FDE:
            by_parameter(spec.mv(), 1.0, (n - 2) / n);
            if (spec.N == 1 && rep.regime == Regime::GoodFast) rep.note = "N=1: m_c=-1, every m in (0,1) is good fast";
            break;
        case Family::PLE:
            by_parameter(spec.pv(), 2.0, 2 * n / (n + 1));
            break;
        case Family::FPME:
            by_parameter(spec.mv(), 1.0, (n - 2 * spec.sv()) / n);
            break;
        case Family::FPLE:
            by_parameter(spec.pv(), 2.0, 2 * n / (n + spec.sv()));
            break;
        case Family::DNLE: {
            // Slow/fast split on m(p-1) vs 1; critical line m(p-1)+p/N = 1.
            const double mp = spec.mv() * (spec.pv() - 1);
            rep.critical_value = (1 - spec.pv() / n) / (spec.pv() - 1);  // critical m for this p
            const int lin = detail::side(mp, 1.0);
            if (lin > 0) rep.regime = Regime::Slow;
            else if (lin == 0) rep.regime = Regime::Linear;
            else {
                const int c = detail::side(mp + spec.pv() / n, 1.0);
                rep.regime = c > 0 ? Regime::GoodFast : (c == 0 ? Regime::Critical : Regime::VeryFast);
            }
            break;
        }
        case Family::ANISO_PME: {
            for (double mi : spec.exps)
                if (!(mi > 0 && mi < 1)) throw PreconditionFailed("H1", "every m_i must lie in (0,1)");
            const double mbar = detail::mean(spec.exps);
            rep.critical_value = (n - 2) / n;
            const int c = detail::side(mbar, rep.critical_value);
            rep.regime = c > 0 ? Regime::GoodFast : (c == 0 ? Regime::Critical : Regime::VeryFast);
            rep.note = "classified by mean(m_i)";
            break;
        }
        case Family::ANISO_PLE: {
            for (double pi : spec.exps)
                if (!(pi > 1 && pi < 2)) throw PreconditionFailed("H1p", "every p_i must lie in (1,2)");
            double inv = 0;
            for (double pi : spec.exps) inv += 1 / pi;
            rep.critical_value = 2 * n / (n + 1);
            const int c = detail::side(n / inv, rep.critical_value);
            rep.regime = c > 0 ? Regime::GoodFast : (c == 0 ? Regime::Critical : Regime::VeryFast);
            rep.note = "classified by inverse-average p";
            break;
        }
        case Family::LOGDIFF:
        case Family::TVF:
            rep.regime = Regime::Critical;
            rep.conserves_mass = false;
            rep.note = spec.family == Family::LOGDIFF
                           ? "singular borderline family: mass escapes to infinity"
                           : "singular borderline family: M(t) = M - 2t until extinction";
            return rep;
    }

    if (rep.regime == Regime::Slow || rep.regime == Regime::Linear || rep.regime == Regime::GoodFast)
        rep.exponents = similarity_exponents(spec);
    rep.conserves_mass = rep.regime != Regime::VeryFast;
    if (spec.family == Family::FPLE && rep.regime == Regime::Critical) {
        // Critical FPLE conservation is established only for s*p_c < 1.
        rep.conserves_mass = spec.sv() * rep.critical_value < 1;
        if (!rep.conserves_mass) rep.note = "critical FPLE with s*p_c >= 1: conservation not established";
    }
    return rep;
}

}  // namespace masslab
