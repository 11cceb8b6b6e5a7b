#pragma once
// EquationSpec: one PDE instance, a family tag plus its parameters.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "masslab/errors.hpp"

namespace masslab {

enum class Family { HE, PME_FDE, PLE, FHE, FPME, FPLE, LOGDIFF, TVF, DNLE, ANISO_PME, ANISO_PLE };

inline const char* to_string(Family f) {
    switch (f) {
        case Family::HE: return "HE";
        case Family::PME_FDE: return "PME_FDE";
        case Family::PLE: return "PLE";
        case Family::FHE: return "FHE";
        case Family::FPME: return "FPME";
        case Family::FPLE: return "FPLE";
        case Family::LOGDIFF: return "LOGDIFF";
        case Family::TVF: return "TVF";
        case Family::DNLE: return "DNLE";
        case Family::ANISO_PME: return "ANISO_PME";
        case Family::ANISO_PLE: return "ANISO_PLE";
    }
    return "?";
}

inline Family family_from_string(const std::string& s) {
    std::string k;
    for (char c : s) k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (k == "he" || k == "heat") return Family::HE;
    if (k == "pme" || k == "fde" || k == "pme_fde") return Family::PME_FDE;
    if (k == "ple") return Family::PLE;
    if (k == "fhe") return Family::FHE;
    if (k == "fpme") return Family::FPME;
    if (k == "fple") return Family::FPLE;
    if (k == "logdiff") return Family::LOGDIFF;
    if (k == "tvf") return Family::TVF;
    if (k == "dnle") return Family::DNLE;
    if (k == "aniso_pme") return Family::ANISO_PME;
    if (k == "aniso_ple") return Family::ANISO_PLE;
    throw ValidationError("unknown family '" + s + "'");
}

inline bool needs_m(Family f) {
    return f == Family::PME_FDE || f == Family::FPME || f == Family::DNLE;
}
inline bool needs_p(Family f) {
    return f == Family::PLE || f == Family::FPLE || f == Family::DNLE;
}
inline bool is_fractional(Family f) {
    return f == Family::FHE || f == Family::FPME || f == Family::FPLE;
}
inline bool is_anisotropic(Family f) {
    return f == Family::ANISO_PME || f == Family::ANISO_PLE;
}

struct EquationSpec {
    Family family = Family::HE;
    std::optional<double> m;
    std::optional<double> p;
    std::optional<double> s;
    int N = 1;
    std::vector<double> exps;

    static EquationSpec heat(int N) { return {Family::HE, {}, {}, {}, N, {}}; }
    static EquationSpec pme(double m, int N) { return {Family::PME_FDE, m, {}, {}, N, {}}; }
    static EquationSpec ple(double p, int N) { return {Family::PLE, {}, p, {}, N, {}}; }
    static EquationSpec fhe(double s, int N) { return {Family::FHE, {}, {}, s, N, {}}; }
    static EquationSpec fpme(double m, double s, int N) { return {Family::FPME, m, {}, s, N, {}}; }
    static EquationSpec fple(double p, double s, int N) { return {Family::FPLE, {}, p, s, N, {}}; }
    static EquationSpec logdiff() { return {Family::LOGDIFF, {}, {}, {}, 2, {}}; }
    static EquationSpec tvf() { return {Family::TVF, {}, {}, {}, 1, {}}; }
    static EquationSpec dnle(double m, double p, int N) { return {Family::DNLE, m, p, {}, N, {}}; }
    static EquationSpec aniso_pme(std::vector<double> mi) {
        int n = static_cast<int>(mi.size());
        return {Family::ANISO_PME, {}, {}, {}, n, std::move(mi)};
    }
    static EquationSpec aniso_ple(std::vector<double> pi) {
        int n = static_cast<int>(pi.size());
        return {Family::ANISO_PLE, {}, {}, {}, n, std::move(pi)};
    }

    double mv() const { return m.value(); }
    double pv() const { return p.value(); }
    double sv() const { return s.value(); }

    // Throws ValidationError when parameters do not match the family.
    void validate() const {
        auto bad = [&](const std::string& why) {
            throw ValidationError(std::string(to_string(family)) + ": " + why);
        };
        if (N < 1) bad("N must be >= 1");
        if (needs_m(family) != m.has_value()) bad(needs_m(family) ? "m required" : "m not allowed");
        if (needs_p(family) != p.has_value()) bad(needs_p(family) ? "p required" : "p not allowed");
        if (is_fractional(family) != s.has_value()) bad(is_fractional(family) ? "s required" : "s not allowed");
        if (is_anisotropic(family) == exps.empty()) bad(is_anisotropic(family) ? "exps required" : "exps not allowed");
        if (m && !(std::isfinite(*m) && *m > 0)) bad("m must be > 0");
        if (p && !(std::isfinite(*p) && *p > 1)) bad("p must be > 1");
        if (s && !(*s > 0 && *s < 1)) bad("s must lie in (0,1)");
        if (is_anisotropic(family) && static_cast<int>(exps.size()) != N) bad("exps must have length N");
        for (double e : exps)
            if (!std::isfinite(e) || e <= 0) bad("exps must be positive");
        if (family == Family::LOGDIFF && N != 2) bad("LOGDIFF is posed in N=2");
        if (family == Family::TVF && N != 1) bad("TVF is posed in N=1");
    }

    std::string describe() const {
        std::ostringstream os;
        os.precision(17);
        os << to_string(family) << "(N=" << N;
        if (m) os << ", m=" << *m;
        if (p) os << ", p=" << *p;
        if (s) os << ", s=" << *s;
        if (!exps.empty()) {
            os << ", exps=[";
            for (std::size_t i = 0; i < exps.size(); ++i) os << (i ? "," : "") << exps[i];
            os << "]";
        }
        os << ")";
        return os.str();
    }

    bool operator==(const EquationSpec&) const = default;
};

}  // namespace masslab
