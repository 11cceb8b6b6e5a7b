#pragma once
// Post-processing of runs: rate fits, tail exponents, relative mass, sup decay.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "masslab/closed_forms.hpp"
#include "masslab/errors.hpp"
#include "masslab/grid_solver.hpp"

namespace masslab {

struct Window {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool contains(double t) const { return t >= lo && t <= hi; }
};

struct RateFit {
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    Window window;
    std::size_t samples = 0;

    std::string str() const {
        std::ostringstream os;
        os.precision(12);
        os << "slope=" << slope << " intercept=" << intercept << " r2=" << r2 << " window=[" << window.lo << ','
           << window.hi << "] n=" << samples;
        return os.str();
    }
};

// Ordinary least squares y = a + b x.
inline RateFit least_squares(std::span<const double> x, std::span<const double> y, Window w = {}) {
    if (x.size() != y.size()) throw ValidationError("fit: x and y differ in length");
    const std::size_t n = x.size();
    if (n < 2) throw ValidationError("fit: need at least two samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) throw ValidationError("fit: abscissae are all equal");
    RateFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy == 0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
    f.window = w;
    f.samples = n;
    return f;
}

inline double l1_distance(const RadialGrid& grid, const Field& f, const ClosedFormSolution& ref) {
    return l1_distance(grid, f, ref, f.time);
}

// Least-squares slope of mass against time inside the window.
inline RateFit loss_rate(const MassLedger& L, Window w) {
    std::vector<double> t, m;
    for (std::size_t i = 0; i < L.size(); ++i)
        if (w.contains(L.times[i])) {
            t.push_back(L.times[i]);
            m.push_back(L.masses[i]);
        }
    if (t.size() < 10) throw ValidationError("loss_rate: need at least 10 ledger samples in the window");
    return least_squares(t, m, w);
}

// Slope of log u against log r for samples with r in the fit range.
inline double tail_exponent(std::span<const double> r, std::span<const double> u, Window range) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!range.contains(r[i])) continue;
        if (!(u[i] > 0) || !(r[i] > 0)) throw ValidationError("tail_exponent: nonpositive value in the fit range");
        lx.push_back(std::log(r[i]));
        ly.push_back(std::log(u[i]));
    }
    if (lx.size() < 3) throw ValidationError("tail_exponent: fewer than 3 samples in the fit range");
    return least_squares(lx, ly, range).slope;
}

inline double tail_exponent(const RadialGrid& g, const Field& f, Window range) {
    std::vector<double> r(g.cells);
    for (int i = 0; i < g.cells; ++i) r[i] = g.center(i);
    return tail_exponent(r, f.values, range);
}

// Power-law check: the local slope over the lower and upper halves of the range must agree.
// Exponential decay shows up as a steepening slope and is rejected.
struct TailCheck {
    double slope = 0;
    double slope_lo = 0, slope_hi = 0;
    bool power_law = false;
};

inline TailCheck tail_check(std::span<const double> r, std::span<const double> u, Window range, double tol = 0.1) {
    const double mid = std::sqrt(range.lo * range.hi);
    TailCheck c;
    c.slope = tail_exponent(r, u, range);
    c.slope_lo = tail_exponent(r, u, {range.lo, mid});
    c.slope_hi = tail_exponent(r, u, {mid, range.hi});
    c.power_law = std::abs(c.slope_hi - c.slope_lo) <= tol;
    return c;
}

inline void require_matching(const RunRecord& a, const RunRecord& b) {
    if (!(a.spec == b.spec)) throw ValidationError("runs have different equations");
    if (a.grid.N != b.grid.N || a.grid.r_faces != b.grid.r_faces) throw ValidationError("runs have different grids");
    if (a.ledger.times != b.ledger.times) throw ValidationError("runs have different time levels");
}

struct RelativeMass {
    MassLedger series;  // masses hold int (u - v); outflux holds the difference of outfluxes
    // |Y(t)^{1-m} - Y(s)^{1-m}| / |t - s| between successive levels, Y the mass of u inside r < R_cut
    std::vector<double> herrero_pierre;
};

// Entrywise difference of two runs on identical time levels.
inline RelativeMass relative_mass_series(const RunRecord& a, const RunRecord& b, std::optional<double> R_cut = {}) {
    require_matching(a, b);
    RelativeMass out;
    const auto& A = a.ledger;
    const auto& B = b.ledger;
    for (std::size_t i = 0; i < A.size(); ++i)
        out.series.push(A.times[i], A.masses[i] - B.masses[i], A.boundary_outflux[i] - B.boundary_outflux[i],
                        A.clipped[i] - B.clipped[i], std::max(A.sup_u[i], B.sup_u[i]), std::nan(""));
    if (R_cut && a.spec.family == Family::PME_FDE && a.spec.mv() < 1) {
        const double m = a.spec.mv();
        std::vector<double> Y;
        std::vector<double> T;
        for (const auto& f : a.checkpoints) {
            double y = 0;
            for (int i = 0; i < a.grid.cells; ++i)
                if (a.grid.center(i) < *R_cut) y += a.grid.volume(i) * f.values[i];
            Y.push_back(y);
            T.push_back(f.time);
        }
        for (std::size_t i = 1; i < Y.size(); ++i)
            out.herrero_pierre.push_back(std::abs(std::pow(Y[i], 1 - m) - std::pow(Y[i - 1], 1 - m)) /
                                         std::abs(T[i] - T[i - 1]));
    }
    return out;
}

// Fit of log(1/sup u) against t^{N/(N-2)} over the window.
inline RateFit sup_decay_check(const RunRecord& rec, Window w) {
    const int N = rec.spec.N;
    if (N <= 2) throw ValidationError("sup_decay_check needs N >= 3");
    const auto& L = rec.ledger;
    if (L.size() == 0 || L.sup_u.back() <= 0 || (std::isfinite(w.hi) && L.times.back() < w.hi))
        throw ValidationError("sup_decay_check: run extinguished or ended before the window closed");
    std::vector<double> x, y;
    const double e = static_cast<double>(N) / (N - 2);
    for (std::size_t i = 0; i < L.size(); ++i) {
        if (!w.contains(L.times[i])) continue;
        if (!(L.sup_u[i] > 0)) throw ValidationError("sup_decay_check: extinction inside the window");
        x.push_back(std::pow(L.times[i], e));
        y.push_back(-std::log(L.sup_u[i]));
    }
    if (x.size() < 10) throw ValidationError("sup_decay_check: need at least 10 samples in the window");
    return least_squares(x, y, w);
}

}  // namespace masslab
