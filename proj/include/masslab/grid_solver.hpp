#pragma once
// Radially symmetric finite-volume solver for HE, PME/FDE, PLE, LOGDIFF and regularized TVF.
//
// Conservative form u_t = r^{1-N} (r^{N-1} Phi)_r on cells of a RadialGrid, backward Euler
// in time. Potential families (Phi = A(u)_r) are solved for w = A(u); gradient families
// (Phi = psi(u_r)) for u. Both Jacobians are symmetric tridiagonal.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "masslab/closed_forms.hpp"
#include "masslab/equation.hpp"
#include "masslab/errors.hpp"
#include "masslab/grid.hpp"
#include "masslab/quadrature.hpp"

namespace masslab {

enum class OuterBC { Dirichlet0, ZeroFlux, DirichletFn };

inline const char* to_string(OuterBC b) {
    switch (b) {
        case OuterBC::Dirichlet0: return "dirichlet0";
        case OuterBC::ZeroFlux: return "zeroflux";
        case OuterBC::DirichletFn: return "dirichlet_fn";
    }
    return "?";
}

struct SolverConfig {
    double dt = 1e-3;
    double dt_min = 1e-12;
    double dt_max = 0.05;
    double dt_growth = 1.25;
    OuterBC outer_bc = OuterBC::Dirichlet0;
    double reg_eps = 1e-8;
    double newton_tol = 1e-11;  // absolute, on the l1 norm of the mass-unit residual
    int newton_max_iter = 40;
    std::vector<double> checkpoint_times;
    std::function<double(double)> boundary_value;  // u(R,t) for DirichletFn

    void validate() const {
        if (!(dt > 0)) throw ValidationError("solver: dt must be > 0");
        if (!(dt_min > 0 && dt_min <= dt && dt <= dt_max)) throw ValidationError("solver: need dt_min <= dt <= dt_max");
        if (!(dt_growth >= 1)) throw ValidationError("solver: dt_growth must be >= 1");
        if (!(reg_eps >= 0)) throw ValidationError("solver: reg_eps must be >= 0");
        if (!(newton_tol > 0)) throw ValidationError("solver: newton_tol must be > 0");
        if (newton_max_iter < 1) throw ValidationError("solver: newton_max_iter must be >= 1");
        if (checkpoint_times.empty()) throw ValidationError("solver: no checkpoint times");
        if (!std::is_sorted(checkpoint_times.begin(), checkpoint_times.end()))
            throw ValidationError("solver: checkpoint times must be sorted");
        if (outer_bc == OuterBC::DirichletFn && !boundary_value)
            throw ValidationError("solver: DirichletFn needs a boundary function");
    }
};

struct MassLedger {
    std::vector<double> times;
    std::vector<double> masses;
    std::vector<double> boundary_outflux;  // cumulative mass through r = R
    std::vector<double> clipped;           // cumulative mass added by clipping negatives
    std::vector<double> sup_u;
    std::vector<double> l1_to_reference;  // NaN without a reference

    std::size_t size() const { return times.size(); }
    void push(double t, double m, double out, double clip, double sup, double l1) {
        times.push_back(t);
        masses.push_back(m);
        boundary_outflux.push_back(out);
        clipped.push_back(clip);
        sup_u.push_back(sup);
        l1_to_reference.push_back(l1);
    }
    // max_i |M_i + outflux_i - clipped_i - M_0|
    double closure_error() const {
        double e = 0;
        for (std::size_t i = 0; i < size(); ++i)
            e = std::max(e, std::abs(masses[i] + boundary_outflux[i] - clipped[i] - masses[0]));
        return e;
    }
};

struct RunRecord {
    EquationSpec spec;
    SolverConfig config;
    RadialGrid grid;
    std::vector<Field> checkpoints;
    MassLedger ledger;
    int steps = 0;
    int rejected = 0;
};

namespace detail {

inline bool potential_family(Family f) {
    return f == Family::HE || f == Family::PME_FDE || f == Family::LOGDIFF;
}

inline void require_local(const EquationSpec& spec) {
    switch (spec.family) {
        case Family::HE:
        case Family::PME_FDE:
        case Family::PLE:
        case Family::LOGDIFF:
        case Family::TVF: return;
        default: throw NotApplicable(std::string("grid solver does not handle family ") + to_string(spec.family));
    }
}

// w = A(u) and its inverse u = beta(w), extended linearly below A(0) so Newton iterates stay defined.
struct Potential {
    enum class Kind { Linear, Power, Log } kind = Kind::Linear;
    double m = 1, eps = 0, em = 0, w0 = 0, slope0 = 1;

    static Potential make(const EquationSpec& spec, double eps) {
        Potential P;
        if (spec.family == Family::HE || (spec.family == Family::PME_FDE && spec.mv() == 1.0)) return P;
        if (spec.family == Family::LOGDIFF) {
            if (!(eps > 0)) throw ValidationError("logarithmic diffusion needs reg_eps > 0");
            P.kind = Kind::Log;
            P.eps = eps;
            P.w0 = std::log(eps);
            P.slope0 = eps;
            return P;
        }
        P.kind = Kind::Power;
        P.m = spec.mv();
        P.eps = eps;
        P.em = std::pow(eps, P.m);
        P.w0 = 0;
        if (eps == 0 && P.m < 1) throw ValidationError("fast diffusion needs reg_eps > 0");
        P.slope0 = eps > 0 ? std::pow(eps, 1 - P.m) / P.m : 0.0;
        return P;
    }
    double A(double u) const {
        switch (kind) {
            case Kind::Linear: return u;
            case Kind::Log: return std::log(std::max(u, 0.0) + eps);
            case Kind::Power: return std::pow(std::max(u, 0.0) + eps, m) - em;
        }
        return u;
    }
    double beta(double w) const {
        switch (kind) {
            case Kind::Linear: return w;
            case Kind::Log: return w >= w0 ? std::exp(w) - eps : slope0 * (w - w0);
            case Kind::Power: return w >= 0 ? std::pow(w + em, 1 / m) - eps : slope0 * w;
        }
        return w;
    }
    double dbeta(double w) const {
        switch (kind) {
            case Kind::Linear: return 1;
            case Kind::Log: return w >= w0 ? std::exp(w) : slope0;
            case Kind::Power: return w >= 0 ? std::pow(w + em, 1 / m - 1) / m : slope0;
        }
        return 1;
    }
};

// Regularized p-Laplacian flux psi(g) = (g^2 + eps^2)^{(p-2)/2} g.
struct GradientFlux {
    double p = 2, eps2 = 0;
    double psi(double g) const { return p == 2 ? g : std::pow(g * g + eps2, 0.5 * (p - 2)) * g; }
    double dpsi(double g) const {
        if (p == 2) return 1;
        const double q = g * g + eps2;
        return std::pow(q, 0.5 * (p - 4)) * ((p - 1) * g * g + eps2);
    }
};

// Thomas algorithm for a symmetric tridiagonal system (diag d, off-diagonal e, e[i] couples i-1,i).
inline void solve_tridiagonal(std::vector<double> d, const std::vector<double>& e, std::vector<double>& rhs) {
    const std::size_t n = d.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double f = e[i] / d[i - 1];
        d[i] -= f * e[i];
        rhs[i] -= f * rhs[i - 1];
    }
    rhs[n - 1] /= d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - e[i + 1] * rhs[i + 1]) / d[i];
}

}  // namespace detail

struct StepResult {
    Field field;
    double outflux = 0;  // mass leaving through r = R during the step
    double clipped = 0;
    int iterations = 0;
};

// Cell averages of data by per-cell adaptive quadrature.
inline Field init_state(const RadialGrid& grid, const std::function<double(double)>& data, double t0 = 0) {
    grid.validate();
    Field f;
    f.time = t0;
    f.values.resize(grid.cells);
    for (int i = 0; i < grid.cells; ++i) {
        const double a = grid.r_faces[i], b = grid.r_faces[i + 1];
        for (double r : {a, 0.5 * (a + b), b})
            if (data(r) < 0) throw ValidationError("initial data must be nonnegative");
        auto g = [&](double r) { return data(r) * surface_area(grid.N) * std::pow(r, grid.N - 1); };
        const auto res = quad::gauss_kronrod(g, a, b, 1e-13, 12);
        f.values[i] = res.value / grid.volume(i);
        if (f.values[i] < 0) throw ValidationError("initial data must be nonnegative");
    }
    return f;
}

inline Field init_state(const RadialGrid& grid, const ClosedFormSolution& sol, double t0) {
    return init_state(grid, [&](double r) { return evaluate(sol, r, t0); }, t0);
}

// One backward-Euler step of size dt from state.
inline StepResult step(const Field& state, const EquationSpec& spec, const RadialGrid& grid, const SolverConfig& cfg,
                       double dt) {
    detail::require_local(spec);
    const int n = grid.cells;
    if (static_cast<int>(state.values.size()) != n) throw ValidationError("step: field does not match grid");
    for (double v : state.values)
        if (!std::isfinite(v)) throw NumericalError("step: state contains non-finite values");
    if (!(dt > 0)) throw ValidationError("step: dt must be > 0");

    const double t_new = state.time + dt;
    std::vector<double> V(n), Af(n + 1), d(n + 1);
    for (int i = 0; i < n; ++i) V[i] = grid.volume(i);
    for (int j = 1; j < n; ++j) {
        Af[j] = grid.face_area(j);
        d[j] = grid.center(j) - grid.center(j - 1);
    }
    Af[n] = grid.face_area(n);
    d[n] = grid.R - grid.center(n - 1);
    const bool outer_open = cfg.outer_bc != OuterBC::ZeroFlux;
    const double u_b = cfg.outer_bc == OuterBC::DirichletFn ? cfg.boundary_value(t_new) : 0.0;
    const auto& uo = state.values;

    const bool potential = detail::potential_family(spec.family);
    const auto P = potential ? detail::Potential::make(spec, cfg.reg_eps) : detail::Potential{};
    detail::GradientFlux G;
    if (!potential) {
        G.p = spec.family == Family::TVF ? 1.0 : spec.pv();
        G.eps2 = cfg.reg_eps * cfg.reg_eps;
        if (G.p < 2 && !(cfg.reg_eps > 0)) throw ValidationError("singular p-Laplacian needs reg_eps > 0");
    }
    const double x_b = potential ? P.A(u_b) : u_b;

    // Unknown x is w (potential) or u (gradient); u(x), face fluxes and residual follow.
    auto to_u = [&](double x) { return potential ? P.beta(x) : x; };
    auto flux = [&](double g) { return potential ? g : G.psi(g); };
    auto dflux = [&](double g) { return potential ? 1.0 : G.dpsi(g); };
    auto residual = [&](const std::vector<double>& x, std::vector<double>& F, double& outflow) {
        for (int i = 0; i < n; ++i) F[i] = V[i] * (to_u(x[i]) - uo[i]);
        for (int j = 1; j < n; ++j) {
            const double q = dt * Af[j] * flux((x[j] - x[j - 1]) / d[j]);
            F[j - 1] -= q;
            F[j] += q;
        }
        outflow = 0;
        if (outer_open) {
            const double q = dt * Af[n] * flux((x_b - x[n - 1]) / d[n]);
            F[n - 1] -= q;
            outflow = -q;
        }
    };
    auto norm1 = [](const std::vector<double>& F) {
        double s = 0;
        for (double v : F) s += std::abs(v);
        return s;
    };
    auto norm2sq = [](const std::vector<double>& F) {
        double s = 0;
        for (double v : F) s += v * v;
        return s;
    };

    std::vector<double> x(n), F(n), diag(n), off(n), delta(n), xt(n), Ft(n);
    for (int i = 0; i < n; ++i) x[i] = potential ? P.A(uo[i]) : uo[i];
    double outflow = 0;
    residual(x, F, outflow);
    int it = 0;
    while (norm1(F) > cfg.newton_tol) {
        if (++it > cfg.newton_max_iter) throw StepRejected("Newton did not converge within the iteration limit");
        for (int i = 0; i < n; ++i) {
            diag[i] = V[i] * (potential ? P.dbeta(x[i]) : 1.0);
            off[i] = 0;
        }
        for (int j = 1; j < n; ++j) {
            const double c = dt * Af[j] * dflux((x[j] - x[j - 1]) / d[j]) / d[j];
            diag[j - 1] += c;
            diag[j] += c;
            off[j] = -c;
        }
        if (outer_open) diag[n - 1] += dt * Af[n] * dflux((x_b - x[n - 1]) / d[n]) / d[n];
        for (int i = 0; i < n; ++i) delta[i] = -F[i];
        detail::solve_tridiagonal(diag, off, delta);
        // Armijo backtracking on |F|^2.
        const double phi0 = norm2sq(F);
        double lambda = 1;
        double out_t = 0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k) {
            for (int i = 0; i < n; ++i) xt[i] = x[i] + lambda * delta[i];
            residual(xt, Ft, out_t);
            const double phi = norm2sq(Ft);
            if (std::isfinite(phi) && phi <= (1 - 1e-4 * lambda) * phi0) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) throw StepRejected("Newton line search failed");
        x.swap(xt);
        F.swap(Ft);
        outflow = out_t;
    }

    StepResult res;
    res.iterations = it;
    res.outflux = outflow;
    res.field.time = t_new;
    res.field.values.resize(n);
    for (int i = 0; i < n; ++i) {
        double u = to_u(x[i]);
        if (!std::isfinite(u)) throw NumericalError("step: non-finite value after solve");
        if (u < 0) {
            res.clipped += -u * V[i];
            u = 0;
        }
        res.field.values[i] = u;
    }
    return res;
}

// Radial L1 distance between cell averages and a closed form at time t.
inline double l1_distance(const RadialGrid& grid, const Field& f, const ClosedFormSolution& ref, double t) {
    double s = 0;
    for (int i = 0; i < grid.cells; ++i) {
        const double ui = f.values[i];
        auto g = [&](double r) { return std::abs(ui - evaluate(ref, r, t)) * std::pow(r, grid.N - 1); };
        s += quad::gauss5(g, grid.r_faces[i], grid.r_faces[i + 1]);
    }
    return surface_area(grid.N) * s;
}

// Integrates to the last checkpoint with adaptive dt; every accepted step enters the ledger.
inline RunRecord run(const EquationSpec& spec, const Field& initial, const RadialGrid& grid, const SolverConfig& cfg,
                     const ClosedFormSolution* reference = nullptr) {
    spec.validate();
    grid.validate();
    cfg.validate();
    detail::require_local(spec);
    RunRecord rec{spec, cfg, grid, {}, {}, 0, 0};
    Field cur = initial;
    double outflux = 0, clipped = 0;
    auto ledger_row = [&]() {
        const double l1 = reference ? l1_distance(grid, cur, *reference, cur.time) : std::nan("");
        rec.ledger.push(cur.time, field_mass(grid, cur), outflux, clipped, field_sup(cur), l1);
    };
    ledger_row();
    double dt = cfg.dt;
    std::size_t next = 0;
    while (next < cfg.checkpoint_times.size() && cfg.checkpoint_times[next] <= cur.time + 1e-14) {
        rec.checkpoints.push_back(cur);
        ++next;
    }
    while (next < cfg.checkpoint_times.size()) {
        const double target = cfg.checkpoint_times[next];
        double h = std::min(dt, target - cur.time);
        // Avoid a sliver step just before a checkpoint.
        if (target - cur.time - h < 1e-3 * h) h = target - cur.time;
        StepResult sr;
        try {
            sr = step(cur, spec, grid, cfg, h);
        } catch (const StepRejected&) {
            ++rec.rejected;
            dt = 0.5 * h;
            if (dt < cfg.dt_min) throw NumericalError("time step fell below dt_min at t=" + std::to_string(cur.time));
            continue;
        }
        if (h == target - cur.time) sr.field.time = target;
        cur = std::move(sr.field);
        outflux += sr.outflux;
        clipped += sr.clipped;
        ++rec.steps;
        ledger_row();
        if (sr.iterations <= 4 && h >= dt * 0.999) dt = std::min(cfg.dt_max, dt * cfg.dt_growth);
        while (next < cfg.checkpoint_times.size() && cfg.checkpoint_times[next] <= cur.time + 1e-14) {
            rec.checkpoints.push_back(cur);
            ++next;
        }
    }
    return rec;
}

// First ledger time with sup u below threshold.
inline std::optional<double> extinction_time(const RunRecord& rec, double threshold) {
    for (std::size_t i = 0; i < rec.ledger.size(); ++i)
        if (rec.ledger.sup_u[i] < threshold) return rec.ledger.times[i];
    return std::nullopt;
}

}  // namespace masslab
