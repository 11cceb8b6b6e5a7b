#pragma once
// Time stepping for u_t + (-Delta)^s A(u) = 0 (FHE: A(u)=u, FPME: A(u)=u^m) on a box with zero exterior.
//
// Implicit: backward Euler in w = A(u), Newton with Jacobi-preconditioned CG (matvecs by FFT).
// Explicit: forward Euler under the positivity bound dt * scale * total * A(u)/u <= cfl.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "masslab/closed_forms.hpp"
#include "masslab/frac_operator.hpp"
#include "masslab/grid_solver.hpp"

namespace masslab {

enum class FracScheme { Implicit, Explicit };

struct FracConfig {
    FracScheme scheme = FracScheme::Implicit;
    double dt = 1e-3;
    double dt_min = 1e-10;
    double dt_max = 0.05;
    double dt_growth = 1.25;
    double cfl = 0.9;
    double reg_eps = 1e-10;
    double newton_tol = 1e-11;
    int newton_max_iter = 40;
    double cg_tol = 1e-12;  // relative
    int cg_max_iter = 2000;
    std::vector<double> checkpoint_times;

    void validate() const {
        if (!(dt > 0 && dt_min > 0 && dt_min <= dt && dt <= dt_max))
            throw ValidationError("fractional solver: need 0 < dt_min <= dt <= dt_max");
        if (!(cfl > 0 && cfl <= 1)) throw ValidationError("fractional solver: cfl must lie in (0,1]");
        if (!(reg_eps >= 0 && newton_tol > 0 && cg_tol > 0)) throw ValidationError("fractional solver: bad tolerances");
        if (checkpoint_times.empty() || !std::is_sorted(checkpoint_times.begin(), checkpoint_times.end()))
            throw ValidationError("fractional solver: checkpoint times must be non-empty and sorted");
    }
};

struct FracRunRecord {
    EquationSpec spec;
    FracConfig config;
    FracGrid grid;
    std::vector<Field> checkpoints;
    MassLedger ledger;
    int steps = 0;
    int rejected = 0;
};

inline double frac_mass(const FracGrid& g, const Field& f) {
    double m = 0;
    for (double v : f.values) m += v;
    return m * g.cell_measure();
}

// Cell averages (tensor 5-point Gauss) of data(|x|).
inline Field frac_init(const FracGrid& g, const std::function<double(double)>& data, double t0 = 0) {
    g.validate();
    static constexpr double xs[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                     0.9061798459386640};
    static constexpr double ws[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                     0.2369268850561891};
    const double h = g.h();
    Field f;
    f.time = t0;
    f.values.resize(g.size());
    for (int i = 0; i < g.n; ++i) {
        if (g.N == 1) {
            double s = 0;
            for (int a = 0; a < 5; ++a) s += ws[a] * data(std::abs(g.center(i) + 0.5 * h * xs[a]));
            f.values[i] = 0.5 * s;
        } else {
            for (int j = 0; j < g.n; ++j) {
                double s = 0;
                for (int a = 0; a < 5; ++a)
                    for (int b = 0; b < 5; ++b)
                        s += ws[a] * ws[b] * data(std::hypot(g.center(i) + 0.5 * h * xs[a], g.center(j) + 0.5 * h * xs[b]));
                f.values[static_cast<std::size_t>(i) * g.n + j] = 0.25 * s;
            }
        }
    }
    for (double v : f.values)
        if (!(v >= 0)) throw ValidationError("initial data must be nonnegative");
    return f;
}

inline Field frac_init(const FracGrid& g, const ClosedFormSolution& sol, double t0) {
    return frac_init(g, [&](double r) { return evaluate(sol, r, t0); }, t0);
}

// Midpoint L1 distance to a closed form.
inline double frac_l1_distance(const FracGrid& g, const Field& f, const ClosedFormSolution& ref, double t) {
    double s = 0;
    for (int i = 0; i < g.n; ++i) {
        if (g.N == 1) {
            s += std::abs(f.values[i] - evaluate(ref, g.center(i), t));
        } else {
            for (int j = 0; j < g.n; ++j)
                s += std::abs(f.values[static_cast<std::size_t>(i) * g.n + j] -
                              evaluate(ref, std::hypot(g.center(i), g.center(j)), t));
        }
    }
    return s * g.cell_measure();
}

namespace detail {

inline void require_fractional_evolution(const EquationSpec& spec) {
    if (spec.family != Family::FHE && spec.family != Family::FPME)
        throw NotApplicable("fractional time stepping handles FHE and FPME only");
    if (spec.N != 1 && spec.N != 2) throw NotApplicable("fractional time stepping needs N in {1,2}");
}

inline Potential frac_potential(const EquationSpec& spec, double eps) {
    if (spec.family == Family::FHE) return {};
    return Potential::make(EquationSpec::pme(spec.mv(), spec.N), eps);
}

}  // namespace detail

struct FracStepResult {
    Field field;
    double loss = 0;  // mass leaving to the exterior
    int iterations = 0;
};

class FracStepper {
public:
    FracStepper(const EquationSpec& spec, const FracGrid& grid, FracConfig cfg)
        : spec_(spec), op_(spec.sv(), grid), cfg_(std::move(cfg)), ws_(op_.workspace()) {
        detail::require_fractional_evolution(spec);
        if (grid.N != spec.N) throw ValidationError("fractional grid dimension differs from the equation");
        P_ = detail::frac_potential(spec, cfg_.reg_eps);
    }

    const FracOperator& op() const { return op_; }

    FracStepResult step(const Field& state, double dt) {
        if (state.values.size() != op_.grid().size()) throw ValidationError("fractional step: field does not match grid");
        for (double v : state.values)
            if (!std::isfinite(v)) throw NumericalError("fractional step: non-finite state");
        return cfg_.scheme == FracScheme::Explicit ? explicit_step(state, dt) : implicit_step(state, dt);
    }

    // Largest dt allowed by the explicit positivity bound.
    double explicit_limit(const Field& state) const {
        double q = 0;
        for (double u : state.values)
            if (u > 0) q = std::max(q, P_.A(u) / u);
        if (spec_.family == Family::FHE) q = 1;
        return q > 0 ? cfg_.cfl / (op_.diagonal() * q) : cfg_.dt_max;
    }

private:
    double exterior_loss(const std::vector<double>& w, double dt) const {
        const auto& E = op_.exterior();
        double s = 0;
        for (std::size_t i = 0; i < w.size(); ++i) s += E[i] * w[i];
        return dt * op_.grid().cell_measure() * op_.scale() * s;
    }

    FracStepResult explicit_step(const Field& state, double dt) {
        if (dt > explicit_limit(state) * (1 + 1e-12)) throw StepRejected("explicit step violates the CFL bound");
        const std::size_t n = state.values.size();
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = P_.A(state.values[i]);
        const auto Lw = op_.apply(w, *ws_);
        FracStepResult r;
        r.field.time = state.time + dt;
        r.field.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = state.values[i] - dt * Lw[i];
            if (u < -1e-10) throw NumericalError("fractional explicit step: negative overshoot");
            r.field.values[i] = std::max(u, 0.0);
        }
        r.loss = exterior_loss(w, dt);
        r.iterations = 1;
        return r;
    }

    // F(w) = beta(w) - u_old + dt L w, per unit cell measure.
    void residual(const std::vector<double>& w, const std::vector<double>& uo, double dt, std::vector<double>& F) {
        const auto Lw = op_.apply(w, *ws_);
        for (std::size_t i = 0; i < w.size(); ++i) F[i] = P_.beta(w[i]) - uo[i] + dt * Lw[i];
    }

    // Preconditioned CG on (D + dt L) x = b with D = diag(beta'(w)).
    void cg(const std::vector<double>& D, double dt, const std::vector<double>& b, std::vector<double>& x) {
        const std::size_t n = b.size();
        const double lii = op_.diagonal();
        std::vector<double> r = b, z(n), p(n), Ap(n);
        std::fill(x.begin(), x.end(), 0.0);
        auto apply_A = [&](const std::vector<double>& v, std::vector<double>& out) {
            const auto Lv = op_.apply(v, *ws_);
            for (std::size_t i = 0; i < n; ++i) out[i] = D[i] * v[i] + dt * Lv[i];
        };
        double bnorm = 0;
        for (double v : b) bnorm += v * v;
        bnorm = std::sqrt(bnorm);
        if (bnorm == 0) return;
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / (D[i] + dt * lii);
        p = z;
        double rz = 0;
        for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];
        for (int k = 0; k < cfg_.cg_max_iter; ++k) {
            apply_A(p, Ap);
            double pAp = 0;
            for (std::size_t i = 0; i < n; ++i) pAp += p[i] * Ap[i];
            const double a = rz / pAp;
            double rn = 0;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += a * p[i];
                r[i] -= a * Ap[i];
                rn += r[i] * r[i];
            }
            if (std::sqrt(rn) <= cfg_.cg_tol * bnorm) return;
            double rz2 = 0;
            for (std::size_t i = 0; i < n; ++i) {
                z[i] = r[i] / (D[i] + dt * lii);
                rz2 += r[i] * z[i];
            }
            const double beta = rz2 / rz;
            rz = rz2;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        throw StepRejected("CG did not converge");
    }

    FracStepResult implicit_step(const Field& state, double dt) {
        const auto& uo = state.values;
        const std::size_t n = uo.size();
        const double cm = op_.grid().cell_measure();
        std::vector<double> w(n), F(n), D(n), delta(n), wt(n), Ft(n), rhs(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = P_.A(uo[i]);
        residual(w, uo, dt, F);
        auto n1 = [&](const std::vector<double>& v) {
            double s = 0;
            for (double x : v) s += std::abs(x);
            return s * cm;
        };
        auto n2 = [](const std::vector<double>& v) {
            double s = 0;
            for (double x : v) s += x * x;
            return s;
        };
        int it = 0;
        while (n1(F) > cfg_.newton_tol) {
            if (++it > cfg_.newton_max_iter) throw StepRejected("fractional Newton did not converge");
            for (std::size_t i = 0; i < n; ++i) {
                D[i] = P_.dbeta(w[i]);
                rhs[i] = -F[i];
            }
            cg(D, dt, rhs, delta);
            const double phi0 = n2(F);
            double lambda = 1;
            bool ok = false;
            for (int k = 0; k < 40; ++k) {
                for (std::size_t i = 0; i < n; ++i) wt[i] = w[i] + lambda * delta[i];
                residual(wt, uo, dt, Ft);
                const double phi = n2(Ft);
                if (std::isfinite(phi) && phi <= (1 - 1e-4 * lambda) * phi0) {
                    ok = true;
                    break;
                }
                lambda *= 0.5;
            }
            if (!ok) throw StepRejected("fractional Newton line search failed");
            w.swap(wt);
            F.swap(Ft);
        }
        FracStepResult r;
        r.iterations = it;
        r.field.time = state.time + dt;
        r.field.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = P_.beta(w[i]);
            if (u < -1e-10) throw NumericalError("fractional implicit step: negative overshoot");
            r.field.values[i] = std::max(u, 0.0);
        }
        r.loss = exterior_loss(w, dt);
        return r;
    }

    EquationSpec spec_;
    FracOperator op_;
    FracConfig cfg_;
    std::unique_ptr<FracOperator::Workspace> ws_;
    detail::Potential P_;
};

inline FracRunRecord frac_run(const EquationSpec& spec, const Field& initial, const FracGrid& grid,
                              const FracConfig& cfg, const ClosedFormSolution* reference = nullptr) {
    spec.validate();
    cfg.validate();
    detail::require_fractional_evolution(spec);
    FracStepper stepper(spec, grid, cfg);
    FracRunRecord rec{spec, cfg, grid, {}, {}, 0, 0};
    Field cur = initial;
    double lost = 0;
    auto ledger_row = [&]() {
        const double l1 = reference ? frac_l1_distance(grid, cur, *reference, cur.time) : std::nan("");
        rec.ledger.push(cur.time, frac_mass(grid, cur), lost, 0.0, field_sup(cur), l1);
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
        if (target - cur.time - h < 1e-3 * h) h = target - cur.time;
        FracStepResult sr;
        try {
            sr = stepper.step(cur, h);
        } catch (const StepRejected&) {
            ++rec.rejected;
            dt = 0.5 * h;
            if (dt < cfg.dt_min) throw NumericalError("fractional time step fell below dt_min");
            continue;
        }
        if (h == target - cur.time) sr.field.time = target;
        cur = std::move(sr.field);
        lost += sr.loss;
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

// Fundamental solution at t=1 sampled at the cell centres (kernel export).
inline Field kernel_field(double s, const FracGrid& g) {
    const auto K = fractional_kernel(s, g.N);
    Field f;
    f.time = 1;
    f.values.resize(g.size());
    for (int i = 0; i < g.n; ++i) {
        if (g.N == 1) {
            f.values[i] = (*K)(std::abs(g.center(i)));
        } else {
            for (int j = 0; j < g.n; ++j)
                f.values[static_cast<std::size_t>(i) * g.n + j] = (*K)(std::hypot(g.center(i), g.center(j)));
        }
    }
    return f;
}

}  // namespace masslab
