#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "masslab/closed_forms.hpp"
#include "masslab/diagnostics.hpp"
#include "masslab/fractional.hpp"

using namespace masslab;

namespace {

double bump(double r, double H = 1, double a = 1) {
    const double q = 1 - (r / a) * (r / a);
    return r < a ? H * q * q : 0.0;
}

SolverConfig config(std::vector<double> cps, double dt, double dt_max, OuterBC bc = OuterBC::Dirichlet0) {
    SolverConfig c;
    c.dt = dt;
    c.dt_max = dt_max;
    c.outer_bc = bc;
    c.checkpoint_times = std::move(cps);
    return c;
}

MassLedger linear_ledger(double a, double b, int n) {
    MassLedger L;
    for (int i = 0; i < n; ++i) {
        const double t = 0.1 * i;
        L.push(t, a + b * t, 0, 0, 1, std::nan(""));
    }
    return L;
}

}  // namespace

TEST(Fit, LeastSquaresExact) {
    const std::vector<double> x = {0, 1, 2, 3}, y = {1, 3, 5, 7};
    const auto f = least_squares(x, y);
    EXPECT_DOUBLE_EQ(f.slope, 2);
    EXPECT_DOUBLE_EQ(f.intercept, 1);
    EXPECT_DOUBLE_EQ(f.r2, 1);
    EXPECT_EQ(f.samples, 4u);
    EXPECT_THROW(least_squares(std::vector<double>{1, 1}, std::vector<double>{0, 1}), ValidationError);
    EXPECT_THROW(least_squares(std::vector<double>{1}, std::vector<double>{0}), ValidationError);
}

TEST(Fit, LossRateLinear) {
    const auto L = linear_ledger(3, -8 * std::numbers::pi, 50);
    const auto f = loss_rate(L, {0.5, 4.0});
    EXPECT_NEAR(f.slope, -8 * std::numbers::pi, 1e-12);
    EXPECT_GE(f.r2, 0.0);
    EXPECT_LE(f.r2, 1.0);
    EXPECT_EQ(f.window.lo, 0.5);
    EXPECT_THROW(loss_rate(L, {0.0, 0.5}), ValidationError);  // six samples
}

TEST(Fit, LossRateConservingRun) {
    const auto spec = EquationSpec::pme(2, 1);
    const auto g = RadialGrid::uniform(1, 5, 200);
    const auto rec = run(spec, init_state(g, [](double r) { return bump(r); }), g,
                         config({1.0}, 1e-3, 0.02, OuterBC::ZeroFlux));
    EXPECT_NEAR(loss_rate(rec.ledger, {}).slope, 0.0, 1e-8);
}

TEST(Tail, SyntheticPowerLaw) {
    std::vector<double> r, u;
    for (int i = 1; i <= 100; ++i) {
        r.push_back(i);
        u.push_back(3.0 * std::pow(i, -2.7));
    }
    EXPECT_NEAR(tail_exponent(r, u, {10, 100}), -2.7, 1e-6);
    u[50] = 0;
    EXPECT_THROW(tail_exponent(r, u, {10, 100}), ValidationError);
    EXPECT_NO_THROW(tail_exponent(r, u, {60, 100}));
    EXPECT_THROW(tail_exponent(r, u, {10.5, 11.5}), ValidationError);
}

TEST(Tail, FastDiffusionProfile) {
    const auto spec = EquationSpec::pme(0.75, 3);
    const auto b = make_solution(SolutionKind::BarenblattFDE, spec, 1);
    const auto g = RadialGrid::uniform(3, 400, 4000);
    const auto f = init_state(g, b, 1.0);
    EXPECT_NEAR(tail_exponent(g, f, {100, 400}), -8.0, 0.05);
}

TEST(Tail, FractionalKernel) {
    const auto K = fractional_kernel(0.3, 1);
    std::vector<double> r, u;
    for (int i = 0; i <= 100; ++i) {
        r.push_back(100 * std::pow(10.0, i / 100.0));
        u.push_back((*K)(r.back()));
    }
    EXPECT_NEAR(tail_exponent(r, u, {100, 1000}), -1.6, 0.05);
    EXPECT_TRUE(tail_check(r, u, {100, 1000}).power_law);
}

TEST(Tail, GaussianIsNotPowerLaw) {
    std::vector<double> r, u;
    for (int i = 0; i <= 100; ++i) {
        r.push_back(2 + 0.08 * i);
        u.push_back(std::exp(-r.back() * r.back() / 4));
    }
    const auto c = tail_check(r, u, {2, 10});
    EXPECT_FALSE(c.power_law);
    EXPECT_LT(c.slope_hi, c.slope_lo);
}

TEST(Distance, SampledReferenceIsSmall) {
    const auto spec = EquationSpec::heat(2);
    const auto G = make_solution(SolutionKind::Gaussian, spec, 1);
    std::vector<double> d;
    for (int n : {100, 200}) {
        const auto g = RadialGrid::uniform(2, 10, n);
        d.push_back(l1_distance(g, init_state(g, G, 1.0), G));
    }
    // cell averages against a smooth profile: L1 ~ (h/4) int |u'| dV, and int |u'| dV = sqrt(pi)/2 here
    EXPECT_NEAR(d[0] / d[1], 2.0, 0.1);
    EXPECT_NEAR(d[1] / (0.05 / 4 * std::sqrt(std::numbers::pi) / 2), 1.0, 0.1);
}

TEST(Distance, HeatForgetsItsData) {
    const auto spec = EquationSpec::heat(1);
    const auto g = RadialGrid::uniform(1, 80, 800);
    const auto f0 = init_state(g, [](double r) { return bump(r) + bump(r - 3, 2, 0.5); }, 1.0);
    const auto G = make_solution(SolutionKind::Gaussian, spec, field_mass(g, f0));
    const auto rec = run(spec, f0, g, config({2, 5, 10, 20, 50}, 1e-3, 0.5, OuterBC::ZeroFlux), &G);
    std::vector<double> d;
    for (const auto& c : rec.checkpoints) d.push_back(l1_distance(g, c, G));
    for (std::size_t k = 1; k < d.size(); ++k) EXPECT_LT(d[k], d[k - 1]) << "checkpoint " << k;
    EXPECT_LT(d.back(), 0.1 * d.front());
}

TEST(Distance, PorousMediumApproachesBarenblatt) {
    const auto spec = EquationSpec::pme(2, 1);
    const auto g = RadialGrid::uniform(1, 20, 800);
    const auto f0 = init_state(g, [](double r) { return r < 1 ? 1.0 : 0.0; });
    const auto B = make_solution(SolutionKind::BarenblattPME, spec, field_mass(g, f0));
    const auto rec = run(spec, f0, g, config({10, 100}, 1e-3, 0.5, OuterBC::ZeroFlux));
    EXPECT_LT(l1_distance(g, rec.checkpoints[1], B), l1_distance(g, rec.checkpoints[0], B));
}

TEST(RelativeMass, IdenticalRunsGiveZero) {
    const auto spec = EquationSpec::pme(0.5, 3);
    const auto g = RadialGrid::uniform(3, 5, 100);
    auto c = config({0.2, 0.4}, 2e-3, 2e-3);
    c.dt_growth = 1;
    const auto a = run(spec, init_state(g, [](double r) { return bump(r); }), g, c);
    const auto rm = relative_mass_series(a, a, 2.0);
    for (double m : rm.series.masses) EXPECT_EQ(m, 0.0);
    EXPECT_EQ(rm.herrero_pierre.size(), 1u);
}

TEST(RelativeMass, EntrywiseDifference) {
    const auto spec = EquationSpec::pme(2, 1);
    const auto g = RadialGrid::uniform(1, 6, 200);
    auto c = config({0.5}, 2e-3, 2e-3);
    c.dt_growth = 1;
    const auto a = run(spec, init_state(g, [](double r) { return bump(r) + bump(r, 0.5, 0.5); }), g, c);
    const auto b = run(spec, init_state(g, [](double r) { return bump(r); }), g, c);
    const auto rm = relative_mass_series(a, b);
    for (std::size_t i = 0; i < rm.series.size(); ++i)
        EXPECT_NEAR(rm.series.masses[i], a.ledger.masses[i] - b.ledger.masses[i], 1e-12);
    // compact support away from r = R: nothing leaves, the difference is conserved
    EXPECT_NEAR(rm.series.masses.back(), rm.series.masses.front(), 1e-6);
}

TEST(RelativeMass, Mismatch) {
    const auto g1 = RadialGrid::uniform(1, 6, 100), g2 = RadialGrid::uniform(1, 6, 120);
    auto c = config({0.1}, 1e-2, 1e-2);
    c.dt_growth = 1;
    const auto a = run(EquationSpec::pme(2, 1), init_state(g1, [](double r) { return bump(r); }), g1, c);
    const auto b = run(EquationSpec::pme(2, 1), init_state(g2, [](double r) { return bump(r); }), g2, c);
    const auto d = run(EquationSpec::pme(3, 1), init_state(g1, [](double r) { return bump(r); }), g1, c);
    EXPECT_THROW(relative_mass_series(a, b), ValidationError);
    EXPECT_THROW(relative_mass_series(a, d), ValidationError);
}

TEST(RelativeMass, VeryFastAgainstZeroDecays) {
    const auto spec = EquationSpec::pme(0.2, 3);
    const auto g = RadialGrid::uniform(3, 10, 200);
    auto c = config({0.25, 0.5}, 2e-3, 2e-3);
    c.dt_growth = 1;
    const auto a = run(spec, init_state(g, [](double r) { return bump(r); }), g, c);
    const auto z = run(spec, init_state(g, [](double) { return 0.0; }), g, c);
    const auto rm = relative_mass_series(a, z);
    for (std::size_t i = 1; i < rm.series.size(); ++i) EXPECT_LT(rm.series.masses[i], rm.series.masses[i - 1]);
    EXPECT_LT(rm.series.masses.back(), 0.5 * rm.series.masses.front());
}

TEST(SupDecay, Errors) {
    const auto g = RadialGrid::uniform(2, 5, 50);
    const auto rec2 = run(EquationSpec::heat(2), init_state(g, [](double r) { return bump(r); }), g,
                          config({0.1}, 1e-2, 1e-2));
    EXPECT_THROW(sup_decay_check(rec2, {}), ValidationError);  // N = 2
    const auto g3 = RadialGrid::uniform(3, 5, 50);
    const auto rec3 = run(EquationSpec::heat(3), init_state(g3, [](double r) { return bump(r); }), g3,
                          config({0.5}, 1e-2, 1e-2));
    EXPECT_THROW(sup_decay_check(rec3, {0.1, 1.0}), ValidationError);  // window beyond the run
}

TEST(SupDecay, HeatDecaysLikeAPower) {
    const auto spec = EquationSpec::heat(3);
    const auto g = RadialGrid::uniform(3, 40, 400);
    const auto rec = run(spec, init_state(g, [](double r) { return bump(r); }), g,
                         config({20.0}, 1e-3, 0.1, OuterBC::ZeroFlux));
    // log(1/sup) grows like (3/2) log t, concave in t^3
    const auto f = sup_decay_check(rec, {2, 20});
    EXPECT_LT(f.r2, 0.9);
}
