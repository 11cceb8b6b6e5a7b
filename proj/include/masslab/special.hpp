#pragma once
// Special functions not covered by Boost.Math: Hurwitz zeta, Dirichlet beta,
// the fractional Laplacian constant, and a few log-domain helpers.

#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>

namespace masslab {

inline double surface_area(int N) {  // omega_N = |S^{N-1}|
    return 2 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
}

inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

inline double logaddexp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (std::isinf(b) && b < 0) return a;
    return a + std::log1p(std::exp(b - a));
}

// c_{N,s} = 4^s Gamma(N/2+s) / (pi^{N/2} |Gamma(-s)|); symbol |xi|^{2s}.
inline double frac_constant(int N, double s) {
    return std::pow(4.0, s) * std::tgamma(0.5 * N + s) /
           (std::pow(std::numbers::pi, 0.5 * N) * std::abs(std::tgamma(-s)));
}

inline double riemann_zeta(double x) { return boost::math::zeta(x); }

// Hurwitz zeta by Euler-Maclaurin summation; valid for x != 1, a > 0.
inline double hurwitz_zeta(double x, double a) {
    constexpr int n = 24;
    // B_{2j}/(2j)! for j = 1..10
    static constexpr std::array<double, 10> c = {
        8.3333333333333333e-02, -1.3888888888888889e-03, 3.3068783068783069e-05,
        -8.2671957671957672e-07, 2.0876756987868099e-08, -5.2841901386874932e-10,
        1.3382536530684679e-11, -3.3896802963225829e-13, 8.5860620562778446e-15,
        -2.1748686985580619e-16};
    double sum = 0;
    for (int k = 0; k < n; ++k) sum += std::pow(k + a, -x);
    const double z = n + a;
    sum += std::pow(z, 1 - x) / (x - 1) + 0.5 * std::pow(z, -x);
    double poch = x;             // x(x+1)...(x+2j-2)
    double zp = std::pow(z, -x - 1);
    for (int j = 0; j < 10; ++j) {
        const double term = c[j] * poch * zp;
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        poch *= (x + 2 * j + 1) * (x + 2 * j + 2);
        zp /= z * z;
    }
    return sum;
}

// Dirichlet beta: sum (-1)^k (2k+1)^{-x}.
inline double dirichlet_beta(double x) {
    return std::pow(4.0, -x) * (hurwitz_zeta(x, 0.25) - hurwitz_zeta(x, 0.75));
}

// Epstein zeta of the square lattice: sum over k in Z^2 \ {0} of |k|^{-x}.
inline double square_lattice_zeta(double x) {
    return 4 * riemann_zeta(0.5 * x) * dirichlet_beta(0.5 * x);
}

}  // namespace masslab
