#pragma once
// Adaptive quadrature wrappers (Boost.Math) and radial helpers.

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "masslab/errors.hpp"

namespace masslab::quad {

struct Result {
    double value = 0;
    double error = 0;
};

// Smooth integrands on [a,b].
template <class F>
Result gauss_kronrod(F&& f, double a, double b, double tol = 1e-13, unsigned depth = 18) {
    double err = 0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, depth, tol, &err);
    return {v, err};
}

// Endpoint singularities allowed; integrand must be finite inside (a,b).
template <class F>
Result tanh_sinh(F&& f, double a, double b, double tol = 1e-13) {
    static thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
    double err = 0, l1 = 0;
    std::size_t levels = 0;
    const double v = integrator.integrate(f, a, b, tol, &err, &l1, &levels);
    return {v, err};
}

// Integral of f over [a, inf) where f(r) ~ r^{-(1+q)}, q > 0.
// Substitution r = a w^{-1/q} maps the tail onto (0,1] with a bounded integrand.
template <class F>
Result power_tail(F&& f, double a, double q, double tol = 1e-13) {
    if (!(q > 0)) throw DivergentMass("tail decay exponent q=" + std::to_string(q) + " is not integrable");
    auto g = [&](double w) {
        if (w <= 0) return 0.0;
        const double r = a * std::pow(w, -1 / q);
        if (!std::isfinite(r)) return 0.0;
        const double v = f(r) * (a / q) * (r / a) / w;
        return std::isfinite(v) ? v : 0.0;
    };
    return tanh_sinh(g, 0.0, 1.0, tol);
}

inline void require(const Result& r, double rel, const char* what) {
    if (!std::isfinite(r.value) || r.error > rel * std::max(std::abs(r.value), 1e-300))
        throw NumericalError(std::string(what) + ": quadrature did not converge (value " +
                             std::to_string(r.value) + ", error " + std::to_string(r.error) + ")");
}

// Fixed Gauss-Legendre rule on [a,b]; used per cell.
template <class F>
double gauss5(F&& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 5>::integrate(f, a, b);
}

}  // namespace masslab::quad
