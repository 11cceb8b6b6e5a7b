#pragma once
// Fundamental solution of u_t + (-Delta)^s u = 0 at t=1 in N=1,2, by Fourier
// inversion of exp(-|xi|^{2s}). N=2 is obtained from the 1D profile by inverse
// Abel transform. Beyond the tables the algebraic tail series is used.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/interpolators/quintic_hermite.hpp>

#include "masslab/errors.hpp"
#include "masslab/fft.hpp"
#include "masslab/special.hpp"

namespace masslab {

struct KernelDiagnostics {
    double raw_mass = 0;        // before normalization
    double tail_slope = 0;      // fitted over the last decade of the table
    double fit_lo = 0, fit_hi = 0;
    double tail_C_fit = 0;      // fitted amplitude of r^{-(N+2s)}
    double tail_C_exact = 0;    // leading asymptotic coefficient
};

class FractionalKernel {
public:
    static constexpr int kTailTerms = 3;

    FractionalKernel(double s, int N) : s_(s), N_(N) {
        if (!(s > 0 && s < 1)) throw ValidationError("kernel: s must lie in (0,1)");
        if (N != 1 && N != 2) throw ValidationError("kernel: N must be 1 or 2");
        series(N, a_, g_);
        series(1, a1_, g1_);
        build();
    }

    double s() const { return s_; }
    int N() const { return N_; }
    double table_radius() const { return rmax_; }
    const KernelDiagnostics& diagnostics() const { return diag_; }

    // Profile value at radius r (t = 1, unit mass).
    double operator()(double r) const {
        r = std::abs(r);
        if (r > rmax_) return tail(r, 0) / diag_.raw_mass;
        if (N_ == 1) return (*f1_)(r) / diag_.raw_mass;
        return (*f2_)(r) / diag_.raw_mass;
    }

    double derivative(double r) const {
        const double sg = r < 0 ? -1.0 : 1.0;
        r = std::abs(r);
        if (r > rmax_) return sg * tail(r, 1) / diag_.raw_mass;
        if (N_ == 1) return sg * f1_->prime(r) / diag_.raw_mass;
        return sg * f2_->prime(r) / diag_.raw_mass;
    }

    // Algebraic tail series (unnormalized) and its derivatives in r > 0.
    double tail(double r, int d) const { return tail(a_, g_, r, d); }

    // Mass carried beyond radius R by the tail series (normalized).
    double tail_mass(double R) const {
        double v = 0;
        for (int k = 0; k < kTailTerms; ++k) {
            const double e = g_[k] - N_;  // integrand r^{N-1} r^{-g} = r^{-1-e}
            v += a_[k] * std::pow(R, -e) / e;
        }
        return surface_area(N_) * v / diag_.raw_mass;
    }

private:
    using Coeffs = std::array<double, kTailTerms>;

    // Asymptotic expansion of the N-dimensional profile: sum_k a_k r^{-g_k}.
    void series(int N, Coeffs& a, Coeffs& g) const {
        for (int k = 1; k <= kTailTerms; ++k) {
            const double sk = s_ * k;
            a[k - 1] = ((k % 2) ? 1.0 : -1.0) / std::tgamma(k + 1.0) * std::pow(4.0, sk) *
                       std::tgamma(sk + 0.5 * N) * std::tgamma(sk + 1) * std::sin(std::numbers::pi * sk) /
                       std::pow(std::numbers::pi, 0.5 * N + 1);
            g[k - 1] = N + 2 * sk;
        }
    }

    static double tail(const Coeffs& a, const Coeffs& g, double r, int d) {
        double v = 0;
        for (int k = 0; k < kTailTerms; ++k) {
            double c = a[k];
            for (int j = 0; j < d; ++j) c *= -(g[k] + j);
            v += c * std::pow(r, -g[k] - d);
        }
        return v;
    }

    using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

    // Sum over periodic images j != 0 of the d-th derivative of the tail.
    double image_sum(double x, double L, int d) const {
        constexpr int J = 400;
        double v = 0;
        for (int j = 1; j <= J; ++j) {
            const double yp = x + j * L, ym = x - j * L;  // yp > 0, ym < 0
            const double sgm = (d % 2) ? -1.0 : 1.0;
            v += tail(a1_, g1_, yp, d) + sgm * tail(a1_, g1_, -ym, d);
        }
        if (d == 0) {
            const double y0 = (J + 0.5) * L;
            for (int k = 0; k < kTailTerms; ++k)
                v += 2 * a1_[k] * std::pow(y0, 1 - g1_[k]) / ((g1_[k] - 1) * L);
        }
        return v;
    }

    void build() {
        const int n = 1 << 20;
        const double xi_max = std::pow(33.0, 1 / (2 * s_));
        const double h = std::min(std::numbers::pi / xi_max, 0.01);
        const double L = n * h;
        const double R1 = L / 8;
        const int m1 = static_cast<int>(R1 / h);

        // Derivatives 0..3 of the periodized 1D profile on [0, R1].
        std::array<std::vector<double>, 4> der;
        {
            RealFFT fft({n});
            const double dxi = 2 * std::numbers::pi / L;
            for (int d = 0; d < 4; ++d) {
                auto* sp = fft.spectrum();
                for (std::size_t k = 0; k < fft.complex_size(); ++k) {
                    const double xi = dxi * static_cast<double>(k);
                    const double phi = (k == static_cast<std::size_t>(n / 2)) ? 0.0 : std::exp(-std::pow(xi, 2 * s_));
                    std::complex<double> f(phi, 0);
                    for (int j = 0; j < d; ++j) f *= std::complex<double>(0, xi);
                    // c2r uses exp(+i k j 2pi/n), matching the inverse transform.
                    sp[k] = f;
                }
                sp[0] = d == 0 ? 1.0 : 0.0;
                fft.inverse();
                der[d].assign(fft.real(), fft.real() + m1 + 1);
                for (auto& v : der[d]) v /= L;
            }
        }
        // Remove the periodic images using the tail series, sampled coarsely.
        {
            const int mc = 4096;
            const double hc = R1 / mc;
            for (int d = 0; d < 4; ++d) {
                std::vector<double> c(mc + 1);
                for (int i = 0; i <= mc; ++i) c[i] = image_sum(i * hc, L, d);
                Spline sp(c.begin(), c.end(), 0.0, hc);
                for (int i = 0; i <= m1; ++i) der[d][i] -= sp(std::min(i * h, R1));
            }
        }

        if (N_ == 1) {
            rmax_ = m1 * h;
            fit_tail(rmax_ / 10, rmax_, [&](double x) { return eval_table(der[0], h, x); });
            // Trapezoid on [0, rmax] plus the tail series beyond.
            double sum = 0.5 * (der[0][0] + der[0][m1]);
            for (int i = 1; i < m1; ++i) sum += der[0][i];
            double tail_beyond = 0;
            for (int k = 0; k < kTailTerms; ++k) tail_beyond += a_[k] * std::pow(rmax_, 1 - g_[k]) / (g_[k] - 1);
            diag_.raw_mass = 2 * (h * sum + tail_beyond);
            f1_ = std::make_unique<Quintic>(std::move(der[0]), std::move(der[1]), std::move(der[2]), 0.0, h);
            rmax_ = std::min(rmax_, f1_->domain().second);  // x0 + (n-1) h may round below m1 * h
        } else {
            build_2d(der, h, m1 * h);
        }
        check_mass();
    }

    static double eval_table(const std::vector<double>& v, double h, double x) {
        const auto i = static_cast<std::size_t>(x / h);
        if (i + 1 >= v.size()) return v.back();
        const double t = x / h - static_cast<double>(i);
        return v[i] * (1 - t) + v[i + 1] * t;
    }

    // Least-squares slope and amplitude of log F vs log r on 200 log-spaced points.
    template <class F>
    void fit_tail(double lo, double hi, F&& f) {
        const int npts = 200;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < npts; ++i) {
            const double x = std::log(lo) + (std::log(hi) - std::log(lo)) * i / (npts - 1);
            const double y = std::log(f(std::min(hi, std::exp(x))));
            sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        const double slope = (npts * sxy - sx * sy) / (npts * sxx - sx * sx);
        diag_.tail_slope = slope;
        diag_.fit_lo = lo;
        diag_.fit_hi = hi;
        // Amplitude with the exponent pinned at -(N+2s), fitted at the outer end.
        double acc = 0;
        for (int i = 0; i < npts; ++i) {
            const double r = std::min(hi, lo + (hi - lo) * (0.9 + 0.1 * i / (npts - 1)));
            acc += f(r) * std::pow(r, N_ + 2 * s_);
        }
        diag_.tail_C_fit = acc / npts;
        diag_.tail_C_exact = a_[0];
    }

    void build_2d(std::array<std::vector<double>, 4>& der, double h, double R1) {
        std::vector<double> d2v = der[2], d3v = der[3];
        Quintic d1(std::move(der[1]), std::move(der[2]), std::move(der[3]), 0.0, h);
        Cubic1 d2(std::move(d2v), std::move(d3v), 0.0, h);

        auto F1p = [&](double x) { return x <= R1 ? d1(x) : tail(a1_, g1_, x, 1); };
        auto F1pp = [&](double x) { return x <= R1 ? d2(x) : tail(a1_, g1_, x, 2); };

        const double R2 = R1 / 4;
        std::vector<double> rs;
        for (double r = 0; r < 5.0 - 1e-12; r += 0.01) rs.push_back(r);
        for (double r = 5.0; r < R2 * (1 - 1e-3); r *= 1.01) rs.push_back(r);
        rs.push_back(R2);

        std::vector<double> F(rs.size()), Fp(rs.size());
        const double du = 0.005;
        F[0] = std::tgamma(1 / s_) / (4 * std::numbers::pi * s_);
        Fp[0] = 0;
        for (std::size_t i = 1; i < rs.size(); ++i) {
            const double r = rs[i];
            // u range: until r cosh u is deep inside the algebraic tail.
            const double umax = std::acosh(std::max(1.0, R1 / r)) + 40.0 / (3 + 2 * s_);
            const int nu = static_cast<int>(umax / du) + 1;
            double s0 = 0.5 * F1p(r), s1 = 0.5 * F1pp(r);
            for (int j = 1; j <= nu; ++j) {
                const double ch = std::cosh(j * du);
                s0 += F1p(r * ch);
                s1 += F1pp(r * ch) * ch;
            }
            F[i] = -s0 * du / std::numbers::pi;
            Fp[i] = -s1 * du / std::numbers::pi;
        }
        rmax_ = R2;

        // Mass: Simpson per interval with Hermite midpoints, plus the tail series.
        std::vector<double> rcopy = rs, Fcopy = F, Fpcopy = Fp;
        f2_ = std::make_unique<Cubic>(std::move(rcopy), std::move(Fcopy), std::move(Fpcopy));
        double mass = 0;
        for (std::size_t i = 0; i + 1 < rs.size(); ++i) {
            const double a = rs[i], b = rs[i + 1], c = 0.5 * (a + b);
            mass += (b - a) / 6 * (a * F[i] + 4 * c * (*f2_)(c) + b * F[i + 1]);
        }
        mass *= 2 * std::numbers::pi;
        for (int k = 0; k < kTailTerms; ++k)
            mass += 2 * std::numbers::pi * a_[k] * std::pow(R2, 2 - g_[k]) / (g_[k] - 2);
        diag_.raw_mass = mass;
        fit_tail(R2 / 10, R2, [&](double r) { return (*f2_)(r); });
    }

    void check_mass() {
        if (!(std::abs(diag_.raw_mass - 1) <= 1e-4))
            throw ResolutionError("kernel mass deficit " + std::to_string(1 - diag_.raw_mass) +
                                  " exceeds 1e-4: padding insufficient");
    }

    using Quintic = boost::math::interpolators::cardinal_quintic_hermite<std::vector<double>>;
    using Cubic1 = boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>>;
    using Cubic = boost::math::interpolators::cubic_hermite<std::vector<double>>;

    double s_;
    int N_;
    Coeffs a_{}, g_{}, a1_{}, g1_{};
    double rmax_ = 0;
    KernelDiagnostics diag_;
    std::unique_ptr<Quintic> f1_;
    std::unique_ptr<Cubic> f2_;
};

// Cached per (s, N); construction is expensive, lookups are shared.
inline std::shared_ptr<const FractionalKernel> fractional_kernel(double s, int N) {
    static std::mutex mu;
    static std::map<std::pair<double, int>, std::shared_ptr<const FractionalKernel>> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find({s, N});
        if (it != cache.end()) return it->second;
    }
    auto k = std::make_shared<const FractionalKernel>(s, N);
    std::lock_guard<std::mutex> lock(mu);
    return cache.emplace(std::make_pair(s, N), std::move(k)).first->second;
}

}  // namespace masslab
