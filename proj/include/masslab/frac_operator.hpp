#pragma once
// Discrete fractional Laplacian on a uniform cell-centred grid over [-L,L]^N, N in {1,2}.
//
// Lattice quadrature of c_{N,s} PV int (f(x)-f(y)) |x-y|^{-N-2s} dy: weights |k|^{-N-2s}
// with the nearest-neighbour weights carrying the second-order Taylor correction of the
// near field (lattice zeta terms). Zero extension outside the box enters through the
// exterior weight E_i = sum of weights to lattice points outside.

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "masslab/errors.hpp"
#include "masslab/fft.hpp"
#include "masslab/quadrature.hpp"
#include "masslab/special.hpp"

namespace masslab {

struct FracGrid {
    int N = 1;
    double L = 1;  // half-width of the box
    int n = 2;     // cells per axis

    static FracGrid make(int N, double L, double h) {
        FracGrid g{N, L, static_cast<int>(std::lround(2 * L / h))};
        g.validate();
        return g;
    }
    void validate() const {
        if (N != 1 && N != 2) throw ValidationError("fractional grid: N must be 1 or 2");
        if (!(L > 0) || n < 2) throw ValidationError("fractional grid: need L > 0 and n >= 2");
    }
    double h() const { return 2 * L / n; }
    double center(int i) const { return -L + (i + 0.5) * h(); }
    std::size_t size() const { return N == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n; }
    double cell_measure() const { return N == 1 ? h() : h() * h(); }
    std::string tag() const {
        return "box(N=" + std::to_string(N) + ",L=" + std::to_string(L) + ",n=" + std::to_string(n) + ")";
    }
    bool operator==(const FracGrid&) const = default;
};

class FracOperator {
public:
    struct Workspace {
        explicit Workspace(std::vector<int> dims) : fft(std::move(dims)) {}
        RealFFT fft;
    };

    FracOperator(double s, FracGrid grid) : s_(s), grid_(grid) {
        if (!(s > 0 && s < 1)) throw ValidationError("fractional operator: s must lie in (0,1)");
        grid_.validate();
        const int N = grid_.N;
        c_ = frac_constant(N, s);
        scale_ = c_ * std::pow(grid_.h(), -2 * s);
        if (N == 1) {
            near_ = -riemann_zeta(2 * s - 1);
            total_ = 2 * (riemann_zeta(1 + 2 * s) - riemann_zeta(2 * s - 1));
        } else {
            near_ = -0.25 * square_lattice_zeta(2 * s);
            total_ = square_lattice_zeta(2 + 2 * s) - square_lattice_zeta(2 * s);
        }
        build_spectrum();
        auto ws = workspace();
        std::vector<double> ones(grid_.size(), 1.0);
        exterior_.resize(grid_.size());
        convolve(ones.data(), exterior_.data(), *ws);
        for (auto& e : exterior_) e = total_ - e;
    }

    double s() const { return s_; }
    const FracGrid& grid() const { return grid_; }
    double constant() const { return c_; }           // c_{N,s}
    double scale() const { return scale_; }          // c_{N,s} h^{-2s}
    double lattice_total() const { return total_; }  // sum of all lattice weights
    double diagonal() const { return scale_ * total_; }
    // Exterior weight per cell (dimensionless; multiply by scale()).
    const std::vector<double>& exterior() const { return exterior_; }

    // Weight of lattice offset k (dimensionless).
    double weight(int k0, int k1 = 0) const {
        if (grid_.N == 1) {
            const int k = std::abs(k0);
            if (k == 0) return 0;
            return std::pow(static_cast<double>(k), -1 - 2 * s_) + (k == 1 ? near_ : 0.0);
        }
        if (k0 == 0 && k1 == 0) return 0;
        const double r2 = static_cast<double>(k0) * k0 + static_cast<double>(k1) * k1;
        return std::pow(r2, -1 - s_) + (r2 == 1 ? near_ : 0.0);
    }

    std::unique_ptr<Workspace> workspace() const {
        return grid_.N == 1 ? std::make_unique<Workspace>(std::vector<int>{2 * grid_.n})
                            : std::make_unique<Workspace>(std::vector<int>{2 * grid_.n, 2 * grid_.n});
    }

    // out_i = sum over grid cells j != i of w_{i-j} v_j.
    void convolve(const double* v, double* out, Workspace& ws) const {
        const int n = grid_.n, M = 2 * n;
        double* buf = ws.fft.real();
        std::fill(buf, buf + ws.fft.real_size(), 0.0);
        if (grid_.N == 1) {
            std::copy(v, v + n, buf);
        } else {
            for (int i = 0; i < n; ++i) std::copy(v + i * n, v + (i + 1) * n, buf + i * M);
        }
        ws.fft.forward();
        auto* sp = ws.fft.spectrum();
        for (std::size_t k = 0; k < spectrum_.size(); ++k) sp[k] *= spectrum_[k];
        ws.fft.inverse();
        const double norm = 1.0 / static_cast<double>(ws.fft.real_size());
        if (grid_.N == 1) {
            for (int i = 0; i < n; ++i) out[i] = buf[i] * norm;
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out[i * n + j] = buf[i * M + j] * norm;
        }
    }

    // (-Delta)^s f with f extended by zero outside the box.
    std::vector<double> apply(const std::vector<double>& f, Workspace& ws) const {
        if (f.size() != grid_.size()) throw ValidationError("fractional apply: field does not match grid");
        std::vector<double> out(f.size());
        convolve(f.data(), out.data(), ws);
        for (std::size_t i = 0; i < f.size(); ++i) out[i] = scale_ * (total_ * f[i] - out[i]);
        return out;
    }
    std::vector<double> apply(const std::vector<double>& f) const {
        auto ws = workspace();
        return apply(f, *ws);
    }

    // 1D only: (-Delta)^s f at the listed cells, with f given by the function ext outside
    // the box. Lattice sum up to offset K (half weight at K) plus the exact far integral.
    std::vector<double> apply_analytic(const std::vector<double>& f, const std::function<double(double)>& ext,
                                       std::span<const int> rows) const {
        if (grid_.N != 1) throw NotApplicable("analytic exterior is implemented for N=1");
        if (f.size() != grid_.size()) throw ValidationError("fractional apply: field does not match grid");
        const int n = grid_.n;
        const double h = grid_.h();
        const int K = n;
        auto value = [&](int j, double x) { return (j >= 0 && j < n) ? f[j] : ext(x); };
        std::vector<double> out;
        out.reserve(rows.size());
        for (int i : rows) {
            const double xi = grid_.center(i);
            double sum = 0;
            for (int k = 1; k <= K; ++k) {
                const double g = 2 * f[i] - value(i + k, xi + k * h) - value(i - k, xi - k * h);
                sum += (k == K ? 0.5 : 1.0) * weight(k) * g;
            }
            const double zb = K * h;
            auto far = [&](double z) { return (2 * f[i] - ext(xi + z) - ext(xi - z)) * std::pow(z, -1 - 2 * s_); };
            const auto tail = quad::power_tail(far, zb, 2 * s_, 1e-12);
            out.push_back(scale_ * sum + c_ * tail.value);
        }
        return out;
    }

private:
    void build_spectrum() {
        const int n = grid_.n, M = 2 * n;
        auto ws = workspace();
        double* buf = ws->fft.real();
        std::fill(buf, buf + ws->fft.real_size(), 0.0);
        auto wrap = [&](int k) { return k >= 0 ? k : k + M; };
        if (grid_.N == 1) {
            for (int k = -(n - 1); k <= n - 1; ++k) buf[wrap(k)] = weight(k);
        } else {
            for (int a = -(n - 1); a <= n - 1; ++a)
                for (int b = -(n - 1); b <= n - 1; ++b) buf[wrap(a) * M + wrap(b)] = weight(a, b);
        }
        ws->fft.forward();
        spectrum_.assign(ws->fft.spectrum(), ws->fft.spectrum() + ws->fft.complex_size());
    }

    double s_;
    FracGrid grid_;
    double c_ = 0, scale_ = 0, near_ = 0, total_ = 0;
    std::vector<std::complex<double>> spectrum_;
    std::vector<double> exterior_;
};

}  // namespace masslab
