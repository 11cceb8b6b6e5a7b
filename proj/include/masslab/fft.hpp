#pragma once
// Thin RAII layer over FFTW real transforms (1D and 2D).

#include <complex>
#include <cstddef>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "masslab/errors.hpp"

namespace masslab {

namespace detail {
// FFTW planning is not thread safe; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

class RealFFT {
public:
    // dims = {n} or {n0, n1}; real layout is row-major.
    explicit RealFFT(std::vector<int> dims) : dims_(std::move(dims)) {
        if (dims_.empty() || dims_.size() > 2) throw ValidationError("RealFFT supports 1D and 2D");
        real_size_ = 1;
        for (int d : dims_) real_size_ *= static_cast<std::size_t>(d);
        complex_size_ = real_size_ / static_cast<std::size_t>(dims_.back()) *
                        static_cast<std::size_t>(dims_.back() / 2 + 1);
        real_ = fftw_alloc_real(real_size_);
        cplx_ = fftw_alloc_complex(complex_size_);
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        const int rank = static_cast<int>(dims_.size());
        fwd_ = fftw_plan_dft_r2c(rank, dims_.data(), real_, cplx_, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r(rank, dims_.data(), cplx_, real_, FFTW_ESTIMATE);
        if (!fwd_ || !inv_) throw NumericalError("FFTW planning failed");
    }
    RealFFT(const RealFFT&) = delete;
    RealFFT& operator=(const RealFFT&) = delete;
    ~RealFFT() {
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(real_);
        fftw_free(cplx_);
    }

    std::size_t real_size() const { return real_size_; }
    std::size_t complex_size() const { return complex_size_; }
    const std::vector<int>& dims() const { return dims_; }

    double* real() { return real_; }
    std::complex<double>* spectrum() { return reinterpret_cast<std::complex<double>*>(cplx_); }

    void forward() { fftw_execute(fwd_); }   // real() -> spectrum()
    // Unnormalized: forward then inverse multiplies by real_size().
    void inverse() { fftw_execute(inv_); }   // spectrum() -> real(), destroys spectrum

private:
    std::vector<int> dims_;
    std::size_t real_size_ = 0, complex_size_ = 0;
    double* real_ = nullptr;
    fftw_complex* cplx_ = nullptr;
    fftw_plan fwd_ = nullptr, inv_ = nullptr;
};

}  // namespace masslab
