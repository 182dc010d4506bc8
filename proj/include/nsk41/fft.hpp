#pragma once

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "nsk41/field.hpp"

namespace nsk41 {
namespace detail {

/// FFTW plans for one resolution. Plans are created once under a global lock
/// and executed through the new-array interface, which is thread-safe.
class FftPlans {
public:
    explicit FftPlans(int n) : n_(n), parity_(static_cast<std::size_t>(n) * n * n) {
        std::vector<cplx> a(parity_.size()), b(parity_.size());
        auto* pa = reinterpret_cast<fftw_complex*>(a.data());
        auto* pb = reinterpret_cast<fftw_complex*>(b.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        forward_ = fftw_plan_dft_3d(n, n, n, pa, pb, FFTW_FORWARD, flags);
        backward_ = fftw_plan_dft_3d(n, n, n, pa, pb, FFTW_BACKWARD, flags);
        std::size_t idx = 0;
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2)
                for (int i3 = 0; i3 < n; ++i3, ++idx) parity_[idx] = ((i1 + i2 + i3) % 2 == 0) ? 1.0 : -1.0;
    }
    ~FftPlans() {
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
    }
    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;

    void forward(const cplx* in, cplx* out) const {
        fftw_execute_dft(forward_, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }
    void backward(const cplx* in, cplx* out) const {
        fftw_execute_dft(backward_, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

    /// (-1)^{i1+i2+i3}: phase e^{-i xi.x_0} of the grid origin x_0 = (-L_box,...).
    const std::vector<double>& parity() const { return parity_; }
    int resolution() const { return n_; }

private:
    int n_;
    std::vector<double> parity_;
    fftw_plan forward_{};
    fftw_plan backward_{};
};

inline const FftPlans& plans_for(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<FftPlans>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FftPlans>(n);
    return *slot;
}

/// Inverse-transform two Hermitian coefficient arrays in one complex FFT.
inline void inverse_pair(const GridSpec& g, std::span<const cplx> a, std::span<const cplx> b, std::span<double> out_a,
                         std::span<double> out_b, std::vector<cplx>& work_in, std::vector<cplx>& work_out) {
    const auto& p = plans_for(g.resolution());
    const auto& par = p.parity();
    const std::size_t m = g.modes();
    work_in.resize(m);
    work_out.resize(m);
    for (std::size_t i = 0; i < m; ++i) work_in[i] = par[i] * (a[i] + cplx(0.0, 1.0) * (b.empty() ? cplx{} : b[i]));
    p.backward(work_in.data(), work_out.data());
    for (std::size_t i = 0; i < m; ++i) {
        out_a[i] = work_out[i].real();
        if (!out_b.empty()) out_b[i] = work_out[i].imag();
    }
}

/// Forward-transform two real sample arrays in one complex FFT and split them.
inline void forward_pair(const GridSpec& g, std::span<const double> a, std::span<const double> b, std::span<cplx> out_a,
                         std::span<cplx> out_b, std::vector<cplx>& work_in, std::vector<cplx>& work_out) {
    const auto& p = plans_for(g.resolution());
    const auto& par = p.parity();
    const std::size_t m = g.modes();
    work_in.resize(m);
    work_out.resize(m);
    for (std::size_t i = 0; i < m; ++i) work_in[i] = cplx(a[i], b.empty() ? 0.0 : b[i]);
    p.forward(work_in.data(), work_out.data());
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        const cplx z = par[i] * scale * work_out[i];
        const cplx zm = std::conj(par[i] * scale * work_out[g.mirror_flat(i)]);
        out_a[i] = 0.5 * (z + zm);
        if (!out_b.empty()) out_b[i] = cplx(0.0, -0.5) * (z - zm);
    }
}

}  // namespace detail

/// Physical samples -> Fourier coefficients (mean-normalized).
template <std::size_t C>
BasicSpectralField<C> forward_transform(const BasicPhysicalField<C>& phys) {
    const GridSpec& g = phys.grid;
    if (phys.data.size() != C * g.modes()) throw ShapeError("forward_transform: sample count does not match grid");
    BasicSpectralField<C> out(g);
    std::vector<cplx> w1, w2;
    for (std::size_t c = 0; c < C; c += 2) {
        const bool pair = c + 1 < C;
        detail::forward_pair(g, phys.component(c), pair ? phys.component(c + 1) : std::span<const double>{},
                             out.component(c), pair ? out.component(c + 1) : std::span<cplx>{}, w1, w2);
    }
    return out;
}

/// Fourier coefficients -> physical samples; the field is assumed Hermitian.
template <std::size_t C>
BasicPhysicalField<C> inverse_transform(const BasicSpectralField<C>& field) {
    const GridSpec& g = field.grid();
    BasicPhysicalField<C> out(g);
    std::vector<cplx> w1, w2;
    for (std::size_t c = 0; c < C; c += 2) {
        const bool pair = c + 1 < C;
        detail::inverse_pair(g, field.component(c), pair ? field.component(c + 1) : std::span<const cplx>{},
                             out.component(c), pair ? out.component(c + 1) : std::span<double>{}, w1, w2);
    }
    return out;
}

}  // namespace nsk41
