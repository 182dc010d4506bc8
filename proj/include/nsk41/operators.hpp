#pragma once

#include <cmath>

#include "nsk41/fft.hpp"
#include "nsk41/multiplier.hpp"

namespace nsk41 {

/// Leray projector Id - xi xi^T / |xi|^2; the zero mode is cleared.
inline SpectralField leray_project(const SpectralField& v) {
    SpectralField out(v.grid());
    for_each_mode(v.grid(), [&](std::size_t idx, const Vec3& xi, double xi2) {
        if (xi2 == 0.0) return;
        const cplx d = (xi[0] * v(0, idx) + xi[1] * v(1, idx) + xi[2] * v(2, idx)) / xi2;
        for (std::size_t c = 0; c < 3; ++c) out(c, idx) = v(c, idx) - xi[c] * d;
    });
    return out;
}

/// Zero the modes outside rho1/ell0 <= |xi| <= rho2/ell0.
inline SpectralField band_project(const SpectralField& v, double ell0, double rho1, double rho2) {
    if (!(rho1 < rho2) || !(ell0 > 0.0)) throw DomainError("band_project: need ell0 > 0 and rho1 < rho2");
    const double lo = rho1 / ell0, hi = rho2 / ell0;
    bool populated = false;
    SpectralField out(v.grid());
    for_each_mode(v.grid(), [&](std::size_t idx, const Vec3&, double xi2) {
        if (!in_annulus(std::sqrt(xi2), lo, hi)) return;
        populated = true;
        for (std::size_t c = 0; c < 3; ++c) out(c, idx) = v(c, idx);
    });
    if (!populated) throw DomainError("band_project: no lattice mode in the annulus [rho1/ell0, rho2/ell0]");
    return out;
}

/// Number of lattice modes with rho1/ell0 <= |xi| <= rho2/ell0.
inline std::size_t annulus_mode_count(const GridSpec& g, double ell0, double rho1, double rho2) {
    std::size_t count = 0;
    for_each_mode(g, [&](std::size_t, const Vec3&, double xi2) {
        if (in_annulus(std::sqrt(xi2), rho1 / ell0, rho2 / ell0)) ++count;
    });
    return count;
}

/// <u, v>_{L2} = |box| Re sum u(xi) . conj v(xi).
template <std::size_t C>
double inner(const BasicSpectralField<C>& u, const BasicSpectralField<C>& v) {
    require_same_grid(u.grid(), v.grid());
    double s = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        const auto a = u.component(c);
        const auto b = v.component(c);
        for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] * std::conj(b[i])).real();
    }
    return u.grid().volume() * s;
}

/// max over modes of |xi . v(xi)|.
inline double max_divergence(const SpectralField& v) {
    double m = 0.0;
    for_each_mode(v.grid(), [&](std::size_t idx, const Vec3& xi, double) {
        m = std::max(m, std::abs(xi[0] * v(0, idx) + xi[1] * v(1, idx) + xi[2] * v(2, idx)));
    });
    return m;
}

/// max over modes of |xi . v(xi)| / (|xi| |v(xi)|), zero where v(xi) = 0.
inline double max_relative_divergence(const SpectralField& v) {
    double m = 0.0;
    for_each_mode(v.grid(), [&](std::size_t idx, const Vec3& xi, double xi2) {
        const double amp = std::sqrt(std::norm(v(0, idx)) + std::norm(v(1, idx)) + std::norm(v(2, idx)));
        if (amp == 0.0 || xi2 == 0.0) return;
        const double d = std::abs(xi[0] * v(0, idx) + xi[1] * v(1, idx) + xi[2] * v(2, idx));
        m = std::max(m, d / (std::sqrt(xi2) * amp));
    });
    return m;
}

inline ScalarSpectralField divergence(const SpectralField& v) {
    ScalarSpectralField out(v.grid());
    const cplx I(0.0, 1.0);
    for_each_mode(v.grid(), [&](std::size_t idx, const Vec3& xi, double) {
        out(0, idx) = I * (xi[0] * v(0, idx) + xi[1] * v(1, idx) + xi[2] * v(2, idx));
    });
    return out;
}

inline SpectralField gradient(const ScalarSpectralField& p) {
    SpectralField out(p.grid());
    const cplx I(0.0, 1.0);
    for_each_mode(p.grid(), [&](std::size_t idx, const Vec3& xi, double) {
        for (std::size_t c = 0; c < 3; ++c) out(c, idx) = I * xi[c] * p(0, idx);
    });
    return out;
}

/// Zero every mode with |xi| above the dealiasing cutoff.
template <std::size_t C>
BasicSpectralField<C> dealias(BasicSpectralField<C> v) {
    const double kmax = v.grid().kappa_max();
    for_each_mode(v.grid(), [&](std::size_t idx, const Vec3&, double xi2) {
        if (xi2 > kmax * kmax)
            for (std::size_t c = 0; c < C; ++c) v(c, idx) = 0.0;
    });
    return v;
}

/// Fraction of sum |v|^2 carried by modes above the dealiasing cutoff.
template <std::size_t C>
double fraction_above_cutoff(const BasicSpectralField<C>& v) {
    const double kmax = v.grid().kappa_max();
    double above = 0.0, total = 0.0;
    for_each_mode(v.grid(), [&](std::size_t idx, const Vec3&, double xi2) {
        double e = 0.0;
        for (std::size_t c = 0; c < C; ++c) e += std::norm(v(c, idx));
        total += e;
        if (xi2 > kmax * kmax) above += e;
    });
    return total > 0.0 ? above / total : 0.0;
}

}  // namespace nsk41
