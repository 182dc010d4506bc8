#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "nsk41/operators.hpp"

namespace nsk41 {

template <std::size_t C>
double l2_norm(const BasicSpectralField<C>& v) {
    double s = 0.0;
    for (const auto& c : v.data()) s += std::norm(c);
    return std::sqrt(v.grid().volume() * s);
}

/// Homogeneous Sobolev norm (|box| sum |xi|^{2s} |v|^2)^{1/2}; s = 0 is L2.
/// For s < 0 the field must be mean-free; for s > 0 the zero mode carries no weight.
template <std::size_t C>
double hs_norm(const BasicSpectralField<C>& v, double s) {
    if (s == 0.0) return l2_norm(v);
    const auto weights = Multiplier::fractional_laplacian(s).table(v.grid());
    if (s < 0.0) {
        for (std::size_t c = 0; c < C; ++c)
            if (std::abs(v.mean(c)) != 0.0) throw DomainError("negative-order Sobolev norm of a field with nonzero mean");
    }
    const auto& n2 = detail::lattice_norm2(v.grid().resolution());
    double acc = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        const auto comp = v.component(c);
        for (std::size_t idx = 1; idx < comp.size(); ++idx) acc += weights[n2[idx]] * std::norm(comp[idx]);
    }
    return std::sqrt(v.grid().volume() * acc);
}

/// Inhomogeneous H^s norm with weight (1 + |xi|^2)^s.
template <std::size_t C>
double h_norm(const BasicSpectralField<C>& v, double s) {
    const auto weights =
        Multiplier([s](double r) { return std::pow(1.0 + r * r, s); }, false, "bessel").table(v.grid());
    const auto& n2 = detail::lattice_norm2(v.grid().resolution());
    double acc = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        const auto comp = v.component(c);
        for (std::size_t idx = 0; idx < comp.size(); ++idx) acc += weights[n2[idx]] * std::norm(comp[idx]);
    }
    return std::sqrt(v.grid().volume() * acc);
}

/// L^p norm of the Euclidean magnitude by rectangle-rule quadrature on the
/// collocation grid; p = infinity gives the grid maximum.
template <std::size_t C>
double lp_norm_physical(const BasicPhysicalField<C>& phys, double p) {
    if (!(p >= 1.0)) throw DomainError("L^p norm needs p >= 1");
    const std::size_t m = phys.grid.modes();
    const double h = phys.grid.spacing();
    const bool sup = std::isinf(p);
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double mag2 = 0.0;
        for (std::size_t c = 0; c < C; ++c) mag2 += phys(c, i) * phys(c, i);
        const double mag = std::sqrt(mag2);
        if (sup)
            acc = std::max(acc, mag);
        else
            acc += std::pow(mag, p);
    }
    return sup ? acc : std::pow(h * h * h * acc, 1.0 / p);
}

template <std::size_t C>
double lp_norm(const BasicSpectralField<C>& v, double p) {
    return lp_norm_physical(inverse_transform(v), p);
}

inline double linf_norm(const SpectralField& v) { return lp_norm(v, std::numeric_limits<double>::infinity()); }

/// ||v||_E = L^{-1/2} ||v||_{L2} + ell0 L^{-1/2} ||v||_{H1dot} + ||v||_{L3}.
inline double e_norm(const SpectralField& v, double L, double ell0) {
    return l2_norm(v) / std::sqrt(L) + ell0 * hs_norm(v, 1.0) / std::sqrt(L) + lp_norm(v, 3.0);
}

/// ||e^{beta sqrt(-Delta)} v||_{H^s dot}.
template <std::size_t C>
double gevrey_norm(const BasicSpectralField<C>& v, double beta, double s) {
    return hs_norm(apply_multiplier(Multiplier::gevrey(beta), v), s);
}

enum class NormKind { L2, Hs, Lp, E, Gevrey };

/// Tagged norm request for call sites that pick the norm at runtime.
struct NormSpec {
    NormKind kind = NormKind::L2;
    double s = 0.0;
    double p = 2.0;
    double beta = 0.0;
    double L = 1.0;
    double ell0 = 1.0;

    static NormSpec l2() { return {}; }
    static NormSpec sobolev(double s) { return {NormKind::Hs, s}; }
    static NormSpec lebesgue(double p) { return {NormKind::Lp, 0.0, p}; }
    static NormSpec energy_space(double L, double ell0) { return {NormKind::E, 0.0, 2.0, 0.0, L, ell0}; }
    static NormSpec gevrey(double beta, double s) { return {NormKind::Gevrey, s, 2.0, beta}; }
};

inline double norm(const SpectralField& v, const NormSpec& spec) {
    switch (spec.kind) {
        case NormKind::L2: return l2_norm(v);
        case NormKind::Hs: return hs_norm(v, spec.s);
        case NormKind::Lp: return lp_norm(v, spec.p);
        case NormKind::E: return e_norm(v, spec.L, spec.ell0);
        case NormKind::Gevrey: return gevrey_norm(v, spec.beta, spec.s);
    }
    throw DomainError("unknown norm kind");
}

}  // namespace nsk41
