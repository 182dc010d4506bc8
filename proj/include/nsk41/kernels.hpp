#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "nsk41/fft.hpp"
#include "nsk41/multiplier.hpp"

namespace nsk41 {

namespace detail {

inline void check_kernel_params(double nu, double alpha) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("kernel: nu must be > 0");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("kernel: alpha must be > 0");
}

inline double screening(double nu, double alpha) { return std::sqrt(alpha / nu); }

}  // namespace detail

/// Kernel of (-nu Lap + alpha)^{-1} on R^3: e^{-sqrt(alpha/nu) r} / (4 pi nu r).
inline double kernel_eval(double nu, double alpha, double r) {
    detail::check_kernel_params(nu, alpha);
    if (!(r > 0.0)) throw DomainError("kernel_eval: r must be > 0");
    return std::exp(-detail::screening(nu, alpha) * r) / (4.0 * std::numbers::pi * nu * r);
}

struct QuadratureValue {
    double value = 0.0;
    double error = 0.0;  // estimate reported by the rule
};

/// (1 / (2 pi^2 r)) int_0^inf rho sin(rho r) / (nu rho^2 + alpha) d rho by double-exponential
/// Fourier quadrature. Loses relative accuracy once G(r) drops far below the integrand scale.
inline QuadratureValue kernel_fourier_quadrature(double nu, double alpha, double r) {
    detail::check_kernel_params(nu, alpha);
    if (!(r > 0.0)) throw DomainError("kernel_fourier_quadrature: r must be > 0");
    boost::math::quadrature::ooura_fourier_sin<double> integrator(1e-13);
    auto f = [&](double rho) { return rho / (nu * rho * rho + alpha); };
    const auto [v, err] = integrator.integrate(f, r);
    const double pre = 1.0 / (2.0 * std::numbers::pi * std::numbers::pi * r);
    return {pre * v, pre * err};
}

/// 1 / (nu rho^2 + alpha) = int_0^inf e^{-t (nu rho^2 + alpha)} dt turns the inversion into
/// int_0^inf e^{-alpha t} (4 pi nu t)^{-3/2} e^{-r^2 / (4 nu t)} dt, a positive integrand.
inline QuadratureValue kernel_subordination_quadrature(double nu, double alpha, double r) {
    detail::check_kernel_params(nu, alpha);
    if (!(r > 0.0)) throw DomainError("kernel_subordination_quadrature: r must be > 0");
    // t = r^2 / (4 nu) * e^{s}, so the heat-kernel peak sits near s = 0.
    const double t0 = r * r / (4.0 * nu);
    auto f = [&](double s) {
        const double t = t0 * std::exp(s);
        const double expo = -alpha * t - r * r / (4.0 * nu * t);
        return t * std::exp(expo) * std::pow(4.0 * std::numbers::pi * nu * t, -1.5);
    };
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, -60.0, 60.0, 25, 1e-13, &err);
    if (!std::isfinite(v)) throw NumericalError("kernel_subordination_quadrature: non-finite result");
    return {v, err};
}

/// 4 pi int_0^inf r^2 G(r) dr.
inline QuadratureValue kernel_mass(double nu, double alpha) {
    detail::check_kernel_params(nu, alpha);
    boost::math::quadrature::exp_sinh<double> integrator;
    double err = 0.0;
    const double v = integrator.integrate(
        [&](double r) { return r > 0.0 ? 4.0 * std::numbers::pi * r * r * kernel_eval(nu, alpha, r) : 0.0; },
        std::sqrt(std::numeric_limits<double>::epsilon()), &err);
    return {v, err};
}

/// c_near = sup_{r <= 2 sqrt(nu/alpha)} r G(r), c_far = sup_{r > 2 sqrt(nu/alpha)} G(r) e^{r sqrt(alpha/nu) / 2}.
struct KernelConstants {
    double split = 0.0;  // 2 sqrt(nu / alpha)
    double c_near = 0.0;
    double c_far = 0.0;
    double c = 0.0;      // max(c_near, c_far)
};

inline KernelConstants kernel_piecewise_constants(double nu, double alpha, int samples = 20000) {
    detail::check_kernel_params(nu, alpha);
    const double k = detail::screening(nu, alpha);
    KernelConstants kc;
    kc.split = 2.0 / k;
    // Log-spaced samples on (0, split] and (split, 50 split]; both products are monotone or unimodal.
    for (int i = 0; i <= samples; ++i) {
        const double r = kc.split * std::pow(10.0, -8.0 * (1.0 - static_cast<double>(i) / samples));
        kc.c_near = std::max(kc.c_near, r * kernel_eval(nu, alpha, r));
    }
    for (int i = 1; i <= samples; ++i) {
        const double r = kc.split * std::pow(50.0, static_cast<double>(i) / samples);
        kc.c_far = std::max(kc.c_far, kernel_eval(nu, alpha, r) * std::exp(0.5 * k * r));
    }
    kc.c_far = std::max(kc.c_far, kernel_eval(nu, alpha, kc.split) * std::exp(0.5 * k * kc.split));
    kc.c = std::max(kc.c_near, kc.c_far);
    return kc;
}

/// (G * g)(r) for radial g on R^3. With the shell integral of G in closed form:
/// (1 / (2 nu k r)) int_0^inf s g(s) (e^{-k |r - s|} - e^{-k (r + s)}) ds, k = sqrt(alpha / nu).
inline QuadratureValue radial_convolution(const std::function<double(double)>& g, double nu, double alpha, double r) {
    detail::check_kernel_params(nu, alpha);
    if (!(r > 0.0)) throw DomainError("radial_convolution: r must be > 0");
    const double k = detail::screening(nu, alpha);
    auto integrand = [&](double s) {
        // e^{-k|r-s|} - e^{-k(r+s)} = e^{-k|r-s|} (1 - e^{-2k min(r,s)})
        const double m = std::min(r, s);
        return s * g(s) * std::exp(-k * std::abs(r - s)) * (-std::expm1(-2.0 * k * m));
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    double e1 = 0.0, e2 = 0.0, e3 = 0.0;
    const double width = 40.0 / k;
    const double a = std::max(0.0, r - width);
    double v = 0.0;
    if (a > 0.0) v += GK::integrate(integrand, 0.0, a, 15, 1e-12, &e1);
    v += GK::integrate(integrand, a, r, 15, 1e-12, &e2);
    v += GK::integrate(integrand, r, r + width, 15, 1e-12, &e3);
    boost::math::quadrature::exp_sinh<double> tail;
    double e4 = 0.0;
    v += tail.integrate(integrand, r + width, std::numeric_limits<double>::infinity(), 1e-12, &e4);
    const double pre = 1.0 / (2.0 * nu * k * r);
    const double err = pre * (e1 + e2 + e3 + e4);
    v *= pre;
    if (!std::isfinite(v) || err > 1e-6 * std::abs(v) + 1e-300) {
        throw NumericalError("radial_convolution: quadrature did not converge at r = " + std::to_string(r));
    }
    return {v, err};
}

struct DecayTransferRow {
    double r = 0.0;
    double conv = 0.0;   // (G * g)(r)
    double scaled = 0.0; // r^n (G * g)(r)
};

struct DecayTransfer {
    int n = 4;
    std::vector<DecayTransferRow> rows;
    double plateau = 0.0;  // max_r r^n (G * g)(r)
    double spread = 0.0;   // max / min of r^n (G * g)(r)
    bool bounded = false;  // spread <= 1.5
};

inline DecayTransfer decay_transfer_check(const std::function<double(double)>& g, int n, double nu, double alpha,
                                          const std::vector<double>& radii) {
    if (n < 1) throw DomainError("decay_transfer_check: n must be >= 1");
    if (radii.empty()) throw DomainError("decay_transfer_check: no sample radii");
    DecayTransfer out;
    out.n = n;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double r : radii) {
        DecayTransferRow row;
        row.r = r;
        row.conv = radial_convolution(g, nu, alpha, r).value;
        row.scaled = std::pow(r, n) * row.conv;
        lo = std::min(lo, row.scaled);
        hi = std::max(hi, row.scaled);
        out.rows.push_back(row);
    }
    out.plateau = hi;
    out.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    out.bounded = out.spread <= 1.5;
    return out;
}

struct PeriodizationCheck {
    double max_rel_error = 0.0;
    double box_efolds = 0.0;  // L_box / sqrt(nu / alpha), centre-to-face distance in kernel e-folding lengths
    std::size_t points = 0;
};

/// Applies (nu |xi|^2 + alpha)^{-1} on the torus to exp(-|x|^2 / (2 sigma^2)) and compares with
/// the whole-space convolution at grid points with |x| <= r_probe.
inline PeriodizationCheck periodized_multiplier_check(const GridSpec& g, double nu, double alpha, double sigma,
                                                      double r_probe) {
    detail::check_kernel_params(nu, alpha);
    if (!(sigma > 0.0) || !(r_probe > 0.0)) throw DomainError("periodized_multiplier_check: sigma, r_probe must be > 0");
    BasicPhysicalField<1> bump(g);
    const int n = g.resolution();
    std::size_t idx = 0;
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
            for (int i3 = 0; i3 < n; ++i3, ++idx) {
                const double x = g.coordinate(i1), y = g.coordinate(i2), z = g.coordinate(i3);
                bump.data[idx] = std::exp(-(x * x + y * y + z * z) / (2.0 * sigma * sigma));
            }
    const auto solved = inverse_transform(apply_multiplier(Multiplier::resolvent(nu, alpha), forward_transform(bump)));
    auto profile = [sigma](double s) { return std::exp(-s * s / (2.0 * sigma * sigma)); };
    PeriodizationCheck out;
    out.box_efolds = g.box_half_side() / std::sqrt(nu / alpha);
    idx = 0;
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
            for (int i3 = 0; i3 < n; ++i3, ++idx) {
                const double x = g.coordinate(i1), y = g.coordinate(i2), z = g.coordinate(i3);
                const double r = std::sqrt(x * x + y * y + z * z);
                if (r > r_probe || r == 0.0) continue;
                const double exact = radial_convolution(profile, nu, alpha, r).value;
                out.max_rel_error = std::max(out.max_rel_error, std::abs(solved.data[idx] - exact) / exact);
                ++out.points;
            }
    return out;
}

}  // namespace nsk41
