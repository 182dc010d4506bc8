#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nsk41/dynamics.hpp"
#include "nsk41/fit.hpp"

namespace nsk41 {

/// Shell j collects |xi| in [(j - 1/2) dk, (j + 1/2) dk).
struct ShellSpectrum {
    double dk = 0.0;
    std::vector<double> kappa;       // j dk
    std::vector<double> energy;      // |box| sum |u^|^2 / dk
    std::vector<double> max_amp;     // max |u^(xi)| over the shell
    std::vector<double> argmax;      // |xi| where max_amp is attained
    std::vector<std::size_t> count;  // modes in the shell

    std::size_t size() const { return kappa.size(); }
    double total() const {
        double s = 0.0;
        for (double e : energy) s += e * dk;
        return s;
    }
};

inline ShellSpectrum shell_spectrum(const SpectralField& u) {
    const GridSpec& g = u.grid();
    ShellSpectrum s;
    s.dk = g.dk();
    const int n = g.resolution();
    const std::size_t shells = static_cast<std::size_t>(std::floor(std::sqrt(3.0) * (n / 2) + 0.5)) + 1;
    s.kappa.resize(shells);
    s.energy.assign(shells, 0.0);
    s.max_amp.assign(shells, 0.0);
    s.argmax.assign(shells, 0.0);
    s.count.assign(shells, 0);
    for (std::size_t j = 0; j < shells; ++j) s.kappa[j] = static_cast<double>(j) * s.dk;
    const double vol = g.volume();
    for_each_mode(g, [&](std::size_t idx, const Vec3&, double xi2) {
        const double r = std::sqrt(xi2);
        const auto j = static_cast<std::size_t>(std::floor(r / s.dk + 0.5));
        const double a2 = std::norm(u(0, idx)) + std::norm(u(1, idx)) + std::norm(u(2, idx));
        s.energy[j] += vol * a2;
        ++s.count[j];
        const double a = std::sqrt(a2);
        if (a > s.max_amp[j]) {
            s.max_amp[j] = a;
            s.argmax[j] = r;
        }
    });
    for (double& e : s.energy) e /= s.dk;
    return s;
}

struct DissipationScales {
    double kappa0 = 0.0;   // 1 / ell0
    double kappa_d = 0.0;  // (eps / nu^3)^{1/4}
    double Re = 0.0;
    double ratio_turbulent = 0.0;  // kappa_d / (Re^{3/4} kappa0)
    double ratio_laminar = 0.0;    // kappa_d / (Re^{1/2} kappa0)
    bool defined = false;
};

/// Undefined (NaN ratios) when eps <= 0 or Re <= 0.
inline DissipationScales dissipation_scales(const AverageSet& avg, const PhysicalParams& p) {
    DissipationScales d;
    d.kappa0 = 1.0 / p.ell0;
    d.Re = avg.Re;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (!(avg.eps > 0.0)) {
        d.kappa_d = nan;
        d.ratio_turbulent = d.ratio_laminar = nan;
        return d;
    }
    d.kappa_d = std::pow(avg.eps / (p.nu * p.nu * p.nu), 0.25);
    if (avg.Re > 0.0) {
        d.ratio_turbulent = d.kappa_d / (std::pow(avg.Re, 0.75) * d.kappa0);
        d.ratio_laminar = d.kappa_d / (std::sqrt(avg.Re) * d.kappa0);
        d.defined = true;
    } else {
        d.ratio_turbulent = d.ratio_laminar = nan;
    }
    return d;
}

enum class DecayCurve { max_shell, energy };

struct DecayFit {
    DecayCurve curve = DecayCurve::max_shell;
    double kappa_lo = 0.0, kappa_hi = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double rate = 0.0;  // -slope
    std::size_t shells = 0;
    std::vector<double> excluded;  // centers of window shells left out (empty or below the floor)
    double target = std::numeric_limits<double>::quiet_NaN();
    bool meets_target = false;
};

constexpr double kDecayFloor = 1e-30;

/// Least-squares line through log M (abscissa: radius of the shell maximum) or
/// log E (abscissa: shell center) over the shells whose centers lie in [kappa_lo, kappa_hi].
inline DecayFit exponential_decay_fit(const ShellSpectrum& s, double kappa_lo, double kappa_hi, double kappa_max,
                                      DecayCurve curve = DecayCurve::max_shell,
                                      double target = std::numeric_limits<double>::quiet_NaN()) {
    if (!(kappa_lo < kappa_hi)) throw DomainError("exponential_decay_fit: need kappa_lo < kappa_hi");
    if (kappa_hi > kappa_max * (1.0 + 1e-12)) throw DomainError("exponential_decay_fit: kappa_hi exceeds kappa_max");
    DecayFit fit;
    fit.curve = curve;
    fit.kappa_lo = kappa_lo;
    fit.kappa_hi = kappa_hi;
    fit.target = target;
    std::vector<double> x, y;
    const double slack = 1e-9 * s.dk;
    for (std::size_t j = 1; j < s.size(); ++j) {
        if (s.kappa[j] < kappa_lo - slack || s.kappa[j] > kappa_hi + slack) continue;
        const double v = curve == DecayCurve::max_shell ? s.max_amp[j] : s.energy[j];
        if (s.count[j] == 0 || !(v > kDecayFloor)) {
            fit.excluded.push_back(s.kappa[j]);
            continue;
        }
        x.push_back(curve == DecayCurve::max_shell ? s.argmax[j] : s.kappa[j]);
        y.push_back(std::log(v));
    }
    if (!fit.excluded.empty()) {
        log::warn("exponential_decay_fit: " + std::to_string(fit.excluded.size()) +
                  " window shell(s) empty or below the floor, excluded");
    }
    if (x.size() < 5) {
        throw DomainError("exponential_decay_fit: fewer than 5 usable shells (" + std::to_string(x.size()) + ")");
    }
    const LineFit lf = fit_line(x, y);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.r2 = lf.r2;
    fit.rate = -lf.slope;
    fit.shells = lf.points;
    fit.meets_target = std::isnan(target) ? false : fit.rate >= target;
    return fit;
}

inline DecayFit exponential_decay_fit(const SpectralField& u, double kappa_lo, double kappa_hi,
                                      DecayCurve curve = DecayCurve::max_shell,
                                      double target = std::numeric_limits<double>::quiet_NaN()) {
    return exponential_decay_fit(shell_spectrum(u), kappa_lo, kappa_hi, u.grid().kappa_max(), curve, target);
}

struct GevreyRadius {
    double beta_star = 0.0;  // max-shell fit rate
    DecayFit fit;
    std::vector<double> beta;
    std::vector<double> norm;               // ||e^{beta sqrt(-Lap)} u||_{H^s dot}
    std::vector<double> top_shell_fraction; // share of norm^2 carried by |xi| in (kappa_max - dk, kappa_max]
    double beta_cross = std::numeric_limits<double>::quiet_NaN();  // first beta with fraction >= 1/2
};

/// Exponential decay rate of the max-shell amplitude over [kappa_lo, kappa_hi],
/// cross-checked against the beta at which the Gevrey norm becomes dominated by the last dk below the cutoff.
inline GevreyRadius gevrey_radius(const SpectralField& u, double s, const std::vector<double>& beta_grid,
                                  double kappa_lo, double kappa_hi) {
    GevreyRadius out;
    out.fit = exponential_decay_fit(u, kappa_lo, kappa_hi);
    out.beta_star = out.fit.rate;
    const GridSpec& g = u.grid();
    const double dk = g.dk();
    const double cut = g.kappa_max() * (1.0 + 1e-12);
    const double top = g.kappa_max() - dk;
    for (double b : beta_grid) {
        if (!(b >= 0.0)) throw DomainError("gevrey_radius: beta must be >= 0");
        double total = 0.0, shell = 0.0;
        for_each_mode(g, [&](std::size_t idx, const Vec3&, double xi2) {
            const double r = std::sqrt(xi2);
            if (r == 0.0 || r > cut) return;
            const double a2 = std::norm(u(0, idx)) + std::norm(u(1, idx)) + std::norm(u(2, idx));
            const double w = std::exp(2.0 * b * r) * std::pow(r, 2.0 * s) * a2;
            total += w;
            if (r > top) shell += w;
        });
        out.beta.push_back(b);
        out.norm.push_back(gevrey_norm(u, b, s));
        const double frac = total > 0.0 ? shell / total : 0.0;
        out.top_shell_fraction.push_back(frac);
        if (std::isnan(out.beta_cross) && frac >= 0.5) out.beta_cross = b;
    }
    return out;
}

/// log E against log kappa over [kappa_lo, kappa_hi]; informational.
inline LineFit five_thirds_probe(const ShellSpectrum& s, double kappa_lo, double kappa_hi) {
    std::vector<double> x, y;
    const double slack = 1e-9 * s.dk;
    for (std::size_t j = 1; j < s.size(); ++j) {
        if (s.kappa[j] < kappa_lo - slack || s.kappa[j] > kappa_hi + slack) continue;
        if (s.count[j] == 0 || !(s.energy[j] > kDecayFloor)) continue;
        x.push_back(std::log(s.kappa[j]));
        y.push_back(std::log(s.energy[j]));
    }
    if (x.size() < 5) throw DomainError("five_thirds_probe: fewer than 5 usable shells");
    return fit_line(x, y);
}

/// i e^{-beta |xi|} (xi x a) / |xi x a| on 0 < |xi| <= kappa_max: Hermitian and divergence-free.
inline SpectralField synthetic_exponential_field(const GridSpec& g, double beta, const Vec3& a = {0.3, 0.5, 0.8}) {
    SpectralField u(g);
    const double cut = g.kappa_max() * (1.0 + 1e-12);
    const int n = g.resolution();
    std::size_t idx = 0;
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
            for (int i3 = 0; i3 < n; ++i3, ++idx) {
                if (i1 == n / 2 || i2 == n / 2 || i3 == n / 2) continue;
                const Vec3 xi{g.wavenumber(i1) * g.dk(), g.wavenumber(i2) * g.dk(), g.wavenumber(i3) * g.dk()};
                const double r = std::sqrt(dot(xi, xi));
                if (r == 0.0 || r > cut) continue;
                const Vec3 c{xi[1] * a[2] - xi[2] * a[1], xi[2] * a[0] - xi[0] * a[2], xi[0] * a[1] - xi[1] * a[0]};
                const double cn = std::sqrt(dot(c, c));
                if (cn == 0.0) continue;
                const double amp = std::exp(-beta * r) / cn;
                for (std::size_t k = 0; k < 3; ++k) u(k, idx) = cplx(0.0, amp * c[k]);
            }
    return u;
}

}  // namespace nsk41
