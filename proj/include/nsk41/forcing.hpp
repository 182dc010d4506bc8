#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "nsk41/norms.hpp"
#include "nsk41/params.hpp"

namespace nsk41 {

/// exp(-1/(1 - t^2)) on t in (-1, 1), zero elsewhere.
inline double smooth_bump(double t) {
    if (!(std::abs(t) < 1.0)) return 0.0;
    return std::exp(-1.0 / (1.0 - t * t));
}

/// Frequency-localized force: f(x) = F sum_{|ell0 k| <= L} phi(x/ell0 - k), with
/// phi^(eta) = chi(|eta|) P(eta) a, chi supported on [rho1, rho2].
struct ForceSpec {
    PhysicalParams params;
    /// Radial profile on the annulus as a function of |eta| = ell0 |xi|; empty
    /// selects the bump exp(-1/(1-t^2)) rescaled onto [rho1, rho2].
    std::function<double(double)> profile;
    /// Pre-projection amplitude a.
    Vec3 orientation{1.0, 2.0, 3.0};

    double chi(double r) const {
        const double r1 = params.rho1, r2 = params.rho2;
        if (r < r1 || r > r2) return 0.0;
        if (profile) return profile(r);
        return smooth_bump((2.0 * r - r1 - r2) / (r2 - r1));
    }
};

/// {k in Z^3 : |ell0 k| <= L}.
inline std::vector<std::array<int, 3>> force_lattice(const PhysicalParams& p) {
    const double R = p.L / p.ell0;
    const double R2 = R * R * (1.0 + 1e-12);
    const int m = static_cast<int>(std::floor(R * (1.0 + 1e-12)));
    std::vector<std::array<int, 3>> out;
    for (int a = -m; a <= m; ++a)
        for (int b = -m; b <= m; ++b)
            for (int c = -m; c <= m; ++c)
                if (a * a + b * b + c * c <= R2) out.push_back({a, b, c});
    return out;
}

namespace detail {

/// sum over |k| <= R of cos(theta . k), summing each k3-line in closed form
/// with the Dirichlet kernel sin((m + 1/2) t) / sin(t / 2).
inline double lattice_phase_sum(const Vec3& theta, double R) {
    const double R2 = R * R * (1.0 + 1e-12);
    const int m = static_cast<int>(std::floor(R * (1.0 + 1e-12)));
    const double s3 = std::sin(0.5 * theta[2]);
    double acc = 0.0;
    for (int a = -m; a <= m; ++a)
        for (int b = -m; b <= m; ++b) {
            const double rest = R2 - a * a - b * b;
            if (rest < 0.0) continue;
            const int m3 = static_cast<int>(std::floor(std::sqrt(rest)));
            const double line = std::abs(s3) < 1e-14 ? 2.0 * m3 + 1.0 : std::sin((m3 + 0.5) * theta[2]) / s3;
            acc += std::cos(theta[0] * a + theta[1] * b) * line;
        }
    return acc;
}

inline void check_force_grid(const PhysicalParams& p, const GridSpec& g) {
    const double ratio = g.box_half_side() / p.ell0;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
        throw ConfigError("force lattice incompatible with the box: L_box / ell0 must be an integer");
    }
    if (p.L > g.box_half_side() * (1.0 + 1e-12)) {
        throw ConfigError("force lattice incompatible with the box: params.L exceeds L_box");
    }
}

}  // namespace detail

/// Builds f on the lattice. Coefficients follow the grid normalization, so each
/// translate contributes F ell0^3 / |box| * phi^(ell0 xi) e^{-i xi . ell0 k}.
inline SpectralField build_force(const ForceSpec& spec, const GridSpec& g) {
    const PhysicalParams& p = spec.params;
    p.validate();
    detail::check_force_grid(p, g);
    if (annulus_mode_count(g, p.ell0, p.rho1, p.rho2) == 0) {
        throw DomainError("build_force: no lattice mode in the annulus [rho1/ell0, rho2/ell0]");
    }
    const double lo = p.rho1 / p.ell0, hi = p.rho2 / p.ell0;
    const double scale = p.F * p.ell0 * p.ell0 * p.ell0 / g.volume();
    const double R = p.L / p.ell0;
    const Vec3& a = spec.orientation;
    SpectralField f(g);
    if (p.F == 0.0) return f;
    for_each_mode(g, [&](std::size_t idx, const Vec3& xi, double xi2) {
        const double r = std::sqrt(xi2);
        if (xi2 == 0.0 || !in_annulus(r, lo, hi)) return;
        const double c = spec.chi(std::clamp(p.ell0 * r, p.rho1, p.rho2));
        if (c == 0.0) return;
        const Vec3 theta{p.ell0 * xi[0], p.ell0 * xi[1], p.ell0 * xi[2]};
        const double amp = scale * c * detail::lattice_phase_sum(theta, R);
        const double d = dot(xi, a) / xi2;
        for (std::size_t i = 0; i < 3; ++i) f(i, idx) = amp * (a[i] - xi[i] * d);
    });
    return f;
}

struct NormRatio {
    double s = 0.0;
    double p = 2.0;
    double norm = 0.0;   // ||(-Delta)^s f||_{L^p}
    double scale = 0.0;  // F L^{3/p} ell0^{-2s}
    double ratio = 0.0;
};

/// ||(-Delta)^s f||_{L^p} / (F L^{3/p} ell0^{-2s}) for every (s, p) pair.
inline std::vector<NormRatio> audit_norm_equivalence(const ForceSpec& spec, const GridSpec& g,
                                                     const std::vector<double>& s_values,
                                                     const std::vector<double>& p_values) {
    const SpectralField f = build_force(spec, g);
    const PhysicalParams& pp = spec.params;
    std::vector<NormRatio> rows;
    for (double s : s_values) {
        const SpectralField fs = apply_multiplier(Multiplier::fractional_laplacian(s), f);
        const auto phys = inverse_transform(fs);
        for (double p : p_values) {
            NormRatio row{s, p};
            row.norm = lp_norm_physical(phys, p);
            const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
            row.scale = pp.F * std::pow(pp.L, 3.0 * inv_p) * std::pow(pp.ell0, -2.0 * s);
            row.ratio = row.scale > 0.0 ? row.norm / row.scale : std::numeric_limits<double>::quiet_NaN();
            rows.push_back(row);
        }
    }
    return rows;
}

/// G_theta = F L^theta ell0^{3 - theta} / nu^2.
inline double grashof(const PhysicalParams& p, double theta) {
    if (!(theta >= 0.0 && theta <= 3.0)) throw DomainError("grashof: theta must lie in [0, 3]");
    return p.F * std::pow(p.L, theta) * std::pow(p.ell0, 3.0 - theta) / (p.nu * p.nu);
}

struct GrashofEstimate {
    double theta = 0.0;
    double s = 0.0;       // (theta - 3) / 2
    double p = 0.0;       // 3 / theta
    double value = 0.0;   // ||(-Delta)^s f||_{L^p} / nu^2
    double formula = 0.0; // grashof(params, theta)
};

/// Force-side Grashof number ||(-Delta)^s f||_{L^p} / nu^2 with 3/p = theta and -2s = 3 - theta.
inline GrashofEstimate grashof_from_force(const SpectralField& f, const PhysicalParams& params, double theta) {
    GrashofEstimate est{theta};
    est.formula = grashof(params, theta);
    est.s = 0.5 * (theta - 3.0);
    est.p = theta == 0.0 ? std::numeric_limits<double>::infinity() : 3.0 / theta;
    est.value = lp_norm(apply_multiplier(Multiplier::fractional_laplacian(est.s), f), est.p) / (params.nu * params.nu);
    return est;
}

/// v(mu) = (integral over the complement of [-mu L, mu L]^3 of |(-Delta)^s f|^2)^{1/2},
/// rectangle rule on the collocation grid.
inline double spatial_concentration(const SpectralField& f, double L, double mu, double s = 0.0) {
    const GridSpec& g = f.grid();
    if (!(mu >= 1.0)) throw DomainError("spatial_concentration: mu must be >= 1");
    const double half = mu * L;
    if (half > g.box_half_side() * (1.0 + 1e-12)) throw DomainError("spatial_concentration: mu L exceeds L_box");
    const auto phys = inverse_transform(s == 0.0 ? f : apply_multiplier(Multiplier::fractional_laplacian(s), f));
    const int n = g.resolution();
    const double h = g.spacing();
    const double edge = half * (1.0 + 1e-12);
    double acc = 0.0;
    std::size_t idx = 0;
    for (int i1 = 0; i1 < n; ++i1) {
        const bool in1 = std::abs(g.coordinate(i1)) <= edge;
        for (int i2 = 0; i2 < n; ++i2) {
            const bool in2 = std::abs(g.coordinate(i2)) <= edge;
            for (int i3 = 0; i3 < n; ++i3, ++idx) {
                if (in1 && in2 && std::abs(g.coordinate(i3)) <= edge) continue;
                for (std::size_t c = 0; c < 3; ++c) acc += phys(c, idx) * phys(c, idx);
            }
        }
    }
    return std::sqrt(h * h * h * acc);
}

}  // namespace nsk41
