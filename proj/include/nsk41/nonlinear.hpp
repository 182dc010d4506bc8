#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "nsk41/operators.hpp"

namespace nsk41 {

/// Pseudo-spectral evaluation of P div(u (x) v): inverse transforms, pointwise
/// tensor product, forward transforms, spherical dealiasing mask at kappa_max,
/// Leray projection. Reuses its buffers across calls; one instance per thread.
class ProductEvaluator {
public:
    explicit ProductEvaluator(const GridSpec& g) : grid_(g), mask_(g.modes()) {
        const auto& n2 = detail::lattice_norm2(g.resolution());
        const double cut = g.dealias_fraction() * (g.resolution() / 2);
        for (std::size_t i = 0; i < n2.size(); ++i) mask_[i] = static_cast<double>(n2[i]) <= cut * cut ? 1 : 0;
        for (auto& p : phys_) p.resize(g.modes());
        for (auto& t : prod_) t.resize(g.modes());
    }

    const GridSpec& grid() const { return grid_; }

    /// P div(u (x) v). `max_speed`, when given, receives max_x |u(x)|.
    SpectralField projected_divergence(const SpectralField& u, const SpectralField& v, double* max_speed = nullptr) {
        compute_products(u, v, max_speed);
        return divergence_of_products(true);
    }

    /// (u . grad) u projected: P div(u (x) u) for divergence-free u.
    SpectralField projected_advection(const SpectralField& u, double* max_speed = nullptr) {
        return projected_divergence(u, u, max_speed);
    }

    /// div(u (x) u) without the Leray projection, dealiased.
    SpectralField divergence_unprojected(const SpectralField& u) {
        compute_products(u, u, nullptr);
        return divergence_of_products(false);
    }

private:
    void compute_products(const SpectralField& u, const SpectralField& v, double* max_speed) {
        require_same_grid(grid_, u.grid());
        require_same_grid(grid_, v.grid());
        const bool symmetric = (&u == &v);
        const std::size_t m = grid_.modes();

        // phys_[0..2] = u, phys_[3..5] = v
        detail::inverse_pair(grid_, u.component(0), u.component(1), phys_[0], phys_[1], w1_, w2_);
        if (symmetric) {
            detail::inverse_pair(grid_, u.component(2), {}, phys_[2], {}, w1_, w2_);
        } else {
            detail::inverse_pair(grid_, u.component(2), v.component(0), phys_[2], phys_[3], w1_, w2_);
            detail::inverse_pair(grid_, v.component(1), v.component(2), phys_[4], phys_[5], w1_, w2_);
        }
        if (max_speed) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                s = std::max(s, phys_[0][i] * phys_[0][i] + phys_[1][i] * phys_[1][i] + phys_[2][i] * phys_[2][i]);
            *max_speed = std::sqrt(s);
        }
        const std::array<const std::vector<double>*, 3> uu{&phys_[0], &phys_[1], &phys_[2]};
        const std::array<const std::vector<double>*, 3> vv =
            symmetric ? uu : std::array<const std::vector<double>*, 3>{&phys_[3], &phys_[4], &phys_[5]};

        // T_{ji} = u_j v_i; the symmetric case stores the upper triangle only.
        int count = 0;
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) slot_[j][i] = (symmetric && i < j) ? slot_[i][j] : count++;
        products_.resize(static_cast<std::size_t>(count));
        for (auto& p : products_) p.resize(m);
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) {
                if (symmetric && i < j) continue;
                auto& dst = products_[slot_[j][i]];
                const auto& a = *uu[j];
                const auto& b = *vv[i];
                for (std::size_t x = 0; x < m; ++x) dst[x] = a[x] * b[x];
            }
        for (int s = 0; s < count; s += 2) {
            const bool pair = s + 1 < count;
            detail::forward_pair(grid_, products_[s],
                                 pair ? std::span<const double>(products_[s + 1]) : std::span<const double>{}, prod_[s],
                                 pair ? std::span<cplx>(prod_[s + 1]) : std::span<cplx>{}, w1_, w2_);
        }
    }

    SpectralField divergence_of_products(bool project) const {
        SpectralField out(grid_);
        const cplx I(0.0, 1.0);
        for_each_mode(grid_, [&](std::size_t idx, const Vec3& xi, double xi2) {
            if (!mask_[idx] || xi2 == 0.0) return;
            std::array<cplx, 3> d{};
            for (int i = 0; i < 3; ++i)
                d[i] = I * (xi[0] * prod_[slot_[0][i]][idx] + xi[1] * prod_[slot_[1][i]][idx] +
                            xi[2] * prod_[slot_[2][i]][idx]);
            const cplx proj = project ? (xi[0] * d[0] + xi[1] * d[1] + xi[2] * d[2]) / xi2 : cplx{};
            for (int i = 0; i < 3; ++i) out(i, idx) = d[i] - xi[i] * proj;
        });
        return out;
    }

    GridSpec grid_;
    std::array<std::array<int, 3>, 3> slot_{};
    std::vector<char> mask_;
    std::array<std::vector<double>, 6> phys_;
    std::array<std::vector<cplx>, 10> prod_;
    std::vector<std::vector<double>> products_;
    std::vector<cplx> w1_, w2_;
};

namespace detail {
inline void warn_if_clipped(const SpectralField& u, const char* where) {
    const double frac = fraction_above_cutoff(u);
    if (frac > 1e-12) {
        log::warn(std::string(where) + ": operand carries a fraction " + std::to_string(frac) +
                  " of its coefficient energy above kappa_max; the dealiased product drops it");
    }
}

/// -1/|xi|^2 applied mode-wise; zero mode left zero.
inline SpectralField inverse_laplacian(SpectralField v) {
    for_each_mode(v.grid(), [&](std::size_t idx, const Vec3&, double xi2) {
        for (std::size_t c = 0; c < 3; ++c) v(c, idx) = xi2 == 0.0 ? cplx{} : v(c, idx) * (-1.0 / xi2);
    });
    return v;
}
}  // namespace detail

/// P div(u (x) v), pseudo-spectral and dealiased.
inline SpectralField projected_divergence(const SpectralField& u, const SpectralField& v) {
    detail::warn_if_clipped(u, "projected_divergence");
    if (&u != &v) detail::warn_if_clipped(v, "projected_divergence");
    ProductEvaluator ev(u.grid());
    return ev.projected_divergence(u, v);
}

/// B(u, v) = P Delta^{-1} div(u (x) v), pseudo-spectral and dealiased.
inline SpectralField bilinear(const SpectralField& u, const SpectralField& v) {
    return detail::inverse_laplacian(projected_divergence(u, v));
}

/// B(u, v) by exact discrete convolution over the nonzero coefficients: no
/// transforms and no mask, so the output support is exactly contained in the
/// Minkowski sum of the input supports. Throws if that sum leaves the lattice.
inline SpectralField bilinear_direct(const SpectralField& u, const SpectralField& v) {
    require_same_grid(u.grid(), v.grid());
    const GridSpec& g = u.grid();
    const int n = g.resolution();
    struct Entry {
        int k1, k2, k3;
        std::array<cplx, 3> c;
    };
    auto collect = [&](const SpectralField& f) {
        std::vector<Entry> list;
        std::size_t idx = 0;
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2)
                for (int i3 = 0; i3 < n; ++i3, ++idx) {
                    const auto m = f.mode(idx);
                    if (m[0] == cplx{} && m[1] == cplx{} && m[2] == cplx{}) continue;
                    list.push_back({g.wavenumber(i1), g.wavenumber(i2), g.wavenumber(i3), m});
                }
        return list;
    };
    const auto lu = collect(u);
    const auto lv = collect(v);
    std::array<std::vector<cplx>, 9> t;  // T_{ji} at slot 3*j + i
    for (auto& a : t) a.assign(g.modes(), cplx{});
    const int half = n / 2;
    for (const auto& p : lu) {
        for (const auto& q : lv) {
            const int k1 = p.k1 + q.k1, k2 = p.k2 + q.k2, k3 = p.k3 + q.k3;
            if (k1 < -half + 1 || k1 >= half || k2 < -half + 1 || k2 >= half || k3 < -half + 1 || k3 >= half) {
                throw DomainError("bilinear_direct: product support leaves the representable lattice");
            }
            const std::size_t idx = g.flat_of_wavenumbers(k1, k2, k3);
            for (int j = 0; j < 3; ++j)
                for (int i = 0; i < 3; ++i) t[3 * j + i][idx] += p.c[j] * q.c[i];
        }
    }
    SpectralField out(g);
    const cplx I(0.0, 1.0);
    for_each_mode(g, [&](std::size_t idx, const Vec3& xi, double xi2) {
        if (xi2 == 0.0) return;
        std::array<cplx, 3> d{};
        for (int i = 0; i < 3; ++i) d[i] = I * (xi[0] * t[i][idx] + xi[1] * t[3 + i][idx] + xi[2] * t[6 + i][idx]);
        if (d[0] == cplx{} && d[1] == cplx{} && d[2] == cplx{}) return;
        const cplx proj = (xi[0] * d[0] + xi[1] * d[1] + xi[2] * d[2]) / xi2;
        for (int i = 0; i < 3; ++i) out(i, idx) = (d[i] - xi[i] * proj) * (-1.0 / xi2);
    });
    return out;
}

}  // namespace nsk41
