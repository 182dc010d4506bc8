#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

#include "nsk41/error.hpp"

namespace nsk41 {

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// Periodic cube [-L_box, L_box)^3 sampled on N^3 points.
///
/// Fourier modes are indexed in FFT order: array index i in [0, N) carries the
/// integer wavenumber k = i for i < N/2 and k = i - N otherwise, and the
/// physical wavevector is xi = dk * k with dk = pi / L_box.
class GridSpec {
public:
    GridSpec() = default;

    GridSpec(double box_half_side, int resolution, double dealias_fraction = 2.0 / 3.0)
        : box_half_side_(box_half_side), resolution_(resolution), dealias_fraction_(dealias_fraction) {
        if (!(box_half_side > 0.0) || !std::isfinite(box_half_side)) {
            throw ConfigError("grid.box_half_side must be positive and finite");
        }
        if (resolution < 8 || resolution % 2 != 0) {
            throw ConfigError("grid.resolution must be even and >= 8 (got " + std::to_string(resolution) + ")");
        }
        if (!(dealias_fraction > 0.0) || !(dealias_fraction < 1.0)) {
            throw ConfigError("grid.dealias_fraction must lie in (0, 1)");
        }
    }

    double box_half_side() const { return box_half_side_; }
    int resolution() const { return resolution_; }
    double dealias_fraction() const { return dealias_fraction_; }

    double dk() const { return std::numbers::pi / box_half_side_; }
    double kappa_max() const { return dealias_fraction_ * (resolution_ / 2) * dk(); }
    double volume() const { return 8.0 * box_half_side_ * box_half_side_ * box_half_side_; }
    double spacing() const { return 2.0 * box_half_side_ / resolution_; }
    double coordinate(int j) const { return -box_half_side_ + j * spacing(); }

    std::size_t modes() const {
        const auto n = static_cast<std::size_t>(resolution_);
        return n * n * n;
    }

    int wavenumber(int i) const { return i < resolution_ / 2 ? i : i - resolution_; }
    int index_of_wavenumber(int k) const { return k >= 0 ? k : k + resolution_; }
    int mirror(int i) const { return (resolution_ - i) % resolution_; }

    std::size_t flat(int i1, int i2, int i3) const {
        const auto n = static_cast<std::size_t>(resolution_);
        return (static_cast<std::size_t>(i1) * n + static_cast<std::size_t>(i2)) * n + static_cast<std::size_t>(i3);
    }

    std::size_t flat_of_wavenumbers(int k1, int k2, int k3) const {
        return flat(index_of_wavenumber(k1), index_of_wavenumber(k2), index_of_wavenumber(k3));
    }

    /// Index of the mode -k (Hermitian partner).
    std::size_t mirror_flat(std::size_t idx) const {
        const auto n = static_cast<std::size_t>(resolution_);
        const int i3 = static_cast<int>(idx % n);
        const int i2 = static_cast<int>((idx / n) % n);
        const int i1 = static_cast<int>(idx / (n * n));
        return flat(mirror(i1), mirror(i2), mirror(i3));
    }

    /// True when the wavenumber is representable with its negative (no Nyquist component).
    bool below_nyquist(int k) const { return k != -resolution_ / 2; }

    bool operator==(const GridSpec& o) const {
        return box_half_side_ == o.box_half_side_ && resolution_ == o.resolution_ &&
               dealias_fraction_ == o.dealias_fraction_;
    }

private:
    double box_half_side_ = std::numbers::pi;
    int resolution_ = 32;
    double dealias_fraction_ = 2.0 / 3.0;
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b) {
    if (!(a == b)) {
        throw ShapeError("grid mismatch between operands (N=" + std::to_string(a.resolution()) + " vs N=" +
                         std::to_string(b.resolution()) + ")");
    }
}

/// Visit every mode as (flat index, wavevector xi, |xi|^2).
template <class Fn>
void for_each_mode(const GridSpec& g, Fn&& fn) {
    const int n = g.resolution();
    const double dk = g.dk();
    std::size_t idx = 0;
    for (int i1 = 0; i1 < n; ++i1) {
        const double x1 = dk * g.wavenumber(i1);
        for (int i2 = 0; i2 < n; ++i2) {
            const double x2 = dk * g.wavenumber(i2);
            for (int i3 = 0; i3 < n; ++i3, ++idx) {
                const double x3 = dk * g.wavenumber(i3);
                const Vec3 xi{x1, x2, x3};
                fn(idx, xi, x1 * x1 + x2 * x2 + x3 * x3);
            }
        }
    }
}

}  // namespace nsk41
