#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "nsk41/grid.hpp"

namespace nsk41 {

using cplx = std::complex<double>;

/// Band-limited periodic field stored as Fourier coefficients, C components,
/// component-major. Coefficient normalization: c(xi) = mean over the grid of
/// u(x) e^{-i xi.x}, so that ||u||_{L2}^2 = |box| * sum |c(xi)|^2.
template <std::size_t C>
class BasicSpectralField {
public:
    static constexpr std::size_t components = C;
    using Mode = std::array<cplx, C>;

    BasicSpectralField() = default;
    explicit BasicSpectralField(const GridSpec& grid) : grid_(grid), data_(C * grid.modes()) {}

    static BasicSpectralField zero(const GridSpec& grid) { return BasicSpectralField(grid); }

    const GridSpec& grid() const { return grid_; }
    std::size_t modes() const { return grid_.modes(); }

    std::span<cplx> component(std::size_t c) { return {data_.data() + c * modes(), modes()}; }
    std::span<const cplx> component(std::size_t c) const { return {data_.data() + c * modes(), modes()}; }

    cplx& operator()(std::size_t c, std::size_t idx) { return data_[c * modes() + idx]; }
    const cplx& operator()(std::size_t c, std::size_t idx) const { return data_[c * modes() + idx]; }

    Mode mode(std::size_t idx) const {
        Mode m{};
        for (std::size_t c = 0; c < C; ++c) m[c] = (*this)(c, idx);
        return m;
    }
    void set_mode(std::size_t idx, const Mode& m) {
        for (std::size_t c = 0; c < C; ++c) (*this)(c, idx) = m[c];
    }

    std::span<cplx> data() { return data_; }
    std::span<const cplx> data() const { return data_; }

    BasicSpectralField& operator+=(const BasicSpectralField& o) {
        require_same_grid(grid_, o.grid_);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    BasicSpectralField& operator-=(const BasicSpectralField& o) {
        require_same_grid(grid_, o.grid_);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    BasicSpectralField& operator*=(cplx s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend BasicSpectralField operator+(BasicSpectralField a, const BasicSpectralField& b) { return a += b; }
    friend BasicSpectralField operator-(BasicSpectralField a, const BasicSpectralField& b) { return a -= b; }
    friend BasicSpectralField operator*(cplx s, BasicSpectralField a) { return a *= s; }
    friend BasicSpectralField operator*(double s, BasicSpectralField a) { return a *= cplx(s, 0.0); }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    bool is_zero() const {
        return std::all_of(data_.begin(), data_.end(), [](const cplx& v) { return v == cplx{}; });
    }

    /// max |c(-k) - conj(c(k))| over modes and components.
    double hermitian_defect() const {
        double d = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            const auto comp = component(c);
            for (std::size_t idx = 0; idx < modes(); ++idx) {
                d = std::max(d, std::abs(comp[grid_.mirror_flat(idx)] - std::conj(comp[idx])));
            }
        }
        return d;
    }

    /// Replace each coefficient by the Hermitian average (c(k) + conj c(-k)) / 2.
    void symmetrize() {
        for (std::size_t c = 0; c < C; ++c) {
            auto comp = component(c);
            for (std::size_t idx = 0; idx < modes(); ++idx) {
                const std::size_t m = grid_.mirror_flat(idx);
                if (m < idx) continue;
                const cplx avg = 0.5 * (comp[idx] + std::conj(comp[m]));
                comp[idx] = avg;
                comp[m] = std::conj(avg);
            }
        }
    }

    const cplx& mean(std::size_t c) const { return (*this)(c, 0); }

    bool operator==(const BasicSpectralField& o) const { return grid_ == o.grid_ && data_ == o.data_; }

private:
    GridSpec grid_{};
    std::vector<cplx> data_;
};

using SpectralField = BasicSpectralField<3>;
using ScalarSpectralField = BasicSpectralField<1>;

/// Samples on the collocation grid x_j = -L_box + j h, component-major,
/// point index (j1 * N + j2) * N + j3.
template <std::size_t C>
struct BasicPhysicalField {
    static constexpr std::size_t components = C;

    GridSpec grid{};
    std::vector<double> data;

    BasicPhysicalField() = default;
    explicit BasicPhysicalField(const GridSpec& g) : grid(g), data(C * g.modes()) {}

    std::span<double> component(std::size_t c) { return {data.data() + c * grid.modes(), grid.modes()}; }
    std::span<const double> component(std::size_t c) const {
        return {data.data() + c * grid.modes(), grid.modes()};
    }
    double& operator()(std::size_t c, std::size_t idx) { return data[c * grid.modes() + idx]; }
    double operator()(std::size_t c, std::size_t idx) const { return data[c * grid.modes() + idx]; }

    Vec3 point(std::size_t idx) const {
        const auto n = static_cast<std::size_t>(grid.resolution());
        return {grid.coordinate(static_cast<int>(idx / (n * n))), grid.coordinate(static_cast<int>((idx / n) % n)),
                grid.coordinate(static_cast<int>(idx % n))};
    }

    /// Fill by evaluating fn(x) -> std::array<double, C> at every grid point.
    template <class Fn>
    static BasicPhysicalField sample(const GridSpec& g, Fn&& fn) {
        BasicPhysicalField p(g);
        for (std::size_t idx = 0; idx < g.modes(); ++idx) {
            const auto v = fn(p.point(idx));
            for (std::size_t c = 0; c < C; ++c) p(c, idx) = v[c];
        }
        return p;
    }
};

using PhysicalField = BasicPhysicalField<3>;
using ScalarPhysicalField = BasicPhysicalField<1>;

}  // namespace nsk41
