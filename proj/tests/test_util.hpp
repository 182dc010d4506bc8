#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "nsk41/field.hpp"

namespace nsk41::test {

/// Naive O(N^6) DFT with the library's normalization; independent of FFTW.
inline SpectralField naive_forward(const PhysicalField& p) {
    const GridSpec& g = p.grid;
    const int n = g.resolution();
    SpectralField out(g);
    for_each_mode(g, [&](std::size_t idx, const Vec3& xi, double) {
        std::array<cplx, 3> acc{};
        for (std::size_t j = 0; j < g.modes(); ++j) {
            const Vec3 x = p.point(j);
            const cplx ph = std::exp(cplx(0.0, -(xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2])));
            for (std::size_t c = 0; c < 3; ++c) acc[c] += p(c, j) * ph;
        }
        for (std::size_t c = 0; c < 3; ++c) out(c, idx) = acc[c] / static_cast<double>(n * n * n);
    });
    return out;
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace nsk41::test
