#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "nsk41/norms.hpp"

namespace nsk41 {

/// Random initial data: Gaussian coefficients shaped so that the shell
/// spectrum scales like kappa^slope, truncated at max_wavenumber, Hermitian,
/// mean-free, optionally Leray-projected, rescaled to ||u||_{L2}^2 = energy.
struct RandomFieldSpec {
    double slope = -2.0;
    double max_wavenumber = 0.0;  // 0 selects the dealiasing cutoff
    double min_wavenumber = 0.0;
    double energy = 1.0;
    bool solenoidal = true;
};

inline SpectralField random_field(const GridSpec& g, std::uint64_t seed, const RandomFieldSpec& spec = {}) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double kmax = spec.max_wavenumber > 0.0 ? spec.max_wavenumber : g.kappa_max();
    SpectralField v(g);
    for_each_mode(g, [&](std::size_t idx, const Vec3&, double xi2) {
        // Draw for every mode so the stream does not depend on the cutoff.
        std::array<cplx, 3> z{};
        for (auto& c : z) {
            const double re = normal(rng);
            const double im = normal(rng);
            c = cplx(re, im);
        }
        const double r = std::sqrt(xi2);
        if (xi2 == 0.0 || r > kmax || r < spec.min_wavenumber) return;
        const double amp = std::pow(r, 0.5 * (spec.slope - 2.0));
        for (std::size_t c = 0; c < 3; ++c) v(c, idx) = amp * z[c];
    });
    // Nyquist planes have no distinct Hermitian partner; keep them empty.
    const int n = g.resolution();
    std::size_t idx = 0;
    for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
            for (int i3 = 0; i3 < n; ++i3, ++idx)
                if (i1 == n / 2 || i2 == n / 2 || i3 == n / 2)
                    for (std::size_t c = 0; c < 3; ++c) v(c, idx) = 0.0;
    v.symmetrize();
    if (spec.solenoidal) v = leray_project(v);
    const double e = l2_norm(v);
    if (e > 0.0) v *= cplx(std::sqrt(spec.energy) / e, 0.0);
    return v;
}

}  // namespace nsk41
