#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nsk41/random_field.hpp"
#include "nsk41/spectra.hpp"
#include "nsk41/stationary.hpp"

using namespace nsk41;
using std::numbers::pi;

namespace {

double squared(double x) { return x * x; }

ShellSpectrum synthetic_spectrum(double exponent, int shells) {
    ShellSpectrum s;
    s.dk = 1.0;
    for (int j = 0; j < shells; ++j) {
        s.kappa.push_back(j);
        s.energy.push_back(j == 0 ? 0.0 : std::pow(static_cast<double>(j), exponent));
        s.max_amp.push_back(0.0);
        s.argmax.push_back(j);
        s.count.push_back(j == 0 ? 1 : 6);
    }
    return s;
}

}  // namespace

TEST(ShellSpectrum, SingleModeOccupiesOneShell) {
    const GridSpec g(2.0, 16);
    SpectralField u(g);
    u(0, g.flat_of_wavenumbers(0, 2, 0)) = cplx(0.0, -0.5);
    u(0, g.flat_of_wavenumbers(0, -2, 0)) = cplx(0.0, 0.5);
    const auto s = shell_spectrum(u);
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (j == 2) {
            EXPECT_GT(s.energy[j], 0.0);
        } else {
            EXPECT_EQ(s.energy[j], 0.0);
        }
    }
    EXPECT_NEAR(s.total(), squared(l2_norm(u)), 1e-14);
    EXPECT_NEAR(s.max_amp[2], 0.5, 1e-15);
    EXPECT_NEAR(s.argmax[2], 2.0 * g.dk(), 1e-14);
}

TEST(ShellSpectrum, TwoEqualModesDoubleTheShell) {
    const GridSpec g(2.0, 16);
    SpectralField one(g), two(g);
    for (auto* u : {&one, &two}) {
        (*u)(0, g.flat_of_wavenumbers(0, 2, 0)) = cplx(0.0, -0.5);
        (*u)(0, g.flat_of_wavenumbers(0, -2, 0)) = cplx(0.0, 0.5);
    }
    two(1, g.flat_of_wavenumbers(0, 0, 2)) = cplx(0.0, -0.5);
    two(1, g.flat_of_wavenumbers(0, 0, -2)) = cplx(0.0, 0.5);
    EXPECT_NEAR(shell_spectrum(two).energy[2], 2.0 * shell_spectrum(one).energy[2], 1e-14);
}

TEST(ShellSpectrum, ParsevalPartition) {
    for (int n : {16, 24}) {
        const GridSpec g(1.5, n);
        RandomFieldSpec rs;
        rs.energy = 3.7;
        const auto u = random_field(g, 42 + n, rs);
        const auto s = shell_spectrum(u);
        EXPECT_NEAR(s.total(), squared(l2_norm(u)), 1e-10 * squared(l2_norm(u)));
    }
}

TEST(DissipationScales, ClosedForms) {
    PhysicalParams p;
    p.nu = 0.3;
    p.ell0 = 0.5;
    AverageSet a;
    a.Re = 16.0;
    a.eps = std::pow(p.nu, 3);
    auto d = dissipation_scales(a, p);
    EXPECT_NEAR(d.kappa_d, 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(d.kappa0, 2.0);
    EXPECT_NEAR(d.ratio_turbulent, 1.0 / (8.0 * 2.0), 1e-14);
    EXPECT_NEAR(d.ratio_laminar, 1.0 / (4.0 * 2.0), 1e-14);
    a.eps = 16.0 * std::pow(p.nu, 3);
    EXPECT_NEAR(dissipation_scales(a, p).kappa_d, 2.0, 1e-14);
    a.eps = 0.0;
    d = dissipation_scales(a, p);
    EXPECT_FALSE(d.defined);
    EXPECT_TRUE(std::isnan(d.ratio_turbulent));
}

TEST(DecayFit, SyntheticRatesRecovered) {
    const GridSpec g(pi, 32);
    for (double beta : {0.1, 0.3, 1.0, 2.0, 3.0}) {
        const auto u = synthetic_exponential_field(g, beta);
        const auto fit = exponential_decay_fit(u, 2.0, g.kappa_max());
        EXPECT_GE(fit.shells, 8u);
        EXPECT_NEAR(fit.rate, beta, 0.02 * beta) << beta;
    }
}

TEST(DecayFit, FlatSpectrumHasZeroRate) {
    const GridSpec g(pi, 32);
    const auto fit = exponential_decay_fit(synthetic_exponential_field(g, 0.0), 2.0, g.kappa_max());
    EXPECT_NEAR(fit.rate, 0.0, 0.02);
}

TEST(DecayFit, WindowRobustness) {
    const GridSpec g(pi, 32);
    const auto s = shell_spectrum(synthetic_exponential_field(g, 1.0));
    const auto wide = exponential_decay_fit(s, 2.0, 10.0, g.kappa_max());
    const auto narrow = exponential_decay_fit(s, 3.0, 9.0, g.kappa_max());
    EXPECT_LE(std::abs(narrow.rate - wide.rate), 0.05 * wide.rate);
}

TEST(DecayFit, Errors) {
    const GridSpec g(pi, 32);
    const auto u = synthetic_exponential_field(g, 1.0);
    EXPECT_THROW(exponential_decay_fit(u, 2.0, 2.0 * g.kappa_max()), DomainError);
    EXPECT_THROW(exponential_decay_fit(u, 2.0, 5.0), DomainError);
    std::vector<std::string> seen;
    log::ScopedSink sink([&](const std::string& m) { seen.push_back(m); });
    EXPECT_THROW(exponential_decay_fit(synthetic_exponential_field(g, 40.0), 1.0, 10.0), DomainError);
    EXPECT_FALSE(seen.empty());
}

TEST(DecayFit, LaminarStationarySolutionBeatsTheOseenRate) {
    PhysicalParams p;
    p.nu = 0.5;
    p.alpha = 0.0;
    p.F = 2.0;
    const GridSpec g(2.0, 32);
    ForceSpec fs;
    fs.params = p;
    PicardConfig c;
    c.variant = PicardVariant::classical;
    const auto r = picard_solve(build_force(fs, g), p, c);
    ASSERT_TRUE(r.converged());
    const double target = p.ell0 / p.rho2;
    const auto fit = exponential_decay_fit(r.U, p.rho1 / p.ell0, g.kappa_max(), DecayCurve::max_shell, target);
    EXPECT_GE(fit.shells, 8u);
    EXPECT_GE(fit.r2, 0.95);
    EXPECT_TRUE(fit.meets_target) << fit.rate;
    EXPECT_GE(fit.rate, 0.9 * target);
    RecordProperty("laminar_rate", std::to_string(fit.rate));
}

TEST(GevreyRadius, SyntheticAndZeroBeta) {
    const GridSpec g(pi, 32);
    const auto u = synthetic_exponential_field(g, 1.0);
    const auto gr = gevrey_radius(u, 0.5, {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0}, 2.0, g.kappa_max());
    EXPECT_NEAR(gr.beta_star, 1.0, 0.02);
    EXPECT_NEAR(gr.norm[0], hs_norm(u, 0.5), 1e-14 * gr.norm[0]);
    EXPECT_FALSE(std::isnan(gr.beta_cross));
    EXPECT_LE(gr.beta_cross, 2.0);
    EXPECT_GE(gr.beta_cross, 0.5);
}

TEST(FiveThirds, SyntheticSlopes) {
    const auto k41 = five_thirds_probe(synthetic_spectrum(-5.0 / 3.0, 20), 2.0, 15.0);
    EXPECT_NEAR(k41.slope, -5.0 / 3.0, 0.02 * 5.0 / 3.0);
    const auto white = five_thirds_probe(synthetic_spectrum(0.0, 20), 2.0, 15.0);
    EXPECT_NEAR(white.slope, 0.0, 0.02);
}
