#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nsk41/kernels.hpp"

using namespace nsk41;
using std::numbers::pi;

namespace {

std::vector<double> log_radii(double lo, double hi, int n) {
    std::vector<double> r;
    for (int i = 0; i < n; ++i) r.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return r;
}

}  // namespace

TEST(Kernel, UnitParametersAtUnitRadius) {
    EXPECT_NEAR(kernel_eval(1.0, 1.0, 1.0), std::exp(-1.0) / (4.0 * pi), 1e-17);
    const auto q = kernel_fourier_quadrature(1.0, 1.0, 1.0);
    EXPECT_NEAR(q.value, std::exp(-1.0) / (4.0 * pi), 1e-6 * q.value);
}

TEST(Kernel, ViscosityScaling) {
    for (double nu : {0.3, 2.0})
        for (double r : {0.05, 1.0, 7.0}) {
            EXPECT_NEAR(kernel_eval(nu, 1.5, r), kernel_eval(1.0, 1.5 / nu, r) / nu, 1e-15 * kernel_eval(nu, 1.5, r));
        }
}

TEST(Kernel, SubordinationQuadratureOverTheFullRange) {
    for (auto [nu, alpha] : {std::pair{1.0, 1.0}, {0.5, 2.0}, {2.0, 0.25}})
        for (double r : log_radii(1e-2, 40.0, 25)) {
            const double c = kernel_eval(nu, alpha, r);
            EXPECT_NEAR(kernel_subordination_quadrature(nu, alpha, r).value, c, 1e-6 * c) << nu << ' ' << alpha << ' ' << r;
        }
}

TEST(Kernel, FourierQuadratureWhileWellConditioned) {
    // The sine integral is O(1) while G(r) ~ e^{-r}; cancellation limits it to moderate r.
    for (double r : log_radii(1e-2, 20.0, 20)) {
        const double c = kernel_eval(1.0, 1.0, r);
        EXPECT_NEAR(kernel_fourier_quadrature(1.0, 1.0, r).value, c, 1e-6 * c) << r;
    }
}

TEST(Kernel, Mass) {
    for (auto [nu, alpha] : {std::pair{1.0, 2.0}, {0.5, 0.5}, {3.0, 1.0}}) {
        EXPECT_NEAR(kernel_mass(nu, alpha).value, 1.0 / alpha, 1e-6) << nu << ' ' << alpha;
    }
}

TEST(Kernel, PiecewiseConstants) {
    for (auto [nu, alpha] : {std::pair{1.0, 1.0}, {0.5, 2.0}}) {
        const auto kc = kernel_piecewise_constants(nu, alpha);
        const double k = std::sqrt(alpha / nu);
        EXPECT_NEAR(kc.c_near, 1.0 / (4.0 * pi * nu), 1e-6 * kc.c_near);
        EXPECT_NEAR(kc.c_far, std::exp(-1.0) * k / (8.0 * pi * nu), 1e-6 * kc.c_far);
        for (double r : log_radii(1e-3, 20.0, 60)) {
            const double bound = r <= kc.split ? kc.c / r : kc.c * std::exp(-0.5 * k * r);
            EXPECT_LE(kernel_eval(nu, alpha, r), bound * (1.0 + 1e-12));
        }
    }
}

TEST(Kernel, Errors) {
    EXPECT_THROW(kernel_eval(1.0, 1.0, 0.0), DomainError);
    EXPECT_THROW(kernel_eval(1.0, 1.0, -1.0), DomainError);
    EXPECT_THROW(kernel_eval(0.0, 1.0, 1.0), DomainError);
    EXPECT_THROW(kernel_eval(1.0, 0.0, 1.0), DomainError);
}

TEST(DecayTransfer, QuarticTailPlateaus) {
    std::vector<double> radii;
    for (double r = 10.0; r <= 40.0; r += 2.5) radii.push_back(r);
    const auto g = [](double s) { return std::pow(1.0 + s, -4.0); };
    const auto d = decay_transfer_check(g, 4, 1.0, 1.0, radii);
    EXPECT_TRUE(d.bounded);
    EXPECT_LE(d.spread, 1.5);
    RecordProperty("spread", std::to_string(d.spread));
}

TEST(DecayTransfer, ConvolutionAgainstPointMassLimit) {
    // A narrow normalized Gaussian acts like a delta: G * g -> G away from the origin.
    const double sigma = 0.02;
    const double norm = std::pow(2.0 * pi * sigma * sigma, -1.5);
    const auto g = [&](double s) { return norm * std::exp(-s * s / (2.0 * sigma * sigma)); };
    for (double r : {1.0, 3.0}) {
        const double conv = radial_convolution(g, 1.0, 1.0, r).value;
        // Exact: G(r) e^{k^2 sigma^2 / 2} up to erfc corrections below 1e-12 here.
        EXPECT_NEAR(conv, kernel_eval(1.0, 1.0, r) * std::exp(0.5 * sigma * sigma), 1e-8 * conv) << r;
    }
}

TEST(DecayTransfer, KernelSelfConvolutionBeatsAnyPower) {
    std::vector<double> radii{10.0, 20.0, 30.0, 40.0};
    const auto d = decay_transfer_check([](double s) { return kernel_eval(1.0, 1.0, s); }, 4, 1.0, 1.0, radii);
    for (std::size_t i = 1; i < d.rows.size(); ++i) EXPECT_LT(d.rows[i].scaled, 0.1 * d.rows[i - 1].scaled);
}

TEST(DecayTransfer, PlateauNonincreasingInAlpha) {
    std::vector<double> radii{10.0, 20.0, 30.0, 40.0};
    const auto g = [](double s) { return std::pow(1.0 + s, -4.0); };
    double last = std::numeric_limits<double>::infinity();
    for (double alpha : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double plateau = decay_transfer_check(g, 4, 1.0, alpha, radii).plateau;
        EXPECT_LE(plateau, last) << alpha;
        last = plateau;
    }
}

TEST(Periodization, TorusResolventMatchesWholeSpaceConvolution) {
    const auto far = periodized_multiplier_check(GridSpec(10.0, 64), 1.0, 1.0, 1.0, 2.0);
    EXPECT_GE(far.box_efolds, 10.0);
    EXPECT_GT(far.points, 100u);
    EXPECT_LT(far.max_rel_error, 1e-4);
    const auto near = periodized_multiplier_check(GridSpec(5.0, 64), 1.0, 1.0, 0.5, 2.0);
    EXPECT_GT(near.max_rel_error, far.max_rel_error);
    RecordProperty("error_5_efolds", std::to_string(near.max_rel_error));
    RecordProperty("error_10_efolds", std::to_string(far.max_rel_error));
}
