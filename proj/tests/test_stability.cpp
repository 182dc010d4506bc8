#include <gtest/gtest.h>

#include "nsk41/stability.hpp"

using namespace nsk41;

namespace {

PhysicalParams params(double nu, double alpha, double F) {
    PhysicalParams p;
    p.nu = nu;
    p.alpha = alpha;
    p.F = F;
    p.ell0 = 1.0;
    p.L = 1.0;
    return p;
}

EvolverConfig config(const PhysicalParams& p, double dt, double t_end) {
    EvolverConfig c;
    c.params = p;
    c.grid = GridSpec(2.0, 16);
    c.dt = dt;
    c.t_end = t_end;
    return c;
}

SpectralField force(const PhysicalParams& p, const GridSpec& g) {
    ForceSpec s;
    s.params = p;
    return build_force(s, g);
}

}  // namespace

TEST(Stability, StationaryStartStaysPut) {
    const auto p = params(0.5, 0.5, 0.1);
    const auto cfg = config(p, 0.02, 1.0);
    const auto f = force(p, cfg.grid);
    const auto U = picard_solve(f, p);
    ASSERT_TRUE(U.converged());
    const auto run = stability_trajectory(U.U, f, U.U, cfg);
    for (double d : run.distance) EXPECT_LE(std::sqrt(d), 1e-10);
}

TEST(Stability, PureDampingRate) {
    const auto p = params(0.05, 0.5, 0.0);
    const auto cfg = config(p, 0.02, 4.0);
    const SpectralField zero(cfg.grid);
    StabilityOptions opt;
    opt.perturbation.max_wavenumber = 2.0;
    const auto rep = stability_experiment(zero, zero, {1, 2}, cfg, opt);
    EXPECT_TRUE(rep.hypothesis_holds);
    for (const auto& r : rep.runs) {
        EXPECT_GE(r.rate, 2.0 * p.alpha * (1.0 - 1e-3));
        EXPECT_LE(r.max_margin, 1e-12 * r.d0);
    }
}

TEST(Stability, SmallGrashofDecayRate) {
    const auto p = params(0.5, 0.5, 0.2);
    const auto cfg = config(p, 0.02, 4.0);
    const auto f = force(p, cfg.grid);
    const auto U = picard_solve(f, p);
    ASSERT_TRUE(U.converged());
    const auto rep = stability_experiment(U.U, f, {7, 8, 9}, cfg);
    EXPECT_TRUE(rep.hypothesis_holds) << rep.u3_norm;
    ASSERT_EQ(rep.runs.size(), 3u);
    for (const auto& r : rep.runs) {
        EXPECT_GE(r.fit_points, 5u);
        EXPECT_GE(r.rate, 2.0 * p.alpha * (1.0 - 0.05)) << r.seed;
        EXPECT_LE(r.max_margin, 1e-10 * r.d0) << r.seed;
    }
}

TEST(Stability, RejectsNonStationaryState) {
    const auto p = params(0.5, 0.5, 0.2);
    const auto cfg = config(p, 0.02, 1.0);
    const auto f = force(p, cfg.grid);
    PicardConfig pc;
    pc.max_iters = 2;
    const auto U = picard_solve(f, p, pc);
    ASSERT_FALSE(U.converged());
    EXPECT_THROW(stability_experiment(U.U, f, {1}, cfg), DomainError);
}
