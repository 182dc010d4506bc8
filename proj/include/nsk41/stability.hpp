#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "nsk41/dynamics.hpp"
#include "nsk41/fit.hpp"
#include "nsk41/stationary.hpp"

namespace nsk41 {

struct StabilityOptions {
    RandomFieldSpec perturbation{-2.0, 0.0, 0.0, 0.1, true};
    double stationarity_tolerance = 1e-8;  // relative H^-1 defect allowed for U*
    double fit_floor = 1e-26;              // squared distances below this are left out of the fit
};

struct StabilityRun {
    std::uint64_t seed = 0;
    double d0 = 0.0;           // ||u0 - U*||^2
    double rate = 0.0;         // -slope of log ||u(t) - U*||^2 over the second half
    double rate_ratio = 0.0;   // rate / (2 alpha)
    double fit_r2 = 0.0;
    std::size_t fit_points = 0;
    double max_margin = 0.0;   // max_t ||v(t)||^2 - ||v(0)||^2 e^{-2 alpha t}
    double final_distance = 0.0;
    std::vector<double> t;
    std::vector<double> distance;  // ||u(t) - U*||^2
};

struct StabilityReport {
    double u3_norm = 0.0;              // ||U*||_{L3}
    double nu = 0.0;
    bool hypothesis_holds = false;     // ||U*||_{L3} < nu
    double stationarity_residual = 0.0;
    std::vector<StabilityRun> runs;
};

namespace detail {

inline StabilityRun track_distance(const SpectralField& u0, const SpectralField& ustar, const SpectralField& f,
                                   const EvolverConfig& cfg, const StabilityOptions& opt) {
    StabilityRun run;
    auto sq = [&](const SpectralField& u) {
        const double d = l2_norm(u - ustar);
        return d * d;
    };
    run.t.push_back(0.0);
    run.distance.push_back(sq(u0));
    evolve(u0, f, cfg, [&](double t, const SpectralField& u) {
        run.t.push_back(t);
        run.distance.push_back(sq(u));
    });
    run.d0 = run.distance.front();
    run.final_distance = run.distance.back();
    const double a2 = 2.0 * cfg.params.alpha;
    run.max_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < run.t.size(); ++i) {
        run.max_margin = std::max(run.max_margin, run.distance[i] - run.d0 * std::exp(-a2 * run.t[i]));
    }
    const double half = 0.5 * run.t.back();
    std::vector<double> x, y;
    for (std::size_t i = 0; i < run.t.size(); ++i) {
        if (run.t[i] < half || run.distance[i] <= opt.fit_floor) continue;
        x.push_back(run.t[i]);
        y.push_back(std::log(run.distance[i]));
    }
    run.fit_points = x.size();
    if (x.size() >= 5) {
        const LineFit fit = fit_line(x, y);
        run.rate = -fit.slope;
        run.fit_r2 = fit.r2;
    } else {
        run.rate = std::numeric_limits<double>::quiet_NaN();
    }
    run.rate_ratio = a2 > 0.0 ? run.rate / a2 : std::numeric_limits<double>::quiet_NaN();
    return run;
}

}  // namespace detail

/// Evolves U* + delta for each seed and measures how fast ||u(t) - U*||^2 decays.
/// U* must solve the damped stationary equations for f.
inline StabilityReport stability_experiment(const SpectralField& ustar, const SpectralField& f,
                                            const std::vector<std::uint64_t>& seeds, const EvolverConfig& cfg,
                                            const StabilityOptions& opt = {}) {
    cfg.validate();
    require_same_grid(ustar.grid(), cfg.grid);
    StabilityReport rep;
    rep.nu = cfg.params.nu;
    rep.u3_norm = lp_norm(ustar, 3.0);
    rep.hypothesis_holds = rep.u3_norm < rep.nu;
    const double defect = hs_norm(stationary_defect(ustar, f, cfg.params, PicardVariant::damped), -1.0);
    const double fscale = hs_norm(f, -1.0);
    rep.stationarity_residual = fscale > 0.0 ? defect / fscale : defect;
    if (!(rep.stationarity_residual <= opt.stationarity_tolerance)) {
        throw DomainError("stability_experiment: U* is not a converged stationary solution (relative defect " +
                          std::to_string(rep.stationarity_residual) + ")");
    }
    if (!rep.hypothesis_holds) log::warn("stability_experiment: ||U*||_{L3} >= nu, the decay bound is not implied");
    for (std::uint64_t seed : seeds) {
        const SpectralField u0 = ustar + random_field(cfg.grid, seed, opt.perturbation);
        StabilityRun run = detail::track_distance(u0, ustar, f, cfg, opt);
        run.seed = seed;
        rep.runs.push_back(std::move(run));
    }
    return rep;
}

/// Same measurement for a single prescribed initial field.
inline StabilityRun stability_trajectory(const SpectralField& ustar, const SpectralField& f, const SpectralField& u0,
                                         const EvolverConfig& cfg, const StabilityOptions& opt = {}) {
    cfg.validate();
    return detail::track_distance(u0, ustar, f, cfg, opt);
}

}  // namespace nsk41
