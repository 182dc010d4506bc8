#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nsk41/forcing.hpp"
#include "nsk41/nonlinear.hpp"

namespace nsk41 {

/// Time integration of du/dt = nu Delta u - P div(u (x) u) + f - alpha u.
struct EvolverConfig {
    PhysicalParams params;
    GridSpec grid;
    double dt = 0.01;
    double t_end = 1.0;
    int scheme = 4;                      // exponential Runge-Kutta order, 2 or 4
    double snapshot_every = 0.0;         // 0 disables snapshots
    double window_start_fraction = 0.5;  // long-time averages look at [fraction * T, T]
    bool adaptive = true;                // halve dt on CFL violation; false gives fixed-dt runs
    double cfl = 0.5;
    double dt_min = 1e-7;

    void validate() const {
        params.validate();
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("evolve.dt must be positive");
        if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("evolve.t_end must be positive");
        if (scheme != 2 && scheme != 4) throw ConfigError("evolve.scheme must be 2 or 4");
        if (!(snapshot_every >= 0.0)) throw ConfigError("evolve.snapshot_every must be >= 0");
        if (!(window_start_fraction >= 0.0 && window_start_fraction < 1.0)) {
            throw ConfigError("evolve.window_start_fraction must lie in [0, 1)");
        }
        if (!(cfl > 0.0)) throw ConfigError("evolve.cfl must be positive");
        if (!(dt_min > 0.0 && dt_min <= dt)) throw ConfigError("evolve.dt_min must lie in (0, dt]");
    }
};

/// Per-step energy ledger. All quadratic quantities are squared L2 norms.
struct DiagnosticsRecord {
    std::vector<double> t;
    std::vector<double> energy;            // ||u||^2
    std::vector<double> enstrophy;         // ||grad (x) u||^2
    std::vector<double> injection;         // <f, u>
    std::vector<double> band_energy;       // ||band(u)||^2 on the force annulus
    std::vector<double> balance_residual;  // E(t) - E(0) + int_0^t (2 nu Z + 2 alpha E - 2 I)
    std::vector<double> gronwall_margin;   // NaN when alpha = 0
    std::size_t dt_halvings = 0;
    double dt_final = 0.0;

    std::size_t size() const { return t.size(); }
};

namespace detail {

/// phi_0 .. phi_3 at z, phi_k(z) = sum_j z^j / (j + k)!.
inline std::array<double, 4> phi_functions(double z) {
    if (std::abs(z) < 1.0) {
        std::array<double, 4> out{};
        for (int k = 0; k < 4; ++k) {
            double term = 1.0;
            for (int j = 1; j <= k; ++j) term /= j;
            double acc = 0.0;
            for (int j = 0; j < 30; ++j) {
                acc += term;
                term *= z / (j + k + 1);
            }
            out[k] = acc;
        }
        return out;
    }
    const double em1 = std::expm1(z);
    return {em1 + 1.0, em1 / z, (em1 - z) / (z * z), (em1 - z - 0.5 * z * z) / (z * z * z)};
}

inline bool uniform_spacing(const std::vector<double>& t, std::size_t a, std::size_t b) {
    const double h = t[a + 1] - t[a];
    for (std::size_t j = a + 1; j < b; ++j)
        if (std::abs((t[j + 1] - t[j]) - h) > 1e-9 * h) return false;
    return true;
}

/// Running integral of g over the sample times: four-point cubic rules on
/// uniformly spaced stretches (one-sided at the ends), trapezoid across dt changes.
inline std::vector<double> cumulative_integral(const std::vector<double>& t, const std::vector<double>& g) {
    const std::size_t n = t.size();
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = t[i + 1] - t[i];
        double seg;
        if (i >= 1 && i + 2 < n && uniform_spacing(t, i - 1, i + 2)) {
            seg = h / 24.0 * (-g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2]);
        } else if (i + 3 < n && uniform_spacing(t, i, i + 3)) {
            seg = h / 24.0 * (9.0 * g[i] + 19.0 * g[i + 1] - 5.0 * g[i + 2] + g[i + 3]);
        } else if (i >= 2 && i + 1 < n && uniform_spacing(t, i - 2, i + 1)) {
            seg = h / 24.0 * (g[i - 2] - 5.0 * g[i - 1] + 19.0 * g[i] + 9.0 * g[i + 1]);
        } else {
            seg = 0.5 * h * (g[i] + g[i + 1]);
        }
        c[i + 1] = c[i] + seg;
    }
    return c;
}

struct EnergyTerms {
    double energy = 0.0, enstrophy = 0.0, injection = 0.0, band_energy = 0.0;
};

inline EnergyTerms energy_terms(const SpectralField& u, const SpectralField& f, double band_lo, double band_hi) {
    EnergyTerms e;
    for_each_mode(u.grid(), [&](std::size_t idx, const Vec3&, double xi2) {
        double a = 0.0, inj = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            a += std::norm(u(c, idx));
            inj += (f(c, idx) * std::conj(u(c, idx))).real();
        }
        e.energy += a;
        e.enstrophy += xi2 * a;
        e.injection += inj;
        if (in_annulus(std::sqrt(xi2), band_lo, band_hi)) e.band_energy += a;
    });
    const double vol = u.grid().volume();
    e.energy *= vol;
    e.enstrophy *= vol;
    e.injection *= vol;
    e.band_energy *= vol;
    return e;
}

}  // namespace detail

/// Exponential time differencing for du/dt = -L(|xi|) u + N(u), N(u) = -P div(u (x) u) + f.
/// The linear part is integrated exactly; ETDRK2 and ETDRK4 (Cox-Matthews) treat N.
class EtdStepper {
public:
    EtdStepper(const GridSpec& g, Multiplier linear, SpectralField forcing, int scheme, double dt)
        : grid_(g), linear_(std::move(linear)), forcing_(std::move(forcing)), scheme_(scheme), products_(g) {
        require_same_grid(g, forcing_.grid());
        if (scheme != 2 && scheme != 4) throw ConfigError("scheme must be 2 or 4");
        set_dt(dt);
    }

    /// Damped Navier-Stokes: L(|xi|) = nu |xi|^2 + alpha.
    static EtdStepper navier_stokes(const PhysicalParams& p, const SpectralField& f, int scheme, double dt) {
        const double nu = p.nu, alpha = p.alpha;
        return EtdStepper(f.grid(), Multiplier([nu, alpha](double r) { return nu * r * r + alpha; }, false, "ns"), f,
                          scheme, dt);
    }

    double dt() const { return dt_; }
    int scheme() const { return scheme_; }
    const GridSpec& grid() const { return grid_; }

    void set_dt(double dt) {
        dt_ = dt;
        const auto sym = linear_.table(grid_);
        const std::size_t m = sym.size();
        for (auto* t : {&e_, &e2_, &q_, &f1_, &f2_, &f3_}) t->assign(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double c = -sym[i];
            const double z = c * dt;
            const auto ph = detail::phi_functions(z);
            e_[i] = ph[0];
            if (scheme_ == 2) {
                f1_[i] = dt * ph[1];
                f2_[i] = dt * ph[2];
            } else {
                const auto hh = detail::phi_functions(0.5 * z);
                e2_[i] = hh[0];
                q_[i] = 0.5 * dt * hh[1];
                f1_[i] = dt * (ph[1] - 3.0 * ph[2] + 4.0 * ph[3]);
                f2_[i] = 2.0 * dt * (ph[2] - 2.0 * ph[3]);
                f3_[i] = dt * (-ph[2] + 4.0 * ph[3]);
            }
        }
    }

    /// -P div(u (x) u) + f; `max_speed` receives max_x |u(x)|.
    SpectralField nonlinear(const SpectralField& u, double* max_speed = nullptr) {
        SpectralField n = products_.projected_advection(u, max_speed);
        n *= cplx(-1.0, 0.0);
        n += forcing_;
        return n;
    }

    /// One step from u, given nu_u = nonlinear(u).
    SpectralField advance(const SpectralField& u, const SpectralField& nu_u) {
        const auto& n2 = detail::lattice_norm2(grid_.resolution());
        const std::size_t m = grid_.modes();
        if (scheme_ == 2) {
            SpectralField a(grid_);
            combine(a, n2, m, [&](std::size_t k, int s) { return e_[s] * u.data()[k] + f1_[s] * nu_u.data()[k]; });
            const SpectralField na = nonlinear(a);
            combine(a, n2, m,
                    [&](std::size_t k, int s) { return a.data()[k] + f2_[s] * (na.data()[k] - nu_u.data()[k]); });
            return a;
        }
        SpectralField a(grid_), b(grid_), c(grid_), out(grid_);
        combine(a, n2, m, [&](std::size_t k, int s) { return e2_[s] * u.data()[k] + q_[s] * nu_u.data()[k]; });
        const SpectralField na = nonlinear(a);
        combine(b, n2, m, [&](std::size_t k, int s) { return e2_[s] * u.data()[k] + q_[s] * na.data()[k]; });
        const SpectralField nb = nonlinear(b);
        combine(c, n2, m, [&](std::size_t k, int s) {
            return e2_[s] * a.data()[k] + q_[s] * (2.0 * nb.data()[k] - nu_u.data()[k]);
        });
        const SpectralField nc = nonlinear(c);
        combine(out, n2, m, [&](std::size_t k, int s) {
            return e_[s] * u.data()[k] + f1_[s] * nu_u.data()[k] + f2_[s] * (na.data()[k] + nb.data()[k]) +
                   f3_[s] * nc.data()[k];
        });
        return out;
    }

    SpectralField step(const SpectralField& u) { return advance(u, nonlinear(u)); }

private:
    template <class Fn>
    static void combine(SpectralField& dst, const std::vector<int>& n2, std::size_t m, Fn&& fn) {
        auto d = dst.data();
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < m; ++i) d[c * m + i] = fn(c * m + i, n2[i]);
    }

    GridSpec grid_;
    Multiplier linear_;
    SpectralField forcing_;
    int scheme_;
    double dt_ = 0.0;
    ProductEvaluator products_;
    std::vector<double> e_, e2_, q_, f1_, f2_, f3_;
};

/// Single fixed-dt step of the damped equations with cfg.dt and cfg.scheme.
inline SpectralField step(const SpectralField& u, const SpectralField& f, const EvolverConfig& cfg) {
    cfg.validate();
    require_same_grid(u.grid(), f.grid());
    auto stepper = EtdStepper::navier_stokes(cfg.params, f, cfg.scheme, cfg.dt);
    double speed = 0.0;
    const SpectralField nu_u = stepper.nonlinear(u, &speed);
    const GridSpec& g = u.grid();
    if (cfg.dt * speed * (g.resolution() / 2) * g.dk() > cfg.cfl) throw NumericalError("step: CFL condition violated");
    return stepper.advance(u, nu_u);
}

/// e^{-2 alpha t} ||u0||^2 + ||f||_{H^-1}^2 / (2 alpha nu) (1 - e^{-2 alpha t}).
inline double gronwall_bound(double t, double u0_energy, double f_hm1_sq, const PhysicalParams& p) {
    if (!(p.alpha > 0.0)) throw DomainError("Gronwall bound needs alpha > 0");
    const double decay = std::exp(-2.0 * p.alpha * t);
    return decay * u0_energy - f_hm1_sq / (2.0 * p.alpha * p.nu) * std::expm1(-2.0 * p.alpha * t);
}

struct Snapshot {
    double t = 0.0;
    SpectralField u;
};

struct EvolveResult {
    SpectralField u;
    DiagnosticsRecord record;
    std::vector<Snapshot> snapshots;
};

/// Called with (t, u) at t = 0 and after every accepted step.
using StepObserver = std::function<void(double, const SpectralField&)>;

inline EvolveResult evolve(const SpectralField& u0, const SpectralField& f, const EvolverConfig& cfg,
                           const StepObserver& observer = {}) {
    cfg.validate();
    require_same_grid(cfg.grid, u0.grid());
    require_same_grid(cfg.grid, f.grid());
    const GridSpec& g = cfg.grid;
    const PhysicalParams& p = cfg.params;
    const double scale = std::max(u0.max_abs(), 1e-300);
    if (max_divergence(u0) > 1e-10 * scale * g.kappa_max()) throw DomainError("evolve: u0 is not divergence-free");
    if (max_divergence(f) > 1e-10 * std::max(f.max_abs(), 1e-300) * g.kappa_max()) {
        throw DomainError("evolve: f is not divergence-free");
    }
    SpectralField u = u0;
    if (fraction_above_cutoff(u) > 0.0) {
        log::warn("evolve: u0 carries modes above kappa_max; they are removed");
        u = dealias(u);
    }
    const double band_lo = p.rho1 / p.ell0, band_hi = p.rho2 / p.ell0;

    const auto steps = static_cast<long>(std::ceil(cfg.t_end / cfg.dt * (1.0 - 1e-12)));
    double dt = cfg.t_end / static_cast<double>(steps);
    auto stepper = EtdStepper::navier_stokes(p, f, cfg.scheme, dt);

    EvolveResult res;
    DiagnosticsRecord& rec = res.record;
    auto push = [&](double t) {
        const auto e = detail::energy_terms(u, f, band_lo, band_hi);
        if (!std::isfinite(e.energy) || !std::isfinite(e.enstrophy)) {
            throw NumericalError("evolve: non-finite energy at t = " + std::to_string(t));
        }
        rec.t.push_back(t);
        rec.energy.push_back(e.energy);
        rec.enstrophy.push_back(e.enstrophy);
        rec.injection.push_back(e.injection);
        rec.band_energy.push_back(e.band_energy);
        if (observer) observer(t, u);
    };
    double next_snapshot = 0.0;
    auto maybe_snapshot = [&](double t) {
        if (cfg.snapshot_every <= 0.0) return;
        if (t >= next_snapshot - 1e-9 * cfg.snapshot_every) {
            res.snapshots.push_back({t, u});
            next_snapshot += cfg.snapshot_every;
        }
    };

    push(0.0);
    maybe_snapshot(0.0);
    const double speed_factor = (g.resolution() / 2) * g.dk();
    double t_base = 0.0;
    long k = 0;  // steps taken since t_base
    for (;;) {
        const double t = t_base + k * dt;
        if (t >= cfg.t_end - 0.5 * dt) break;
        double speed = 0.0;
        const SpectralField nu_u = stepper.nonlinear(u, &speed);
        if (dt * speed * speed_factor > cfg.cfl) {
            if (!cfg.adaptive) throw NumericalError("evolve: CFL condition violated in fixed-dt mode");
            while (dt * speed * speed_factor > cfg.cfl) {
                t_base = t;
                k = 0;
                dt *= 0.5;
                ++rec.dt_halvings;
                if (dt < cfg.dt_min) throw NumericalError("evolve: dt fell below dt_min under the CFL guard");
            }
            log::warn("evolve: CFL guard halved dt to " + std::to_string(dt) + " at t = " + std::to_string(t));
            stepper.set_dt(dt);
        }
        u = stepper.advance(u, nu_u);
        ++k;
        const double tn = t_base + k * dt;
        push(tn);
        maybe_snapshot(tn);
    }
    rec.dt_final = dt;

    std::vector<double> source(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i) {
        source[i] = 2.0 * p.nu * rec.enstrophy[i] + 2.0 * p.alpha * rec.energy[i] - 2.0 * rec.injection[i];
    }
    const auto integral = detail::cumulative_integral(rec.t, source);
    rec.balance_residual.resize(rec.size());
    for (std::size_t i = 0; i < rec.size(); ++i) rec.balance_residual[i] = rec.energy[i] - rec.energy[0] + integral[i];
    rec.gronwall_margin.assign(rec.size(), std::numeric_limits<double>::quiet_NaN());
    if (p.alpha > 0.0) {
        const double fsq = std::pow(hs_norm(f, -1.0), 2);
        for (std::size_t i = 0; i < rec.size(); ++i) {
            rec.gronwall_margin[i] = rec.energy[i] - gronwall_bound(rec.t[i], rec.energy[0], fsq, p);
        }
    }
    res.u = std::move(u);
    return res;
}

/// max over recorded t of ||u(t)||^2 - [e^{-2 alpha t} ||u0||^2 + ||f||_{H^-1}^2 / (2 alpha nu) (1 - e^{-2 alpha t})].
inline double gronwall_margin(const DiagnosticsRecord& rec, const SpectralField& u0, const SpectralField& f,
                              const PhysicalParams& p) {
    if (!(p.alpha > 0.0)) throw DomainError("gronwall_margin: undefined for alpha = 0");
    const double e0 = std::pow(l2_norm(u0), 2);
    const double fsq = std::pow(hs_norm(f, -1.0), 2);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rec.size(); ++i) worst = std::max(worst, rec.energy[i] - gronwall_bound(rec.t[i], e0, fsq, p));
    return worst;
}

struct AverageSet {
    double u2 = 0.0;    // mean of ||u||^2
    double e = 0.0;     // nu * mean of ||grad (x) u||^2
    double ul02 = 0.0;  // mean of ||band(u)||^2
    double u = 0.0, ul0 = 0.0;
    double U = 0.0;     // u / L^{3/2}
    double eps = 0.0;   // e / L^3
    double Re = 0.0;    // u ell0 / nu
};

/// `plain` is (1/T) int_0^T; `windowed` is the supremum of trailing-window
/// means whose window ends lie in [start_fraction T, T].
struct LongTimeAverages {
    AverageSet plain;
    AverageSet windowed;
    double T = 0.0;
    double window = 0.0;
};

namespace detail {
inline AverageSet derive(double u2, double e, double ul02, const PhysicalParams& p) {
    AverageSet a;
    a.u2 = u2;
    a.e = e;
    a.ul02 = ul02;
    a.u = std::sqrt(std::max(u2, 0.0));
    a.ul0 = std::sqrt(std::max(ul02, 0.0));
    a.U = a.u / std::pow(p.L, 1.5);
    a.eps = e / std::pow(p.L, 3.0);
    a.Re = a.u * p.ell0 / p.nu;
    return a;
}

inline double interpolate(const std::vector<double>& t, const std::vector<double>& c, double x) {
    if (x <= t.front()) return c.front();
    if (x >= t.back()) return c.back();
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - t.begin());
    const double w = (x - t[j - 1]) / (t[j] - t[j - 1]);
    return c[j - 1] + w * (c[j] - c[j - 1]);
}
}  // namespace detail

/// window <= 0 selects (1 - start_fraction) T.
inline LongTimeAverages long_time_averages(const DiagnosticsRecord& rec, const PhysicalParams& p, double window = 0.0,
                                           double start_fraction = 0.5) {
    if (rec.size() < 2) throw DomainError("long_time_averages: record too short");
    const double T = rec.t.back() - rec.t.front();
    if (window <= 0.0) window = (1.0 - start_fraction) * T;
    if (window > T * (1.0 + 1e-12)) throw DomainError("long_time_averages: window longer than the run");
    const double dt_max = [&] {
        double m = 0.0;
        for (std::size_t i = 0; i + 1 < rec.size(); ++i) m = std::max(m, rec.t[i + 1] - rec.t[i]);
        return m;
    }();
    if (window < 10.0 * dt_max * (1.0 - 1e-9)) throw DomainError("long_time_averages: window shorter than 10 steps");

    const auto ce = detail::cumulative_integral(rec.t, rec.energy);
    const auto cz = detail::cumulative_integral(rec.t, rec.enstrophy);
    const auto cb = detail::cumulative_integral(rec.t, rec.band_energy);
    LongTimeAverages out;
    out.T = T;
    out.window = window;
    out.plain = detail::derive(ce.back() / T, p.nu * cz.back() / T, cb.back() / T, p);

    double su = 0.0, sz = 0.0, sb = 0.0;
    const double t0 = rec.t.front();
    for (std::size_t j = 0; j < rec.size(); ++j) {
        const double tj = rec.t[j];
        if (tj < t0 + start_fraction * T - 1e-12 * T || tj - window < t0 - 1e-12 * T) continue;
        const double a = std::max(tj - window, t0);
        su = std::max(su, (ce[j] - detail::interpolate(rec.t, ce, a)) / window);
        sz = std::max(sz, (cz[j] - detail::interpolate(rec.t, cz, a)) / window);
        sb = std::max(sb, (cb[j] - detail::interpolate(rec.t, cb, a)) / window);
    }
    out.windowed = detail::derive(su, p.nu * sz, sb, p);
    return out;
}

/// Signed margins (lhs - rhs, so <= 0 means the inequality holds) and
/// dimensionless ratios from the dissipation-law estimates.
struct KolmogorovDiagnostics {
    double lemma_margin = 0.0;  // ||f||^2 - [u^2 |grad f|_inf + nu u ||Lap f|| + alpha u ||f|| + |<u(T) - u0, f>| / T]
    double injection_margin = 0.0;  // e - u_l0 ||f||
    std::optional<double> force_scale_margin;  // ||f|| - (u^2 / ell0)(||f||_inf / ||f|| + 1 / Re)
    std::optional<double> dissipation_ratio;  // e ell0 / (u_l0 u^2 ||f||_inf / ||f||)
    std::optional<double> eps_ratio;          // eps ell0 / U^3
    double f_l2 = 0.0, f_linf = 0.0, grad_f_linf = 0.0, lap_f_l2 = 0.0;
};

/// Grid maximum of the Frobenius norm of grad (x) f.
inline double gradient_tensor_linf(const SpectralField& f) {
    BasicSpectralField<9> g(f.grid());
    const cplx I(0.0, 1.0);
    for_each_mode(f.grid(), [&](std::size_t idx, const Vec3& xi, double) {
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) g(3 * i + j, idx) = I * xi[j] * f(i, idx);
    });
    return lp_norm(g, std::numeric_limits<double>::infinity());
}

inline KolmogorovDiagnostics kolmogorov_diagnostics(const DiagnosticsRecord& rec, const SpectralField& f,
                                                    const PhysicalParams& p, const AverageSet& avg) {
    if (rec.size() < 2) throw DomainError("kolmogorov_diagnostics: record too short");
    KolmogorovDiagnostics k;
    k.f_l2 = l2_norm(f);
    k.f_linf = linf_norm(f);
    k.grad_f_linf = gradient_tensor_linf(f);
    k.lap_f_l2 = hs_norm(f, 2.0);
    const double T = rec.t.back() - rec.t.front();
    const double boundary = std::abs(rec.injection.back() - rec.injection.front()) / T;
    k.lemma_margin = k.f_l2 * k.f_l2 -
                     (avg.u2 * k.grad_f_linf + p.nu * avg.u * k.lap_f_l2 + p.alpha * avg.u * k.f_l2 + boundary);
    k.injection_margin = avg.e - avg.ul0 * k.f_l2;
    if (k.f_l2 > 0.0 && avg.Re > 0.0) {
        k.force_scale_margin = k.f_l2 - (avg.u2 / p.ell0) * (k.f_linf / k.f_l2 + 1.0 / avg.Re);
    }
    const double denom = k.f_l2 > 0.0 ? avg.ul0 * avg.u2 * k.f_linf / k.f_l2 : 0.0;
    if (denom > 0.0) k.dissipation_ratio = avg.e * p.ell0 / denom;
    if (avg.U > 0.0) k.eps_ratio = avg.eps * p.ell0 / (avg.U * avg.U * avg.U);
    return k;
}

}  // namespace nsk41
