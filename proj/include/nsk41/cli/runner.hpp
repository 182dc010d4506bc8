#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "nsk41/cli/config.hpp"
#include "nsk41/cli/output.hpp"
#include "nsk41/kernels.hpp"
#include "nsk41/spectra.hpp"
#include "nsk41/stability.hpp"

namespace nsk41::cli {

enum ExitStatus : int { kOk = 0, kConfigError = 2, kNumericalError = 3, kNotConverged = 4 };

/// What a single experiment produced: status, JSON summary, and the flat row a sweep consolidates.
struct Outcome {
    int status = kOk;
    std::string verdict = "ok";
    json summary = json::object();
    std::vector<std::pair<std::string, double>> row;

    void put(const std::string& key, double v) { row.emplace_back(key, v); }
};

namespace detail {

inline SpectralField force_for(const ExperimentConfig& c, const GridSpec& g) {
    ForceSpec spec;
    spec.params = c.params;
    spec.orientation = c.orientation;
    return build_force(spec, g);
}

inline SpectralField initial_field(const ExperimentConfig& c, const GridSpec& g) {
    if (c.initial.kind == "zero" || c.initial.energy == 0.0) return SpectralField(g);
    RandomFieldSpec rs;
    rs.energy = c.initial.energy;
    rs.slope = c.initial.slope;
    rs.max_wavenumber = c.initial.max_wavenumber;
    return random_field(g, c.seed, rs);
}

inline json averages_json(const AverageSet& a) {
    return {{"u2", a.u2},   {"e", a.e},     {"ul0_2", a.ul02}, {"u", a.u},
            {"ul0", a.ul0}, {"U", a.U},     {"eps", a.eps},    {"Re", a.Re}};
}

inline json optional_json(const std::optional<double>& v) { return v ? number_or_null(*v) : json(nullptr); }
inline double optional_value(const std::optional<double>& v) {
    return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

inline json grashof_json(const PhysicalParams& p) {
    json j = json::object();
    for (double th : {0.0, 1.0, 1.5, 2.0, 3.0}) j[fmt::format("G_{}", th)] = grashof(p, th);
    return j;
}

inline Table spectrum_table(const ShellSpectrum& s) {
    Table t({"kappa", "E", "M", "argmax", "modes"});
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s.count[j] == 0) continue;
        t.add({s.kappa[j], s.energy[j], s.max_amp[j], s.argmax[j], static_cast<double>(s.count[j])});
    }
    return t;
}

inline json fit_json(const DecayFit& f) {
    return {{"curve", f.curve == DecayCurve::max_shell ? "max_shell" : "energy"},
            {"kappa_lo", f.kappa_lo},
            {"kappa_hi", f.kappa_hi},
            {"rate", f.rate},
            {"slope", f.slope},
            {"intercept", f.intercept},
            {"r2", f.r2},
            {"shells", f.shells},
            {"excluded", f.excluded.size()},
            {"target", number_or_null(f.target)},
            {"meets_target", f.meets_target}};
}

/// Fit over [kappa_lo, kappa_hi] or the error message when it cannot be made.
inline json try_fit(const SpectralField& u, double lo, double hi, DecayCurve curve, double target,
                    std::optional<DecayFit>* keep = nullptr) {
    try {
        const DecayFit f = exponential_decay_fit(u, lo, hi, curve, target);
        if (keep) *keep = f;
        return fit_json(f);
    } catch (const DomainError& e) {
        return {{"error", e.what()}};
    }
}

inline double fit_lo(const ExperimentConfig& c) {
    return c.spectra.kappa_lo > 0.0 ? c.spectra.kappa_lo : c.params.rho1 / c.params.ell0;
}
inline double fit_hi(const ExperimentConfig& c, const GridSpec& g) {
    return c.spectra.kappa_hi > 0.0 ? c.spectra.kappa_hi : g.kappa_max();
}

}  // namespace detail

inline Outcome run_evolve(const ExperimentConfig& c, OutputDir& out) {
    const GridSpec g = c.grid();
    const EvolverConfig cfg = c.evolver_config();
    const auto& p = c.params;
    const SpectralField f = detail::force_for(c, g);
    const SpectralField u0 = detail::initial_field(c, g);
    const EvolveResult res = evolve(u0, f, cfg);
    const auto& rec = res.record;

    Table diag({"t", "energy", "enstrophy", "injection", "band_energy", "balance_residual", "gronwall_margin"});
    double max_residual = 0.0, max_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rec.size(); ++i) {
        diag.add({rec.t[i], rec.energy[i], rec.enstrophy[i], rec.injection[i], rec.band_energy[i],
                  rec.balance_residual[i], rec.gronwall_margin[i]});
        max_residual = std::max(max_residual, std::abs(rec.balance_residual[i]));
        if (!std::isnan(rec.gronwall_margin[i])) max_margin = std::max(max_margin, rec.gronwall_margin[i]);
    }
    out.csv("diagnostics.csv", diag);
    for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
        out.snapshot(fmt::format("snapshots/snap_{:04d}.bin", i), res.snapshots[i].u, p.ell0);
    }
    out.snapshot("final.bin", res.u, p.ell0);
    const ShellSpectrum spec = shell_spectrum(res.u);
    out.csv("spectrum.csv", detail::spectrum_table(spec));

    Outcome o;
    json& s = o.summary;
    const double fsq = std::pow(hs_norm(f, -1.0), 2);
    s["steps"] = rec.size() - 1;
    s["dt_final"] = rec.dt_final;
    s["dt_halvings"] = rec.dt_halvings;
    s["final_energy"] = rec.energy.back();
    s["max_abs_balance_residual"] = max_residual;
    s["max_gronwall_margin"] = number_or_null(max_margin);
    if (p.alpha > 0.0) s["gronwall_scale"] = std::max(rec.energy.front(), fsq / (2.0 * p.alpha * p.nu));
    s["f_hm1dot_sq"] = fsq;
    s["grashof"] = detail::grashof_json(p);
    o.put("max_gronwall_margin", max_margin);
    o.put("max_abs_balance_residual", max_residual);
    try {
        const LongTimeAverages avg = long_time_averages(rec, p, 0.0, cfg.window_start_fraction);
        s["averages"] = {{"T", avg.T},
                         {"window", avg.window},
                         {"plain", detail::averages_json(avg.plain)},
                         {"windowed", detail::averages_json(avg.windowed)}};
        if (p.alpha > 0.0) {
            const double bound = fsq / (p.nu * p.alpha);
            s["average_bound"] = {{"u2_windowed", avg.windowed.u2}, {"bound", bound}, {"ratio", avg.windowed.u2 / bound}};
        }
        const KolmogorovDiagnostics k = kolmogorov_diagnostics(rec, f, p, avg.windowed);
        s["kolmogorov"] = {{"lemma_margin", k.lemma_margin},
                           {"injection_margin", k.injection_margin},
                           {"force_scale_margin", detail::optional_json(k.force_scale_margin)},
                           {"dissipation_ratio", detail::optional_json(k.dissipation_ratio)},
                           {"eps_ratio", detail::optional_json(k.eps_ratio)},
                           {"f_l2", k.f_l2},
                           {"f_linf", k.f_linf},
                           {"grad_f_linf", k.grad_f_linf},
                           {"lap_f_l2", k.lap_f_l2}};
        const DissipationScales d = dissipation_scales(avg.windowed, p);
        s["dissipation_scales"] = {{"kappa0", d.kappa0},
                                   {"kappa_d", number_or_null(d.kappa_d)},
                                   {"Re", d.Re},
                                   {"kd_over_re34_k0", number_or_null(d.ratio_turbulent)},
                                   {"kd_over_re12_k0", number_or_null(d.ratio_laminar)}};
        const AverageSet& a = avg.windowed;
        for (auto [key, v] : {std::pair{"u2", a.u2}, {"e", a.e}, {"ul0_2", a.ul02}, {"U", a.U}, {"eps", a.eps}, {"Re", a.Re}})
            o.put(key, v);
        o.put("lemma_margin", k.lemma_margin);
        o.put("injection_margin", k.injection_margin);
        o.put("dissipation_ratio", detail::optional_value(k.dissipation_ratio));
        o.put("eps_ratio", detail::optional_value(k.eps_ratio));
        o.put("kappa_d", d.kappa_d);
        o.put("kd_over_re34_k0", d.ratio_turbulent);
        o.put("kd_over_re12_k0", d.ratio_laminar);
    } catch (const DomainError& e) {
        s["averages"] = {{"error", e.what()}};
    }
    try {
        const LineFit lf = five_thirds_probe(spec, spec.dk, g.kappa_max());
        s["spectrum_loglog"] = {{"slope", lf.slope}, {"r2", lf.r2}, {"shells", lf.points}};
    } catch (const DomainError& e) {
        s["spectrum_loglog"] = {{"error", e.what()}};
    }
    return o;
}

inline Outcome run_picard(const ExperimentConfig& c, OutputDir& out) {
    const GridSpec g = c.grid();
    const auto& p = c.params;
    const SpectralField f = detail::force_for(c, g);
    const PicardResult r = picard_solve(f, p, c.picard);
    Table res({"iteration", "residual"});
    for (std::size_t i = 0; i < r.residuals.size(); ++i) res.add({static_cast<double>(i + 1), r.residuals[i]});
    out.csv("residuals.csv", res);
    out.snapshot("U.bin", r.U, p.ell0);
    out.csv("spectrum.csv", detail::spectrum_table(shell_spectrum(r.U)));

    Outcome o;
    o.verdict = to_string(r.verdict);
    o.status = r.converged() ? kOk : kNotConverged;
    json& s = o.summary;
    s["variant"] = detail::variant_name(c.picard.variant);
    s["verdict"] = o.verdict;
    s["iterations"] = r.iterations;
    s["final_residual"] = r.residuals.empty() ? 0.0 : r.residuals.back();
    s["pde_residual"] = r.pde_residual;
    s["apriori_margin"] = r.apriori_margin;
    s["apriori_scale"] = r.apriori_scale;
    s["U_e_norm"] = e_norm(r.U, p.L, p.ell0);
    s["U_l3"] = lp_norm(r.U, 3.0);
    s["grashof"] = detail::grashof_json(p);
    std::optional<DecayFit> fit;
    if (!r.U.is_zero()) {
        s["decay_fit"] = detail::try_fit(r.U, detail::fit_lo(c), detail::fit_hi(c, g), DecayCurve::max_shell,
                                         p.ell0 / p.rho2, &fit);
    }
    o.put("iterations", r.iterations);
    o.put("pde_residual", r.pde_residual);
    o.put("apriori_margin", r.apriori_margin);
    o.put("decay_rate", fit ? fit->rate : std::numeric_limits<double>::quiet_NaN());
    return o;
}

inline Outcome run_oseen(const ExperimentConfig& c, OutputDir& out) {
    const GridSpec g = c.grid();
    const auto& p = c.params;
    const SpectralField f = detail::force_for(c, g);
    Outcome o;
    std::optional<PicardResult> ref;
    if (c.oseen.compare_picard) {
        PicardConfig pc = c.picard;
        pc.variant = PicardVariant::classical;
        ref = picard_solve(f, p, pc);
        o.summary["reference"] = {{"verdict", to_string(ref->verdict)}, {"iterations", ref->iterations}};
        if (!ref->converged()) {
            o.status = kNotConverged;
            o.verdict = "reference_" + std::string(to_string(ref->verdict));
        }
    }
    const OseenResult r = oseen_expand(f, p, c.oseen.n_max, ref ? &ref->U : nullptr, c.oseen.probes);
    const OseenLedger& L = r.ledger;
    Table t({"n", "norm_E", "catalan_bound", "log_catalan_bound", "support_radius", "support_limit", "partial_residual"});
    bool support_ok = true;
    for (const auto& term : L.terms) {
        t.add({static_cast<double>(term.n), term.norm, term.bound, term.log_bound, term.support_radius,
               term.support_limit, term.partial_residual});
        if (term.support_radius > term.support_limit * (1.0 + 1e-12)) support_ok = false;
    }
    out.csv("oseen.csv", t);
    out.snapshot("partial_sum.bin", r.partial_sum, p.ell0);

    const int n_cat = 60;
    const auto a = catalan_table(n_cat);
    Table cat({"n", "A_n", "partial_sum_quarter", "closed_form_partial_sum", "gap_to_half"});
    double ratio = 1.0, worst = 0.0;
    for (int n = 1; n <= n_cat; ++n) {
        ratio *= (2.0 * n - 1.0) / (2.0 * n);
        const double series = catalan_series(0.25, n);
        const double closed = 0.5 - 0.5 * ratio;
        worst = std::max(worst, std::abs(series - closed));
        cat.add_cells({std::to_string(n), a[n].str(), format_number(series), format_number(closed),
                       format_number(0.5 - series)});
    }
    out.csv("catalan.csv", cat);

    json& s = o.summary;
    s["requested_terms"] = L.requested;
    s["computed_terms"] = L.computed;
    s["c_emp"] = L.c_emp;
    s["u1_e_norm"] = L.u1_norm;
    s["contraction"] = L.contraction;
    s["support_within_limit"] = support_ok;
    s["final_partial_residual"] = number_or_null(L.terms.back().partial_residual);
    if (ref) s["reference_e_norm"] = e_norm(ref->U, p.L, p.ell0);
    s["catalan"] = {{"terms", n_cat},
                    {"max_deviation_from_closed_form", worst},
                    {"gap_to_generating_function_at_quarter", 0.5 - catalan_series(0.25, n_cat)}};
    o.put("contraction", L.contraction);
    o.put("c_emp", L.c_emp);
    o.put("final_partial_residual", L.terms.back().partial_residual);
    return o;
}

inline Outcome run_stability(const ExperimentConfig& c, OutputDir& out) {
    const GridSpec g = c.grid();
    const auto& p = c.params;
    const SpectralField f = detail::force_for(c, g);
    PicardConfig pc = c.picard;
    pc.variant = PicardVariant::damped;
    const PicardResult U = picard_solve(f, p, pc);
    Outcome o;
    o.summary["stationary"] = {{"verdict", to_string(U.verdict)}, {"iterations", U.iterations},
                               {"pde_residual", U.pde_residual}};
    if (!U.converged()) {
        o.status = kNotConverged;
        o.verdict = "stationary_" + std::string(to_string(U.verdict));
        return o;
    }
    StabilityOptions opt;
    opt.perturbation.energy = c.stability.perturbation_energy;
    opt.perturbation.max_wavenumber = c.stability.max_wavenumber;
    opt.perturbation.slope = c.initial.slope;
    const StabilityReport rep = stability_experiment(U.U, f, c.stability.seeds, c.evolver_config(), opt);
    Table t({"seed", "d0", "rate", "rate_over_2alpha", "fit_r2", "fit_points", "max_margin", "final_distance"});
    double worst_ratio = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.runs) {
        t.add({static_cast<double>(r.seed), r.d0, r.rate, r.rate_ratio, r.fit_r2, static_cast<double>(r.fit_points),
               r.max_margin, r.final_distance});
        Table d({"t", "distance_sq"});
        for (std::size_t i = 0; i < r.t.size(); ++i) d.add({r.t[i], r.distance[i]});
        out.csv(fmt::format("distance_{}.csv", r.seed), d);
        worst_ratio = std::min(worst_ratio, r.rate_ratio);
    }
    out.csv("stability.csv", t);
    json& s = o.summary;
    s["u_star_l3"] = rep.u3_norm;
    s["nu"] = rep.nu;
    s["hypothesis_holds"] = rep.hypothesis_holds;
    s["stationarity_residual"] = rep.stationarity_residual;
    s["min_rate_over_2alpha"] = number_or_null(worst_ratio);
    o.put("u_star_l3", rep.u3_norm);
    o.put("min_rate_over_2alpha", worst_ratio);
    return o;
}

inline Outcome run_spectra_audit(const ExperimentConfig& c, OutputDir& out) {
    const GridSpec g = c.grid();
    const auto& p = c.params;
    Outcome o;
    json& s = o.summary;
    s["source"] = c.spectra.source;
    if (c.spectra.source == "synthetic") {
        const double lo = c.spectra.kappa_lo > 0.0 ? c.spectra.kappa_lo : 2.0 * g.dk();
        const double hi = detail::fit_hi(c, g);
        Table t({"beta", "rate", "relative_error", "r2", "shells", "beta_cross"});
        double worst = 0.0;
        for (double beta : c.spectra.beta) {
            const SpectralField u = synthetic_exponential_field(g, beta);
            const GevreyRadius gr = gevrey_radius(u, 0.5, c.spectra.gevrey_beta, lo, hi);
            const double rel = beta > 0.0 ? std::abs(gr.beta_star - beta) / beta : std::abs(gr.beta_star);
            worst = std::max(worst, rel);
            t.add({beta, gr.beta_star, rel, gr.fit.r2, static_cast<double>(gr.fit.shells), gr.beta_cross});
        }
        out.csv("fits.csv", t);
        s["max_relative_error"] = worst;
        o.put("max_relative_error", worst);
        return o;
    }
    SpectralField u(g);
    if (c.spectra.source == "picard") {
        const PicardResult r = picard_solve(detail::force_for(c, g), p, c.picard);
        s["picard"] = {{"verdict", to_string(r.verdict)}, {"iterations", r.iterations}};
        if (!r.converged()) {
            o.status = kNotConverged;
            o.verdict = "picard_" + std::string(to_string(r.verdict));
        }
        u = r.U;
    } else {
        u = evolve(detail::initial_field(c, g), detail::force_for(c, g), c.evolver_config()).u;
    }
    const ShellSpectrum spec = shell_spectrum(u);
    out.csv("spectrum.csv", detail::spectrum_table(spec));
    std::optional<DecayFit> fit;
    const double lo = detail::fit_lo(c), hi = detail::fit_hi(c, g);
    s["max_shell_fit"] = detail::try_fit(u, lo, hi, DecayCurve::max_shell, p.ell0 / p.rho2, &fit);
    s["energy_fit"] = detail::try_fit(u, lo, hi, DecayCurve::energy, std::numeric_limits<double>::quiet_NaN());
    if (fit) {
        const GevreyRadius gr = gevrey_radius(u, 0.5, c.spectra.gevrey_beta, lo, hi);
        Table t({"beta", "gevrey_norm", "top_band_fraction"});
        for (std::size_t i = 0; i < gr.beta.size(); ++i) t.add({gr.beta[i], gr.norm[i], gr.top_shell_fraction[i]});
        out.csv("gevrey.csv", t);
        s["beta_star"] = gr.beta_star;
        s["beta_cross"] = number_or_null(gr.beta_cross);
    }
    try {
        const LineFit lf = five_thirds_probe(spec, lo, hi);
        s["loglog_slope"] = {{"slope", lf.slope}, {"r2", lf.r2}, {"shells", lf.points}};
    } catch (const DomainError& e) {
        s["loglog_slope"] = {{"error", e.what()}};
    }
    o.put("decay_rate", fit ? fit->rate : std::numeric_limits<double>::quiet_NaN());
    o.put("decay_r2", fit ? fit->r2 : std::numeric_limits<double>::quiet_NaN());
    return o;
}

inline Outcome run_force_audit(const ExperimentConfig& c, OutputDir& out) {
    const GridSpec g = c.grid();
    const auto& p = c.params;
    ForceSpec spec;
    spec.params = p;
    spec.orientation = c.orientation;
    std::vector<double> ps = c.force_audit.p;
    if (c.force_audit.p_inf) ps.push_back(std::numeric_limits<double>::infinity());
    const auto rows = audit_norm_equivalence(spec, g, c.force_audit.s, ps);
    Table t({"s", "p", "norm", "scale", "ratio"});
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : rows) {
        t.add({r.s, r.p, r.norm, r.scale, r.ratio});
        if (std::isfinite(r.ratio)) {
            lo = std::min(lo, r.ratio);
            hi = std::max(hi, r.ratio);
        }
    }
    out.csv("norms.csv", t);
    const SpectralField f = build_force(spec, g);
    Table gt({"theta", "s", "p", "force_side", "formula", "ratio"});
    for (double th : c.force_audit.theta) {
        const GrashofEstimate e = grashof_from_force(f, p, th);
        gt.add({th, e.s, e.p, e.value, e.formula, e.formula > 0.0 ? e.value / e.formula : std::numeric_limits<double>::quiet_NaN()});
    }
    out.csv("grashof.csv", gt);
    Table ct({"mu", "outside_l2", "relative"});
    const double fl2 = l2_norm(f);
    for (double mu : c.force_audit.mu) {
        if (mu * p.L > g.box_half_side() * (1.0 + 1e-12)) continue;
        const double v = spatial_concentration(f, p.L, mu);
        ct.add({mu, v, fl2 > 0.0 ? v / fl2 : 0.0});
    }
    out.csv("concentration.csv", ct);
    Outcome o;
    o.summary["ratio_min"] = number_or_null(lo);
    o.summary["ratio_max"] = number_or_null(hi);
    o.summary["f_l2"] = fl2;
    o.summary["annulus_modes"] = annulus_mode_count(g, p.ell0, p.rho1, p.rho2);
    o.summary["grashof"] = detail::grashof_json(p);
    o.put("ratio_min", lo);
    o.put("ratio_max", hi);
    return o;
}

inline Outcome run_kernel_audit(const ExperimentConfig& c, OutputDir& out) {
    const auto& k = c.kernel;
    Table t({"r", "closed_form", "subordination", "fourier_sine", "rel_err_subordination", "rel_err_fourier"});
    double worst_sub = 0.0;
    for (int i = 0; i < k.samples; ++i) {
        const double r = k.r_min * std::pow(k.r_max / k.r_min, static_cast<double>(i) / (k.samples - 1));
        const double exact = kernel_eval(k.nu, k.alpha, r);
        const double sub = kernel_subordination_quadrature(k.nu, k.alpha, r).value;
        const double four = kernel_fourier_quadrature(k.nu, k.alpha, r).value;
        const double es = std::abs(sub - exact) / exact;
        worst_sub = std::max(worst_sub, es);
        t.add({r, exact, sub, four, es, std::abs(four - exact) / exact});
    }
    out.csv("kernel.csv", t);
    const QuadratureValue mass = kernel_mass(k.nu, k.alpha);
    const KernelConstants kc = kernel_piecewise_constants(k.nu, k.alpha);
    const auto g = [](double s) { return std::pow(1.0 + s, -4.0); };
    const DecayTransfer dt = decay_transfer_check(g, k.tail_n, k.nu, k.alpha, k.tail_radii);
    Table tt({"r", "convolution", "scaled"});
    for (const auto& row : dt.rows) tt.add({row.r, row.conv, row.scaled});
    out.csv("decay_transfer.csv", tt);
    Outcome o;
    json& s = o.summary;
    s["max_rel_err_subordination"] = worst_sub;
    s["mass"] = mass.value;
    s["mass_error"] = std::abs(mass.value - 1.0 / k.alpha);
    s["constants"] = {{"split", kc.split}, {"c_near", kc.c_near}, {"c_far", kc.c_far}, {"c", kc.c}};
    s["decay_transfer"] = {{"profile", "(1 + r)^-4"}, {"n", dt.n}, {"plateau", dt.plateau}, {"spread", dt.spread},
                           {"bounded", dt.bounded}};
    if (k.periodization) {
        const double e = std::sqrt(k.nu / k.alpha);
        const PeriodizationCheck pc = periodized_multiplier_check(GridSpec(10.0 * e, 64), k.nu, k.alpha, e, 2.0 * e);
        s["periodization"] = {{"box_efolds", pc.box_efolds}, {"points", pc.points}, {"max_rel_error", pc.max_rel_error}};
    }
    o.put("max_rel_err_subordination", worst_sub);
    o.put("mass_error", std::abs(mass.value - 1.0 / k.alpha));
    o.put("transfer_spread", dt.spread);
    return o;
}

inline Outcome run_single(const ExperimentConfig& c, OutputDir& out) {
    switch (c.kind) {
        case Kind::evolve: return run_evolve(c, out);
        case Kind::stationary_picard: return run_picard(c, out);
        case Kind::oseen: return run_oseen(c, out);
        case Kind::stability: return run_stability(c, out);
        case Kind::spectra_audit: return run_spectra_audit(c, out);
        case Kind::force_audit: return run_force_audit(c, out);
        case Kind::kernel_audit: return run_kernel_audit(c, out);
        case Kind::sweep: break;
    }
    throw ConfigError("run_single: sweep is not a single experiment");
}

/// Maps library exceptions onto exit statuses.
inline int status_of(const std::exception_ptr& e, std::string& message) {
    try {
        std::rethrow_exception(e);
    } catch (const ConfigError& x) {
        message = x.what();
        return kConfigError;
    } catch (const ShapeError& x) {
        message = x.what();
        return kConfigError;
    } catch (const DomainError& x) {
        message = x.what();
        return kConfigError;
    } catch (const NumericalError& x) {
        message = x.what();
        return kNumericalError;
    } catch (const std::exception& x) {
        message = x.what();
        return kNumericalError;
    }
}

inline std::vector<std::vector<double>> sweep_points(const SweepConfig& s) {
    std::vector<std::vector<double>> pts{{}};
    for (const auto& axis : s.axes) {
        std::vector<std::vector<double>> next;
        for (const auto& base : pts)
            for (double v : axis.values) {
                auto q = base;
                q.push_back(v);
                next.push_back(std::move(q));
            }
        pts = std::move(next);
    }
    return pts;
}

inline Outcome run_sweep(const ExperimentConfig& c, OutputDir& out, int threads) {
    const auto points = sweep_points(c.sweep);
    struct PointResult {
        int status = kOk;
        std::string verdict;
        std::string error;
        std::vector<std::pair<std::string, double>> row;
    };
    std::vector<PointResult> results(points.size());
    std::vector<std::unique_ptr<OutputDir>> dirs(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            ExperimentConfig pc = c;
            pc.kind = c.sweep.base;
            for (std::size_t a = 0; a < points[i].size(); ++a) set_parameter(pc, c.sweep.axes[a].name, points[i][a]);
            dirs[i] = std::make_unique<OutputDir>(out.root() / fmt::format("point_{:03d}", i));
            PointResult& r = results[i];
            try {
                validate(pc);
                for (double th : {0.0, 1.0, 1.5, 2.0, 3.0}) r.row.emplace_back(fmt::format("G_{}", th), grashof(pc.params, th));
                Outcome o = run_single(pc, *dirs[i]);
                r.status = o.status;
                r.verdict = o.verdict;
                r.row.insert(r.row.end(), o.row.begin(), o.row.end());
                dirs[i]->json_file("summary.json", o.summary);
            } catch (...) {
                r.status = status_of(std::current_exception(), r.error);
                r.verdict = "failed";
            }
        }
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(points.size())));
    {
        std::vector<std::jthread> pool;
        for (int t = 1; t < n; ++t) pool.emplace_back(worker);
        worker();
    }
    for (std::size_t i = 0; i < points.size(); ++i) out.adopt(fmt::format("point_{:03d}", i), *dirs[i]);

    std::vector<std::string> keys;
    for (const auto& r : results)
        for (const auto& [k, v] : r.row)
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    std::vector<std::string> header{"point"};
    for (const auto& a : c.sweep.axes) header.push_back(a.name);
    header.insert(header.end(), {"status", "verdict", "error"});
    header.insert(header.end(), keys.begin(), keys.end());
    Table t(header);
    Outcome o;
    json rows = json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& r = results[i];
        std::vector<std::string> cells{std::to_string(i)};
        for (double v : points[i]) cells.push_back(format_number(v));
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        cells.insert(cells.end(), {std::to_string(r.status), r.verdict, err});
        json jr = {{"point", i}, {"status", r.status}, {"verdict", r.verdict}};
        for (const auto& k : keys) {
            double v = std::numeric_limits<double>::quiet_NaN();
            for (const auto& [kk, vv] : r.row)
                if (kk == k) v = vv;
            cells.push_back(format_number(v));
            jr[k] = number_or_null(v);
        }
        t.add_cells(std::move(cells));
        rows.push_back(jr);
    }
    out.csv("sweep.csv", t);
    o.summary["points"] = points.size();
    o.summary["rows"] = rows;
    return o;
}

struct RunOptions {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

inline fs::path resolve_output(const ExperimentConfig& c, const RunOptions& opt) {
    if (opt.out) return fs::path(*opt.out);
    const char* env = std::getenv("NSK41_OUTPUT_ROOT");
    const fs::path root = env && *env ? fs::path(env) : fs::path("runs");
    if (!c.output.empty()) {
        const fs::path p(c.output);
        return p.is_absolute() ? p : root / p;
    }
    return root / fmt::format("{}-seed{}", to_string(c.kind), c.seed);
}

/// Keys of the resolved configuration that the input file did not set.
inline std::vector<std::string> defaulted_keys(const json& resolved, const YAML::Node& input, const std::string& prefix = "") {
    std::vector<std::string> out;
    const bool is_map = input && input.IsMap();
    for (auto it = resolved.begin(); it != resolved.end(); ++it) {
        const std::string key = it.key();
        const bool present = is_map && input[key];
        if (it->is_object()) {
            auto sub = defaulted_keys(*it, present ? input[key] : YAML::Node(YAML::NodeType::Undefined), prefix + key + ".");
            out.insert(out.end(), sub.begin(), sub.end());
        } else if (!present) {
            out.push_back(prefix + key);
        }
    }
    return out;
}

/// Runs a configuration end to end and writes the manifest; returns the exit status.
inline int run(const std::string& config_path, const RunOptions& opt, bool expect_sweep, std::ostream& log) {
    ExperimentConfig c;
    YAML::Node input;
    try {
        c = load_config(config_path);
        input = YAML::LoadFile(config_path);
        if (opt.seed) c.seed = *opt.seed;
        if (expect_sweep && c.kind != Kind::sweep) throw ConfigError("'sweep' needs experiment: sweep");
        if (!expect_sweep && c.kind == Kind::sweep) throw ConfigError("use the 'sweep' command for sweep configurations");
        if (opt.threads < 1) throw ConfigError("--threads must be >= 1");
    } catch (...) {
        std::string msg;
        const int st = status_of(std::current_exception(), msg);
        log << "error: " << msg << '\n';
        return st == kNumericalError ? kConfigError : st;
    }

    const fs::path dir = resolve_output(c, opt);
    OutputDir out(dir);
    Outcome o;
    std::string error;
    try {
        o = c.kind == Kind::sweep ? run_sweep(c, out, opt.threads) : run_single(c, out);
    } catch (...) {
        o.status = status_of(std::current_exception(), error);
        o.verdict = "failed";
    }
    json summary = o.summary;
    summary["status"] = o.status;
    summary["verdict"] = o.verdict;
    if (!error.empty()) summary["error"] = error;
    out.json_file("summary.json", summary);

    json manifest;
    manifest["tool"] = "nsk41";
    manifest["version"] = kVersion;
    json resolved = to_json(c);
    manifest["config"] = resolved;
    std::vector<std::string> defaults = defaulted_keys(resolved, input);
    if (opt.seed) defaults.erase(std::remove(defaults.begin(), defaults.end(), "seed"), defaults.end());
    manifest["defaulted"] = defaults;
    manifest["overrides"] = {{"seed", opt.seed ? json(*opt.seed) : json(nullptr)}};
    manifest["status"] = o.status;
    manifest["verdict"] = o.verdict;
    manifest["files"] = out.checksums();
    out.json_file("manifest.json", manifest);

    if (!error.empty()) log << "error: " << error << '\n';
    log << fmt::format("{} -> {} (status {}, {})\n", to_string(c.kind), dir.string(), o.status, o.verdict);
    return o.status;
}

}  // namespace nsk41::cli
