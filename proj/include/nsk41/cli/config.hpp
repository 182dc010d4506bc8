#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "json.hpp"
#include "nsk41/dynamics.hpp"
#include "nsk41/random_field.hpp"
#include "nsk41/stationary.hpp"

namespace nsk41::cli {

using json = nlohmann::ordered_json;

enum class Kind { evolve, stationary_picard, oseen, stability, spectra_audit, force_audit, kernel_audit, sweep };

inline const std::vector<std::pair<Kind, std::string>>& kind_names() {
    static const std::vector<std::pair<Kind, std::string>> names{
        {Kind::evolve, "evolve"},           {Kind::stationary_picard, "stationary-picard"},
        {Kind::oseen, "oseen"},             {Kind::stability, "stability"},
        {Kind::spectra_audit, "spectra-audit"}, {Kind::force_audit, "force-audit"},
        {Kind::kernel_audit, "kernel-audit"}, {Kind::sweep, "sweep"}};
    return names;
}

inline std::string to_string(Kind k) {
    for (const auto& [kk, n] : kind_names())
        if (kk == k) return n;
    return "?";
}

inline Kind parse_kind(const std::string& s) {
    for (const auto& [k, n] : kind_names())
        if (n == s) return k;
    throw ConfigError("experiment: unknown kind '" + s + "'");
}

struct InitialConfig {
    std::string kind = "random";  // random | zero
    double energy = 1.0;
    double slope = -2.0;
    double max_wavenumber = 0.0;  // 0 selects kappa_max
};

struct OseenConfig {
    int n_max = 6;
    bool compare_picard = true;
    int probes = 6;
};

struct StabilityConfig {
    std::vector<std::uint64_t> seeds{1, 2, 3};
    double perturbation_energy = 0.1;
    double max_wavenumber = 0.0;
};

struct SpectraConfig {
    std::string source = "picard";  // picard | evolve | synthetic
    std::vector<double> beta{0.3, 1.0, 2.0};
    double kappa_lo = 0.0;  // 0 selects rho1 / ell0 (synthetic: 2 dk)
    double kappa_hi = 0.0;  // 0 selects kappa_max
    std::vector<double> gevrey_beta{0.0, 0.25, 0.5, 1.0, 2.0};
};

struct ForceAuditConfig {
    std::vector<double> s{-0.5, 0.0, 0.5, 1.0};
    std::vector<double> p{2.0, 3.0, 6.0};
    bool p_inf = true;
    std::vector<double> theta{0.0, 1.0, 1.5, 2.0, 3.0};
    std::vector<double> mu{1.0, 1.5};
};

struct KernelConfig {
    double nu = 1.0;
    double alpha = 1.0;
    double r_min = 1e-2;
    double r_max = 40.0;
    int samples = 25;
    int tail_n = 4;
    std::vector<double> tail_radii{10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0};
    bool periodization = true;
};

struct SweepAxis {
    std::string name;
    std::vector<double> values;
};

struct SweepConfig {
    Kind base = Kind::evolve;
    std::vector<SweepAxis> axes;
};

struct ExperimentConfig {
    Kind kind = Kind::evolve;
    std::uint64_t seed = 1;
    std::string output;  // empty selects <root>/<kind>-<seed>
    PhysicalParams params;
    Vec3 orientation{1.0, 2.0, 3.0};
    double box_half_side = 2.0;
    int resolution = 16;
    double dealias_fraction = 2.0 / 3.0;
    EvolverConfig evolver;
    InitialConfig initial;
    PicardConfig picard;
    OseenConfig oseen;
    StabilityConfig stability;
    SpectraConfig spectra;
    ForceAuditConfig force_audit;
    KernelConfig kernel;
    SweepConfig sweep;

    GridSpec grid() const { return GridSpec(box_half_side, resolution, dealias_fraction); }
    EvolverConfig evolver_config() const {
        EvolverConfig c = evolver;
        c.params = params;
        c.grid = grid();
        return c;
    }
};

namespace detail {

/// Strict view over a YAML map: every key must be consumed.
class Section {
public:
    Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(path_ + " must be a mapping");
    }
    ~Section() = default;

    bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!has(key)) return;
        try {
            out = node_[key].as<T>();
        } catch (const YAML::Exception&) {
            throw ConfigError(path_ + key + ": malformed value");
        }
    }

    Section sub(const std::string& key) {
        seen_.insert(key);
        return Section(has(key) ? node_[key] : YAML::Node(), path_ + key + ".");
    }

    YAML::Node raw(const std::string& key) {
        seen_.insert(key);
        return has(key) ? node_[key] : YAML::Node();
    }

    void finish() const {
        if (!node_ || !node_.IsMap()) return;
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) throw ConfigError("unknown configuration key '" + path_ + key + "'");
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

inline void read_params(Section s, PhysicalParams& p) {
    s.get("nu", p.nu);
    s.get("alpha", p.alpha);
    s.get("ell0", p.ell0);
    s.get("L", p.L);
    s.get("F", p.F);
    s.get("rho1", p.rho1);
    s.get("rho2", p.rho2);
    s.finish();
}

inline void read_evolver(Section s, EvolverConfig& e) {
    s.get("dt", e.dt);
    s.get("t_end", e.t_end);
    s.get("scheme", e.scheme);
    s.get("snapshot_every", e.snapshot_every);
    s.get("window_start_fraction", e.window_start_fraction);
    s.get("adaptive", e.adaptive);
    s.get("cfl", e.cfl);
    s.get("dt_min", e.dt_min);
    s.finish();
}

inline PicardVariant parse_variant(const std::string& v) {
    if (v == "damped") return PicardVariant::damped;
    if (v == "classical") return PicardVariant::classical;
    throw ConfigError("picard.variant must be 'damped' or 'classical'");
}

inline std::string variant_name(PicardVariant v) { return v == PicardVariant::damped ? "damped" : "classical"; }

}  // namespace detail

/// Overwrites one numeric field addressed by a dotted path (sweep axes).
inline void set_parameter(ExperimentConfig& c, const std::string& name, double v) {
    auto& p = c.params;
    if (name == "params.nu") p.nu = v;
    else if (name == "params.alpha") p.alpha = v;
    else if (name == "params.ell0") p.ell0 = v;
    else if (name == "params.L") p.L = v;
    else if (name == "params.F") p.F = v;
    else if (name == "params.rho1") p.rho1 = v;
    else if (name == "params.rho2") p.rho2 = v;
    else if (name == "grid.resolution") c.resolution = static_cast<int>(v);
    else if (name == "grid.box_half_side") c.box_half_side = v;
    else if (name == "evolve.dt") c.evolver.dt = v;
    else if (name == "evolve.t_end") c.evolver.t_end = v;
    else if (name == "initial.energy") c.initial.energy = v;
    else if (name == "seed") c.seed = static_cast<std::uint64_t>(v);
    else throw ConfigError("sweep axis '" + name + "' is not a sweepable parameter");
}

inline void validate(const ExperimentConfig& c) {
    c.params.validate();
    const GridSpec g = c.grid();
    if (c.kind == Kind::evolve || c.kind == Kind::stability || c.kind == Kind::sweep) c.evolver_config().validate();
    c.picard.validate();
    if (c.initial.kind != "random" && c.initial.kind != "zero") throw ConfigError("initial.kind must be random or zero");
    if (!(c.initial.energy >= 0.0)) throw ConfigError("initial.energy must be >= 0");
    if (c.oseen.n_max < 1) throw ConfigError("oseen.n_max must be >= 1");
    if (c.stability.seeds.empty()) throw ConfigError("stability.seeds must not be empty");
    const auto& s = c.spectra;
    if (s.source != "picard" && s.source != "evolve" && s.source != "synthetic") {
        throw ConfigError("spectra.source must be picard, evolve or synthetic");
    }
    if (s.kappa_hi > g.kappa_max() * (1.0 + 1e-12)) throw ConfigError("spectra.kappa_hi exceeds kappa_max");
    const auto& k = c.kernel;
    if (!(k.nu > 0.0) || !(k.alpha > 0.0)) throw ConfigError("kernel.nu and kernel.alpha must be > 0");
    if (!(k.r_min > 0.0 && k.r_min < k.r_max) || k.samples < 2) throw ConfigError("kernel radii must satisfy 0 < r_min < r_max, samples >= 2");
    if (c.kind == Kind::sweep) {
        if (c.sweep.base == Kind::sweep) throw ConfigError("sweep.experiment cannot itself be a sweep");
        if (c.sweep.axes.empty()) throw ConfigError("sweep.axes must not be empty");
        for (const auto& a : c.sweep.axes) {
            if (a.values.empty()) throw ConfigError("sweep axis '" + a.name + "' has no values");
            ExperimentConfig probe = c;
            for (double v : a.values) {
                set_parameter(probe, a.name, v);
                probe.params.validate();
                (void)probe.grid();
            }
        }
    }
}

inline ExperimentConfig parse_config(const YAML::Node& root) {
    if (!root || !root.IsMap()) throw ConfigError("configuration must be a mapping");
    ExperimentConfig c;
    detail::Section top(root, "");
    std::string kind = "evolve";
    top.get("experiment", kind);
    c.kind = parse_kind(kind);
    top.get("seed", c.seed);
    top.get("output", c.output);
    detail::read_params(top.sub("params"), c.params);
    {
        auto f = top.sub("force");
        std::vector<double> a{c.orientation[0], c.orientation[1], c.orientation[2]};
        f.get("orientation", a);
        if (a.size() != 3) throw ConfigError("force.orientation must have 3 entries");
        c.orientation = {a[0], a[1], a[2]};
        f.finish();
    }
    {
        auto g = top.sub("grid");
        g.get("box_half_side", c.box_half_side);
        g.get("resolution", c.resolution);
        g.get("dealias_fraction", c.dealias_fraction);
        g.finish();
    }
    detail::read_evolver(top.sub("evolve"), c.evolver);
    {
        auto s = top.sub("initial");
        s.get("kind", c.initial.kind);
        s.get("energy", c.initial.energy);
        s.get("slope", c.initial.slope);
        s.get("max_wavenumber", c.initial.max_wavenumber);
        s.finish();
    }
    {
        auto s = top.sub("picard");
        std::string v = detail::variant_name(c.picard.variant);
        s.get("variant", v);
        c.picard.variant = detail::parse_variant(v);
        s.get("tolerance", c.picard.tolerance);
        s.get("max_iters", c.picard.max_iters);
        s.finish();
    }
    {
        auto s = top.sub("oseen");
        s.get("n_max", c.oseen.n_max);
        s.get("compare_picard", c.oseen.compare_picard);
        s.get("probes", c.oseen.probes);
        s.finish();
    }
    {
        auto s = top.sub("stability");
        s.get("seeds", c.stability.seeds);
        s.get("perturbation_energy", c.stability.perturbation_energy);
        s.get("max_wavenumber", c.stability.max_wavenumber);
        s.finish();
    }
    {
        auto s = top.sub("spectra");
        s.get("source", c.spectra.source);
        s.get("beta", c.spectra.beta);
        s.get("kappa_lo", c.spectra.kappa_lo);
        s.get("kappa_hi", c.spectra.kappa_hi);
        s.get("gevrey_beta", c.spectra.gevrey_beta);
        s.finish();
    }
    {
        auto s = top.sub("force_audit");
        s.get("s", c.force_audit.s);
        s.get("p", c.force_audit.p);
        s.get("p_inf", c.force_audit.p_inf);
        s.get("theta", c.force_audit.theta);
        s.get("mu", c.force_audit.mu);
        s.finish();
    }
    {
        auto s = top.sub("kernel");
        s.get("nu", c.kernel.nu);
        s.get("alpha", c.kernel.alpha);
        s.get("r_min", c.kernel.r_min);
        s.get("r_max", c.kernel.r_max);
        s.get("samples", c.kernel.samples);
        s.get("tail_n", c.kernel.tail_n);
        s.get("tail_radii", c.kernel.tail_radii);
        s.get("periodization", c.kernel.periodization);
        s.finish();
    }
    {
        auto s = top.sub("sweep");
        std::string base = to_string(c.sweep.base);
        s.get("experiment", base);
        c.sweep.base = parse_kind(base);
        const YAML::Node axes = s.raw("axes");
        if (axes && !axes.IsNull()) {
            if (!axes.IsSequence()) throw ConfigError("sweep.axes must be a list");
            for (std::size_t i = 0; i < axes.size(); ++i) {
                detail::Section a(axes[i], "sweep.axes[" + std::to_string(i) + "].");
                SweepAxis ax;
                a.get("name", ax.name);
                a.get("values", ax.values);
                a.finish();
                c.sweep.axes.push_back(ax);
            }
        }
        s.finish();
    }
    top.finish();
    validate(c);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::BadFile&) {
        throw ConfigError("cannot read configuration file '" + path + "'");
    } catch (const YAML::Exception& e) {
        throw ConfigError("configuration is not valid YAML: " + std::string(e.what()));
    }
    return parse_config(root);
}

/// Fully resolved configuration, defaults included.
inline json to_json(const ExperimentConfig& c) {
    const auto& p = c.params;
    json j;
    j["experiment"] = to_string(c.kind);
    j["seed"] = c.seed;
    j["output"] = c.output;
    j["params"] = {{"nu", p.nu}, {"alpha", p.alpha}, {"ell0", p.ell0}, {"L", p.L},
                   {"F", p.F},   {"rho1", p.rho1},   {"rho2", p.rho2}};
    j["force"] = {{"orientation", {c.orientation[0], c.orientation[1], c.orientation[2]}}};
    j["grid"] = {{"box_half_side", c.box_half_side}, {"resolution", c.resolution}, {"dealias_fraction", c.dealias_fraction}};
    const auto& e = c.evolver;
    j["evolve"] = {{"dt", e.dt},
                   {"t_end", e.t_end},
                   {"scheme", e.scheme},
                   {"snapshot_every", e.snapshot_every},
                   {"window_start_fraction", e.window_start_fraction},
                   {"adaptive", e.adaptive},
                   {"cfl", e.cfl},
                   {"dt_min", e.dt_min}};
    j["initial"] = {{"kind", c.initial.kind},
                    {"energy", c.initial.energy},
                    {"slope", c.initial.slope},
                    {"max_wavenumber", c.initial.max_wavenumber}};
    j["picard"] = {{"variant", detail::variant_name(c.picard.variant)},
                   {"tolerance", c.picard.tolerance},
                   {"max_iters", c.picard.max_iters}};
    j["oseen"] = {{"n_max", c.oseen.n_max}, {"compare_picard", c.oseen.compare_picard}, {"probes", c.oseen.probes}};
    j["stability"] = {{"seeds", c.stability.seeds},
                      {"perturbation_energy", c.stability.perturbation_energy},
                      {"max_wavenumber", c.stability.max_wavenumber}};
    j["spectra"] = {{"source", c.spectra.source},
                    {"beta", c.spectra.beta},
                    {"kappa_lo", c.spectra.kappa_lo},
                    {"kappa_hi", c.spectra.kappa_hi},
                    {"gevrey_beta", c.spectra.gevrey_beta}};
    j["force_audit"] = {{"s", c.force_audit.s},
                        {"p", c.force_audit.p},
                        {"p_inf", c.force_audit.p_inf},
                        {"theta", c.force_audit.theta},
                        {"mu", c.force_audit.mu}};
    const auto& k = c.kernel;
    j["kernel"] = {{"nu", k.nu},           {"alpha", k.alpha},           {"r_min", k.r_min},
                   {"r_max", k.r_max},     {"samples", k.samples},       {"tail_n", k.tail_n},
                   {"tail_radii", k.tail_radii}, {"periodization", k.periodization}};
    json axes = json::array();
    for (const auto& a : c.sweep.axes) axes.push_back({{"name", a.name}, {"values", a.values}});
    j["sweep"] = {{"experiment", to_string(c.sweep.base)}, {"axes", axes}};
    return j;
}

}  // namespace nsk41::cli
