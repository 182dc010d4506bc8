#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "nsk41/forcing.hpp"
#include "nsk41/nonlinear.hpp"
#include "nsk41/random_field.hpp"

namespace nsk41 {

enum class PicardVariant { damped, classical };

struct PicardConfig {
    PicardVariant variant = PicardVariant::damped;
    double tolerance = 1e-10;  // relative fixed-point residual in the E-norm
    int max_iters = 200;
    double blowup = 1e8;       // ||U|| / ||U^0|| beyond which the iteration is declared divergent

    void validate() const {
        if (!(tolerance > 0.0)) throw ConfigError("picard.tolerance must be > 0");
        if (max_iters < 1) throw ConfigError("picard.max_iters must be >= 1");
        if (!(blowup > 1.0)) throw ConfigError("picard.blowup must be > 1");
    }
};

enum class Verdict { converged, max_iters, diverged };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::converged: return "converged";
        case Verdict::max_iters: return "max_iters";
        case Verdict::diverged: return "diverged";
    }
    return "?";
}

struct PicardResult {
    SpectralField U;
    Verdict verdict = Verdict::max_iters;
    int iterations = 0;
    std::vector<double> residuals;  // ||U^{k+1} - U^k||_E / ||U^{k+1}||_E
    double pde_residual = 0.0;      // ||-nu Lap U + P div(U (x) U) + alpha U - f||_{H^-1} / ||f||_{H^-1}
    double apriori_margin = 0.0;    // damped: min(nu, alpha)||U||_{H1} - ||f||_{H-1}; classical: nu||U||_{H1dot} - ||f||_{H-1dot}
    double apriori_scale = 0.0;     // the force norm in that bound

    bool converged() const { return verdict == Verdict::converged; }
};

namespace detail {

inline Multiplier stationary_resolvent(const PhysicalParams& p, PicardVariant v) {
    return Multiplier::resolvent(p.nu, v == PicardVariant::damped ? p.alpha : 0.0);
}

inline double working_norm(const SpectralField& v, const PhysicalParams& p) { return e_norm(v, p.L, p.ell0); }

}  // namespace detail

/// -nu Lap U + P div(U (x) U) + alpha U - f (alpha dropped for the classical variant).
inline SpectralField stationary_defect(const SpectralField& U, const SpectralField& f, const PhysicalParams& p,
                                       PicardVariant v) {
    ProductEvaluator ev(U.grid());
    SpectralField r = ev.projected_advection(U);
    const double alpha = v == PicardVariant::damped ? p.alpha : 0.0;
    for_each_mode(U.grid(), [&](std::size_t idx, const Vec3&, double xi2) {
        for (std::size_t c = 0; c < 3; ++c) r(c, idx) += (p.nu * xi2 + alpha) * U(c, idx) - f(c, idx);
    });
    return r;
}

/// Fixed point U = R (f - P div(U (x) U)), R = (-nu Lap + alpha)^{-1} (damped) or (-nu Lap)^{-1}
/// (classical), started from U^0 = R f.
inline PicardResult picard_solve(const SpectralField& f, const PhysicalParams& p, const PicardConfig& cfg = {}) {
    p.validate();
    cfg.validate();
    if (cfg.variant == PicardVariant::damped && !(p.alpha > 0.0)) {
        throw ConfigError("picard: the damped variant needs alpha > 0");
    }
    for (std::size_t c = 0; c < 3; ++c)
        if (f.mean(c) != cplx{}) throw DomainError("picard: force must be mean-free");
    const Multiplier res = detail::stationary_resolvent(p, cfg.variant);
    const auto table = res.table(f.grid());
    const auto& n2 = detail::lattice_norm2(f.grid().resolution());
    auto apply_res = [&](SpectralField v) {
        auto d = v.data();
        const std::size_t m = v.modes();
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < m; ++i) d[c * m + i] *= table[n2[i]];
        return v;
    };

    ProductEvaluator ev(f.grid());
    PicardResult out;
    SpectralField U = apply_res(f);
    const double start = detail::working_norm(U, p);
    for (int k = 0; k < cfg.max_iters; ++k) {
        SpectralField rhs = f - ev.projected_advection(U);
        SpectralField next = apply_res(std::move(rhs));
        const double nn = detail::working_norm(next, p);
        const double dn = detail::working_norm(next - U, p);
        if (!std::isfinite(nn) || !std::isfinite(dn)) throw NumericalError("picard: non-finite iterate");
        U = std::move(next);
        out.iterations = k + 1;
        const double r = nn > 0.0 ? dn / nn : (dn == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        out.residuals.push_back(r);
        if (r <= cfg.tolerance) {
            out.verdict = Verdict::converged;
            break;
        }
        if (start > 0.0 && nn > cfg.blowup * start) {
            out.verdict = Verdict::diverged;
            break;
        }
    }
    out.U = std::move(U);

    const double f_hm1dot = hs_norm(f, -1.0);
    out.pde_residual = hs_norm(stationary_defect(out.U, f, p, cfg.variant), -1.0);
    if (f_hm1dot > 0.0) out.pde_residual /= f_hm1dot;
    if (cfg.variant == PicardVariant::damped) {
        out.apriori_scale = h_norm(f, -1.0);
        out.apriori_margin = std::min(p.nu, p.alpha) * h_norm(out.U, 1.0) - out.apriori_scale;
    } else {
        out.apriori_scale = f_hm1dot;
        out.apriori_margin = p.nu * hs_norm(out.U, 1.0) - out.apriori_scale;
    }
    return out;
}

/// Pressure of the stationary problem, P = (-Lap)^{-1} div div(U (x) U), so that
/// grad P = -(Id - P) div(U (x) U).
inline ScalarSpectralField pressure_recover(const SpectralField& U) {
    ProductEvaluator ev(U.grid());
    const SpectralField d = ev.divergence_unprojected(U);
    ScalarSpectralField P(U.grid());
    const cplx I(0.0, 1.0);
    for_each_mode(U.grid(), [&](std::size_t idx, const Vec3& xi, double xi2) {
        if (xi2 == 0.0) return;
        P(0, idx) = I * (xi[0] * d(0, idx) + xi[1] * d(1, idx) + xi[2] * d(2, idx)) / xi2;
    });
    return P;
}

using BigInt = boost::multiprecision::cpp_int;

/// A_1 = 1, A_n = sum_{k=1}^{n-1} A_k A_{n-k}, exact.
inline std::vector<BigInt> catalan_table(int n) {
    if (n < 1) throw DomainError("catalan: n must be >= 1");
    std::vector<BigInt> a(static_cast<std::size_t>(n) + 1);
    a[1] = 1;
    for (int m = 2; m <= n; ++m) {
        BigInt s = 0;
        for (int k = 1; k < m; ++k) s += a[k] * a[m - k];
        a[m] = s;
    }
    return a;
}

inline BigInt catalan(int n) { return catalan_table(n)[static_cast<std::size_t>(n)]; }

/// log A_n, n = 1..N (index 0 unused).
inline std::vector<double> log_catalan(int n) {
    const auto a = catalan_table(n);
    std::vector<double> out(a.size(), 0.0);
    for (std::size_t i = 1; i < a.size(); ++i) {
        const auto bits = boost::multiprecision::msb(a[i]);
        if (bits < 1000) {
            out[i] = std::log(a[i].convert_to<double>());
        } else {
            const std::size_t shift = bits - 60;
            out[i] = std::log(BigInt(a[i] >> shift).convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
        }
    }
    return out;
}

/// sum_{n=1}^{N} A_n z^n, terms evaluated in log-space.
inline double catalan_series(double z, int N) {
    const auto la = log_catalan(N);
    double s = 0.0;
    for (int n = 1; n <= N; ++n) {
        if (z == 0.0) break;
        const double mag = std::exp(la[n] + n * std::log(std::abs(z)));
        s += (z < 0.0 && n % 2 == 1) ? -mag : mag;
    }
    return s;
}

/// (1 - sqrt(1 - 4z)) / 2 on |z| <= 1/4.
inline double catalan_generating_function(double z) {
    if (!(std::abs(z) <= 0.25)) throw DomainError("catalan generating function: |z| must be <= 1/4");
    return 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * z));
}

struct OseenTerm {
    int n = 0;
    double norm = 0.0;            // ||U_n||_E
    double log_bound = 0.0;       // log of (nu / C) A_n (C ||U_1||_E / nu)^n
    double bound = 0.0;           // exp(log_bound), may underflow to 0
    double support_radius = 0.0;  // max |xi| with U_n(xi) != 0
    double support_limit = 0.0;   // n rho2 / ell0
    double partial_residual = std::numeric_limits<double>::quiet_NaN();  // ||sum_1^n U_k - U_ref||_E
};

struct OseenLedger {
    std::vector<OseenTerm> terms;
    double c_emp = 0.0;
    double u1_norm = 0.0;
    double contraction = 0.0;  // 4 C ||U_1||_E / nu; the series bound converges when <= 1
    int requested = 0;         // N_max asked for
    int computed = 0;          // N_max after the support cap
};

struct OseenResult {
    OseenLedger ledger;
    SpectralField partial_sum;
    std::vector<SpectralField> terms;  // U_1 .. U_N
};

inline double support_radius(const SpectralField& v) {
    double r2 = 0.0;
    for_each_mode(v.grid(), [&](std::size_t idx, const Vec3&, double xi2) {
        if (v(0, idx) != cplx{} || v(1, idx) != cplx{} || v(2, idx) != cplx{}) r2 = std::max(r2, xi2);
    });
    return std::sqrt(r2);
}

/// Empirical bound C = max ||B(v, w)||_E / (||v||_E ||w||_E) over the given pairs
/// plus random divergence-free probes band-limited to half the dealiasing cutoff.
inline double calibrate_bilinear_constant(const GridSpec& g, const PhysicalParams& p,
                                          const std::vector<std::pair<SpectralField, SpectralField>>& pairs,
                                          int random_probes = 6, std::uint64_t seed = 1) {
    double c = 0.0;
    auto probe = [&](const SpectralField& v, const SpectralField& w) {
        const double nv = detail::working_norm(v, p), nw = detail::working_norm(w, p);
        if (nv == 0.0 || nw == 0.0) return;
        c = std::max(c, detail::working_norm(bilinear(v, w), p) / (nv * nw));
    };
    for (const auto& [v, w] : pairs) probe(v, w);
    RandomFieldSpec rs;
    rs.max_wavenumber = 0.5 * g.kappa_max();
    for (int i = 0; i < random_probes; ++i) {
        const auto v = random_field(g, seed + 2 * static_cast<std::uint64_t>(i), rs);
        const auto w = random_field(g, seed + 2 * static_cast<std::uint64_t>(i) + 1, rs);
        probe(v, w);
    }
    return c;
}

/// Oseen series of the classical stationary equations: U_1 = (-nu Lap)^{-1} f,
/// U_n = (1/nu) sum_{k=1}^{n-1} B(U_k, U_{n-k}), by exact convolution.
/// `reference`, when non-empty, fills the partial-sum residual column.
inline OseenResult oseen_expand(const SpectralField& f, const PhysicalParams& p, int n_max,
                                const SpectralField* reference = nullptr, int random_probes = 6) {
    p.validate();
    if (n_max < 1) throw DomainError("oseen_expand: N_max must be >= 1");
    const GridSpec& g = f.grid();
    OseenResult out;
    out.ledger.requested = n_max;
    const int cap = static_cast<int>(std::floor(g.kappa_max() * p.ell0 / p.rho2 * (1.0 - 1e-12)));
    if (cap < 1) throw DomainError("oseen_expand: rho2 / ell0 exceeds the dealiasing cutoff");
    if (n_max > cap) {
        log::warn("oseen_expand: N_max reduced from " + std::to_string(n_max) + " to " + std::to_string(cap) +
                  " so that n rho2 / ell0 stays below kappa_max");
        n_max = cap;
    }
    out.ledger.computed = n_max;

    out.terms.push_back(apply_multiplier(Multiplier::resolvent(p.nu, 0.0), f));
    for (int n = 2; n <= n_max; ++n) {
        SpectralField s(g);
        for (int k = 1; k < n; ++k) s += bilinear_direct(out.terms[k - 1], out.terms[n - k - 1]);
        s *= cplx(1.0 / p.nu, 0.0);
        out.terms.push_back(std::move(s));
    }

    std::vector<std::pair<SpectralField, SpectralField>> pairs;
    for (std::size_t i = 0; i < out.terms.size() && i < 3; ++i) pairs.emplace_back(out.terms[0], out.terms[i]);
    OseenLedger& L = out.ledger;
    L.c_emp = calibrate_bilinear_constant(g, p, pairs, random_probes);
    L.u1_norm = detail::working_norm(out.terms[0], p);
    L.contraction = 4.0 * L.c_emp * L.u1_norm / p.nu;
    const auto la = log_catalan(n_max);

    out.partial_sum = SpectralField(g);
    for (int n = 1; n <= n_max; ++n) {
        const SpectralField& U = out.terms[n - 1];
        out.partial_sum += U;
        OseenTerm t;
        t.n = n;
        t.norm = detail::working_norm(U, p);
        if (L.c_emp > 0.0 && L.u1_norm > 0.0) {
            t.log_bound = std::log(p.nu / L.c_emp) + la[n] + n * std::log(L.c_emp * L.u1_norm / p.nu);
            t.bound = std::exp(t.log_bound);
        } else {
            t.log_bound = -std::numeric_limits<double>::infinity();
            t.bound = 0.0;
        }
        t.support_radius = support_radius(U);
        t.support_limit = n * p.rho2 / p.ell0;
        if (reference) t.partial_residual = detail::working_norm(out.partial_sum - *reference, p);
        L.terms.push_back(t);
    }
    return out;
}

struct GevreyCurve {
    std::vector<double> beta;
    std::vector<double> norm;  // ||e^{beta sqrt(-Lap)} U||_{H^s dot}
    bool increasing = true;
    bool log_convex = true;
};

/// Gevrey norms of U along a beta grid, with monotonicity and log-convexity of the curve.
inline GevreyCurve gevrey_picard_check(const SpectralField& U, const std::vector<double>& betas, double s = 0.5) {
    GevreyCurve c;
    for (double b : betas) {
        if (!(b >= 0.0)) throw DomainError("gevrey_picard_check: beta must be >= 0");
        c.beta.push_back(b);
        c.norm.push_back(gevrey_norm(U, b, s));
    }
    for (std::size_t i = 1; i < c.norm.size(); ++i)
        if (c.norm[i] < c.norm[i - 1]) c.increasing = false;
    for (std::size_t i = 1; i + 1 < c.norm.size(); ++i) {
        const double h0 = c.beta[i] - c.beta[i - 1], h1 = c.beta[i + 1] - c.beta[i];
        const double l0 = std::log(c.norm[i - 1]), l1 = std::log(c.norm[i]), l2 = std::log(c.norm[i + 1]);
        const double second = ((l2 - l1) / h1 - (l1 - l0) / h0);
        if (second < -1e-12 * std::max(1.0, std::abs(l1))) c.log_convex = false;
    }
    return c;
}

}  // namespace nsk41
