#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "nsk41/field.hpp"

namespace nsk41 {
namespace detail {

/// |k|^2 for every flat index of an N^3 lattice, cached per resolution.
inline const std::vector<int>& lattice_norm2(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<std::vector<int>>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) {
        slot = std::make_unique<std::vector<int>>(static_cast<std::size_t>(n) * n * n);
        auto wn = [n](int i) { return i < n / 2 ? i : i - n; };
        std::size_t idx = 0;
        for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2)
                for (int i3 = 0; i3 < n; ++i3, ++idx) {
                    const int a = wn(i1), b = wn(i2), c = wn(i3);
                    (*slot)[idx] = a * a + b * b + c * c;
                }
    }
    return *slot;
}

inline int max_lattice_norm2(int n) { return 3 * (n / 2) * (n / 2); }

}  // namespace detail

/// Radial Fourier multiplier m(|xi|). Symbols that blow up at xi = 0 are
/// flagged and never evaluated there.
class Multiplier {
public:
    using Symbol = std::function<double(double)>;

    Multiplier(Symbol symbol, bool singular_at_zero, std::string name = "m")
        : symbol_(std::move(symbol)), singular_at_zero_(singular_at_zero), name_(std::move(name)) {}

    double operator()(double xi_norm) const { return symbol_(xi_norm); }
    bool singular_at_zero() const { return singular_at_zero_; }
    const std::string& name() const { return name_; }

    /// Symbol values tabulated on |k|^2 = 0 .. 3 (N/2)^2; entry 0 is 0 when singular.
    std::vector<double> table(const GridSpec& g) const {
        const int top = detail::max_lattice_norm2(g.resolution());
        std::vector<double> t(static_cast<std::size_t>(top) + 1);
        const double dk = g.dk();
        for (int n2 = 0; n2 <= top; ++n2) {
            t[n2] = (n2 == 0 && singular_at_zero_) ? 0.0 : symbol_(dk * std::sqrt(static_cast<double>(n2)));
        }
        return t;
    }

    friend Multiplier operator*(const Multiplier& a, const Multiplier& b) {
        return Multiplier([sa = a.symbol_, sb = b.symbol_](double r) { return sa(r) * sb(r); },
                          a.singular_at_zero_ || b.singular_at_zero_, a.name_ + "*" + b.name_);
    }

    Multiplier inverse() const {
        return Multiplier([s = symbol_](double r) { return 1.0 / s(r); }, true, "1/" + name_);
    }

    /// (-Delta)^s : |xi|^{2s}. Singular at zero for s < 0.
    static Multiplier fractional_laplacian(double s) {
        return Multiplier([s](double r) { return s == 0.0 ? 1.0 : std::pow(r, 2.0 * s); }, s < 0.0,
                          "(-Lap)^" + std::to_string(s));
    }
    /// e^{beta sqrt(-Delta)} : e^{beta |xi|}.
    static Multiplier gevrey(double beta) {
        return Multiplier([beta](double r) { return std::exp(beta * r); }, false, "gevrey");
    }
    /// (-nu Delta + alpha)^{-1} : 1 / (nu |xi|^2 + alpha); singular at zero when alpha = 0.
    static Multiplier resolvent(double nu, double alpha) {
        return Multiplier([nu, alpha](double r) { return 1.0 / (nu * r * r + alpha); }, alpha == 0.0, "resolvent");
    }
    /// Indicator of the annulus lo <= |xi| <= hi (relative slack 1e-12 on both edges).
    static Multiplier band(double lo, double hi) {
        return Multiplier(
            [lo, hi](double r) { return (r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12)) ? 1.0 : 0.0; },
            false, "band");
    }

private:
    Symbol symbol_;
    bool singular_at_zero_;
    std::string name_;
};

inline bool in_annulus(double r, double lo, double hi) { return Multiplier::band(lo, hi)(r) != 0.0; }

/// coeff_out(xi) = m(|xi|) coeff_in(xi).
template <std::size_t C>
BasicSpectralField<C> apply_multiplier(const Multiplier& m, const BasicSpectralField<C>& v) {
    if (m.singular_at_zero()) {
        for (std::size_t c = 0; c < C; ++c) {
            if (std::abs(v.mean(c)) != 0.0) {
                throw DomainError("multiplier '" + m.name() + "' is singular at xi = 0 but the field has nonzero mean");
            }
        }
    }
    const auto table = m.table(v.grid());
    const auto& n2 = detail::lattice_norm2(v.grid().resolution());
    BasicSpectralField<C> out(v.grid());
    for (std::size_t c = 0; c < C; ++c) {
        const auto in = v.component(c);
        auto dst = out.component(c);
        for (std::size_t idx = 0; idx < in.size(); ++idx) dst[idx] = table[n2[idx]] * in[idx];
    }
    return out;
}

}  // namespace nsk41
