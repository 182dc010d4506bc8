#pragma once

#include <cmath>
#include <string>

#include "nsk41/error.hpp"

namespace nsk41 {

/// Physical parameters of the forced, damped problem.
struct PhysicalParams {
    double nu = 1.0;     // kinematic viscosity
    double alpha = 1.0;  // damping rate; 0 selects the classical equations
    double ell0 = 1.0;   // injection scale
    double L = 1.0;      // characteristic length, L >= ell0
    double F = 1.0;      // force amplitude
    double rho1 = 1.0;   // annulus bounds in units of 1/ell0
    double rho2 = 2.0;

    void validate() const {
        auto finite = [](double v, const char* name) {
            if (!std::isfinite(v)) throw ConfigError(std::string("params.") + name + " must be finite");
        };
        finite(nu, "nu");
        finite(alpha, "alpha");
        finite(ell0, "ell0");
        finite(L, "L");
        finite(F, "F");
        finite(rho1, "rho1");
        finite(rho2, "rho2");
        if (!(nu > 0.0)) throw ConfigError("params.nu must be > 0");
        if (!(alpha >= 0.0)) throw ConfigError("params.alpha must be >= 0");
        if (!(ell0 > 0.0)) throw ConfigError("params.ell0 must be > 0");
        if (!(L >= ell0)) throw ConfigError("params.L must satisfy L >= ell0");
        if (!(F >= 0.0)) throw ConfigError("params.F must be >= 0");
        if (!(rho1 > 0.0)) throw ConfigError("params.rho1 must be > 0");
        if (!(rho1 < rho2)) throw ConfigError("params.rho1 must be < params.rho2");
    }

    bool damped() const { return alpha > 0.0; }
};

}  // namespace nsk41
