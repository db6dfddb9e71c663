#ifndef OSMOTIC_PARAMS_HPP
#define OSMOTIC_PARAMS_HPP

#include <cmath>
#include <stdexcept>

namespace osmotic {

/// Unit system of the problem: hbar, particle mass and the reference
/// oscillator frequency omega0.  The length scale l = sqrt(hbar/(m*omega0))
/// is always derived, never stored.
struct PhysicalParams {
    double hbar = 1.0;
    double mass = 1.0;
    double omega0 = 1.0;

    PhysicalParams() = default;
    PhysicalParams(double hbar_, double mass_, double omega0_)
        : hbar(hbar_), mass(mass_), omega0(omega0_) {
        if (!(hbar > 0.0) || !(mass > 0.0) || !(omega0 > 0.0))
            throw std::invalid_argument("PhysicalParams: hbar, mass, omega0 must be positive");
    }

    double length_scale() const { return std::sqrt(hbar / (mass * omega0)); }
};

}  // namespace osmotic

#endif
