#pragma once

#include <cmath>
#include <string>

#include "twinbarrier/errors.hpp"

namespace twinbarrier {

/// Particle constants and the geometry of the double rectangular barrier
///
///            V0 on (0, a)      V0 on (L, L+b)
///     ------+========+--------+==========+------>  x
///           0        a        L         L+b
///
/// Both barriers share the height V0.  The five regions (left lead, first
/// barrier, inter-barrier gap, second barrier, right lead) are non-degenerate
/// whenever a > 0, b > 0 and L > a.
struct PhysicalConfig {
    double m = 1.0;     ///< particle mass
    double hbar = 1.0;  ///< reduced Planck constant
    double V0 = 1.0;    ///< barrier height
    double a = 1.0;     ///< width of the first barrier
    double L = 2.0;     ///< left edge of the second barrier
    double b = 1.0;     ///< width of the second barrier

    /// k^2 + chi^2, constant for a fixed configuration.
    double w2() const { return 2.0 * m * V0 / (hbar * hbar); }

    /// Wavenumber at the barrier top; sub-barrier states have 0 < k < this.
    double barrier_top_wavenumber() const { return std::sqrt(w2()); }

    /// Width of the free region between the barriers.
    double gap() const { return L - a; }
};

inline void validate(const PhysicalConfig& c) {
    if (!(c.m > 0.0)) throw ValidationError("physical.m", "mass must be > 0");
    if (!(c.hbar > 0.0)) throw ValidationError("physical.hbar", "hbar must be > 0");
    if (!(c.V0 > 0.0)) throw ValidationError("physical.V0", "barrier height must be > 0");
    if (!(c.a > 0.0)) throw ValidationError("physical.a", "first barrier width must be > 0");
    if (!(c.b > 0.0)) throw ValidationError("physical.b", "second barrier width must be > 0");
    if (!(c.L > c.a))
        throw ValidationError("physical.L",
                              "second barrier must start right of the first (L > a)");
}

/// Per-momentum quantities entering every amplitude formula.
struct KinematicState {
    double k;    ///< wavenumber in the free regions
    double E;    ///< energy, hbar^2 k^2 / (2 m)
    double chi;  ///< decay constant inside a barrier
    double phi;  ///< arctan(chi / k), in (0, pi/2) below the barrier top
    double w2;   ///< k^2 + chi^2 == 2 m V0 / hbar^2
};

inline KinematicState kinematics_from_energy(double E, const PhysicalConfig& c) {
    validate(c);
    if (!(E > 0.0) || !(E < c.V0))
        throw EnergyOutOfRange("energy " + std::to_string(E) +
                               " outside the open interval (0, V0)");
    const double k = std::sqrt(2.0 * c.m * E) / c.hbar;
    const double chi = std::sqrt(2.0 * c.m * (c.V0 - E)) / c.hbar;
    return KinematicState{k, E, chi, std::atan2(chi, k), c.w2()};
}

inline KinematicState kinematics_from_wavenumber(double k, const PhysicalConfig& c) {
    validate(c);
    if (!(k > 0.0) || !(k < c.barrier_top_wavenumber()))
        throw WavenumberOutOfRange("wavenumber " + std::to_string(k) +
                                   " outside the open interval (0, sqrt(2 m V0)/hbar)");
    const double E = c.hbar * c.hbar * k * k / (2.0 * c.m);
    const double chi = std::sqrt(2.0 * c.m * (c.V0 - E)) / c.hbar;
    return KinematicState{k, E, chi, std::atan2(chi, k), c.w2()};
}

/// Magnitude of 2 dphi/dk.  Analytically |2 phi'(k)| = 2/chi because
/// k^2 + chi^2 is constant; phi'(k) itself is negative.
inline double hartman_delay_length(const KinematicState& s) { return 2.0 / s.chi; }

}  // namespace twinbarrier
