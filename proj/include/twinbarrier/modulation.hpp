#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "twinbarrier/errors.hpp"
#include "twinbarrier/kinematics.hpp"

namespace twinbarrier {

enum class ModulationShape { gaussian, raised_cosine };

/// Momentum-space envelope g(k) of the incoming packet: peaked at k0,
/// truncated to the strictly sub-barrier window [k_min, k_max], and
/// normalized so that the integral of |g|^2 over the window is one.
struct ModulationSpec {
    double k0 = 0.0;     ///< envelope center
    double sigma = 0.0;  ///< width of the |g|^2 momentum density (gaussian shape)
    double k_min = 0.0;  ///< lower truncation edge
    double k_max = 0.0;  ///< upper truncation edge, below the barrier top
    ModulationShape shape = ModulationShape::gaussian;
};

/// Margin keeping the truncation window strictly below the barrier top.
inline constexpr double kBarrierTopMargin = 1e-6;

inline void validate(const ModulationSpec& s, const PhysicalConfig& c) {
    validate(c);
    if (!(s.sigma > 0.0)) throw ValidationError("modulation.sigma", "width must be > 0");
    if (!(s.k_min > 0.0)) throw ValidationError("modulation.k_min", "must be > 0");
    if (!(s.k0 > s.k_min)) throw ValidationError("modulation.k0", "must exceed k_min");
    if (!(s.k_max > s.k0)) throw ValidationError("modulation.k_max", "must exceed k0");
    const double top = (1.0 - kBarrierTopMargin) * c.barrier_top_wavenumber();
    if (!(s.k_max <= top))
        throw ValidationError("modulation.k_max",
                              "window must stay strictly below the barrier top");
}

/// Real non-negative envelope value at k, zero outside [k_min, k_max].
inline double modulation_amplitude(double k, const ModulationSpec& s) {
    if (k < s.k_min || k > s.k_max) return 0.0;
    if (s.shape == ModulationShape::gaussian) {
        const double u_max = (s.k_max - s.k0) / (std::numbers::sqrt2 * s.sigma);
        const double u_min = (s.k_min - s.k0) / (std::numbers::sqrt2 * s.sigma);
        const double weight =
            s.sigma * std::sqrt(std::numbers::pi / 2.0) * (std::erf(u_max) - std::erf(u_min));
        if (!(weight > 0.0))
            throw ValidationError("modulation.sigma", "truncation window carries no weight");
        const double d = (k - s.k0) / s.sigma;
        return std::exp(-d * d / 4.0) / std::sqrt(weight);
    }
    // Raised cosine: one smooth lobe per side of k0, vanishing at the window
    // edges; the side half-widths come from the window itself.
    const double half = (k < s.k0) ? (s.k0 - s.k_min) : (s.k_max - s.k0);
    const double u = (k - s.k0) / half;
    const double lobe = std::cos(0.5 * std::numbers::pi * u);
    const double weight = 3.0 / 8.0 * ((s.k0 - s.k_min) + (s.k_max - s.k0));
    return lobe * lobe / std::sqrt(weight);
}

/// Default launch center x0 < 0, four position-space RMS widths to the left
/// of the first barrier (sigma_x = 1/(2 sigma) for the gaussian envelope).
inline double default_launch_offset(const ModulationSpec& s) { return -2.0 / s.sigma; }

}  // namespace twinbarrier
