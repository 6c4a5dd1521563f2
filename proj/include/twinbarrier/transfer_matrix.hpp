#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "twinbarrier/errors.hpp"
#include "twinbarrier/kinematics.hpp"
#include "twinbarrier/scattering.hpp"

namespace twinbarrier {
namespace detail {

/// 2x2 complex matrix with an accumulated log scale, so products of interface
/// and propagation matrices never overflow in the opaque regime.
struct ScaledMatrix {
    Complex m11{1.0}, m12{0.0}, m21{0.0}, m22{1.0};
    double log_scale = 0.0;

    void rescale() {
        const double big = std::max(std::max(std::abs(m11), std::abs(m12)),
                                    std::max(std::abs(m21), std::abs(m22)));
        if (big > 1e100) {
            m11 /= big;
            m12 /= big;
            m21 /= big;
            m22 /= big;
            log_scale += std::log(big);
        }
    }
};

/// Step matrix carrying region-j coefficients (referenced at the region's own
/// left edge; region 0 at the first interface) across interface j|j+1:
/// (A_{j+1}; B_{j+1}) = S (A_j; B_j), with theta = q_j d_j the phase
/// accumulated over region j and r = q_j / q_{j+1}.
struct StepMatrix {
    Complex s11, s12, s21, s22;
    Complex det;  // equals q_j / q_{j+1} exactly
};

inline StepMatrix interface_step(Complex q_from, Complex q_to, Complex theta) {
    const Complex r = q_from / q_to;
    const Complex up = std::exp(Complex{0.0, 1.0} * theta);
    const Complex dn = std::exp(Complex{0.0, -1.0} * theta);
    StepMatrix s;
    s.s11 = 0.5 * (1.0 + r) * up;
    s.s12 = 0.5 * (1.0 - r) * dn;
    s.s21 = 0.5 * (1.0 - r) * up;
    s.s22 = 0.5 * (1.0 + r) * dn;
    s.det = r;
    return s;
}

/// Scattering state of a piecewise-constant potential, unit wave incident
/// from the left.  Coefficients are stored per region in the local convention
/// Psi_j = A_j e^{i q_j (x - x_j)} + B_j e^{-i q_j (x - x_j)} where x_j is the
/// region's left edge (the first interface for region 0).
struct PiecewiseScattering {
    Complex reflection;    ///< B_0, referenced at the first interface
    Complex transmission;  ///< A_{N-1}, referenced at the last interface
    std::vector<Complex> coeff_a, coeff_b;
};

/// Transfer-matrix solve for N = potentials.size() regions separated by the
/// N-1 interfaces in `edges`.  The total matrix is accumulated with rescaled
/// entries and its determinant is replaced by the exact telescoping value
/// q_0 / q_{N-1}, which keeps the transmitted amplitude accurate far below
/// the scale of the matrix entries.  Interior coefficients are recovered
/// forward from the left lead and by back-substitution from the right lead,
/// never across more than the adjacent growing exponential.
inline PiecewiseScattering solve_piecewise(double E, const std::vector<double>& edges,
                                           const std::vector<double>& potentials,
                                           double m, double hbar) {
    const std::size_t n_regions = potentials.size();
    if (n_regions < 2 || edges.size() != n_regions - 1)
        throw std::invalid_argument("segment/interface counts do not match");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1]))
            throw std::invalid_argument("interface positions must be increasing");

    std::vector<Complex> q(n_regions);
    for (std::size_t j = 0; j < n_regions; ++j) {
        q[j] = std::sqrt(Complex{2.0 * m * (E - potentials[j]), 0.0}) / hbar;
        if (std::abs(q[j]) == 0.0)
            throw std::invalid_argument("energy coincides with a segment potential");
    }

    std::vector<StepMatrix> steps(n_regions - 1);
    for (std::size_t j = 0; j + 1 < n_regions; ++j) {
        const Complex theta = (j == 0) ? Complex{0.0, 0.0}
                                       : q[j] * (edges[j] - edges[j - 1]);
        steps[j] = interface_step(q[j], q[j + 1], theta);
    }

    ScaledMatrix total;
    for (const auto& s : steps) {
        const Complex t11 = s.s11 * total.m11 + s.s12 * total.m21;
        const Complex t12 = s.s11 * total.m12 + s.s12 * total.m22;
        const Complex t21 = s.s21 * total.m11 + s.s22 * total.m21;
        const Complex t22 = s.s21 * total.m12 + s.s22 * total.m22;
        total.m11 = t11;
        total.m12 = t12;
        total.m21 = t21;
        total.m22 = t22;
        total.rescale();
    }

    PiecewiseScattering out;
    out.reflection = -total.m21 / total.m22;
    // A_{N-1} = det(M) / M22 with det(M) = q_0 / q_{N-1} exactly.
    out.transmission = (q.front() / q.back()) * std::exp(-total.log_scale) / total.m22;

    out.coeff_a.assign(n_regions, Complex{0.0});
    out.coeff_b.assign(n_regions, Complex{0.0});
    out.coeff_a.front() = 1.0;
    out.coeff_b.front() = out.reflection;
    out.coeff_a.back() = out.transmission;
    out.coeff_b.back() = 0.0;

    // Interior coefficients by back-substitution from the transmitted
    // boundary (A, 0), applying each step's adjugate over its exact
    // determinant.  Walking right-to-left follows the component that grows
    // toward the source, which is the numerically stable direction; the
    // forward recursion would amplify the reflection's rounding error by the
    // barrier opacity.
    for (std::size_t j = n_regions - 2; j >= 1; --j) {
        const auto& s = steps[j];
        out.coeff_a[j] = (s.s22 * out.coeff_a[j + 1] - s.s12 * out.coeff_b[j + 1]) / s.det;
        out.coeff_b[j] = (-s.s21 * out.coeff_a[j + 1] + s.s11 * out.coeff_b[j + 1]) / s.det;
    }
    return out;
}

}  // namespace detail

/// Independent cross-check of exact_amplitudes built from transfer matrices
/// over the five regions.  The multiple-scattering denominator is assembled
/// from the single-barrier reflections of each barrier alone together with
/// the free gap phase, without touching the closed-form algebra.
inline ScatteringSolution transfer_matrix_amplitudes(const KinematicState& s,
                                                     const PhysicalConfig& c,
                                                     double chi_width_cap = kDefaultChiWidthCap) {
    detail::require_matching_state(s, c);
    const double xa = s.chi * c.a;
    const double xb = s.chi * c.b;
    if (xa > chi_width_cap || xb > chi_width_cap)
        throw NumericalOverflow("chi*width exceeds the evaluation cap");

    const std::vector<double> edges{0.0, c.a, c.L, c.L + c.b};
    const std::vector<double> pots{0.0, c.V0, 0.0, c.V0, 0.0};
    const auto piecewise = detail::solve_piecewise(s.E, edges, pots, c.m, c.hbar);

    ScatteringSolution sol;
    sol.a1r = piecewise.reflection;
    // Gap coefficients are referenced at x = a; restore the global-origin
    // phase convention of the five-region ansatz.
    sol.a1t = piecewise.coeff_a[2] * std::polar(1.0, -s.k * c.a);
    sol.a1t_a2r = piecewise.coeff_b[2] * std::polar(1.0, s.k * c.a);
    sol.a1t_a2t = piecewise.transmission * std::polar(1.0, -s.k * (c.L + c.b));

    const auto barrier_reflection = [&](double width) {
        const std::vector<double> e{0.0, width};
        const std::vector<double> v{0.0, c.V0, 0.0};
        return detail::solve_piecewise(s.E, e, v, c.m, c.hbar).reflection;
    };
    sol.denom = 1.0 - barrier_reflection(c.a) * barrier_reflection(c.b) *
                          std::polar(1.0, 2.0 * s.k * (c.L - c.a));
    return sol;
}

}  // namespace twinbarrier
