#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "twinbarrier/errors.hpp"
#include "twinbarrier/kinematics.hpp"

namespace twinbarrier {

using Complex = std::complex<double>;

/// Largest chi*a or chi*b accepted by the amplitude evaluators.  Beyond this
/// the transmitted amplitude drops under the double-precision floor even in
/// the rescaled form, so the evaluation refuses instead of silently flushing
/// to zero.
inline constexpr double kDefaultChiWidthCap = 350.0;

/// The four outgoing amplitudes of the stationary double-barrier solution,
/// stored in the convention of the five-region ansatz: region 3 carries
/// A1T (e^{ikx} + A2R e^{-ikx}), region 5 carries A1T A2T e^{ikx}.
struct ScatteringSolution {
    Complex a1r;      ///< reflection back into the left lead
    Complex a1t;      ///< forward amplitude in the inter-barrier gap
    Complex a1t_a2r;  ///< backward amplitude in the inter-barrier gap
    Complex a1t_a2t;  ///< total transmission into the right lead
    Complex denom;    ///< multiple-scattering denominator, 1 - (bounce ratio)
};

/// Evanescent coefficients of the two barrier interiors.  Region 2 reads
/// alpha1 e^{-chi x} + beta1 e^{chi x}; region 4 reads
/// A1T [alpha2 e^{-chi(x-L)} + beta2 e^{chi(x-L)}].
struct InteriorCoefficients {
    Complex alpha1, beta1;
    Complex alpha2, beta2;
};

namespace detail {

inline void require_matching_state(const KinematicState& s, const PhysicalConfig& c) {
    if (std::abs(s.w2 - c.w2()) > 1e-9 * c.w2())
        throw std::invalid_argument("kinematic state was derived from a different config");
}

/// Shared pieces of the closed-form amplitudes, written so that every stored
/// quantity stays inside double range for arbitrarily opaque barriers.  The
/// hyperbolic sines are carried as sinh(chi w + 2 i phi) = e^{chi w}/2 * s_w
/// with s_w = e^{2 i phi} - e^{-2 chi w} e^{-2 i phi}; only the bounded s_w
/// factors and the decaying exponentials appear below.
struct AmplitudeParts {
    double one_m_ea;   ///< 1 - e^{-2 chi a}
    double one_m_eb;   ///< 1 - e^{-2 chi b}
    double ea, eb;     ///< e^{-2 chi a}, e^{-2 chi b}
    double decay_a;    ///< e^{-chi a}
    double decay_ab;   ///< e^{-chi (a+b)}
    Complex sa_plus;   ///< scaled sinh(chi a + 2 i phi)
    Complex sb_plus;   ///< scaled sinh(chi b + 2 i phi)
    Complex sa_minus;  ///< scaled sinh(chi a - 2 i phi)
    Complex gap_phase; ///< e^{2 i k (L - a)}
    Complex ratio;     ///< bounce amplitude per inter-barrier round trip
    Complex denom;     ///< 1 - ratio
};

inline AmplitudeParts amplitude_parts(const KinematicState& s, const PhysicalConfig& c,
                                      double chi_width_cap) {
    require_matching_state(s, c);
    const double xa = s.chi * c.a;
    const double xb = s.chi * c.b;
    if (xa > chi_width_cap || xb > chi_width_cap)
        throw NumericalOverflow("chi*width " + std::to_string(std::max(xa, xb)) +
                                " exceeds the evaluation cap " +
                                std::to_string(chi_width_cap));

    AmplitudeParts p;
    p.ea = std::exp(-2.0 * xa);
    p.eb = std::exp(-2.0 * xb);
    p.one_m_ea = -std::expm1(-2.0 * xa);
    p.one_m_eb = -std::expm1(-2.0 * xb);
    p.decay_a = std::exp(-xa);
    p.decay_ab = std::exp(-(xa + xb));
    const Complex e2ip = std::polar(1.0, 2.0 * s.phi);
    const Complex e2ip_c = std::conj(e2ip);
    p.sa_plus = e2ip - p.ea * e2ip_c;
    p.sb_plus = e2ip - p.eb * e2ip_c;
    p.sa_minus = e2ip_c - p.ea * e2ip;
    p.gap_phase = std::polar(1.0, 2.0 * s.k * (c.L - c.a));
    p.ratio = p.one_m_ea * p.one_m_eb * p.gap_phase / (p.sa_plus * p.sb_plus);
    p.denom = 1.0 - p.ratio;
    return p;
}

}  // namespace detail

/// Closed-form outgoing amplitudes of the double barrier for 0 < E < V0.
inline ScatteringSolution exact_amplitudes(const KinematicState& s, const PhysicalConfig& c,
                                           double chi_width_cap = kDefaultChiWidthCap) {
    const auto p = detail::amplitude_parts(s, c, chi_width_cap);
    const Complex i2ck{0.0, 2.0 * s.chi * s.k / s.w2};

    ScatteringSolution sol;
    sol.denom = p.denom;
    sol.a1r = (p.one_m_ea * p.sb_plus - p.one_m_eb * p.sa_minus * p.gap_phase) /
              (p.sa_plus * p.sb_plus * p.denom);
    sol.a1t = i2ck * (2.0 * p.decay_a) * std::polar(1.0, -s.k * c.a) / (p.sa_plus * p.denom);
    sol.a1t_a2r = i2ck * (2.0 * p.decay_a * p.one_m_eb) *
                  std::polar(1.0, s.k * (2.0 * c.L - c.a)) /
                  (p.sa_plus * p.sb_plus * p.denom);
    sol.a1t_a2t = (i2ck * i2ck) * (4.0 * p.decay_ab) *
                  std::polar(1.0, -s.k * (c.a + c.b)) /
                  (p.sa_plus * p.sb_plus * p.denom);
    return sol;
}

namespace detail {

/// Solves [[m11 m12],[m21 m22]] v = r by Cramer's rule, refusing when the
/// matrix condition estimate exceeds cond_cap.
inline std::pair<Complex, Complex> solve_2x2(Complex m11, Complex m12, Complex m21,
                                             Complex m22, Complex r1, Complex r2,
                                             double cond_cap = 1e12) {
    const Complex det = m11 * m22 - m12 * m21;
    const double row_norm =
        std::max(std::abs(m11) + std::abs(m12), std::abs(m21) + std::abs(m22));
    const double adj_norm =
        std::max(std::abs(m22) + std::abs(m12), std::abs(m21) + std::abs(m11));
    if (!(std::abs(det) > 0.0) || row_norm * adj_norm / std::abs(det) > cond_cap)
        throw SingularMatching("interface matching system is ill-conditioned");
    return {(r1 * m22 - r2 * m12) / det, (m11 * r2 - m21 * r1) / det};
}

}  // namespace detail

/// Barrier-interior coefficients obtained from two local 2x2 matching solves:
/// the interface at L+b fixes (alpha2, beta2) from the region-5 wave, the
/// interface at a fixes (alpha1, beta1) from the region-3 wave.  The remaining
/// interfaces at L and 0 are then satisfied automatically and serve as checks.
inline InteriorCoefficients interior_coefficients(const KinematicState& s,
                                                  const PhysicalConfig& c,
                                                  const ScatteringSolution& sol) {
    detail::require_matching_state(s, c);
    const double chi = s.chi;
    const Complex ik{0.0, s.k};

    // Interface at x = L+b, unknowns scaled as u = alpha2 e^{-chi b},
    // v = beta2 e^{chi b} to keep the matching matrix well conditioned.
    const Complex a2t = sol.a1t_a2t / sol.a1t;
    const Complex rhs5 = a2t * std::polar(1.0, s.k * (c.L + c.b));
    auto [u2, v2] = detail::solve_2x2(1.0, 1.0, -chi, chi, rhs5, ik * rhs5);

    // Interface at x = a against the full region-3 wave.
    const Complex fwd = sol.a1t * std::polar(1.0, s.k * c.a);
    const Complex bwd = sol.a1t_a2r * std::polar(1.0, -s.k * c.a);
    auto [u1, v1] = detail::solve_2x2(1.0, 1.0, -chi, chi, fwd + bwd, ik * (fwd - bwd));

    InteriorCoefficients in;
    in.alpha2 = u2 * std::exp(chi * c.b);
    in.beta2 = v2 * std::exp(-chi * c.b);
    in.alpha1 = u1 * std::exp(chi * c.a);
    in.beta1 = v1 * std::exp(-chi * c.a);
    return in;
}

/// The five spatial regions of the double-barrier potential.
enum class Region { left, barrier1, gap, barrier2, right };

/// Region containing x; interface points belong to the region on their right.
inline Region region_of(double x, const PhysicalConfig& c) {
    if (x < 0.0) return Region::left;
    if (x < c.a) return Region::barrier1;
    if (x < c.L) return Region::gap;
    if (x < c.L + c.b) return Region::barrier2;
    return Region::right;
}

inline std::pair<double, double> region_bounds(Region r, const PhysicalConfig& c) {
    switch (r) {
        case Region::left: return {-std::numeric_limits<double>::infinity(), 0.0};
        case Region::barrier1: return {0.0, c.a};
        case Region::gap: return {c.a, c.L};
        case Region::barrier2: return {c.L, c.L + c.b};
        case Region::right: return {c.L + c.b, std::numeric_limits<double>::infinity()};
    }
    throw std::invalid_argument("unknown region");
}

/// Value of the stationary wavefunction using the closed form of the given
/// region, regardless of where x lies.  Lets callers compare the two one-sided
/// forms exactly at an interface point.
inline Complex stationary_wavefunction(Region r, double x, const KinematicState& s,
                                       const PhysicalConfig& c, const ScatteringSolution& sol,
                                       const InteriorCoefficients& in) {
    const double k = s.k;
    const double chi = s.chi;
    switch (r) {
        case Region::left:
            return std::polar(1.0, k * x) + sol.a1r * std::polar(1.0, -k * x);
        case Region::barrier1:
            return in.alpha1 * std::exp(-chi * x) + in.beta1 * std::exp(chi * x);
        case Region::gap:
            return sol.a1t * std::polar(1.0, k * x) + sol.a1t_a2r * std::polar(1.0, -k * x);
        case Region::barrier2:
            return sol.a1t * (in.alpha2 * std::exp(-chi * (x - c.L)) +
                              in.beta2 * std::exp(chi * (x - c.L)));
        case Region::right:
            return sol.a1t_a2t * std::polar(1.0, k * x);
    }
    throw std::invalid_argument("unknown region");
}

/// Piecewise stationary wavefunction Psi(k, x) for any real x.
inline Complex stationary_wavefunction(double x, const KinematicState& s,
                                       const PhysicalConfig& c, const ScatteringSolution& sol,
                                       const InteriorCoefficients& in) {
    return stationary_wavefunction(region_of(x, c), x, s, c, sol, in);
}

/// Spatial derivative of the region form, same conventions as above.
inline Complex stationary_wavefunction_derivative(Region r, double x, const KinematicState& s,
                                                  const PhysicalConfig& c,
                                                  const ScatteringSolution& sol,
                                                  const InteriorCoefficients& in) {
    const double k = s.k;
    const double chi = s.chi;
    const Complex ik{0.0, k};
    switch (r) {
        case Region::left:
            return ik * (std::polar(1.0, k * x) - sol.a1r * std::polar(1.0, -k * x));
        case Region::barrier1:
            return chi * (in.beta1 * std::exp(chi * x) - in.alpha1 * std::exp(-chi * x));
        case Region::gap:
            return ik * (sol.a1t * std::polar(1.0, k * x) -
                         sol.a1t_a2r * std::polar(1.0, -k * x));
        case Region::barrier2:
            return sol.a1t * chi * (in.beta2 * std::exp(chi * (x - c.L)) -
                                    in.alpha2 * std::exp(-chi * (x - c.L)));
        case Region::right:
            return ik * sol.a1t_a2t * std::polar(1.0, k * x);
    }
    throw std::invalid_argument("unknown region");
}

inline Complex stationary_wavefunction_derivative(double x, const KinematicState& s,
                                                  const PhysicalConfig& c,
                                                  const ScatteringSolution& sol,
                                                  const InteriorCoefficients& in) {
    return stationary_wavefunction_derivative(region_of(x, c), x, s, c, sol, in);
}

}  // namespace twinbarrier
