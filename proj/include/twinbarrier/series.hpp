#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "twinbarrier/errors.hpp"
#include "twinbarrier/kinematics.hpp"
#include "twinbarrier/scattering.hpp"

namespace twinbarrier {

namespace detail {

inline void require_term_index(int n) {
    if (n < 1) throw IndexError("term index must be >= 1, got " + std::to_string(n));
}

}  // namespace detail

/// Round-trip amplitude of one inter-barrier bounce; the transmitted wave is
/// prefactor * sum_n ratio^{n-1}.  |ratio| < 1 strictly for 0 < E < V0 and
/// 1 - ratio equals the denominator of the closed-form amplitudes.
inline Complex series_ratio(const KinematicState& s, const PhysicalConfig& c,
                            double chi_width_cap = kDefaultChiWidthCap) {
    return detail::amplitude_parts(s, c, chi_width_cap).ratio;
}

/// n-independent factor of the transmitted series; equals the closed-form
/// transmission with the multiple-scattering denominator removed.
inline Complex series_prefactor(const KinematicState& s, const PhysicalConfig& c,
                                double chi_width_cap = kDefaultChiWidthCap) {
    const auto p = detail::amplitude_parts(s, c, chi_width_cap);
    const Complex i2ck{0.0, 2.0 * s.chi * s.k / s.w2};
    return (i2ck * i2ck) * (4.0 * p.decay_ab) * std::polar(1.0, -s.k * (c.a + c.b)) /
           (p.sa_plus * p.sb_plus);
}

/// Amplitude of the wave that crossed the inter-barrier gap 2(n-1)+1 times.
inline Complex transmitted_series_term(const KinematicState& s, const PhysicalConfig& c,
                                       int n, double chi_width_cap = kDefaultChiWidthCap) {
    detail::require_term_index(n);
    const Complex r = series_ratio(s, c, chi_width_cap);
    Complex power{1.0};
    for (int i = 1; i < n; ++i) power *= r;
    return series_prefactor(s, c, chi_width_cap) * power;
}

/// Sum of the first N series terms, prefactor (1 - ratio^N) / (1 - ratio).
inline Complex transmitted_partial_sum(const KinematicState& s, const PhysicalConfig& c,
                                       int n_terms,
                                       double chi_width_cap = kDefaultChiWidthCap) {
    detail::require_term_index(n_terms);
    const auto p = detail::amplitude_parts(s, c, chi_width_cap);
    const Complex i2ck{0.0, 2.0 * s.chi * s.k / s.w2};
    const Complex prefactor = (i2ck * i2ck) * (4.0 * p.decay_ab) *
                              std::polar(1.0, -s.k * (c.a + c.b)) / (p.sa_plus * p.sb_plus);
    Complex power{1.0};
    for (int i = 0; i < n_terms; ++i) power *= p.ratio;
    return prefactor * (1.0 - power) / p.denom;
}

/// Ratio, prefactor, and the first n_terms term amplitudes in one bundle.
struct SeriesDecomposition {
    Complex ratio;
    Complex prefactor;
    std::vector<Complex> terms;
    int n_terms = 0;
};

inline SeriesDecomposition decompose_series(const KinematicState& s, const PhysicalConfig& c,
                                            int n_terms,
                                            double chi_width_cap = kDefaultChiWidthCap) {
    detail::require_term_index(n_terms);
    SeriesDecomposition d;
    d.ratio = series_ratio(s, c, chi_width_cap);
    d.prefactor = series_prefactor(s, c, chi_width_cap);
    d.n_terms = n_terms;
    d.terms.reserve(static_cast<std::size_t>(n_terms));
    Complex term = d.prefactor;
    for (int n = 1; n <= n_terms; ++n) {
        d.terms.push_back(term);
        term *= d.ratio;
    }
    return d;
}

/// Distance from the resonance condition: |sin(2 phi - k (L - a))| in [0, 1].
/// Zero at a resonance, where the opaque-limit amplitudes diverge.
inline double resonance_proximity(const KinematicState& s, const PhysicalConfig& c) {
    detail::require_matching_state(s, c);
    return std::abs(std::sin(2.0 * s.phi - s.k * (c.L - c.a)));
}

/// Opaque-limit (chi a, chi b >> 1) approximations of the four amplitudes.
/// Valid away from resonances; the shared 1/sin denominator diverges there.
inline ScatteringSolution opaque_amplitudes(const KinematicState& s, const PhysicalConfig& c) {
    detail::require_matching_state(s, c);
    const double delta = 2.0 * s.phi - s.k * (c.L - c.a);
    const double sin_delta = std::sin(delta);
    if (std::abs(sin_delta) < 1e-12)
        throw ResonanceSingularity("configuration sits on a resonance of the opaque limit");

    const double pref = 2.0 * s.chi * s.k / s.w2;
    const double decay_a = std::exp(-s.chi * c.a);
    const double decay_ab = std::exp(-s.chi * (c.a + c.b));

    ScatteringSolution sol;
    sol.a1r = std::polar(1.0, -2.0 * s.phi);
    sol.a1t = pref * decay_a * std::polar(1.0, -s.k * c.L) / sin_delta;
    sol.a1t_a2r = pref * decay_a * std::polar(1.0, s.k * c.L - 2.0 * s.phi) / sin_delta;
    sol.a1t_a2t = Complex{0.0, 8.0} * s.chi * s.chi * s.k * s.k / (s.w2 * s.w2) * decay_ab *
                  std::polar(1.0, -(s.k * (c.L + c.b) + 2.0 * s.phi)) / sin_delta;
    sol.denom = 1.0 - std::polar(1.0, 2.0 * s.k * (c.L - c.a) - 4.0 * s.phi);
    return sol;
}

/// Branch-continuous arctan[tan(2 phi) coth(chi_width)], i.e. the argument of
/// sinh(chi_width + 2 i phi).  Continuous in energy as 2 phi crosses pi/2,
/// unlike the principal arctan, so momentum derivatives stay meaningful; for
/// chi_width -> infinity it tends to 2 phi.
inline double barrier_phase_angle(double chi_width, double two_phi) {
    return std::atan2(std::sin(two_phi), std::cos(two_phi) * std::tanh(chi_width));
}

namespace detail {

/// d/dk of barrier_phase_angle at fixed width, via the log-derivative of the
/// scaled sinh.  Tends to -2/chi in the opaque limit.
inline double barrier_phase_angle_derivative(double width, const KinematicState& s) {
    const double x = s.chi * width;
    const Complex e2ip = std::polar(1.0, 2.0 * s.phi);
    const double e2x = std::exp(-2.0 * x);
    const Complex coth = (e2ip + e2x * std::conj(e2ip)) / (e2ip - e2x * std::conj(e2ip));
    return -(1.0 / s.chi) * std::imag((width * s.k + Complex{0.0, 2.0}) * coth);
}

}  // namespace detail

/// Total phase of the n-th transmitted series term multiplied by the plane
/// wave e^{i(kx - Et/hbar)}.  Continuous in k (no principal-branch jumps) and
/// equal mod 2 pi to arg(term_n e^{i(kx - Et/hbar)}).
inline double transmitted_phase(int n, double x, double t, const KinematicState& s,
                                const PhysicalConfig& c) {
    detail::require_term_index(n);
    detail::require_matching_state(s, c);
    const double theta_a = barrier_phase_angle(s.chi * c.a, 2.0 * s.phi);
    const double theta_b = barrier_phase_angle(s.chi * c.b, 2.0 * s.phi);
    const double phi1 = s.k * x - s.E * t / c.hbar - s.k * (c.a + c.b) - theta_a - theta_b +
                        std::numbers::pi;
    return phi1 + (n - 1) * (2.0 * s.k * (c.L - c.a) - theta_a - theta_b);
}

/// Opaque-limit phase: both barrier angles replaced by 2 phi.
inline double transmitted_phase_opaque(int n, double x, double t, const KinematicState& s,
                                       const PhysicalConfig& c) {
    detail::require_term_index(n);
    detail::require_matching_state(s, c);
    const double phi1 = s.k * x - s.E * t / c.hbar - s.k * (c.a + c.b) - 4.0 * s.phi +
                        std::numbers::pi;
    return phi1 + (n - 1) * (2.0 * s.k * (c.L - c.a) - 4.0 * s.phi);
}

/// Stationary-phase exit time of the n-th transmitted maximum at x = L + b:
/// t_n = (m / (hbar k)) [(2n-1)(L-a) + 2n tau0] with the delay length
/// tau0 = 2/chi evaluated at the effective wavenumber.
inline double spm_exit_time(int n, double k_tilde, const PhysicalConfig& c) {
    detail::require_term_index(n);
    const KinematicState st = kinematics_from_wavenumber(k_tilde, c);
    const double tau0 = hartman_delay_length(st);
    return c.m / (c.hbar * k_tilde) * ((2.0 * n - 1) * (c.L - c.a) + 2.0 * n * tau0);
}

/// Predicted spacing between consecutive exit times, (m/(hbar k))[2(L-a) + 2 tau0].
inline double exit_time_spacing(double k_tilde, const PhysicalConfig& c) {
    return spm_exit_time(2, k_tilde, c) - spm_exit_time(1, k_tilde, c);
}

enum class PhaseFormula { exact_phase, opaque_phase };

inline const char* to_string(PhaseFormula f) {
    return f == PhaseFormula::exact_phase ? "exact_phase" : "opaque_phase";
}

/// One predicted arrival at x = L + b together with the phase formula that
/// produced it.
struct ExitTimePrediction {
    int n;
    double k_tilde;
    double t_n;
    PhaseFormula phase_fn;
};

/// Stationary-phase arrival time from either phase formula.  The opaque
/// branch is the closed form above; the exact branch keeps the momentum
/// derivatives of both barrier angles, which matters when a barrier is thin.
inline ExitTimePrediction predict_exit_time(int n, double k_tilde, const PhysicalConfig& c,
                                            PhaseFormula formula = PhaseFormula::opaque_phase) {
    detail::require_term_index(n);
    if (formula == PhaseFormula::opaque_phase)
        return {n, k_tilde, spm_exit_time(n, k_tilde, c), formula};
    const KinematicState st = kinematics_from_wavenumber(k_tilde, c);
    const double dtheta = detail::barrier_phase_angle_derivative(c.a, st) +
                          detail::barrier_phase_angle_derivative(c.b, st);
    const double t = c.m / (c.hbar * k_tilde) * ((2.0 * n - 1) * (c.L - c.a) - n * dtheta);
    return {n, k_tilde, t, formula};
}

inline std::vector<ExitTimePrediction> predict_exit_times(
    int n_max, double k_tilde, const PhysicalConfig& c,
    PhaseFormula formula = PhaseFormula::opaque_phase) {
    detail::require_term_index(n_max);
    std::vector<ExitTimePrediction> out;
    out.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) out.push_back(predict_exit_time(n, k_tilde, c, formula));
    return out;
}

}  // namespace twinbarrier
