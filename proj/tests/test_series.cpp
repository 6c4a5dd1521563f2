#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "twinbarrier/kinematics.hpp"
#include "twinbarrier/scattering.hpp"
#include "twinbarrier/series.hpp"

using namespace twinbarrier;

namespace {

/// m = hbar = 1, V0 = 2, E = 1: the symmetric point k = chi = 1, phi = pi/4.
PhysicalConfig symmetric_config(double a, double b, double gap) {
    PhysicalConfig c;
    c.V0 = 2.0;
    c.a = a;
    c.b = b;
    c.L = a + gap;
    return c;
}

KinematicState symmetric_state(const PhysicalConfig& c) {
    return kinematics_from_energy(1.0, c);
}

double wrap_angle(double x) {
    x = std::fmod(x, 2.0 * std::numbers::pi);
    if (x > std::numbers::pi) x -= 2.0 * std::numbers::pi;
    if (x < -std::numbers::pi) x += 2.0 * std::numbers::pi;
    return x;
}

}  // namespace

TEST_CASE("one minus the bounce ratio reproduces the closed-form denominator") {
    for (double gap : {0.7, 3.0, 11.0}) {
        const auto c = symmetric_config(1.3, 0.4, gap);
        const auto s = symmetric_state(c);
        const Complex r = series_ratio(s, c);
        const Complex d = exact_amplitudes(s, c).denom;
        CHECK(std::abs(1.0 - r - d) <= 1e-12);
        CHECK(std::abs(r) < 1.0);
    }
}

TEST_CASE("bounce ratio modulus stays below one across the sub-barrier window") {
    const auto c = symmetric_config(2.0, 1.0, 4.0);
    const double top = c.barrier_top_wavenumber();
    for (int i = 1; i <= 200; ++i) {
        const double k = top * i / 201.0;
        const auto s = kinematics_from_wavenumber(k, c);
        CHECK(std::abs(series_ratio(s, c)) < 1.0);
    }
}

TEST_CASE("at E = V0/2 the ratio modulus is tanh(chi a) tanh(chi b)") {
    for (auto [wa, wb] : std::vector<std::pair<double, double>>{{0.7, 1.9}, {5.0, 5.0}}) {
        // Scale the widths so that chi*a and chi*b hit wa and wb exactly.
        auto c = symmetric_config(1.0, 1.0, 2.2);
        const double chi = symmetric_state(c).chi;  // sqrt(2) here
        c = symmetric_config(wa / chi, wb / chi, 2.2);
        const auto s = symmetric_state(c);
        const double expected = std::tanh(wa) * std::tanh(wb);
        CHECK(std::abs(series_ratio(s, c)) == doctest::Approx(expected).epsilon(1e-12));
    }
    // chi a = chi b = 5: tanh(5)^2 = 0.999818..., still strictly below one.
    auto c = symmetric_config(1.0, 1.0, 2.2);
    const double chi = symmetric_state(c).chi;
    c = symmetric_config(5.0 / chi, 5.0 / chi, 2.2);
    const auto s = symmetric_state(c);
    CHECK(std::abs(series_ratio(s, c)) == doctest::Approx(0.9998184).epsilon(1e-6));
    CHECK(std::abs(series_ratio(s, c)) < 1.0);
}

TEST_CASE("a vanishing first barrier kills the re-scattering") {
    const auto c = symmetric_config(1e-14, 1.0, 2.0);
    const auto s = symmetric_state(c);
    CHECK(std::abs(series_ratio(s, c)) <= 1e-13);
    // With no bounces the one-term sum is already the closed form.
    const Complex exact = exact_amplitudes(s, c).a1t_a2t;
    CHECK(std::abs(transmitted_partial_sum(s, c, 1) - exact) <= 1e-12 * std::abs(exact));
}

TEST_CASE("first term equals the closed form with the denominator removed") {
    const auto c = symmetric_config(1.0, 1.0, 2.0);
    const auto s = symmetric_state(c);
    const auto sol = exact_amplitudes(s, c);
    const Complex term1 = transmitted_series_term(s, c, 1);
    CHECK(std::abs(term1 - sol.a1t_a2t * sol.denom) <= 1e-12 * std::abs(term1));
}

TEST_CASE("consecutive terms are related by the bounce ratio") {
    const auto c = symmetric_config(0.8, 1.7, 3.1);
    const auto s = symmetric_state(c);
    const Complex r = series_ratio(s, c);
    const auto d = decompose_series(s, c, 12);
    for (int n = 1; n < 12; ++n) {
        const Complex lhs = d.terms[static_cast<std::size_t>(n)];
        const Complex rhs = d.terms[static_cast<std::size_t>(n - 1)] * r;
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
        CHECK(std::abs(transmitted_series_term(s, c, n + 1) - lhs) <= 1e-12 * std::abs(lhs));
    }
    CHECK_THROWS_AS(transmitted_series_term(s, c, 0), IndexError);
    CHECK_THROWS_AS(transmitted_partial_sum(s, c, -3), IndexError);
    CHECK_THROWS_AS(decompose_series(s, c, 0), IndexError);
}

TEST_CASE("fifty terms reach the closed form when the ratio is moderate") {
    const auto c = symmetric_config(0.7, 0.7, 2.0);  // |ratio| = tanh(0.7)^2 ~ 0.36
    const auto s = symmetric_state(c);
    CHECK(std::abs(series_ratio(s, c)) < 0.6);
    const Complex exact = exact_amplitudes(s, c).a1t_a2t;
    const Complex sum = transmitted_partial_sum(s, c, 50);
    CHECK(std::abs(sum - exact) <= 1e-10 * std::abs(exact));
}

TEST_CASE("partial sums obey the geometric tail bound") {
    for (auto [wa, wb] : std::vector<std::pair<double, double>>{{0.7, 0.7}, {1.5, 2.5}}) {
        const auto c = symmetric_config(wa, wb, 4.5);
        const auto s = symmetric_state(c);
        const Complex exact = exact_amplitudes(s, c).a1t_a2t;
        const double r = std::abs(series_ratio(s, c));
        const double pref = std::abs(series_prefactor(s, c));
        double bound_n = pref * r / (1.0 - r);
        for (int n = 1; n <= 40; ++n) {
            if (bound_n < 1e-12 * std::abs(exact)) break;  // below rounding floor
            const double err = std::abs(transmitted_partial_sum(s, c, n) - exact);
            CHECK(err <= bound_n * (1.0 + 1e-9));
            bound_n *= r;
        }
    }
}

TEST_CASE("opaque approximation tracks the closed form away from resonance") {
    const auto c = symmetric_config(5.0, 5.0, 1.0);
    const auto s = symmetric_state(c);
    CHECK(resonance_proximity(s, c) > 0.1);
    const auto exact = exact_amplitudes(s, c);
    const auto opaque = opaque_amplitudes(s, c);
    const double dev = std::abs(std::abs(opaque.a1t_a2t) - std::abs(exact.a1t_a2t)) /
                       std::abs(exact.a1t_a2t);
    CHECK(dev <= 1e-3);
}

TEST_CASE("reflection magnitude saturates at one for very opaque barriers") {
    const auto c = symmetric_config(10.0, 10.0, 2.0);
    const auto s = symmetric_state(c);
    const auto exact = exact_amplitudes(s, c);
    CHECK(std::abs(std::abs(exact.a1r) - 1.0) <= 1e-8);
    CHECK(std::abs(std::abs(opaque_amplitudes(s, c).a1r) - 1.0) <= 1e-15);
}

TEST_CASE("the opaque form refuses the resonance set") {
    // 2 phi = pi/2 and k = sqrt(2) here; a gap of (pi/2)/k makes
    // sin(2 phi - k (L-a)) vanish exactly.
    const double gap = std::numbers::pi / (2.0 * std::numbers::sqrt2);
    const auto c = symmetric_config(3.0, 3.0, gap);
    const auto s = symmetric_state(c);
    CHECK(resonance_proximity(s, c) <= 1e-12);
    CHECK_THROWS_AS(opaque_amplitudes(s, c), ResonanceSingularity);
}

TEST_CASE("resonance proximity endpoints") {
    // 2 phi = k (L-a): proximity 0.
    const auto c0 =
        symmetric_config(1.0, 1.0, std::numbers::pi / (2.0 * std::numbers::sqrt2));
    CHECK(resonance_proximity(symmetric_state(c0), c0) <= 1e-12);
    // 2 phi - k (L-a) = -pi/2: proximity 1.
    const auto c1 = symmetric_config(1.0, 1.0, std::numbers::pi / std::numbers::sqrt2);
    CHECK(resonance_proximity(symmetric_state(c1), c1) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transmission peaks where the proximity vanishes") {
    // Opaque enough that the resonance condition of the approximate form
    // pins the true transmission maximum to within a grid step.
    PhysicalConfig c;
    c.V0 = 1.0;
    c.a = 2.65;
    c.b = 2.65;
    c.L = c.a + 9.0;
    // delta(k) = 2 phi - k (L-a) falls monotonically; bisect it to a zero of
    // sin(delta) modulo pi, then look at the transmission around it.
    const double top = c.barrier_top_wavenumber();
    auto delta = [&](double k) {
        const auto s = kinematics_from_wavenumber(k, c);
        return std::remainder(2.0 * s.phi - s.k * c.gap(), std::numbers::pi);
    };
    double k_res = 0.0;
    const int n_scan = 2000;
    for (int i = n_scan / 2; i + 1 < n_scan && k_res == 0.0; ++i) {
        const double k1 = top * i / n_scan;
        const double k2 = top * (i + 1) / n_scan;
        const double d1 = delta(k1), d2 = delta(k2);
        if (d1 * d2 < 0.0 && std::abs(d1 - d2) < 1.0) {
            double lo = k1, hi = k2;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                (delta(mid) * d1 > 0.0 ? lo : hi) = mid;
            }
            k_res = 0.5 * (lo + hi);
        }
    }
    REQUIRE(k_res > 0.0);
    const auto sr = kinematics_from_wavenumber(k_res, c);
    CHECK(resonance_proximity(sr, c) <= 1e-9);

    // The transmission maximum on a fine grid sits within one step of the
    // proximity zero.
    const double dk = top / n_scan;
    auto t2 = [&](double k) {
        const auto s = kinematics_from_wavenumber(k, c);
        return std::norm(exact_amplitudes(s, c).a1t_a2t);
    };
    double best_k = k_res - 20.0 * dk;
    double best = t2(best_k);
    for (int i = -20; i <= 20; ++i) {
        const double k = k_res + i * dk;
        const double v = t2(k);
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    CHECK(std::abs(best_k - k_res) <= 1.5 * dk);
}

TEST_CASE("term phase formula matches the amplitude argument") {
    const auto c = symmetric_config(1.1, 2.3, 4.0);
    const auto s = symmetric_state(c);
    for (int n : {1, 2, 5}) {
        const Complex term = transmitted_series_term(s, c, n);
        for (auto [x, t] : std::vector<std::pair<double, double>>{
                 {c.L + c.b, 0.0}, {c.L + c.b + 7.0, 3.0}, {40.0, 21.5}}) {
            const Complex z = term * std::polar(1.0, s.k * x - s.E * t / c.hbar);
            const double predicted = transmitted_phase(n, x, t, s, c);
            CHECK(std::abs(wrap_angle(predicted - std::arg(z))) <= 1e-10);
        }
    }
    CHECK_THROWS_AS(transmitted_phase(0, 0.0, 0.0, s, c), IndexError);
}

TEST_CASE("phase stays branch-continuous across 2 phi = pi/2") {
    // Sweep E through V0/2, where tan(2 phi) flips sign; the barrier angle
    // and hence the phase must not jump.
    const auto c = symmetric_config(1.0, 1.0, 3.0);
    double prev = 0.0;
    bool first = true;
    for (int i = -50; i <= 50; ++i) {
        const double E = 1.0 + i * 1e-4;
        const auto s = kinematics_from_energy(E, c);
        const double p = transmitted_phase(1, c.L + c.b, 0.0, s, c);
        if (!first) CHECK(std::abs(p - prev) < 0.05);
        prev = p;
        first = false;
    }
}

TEST_CASE("phase increments are independent of position, time, and order") {
    const auto c = symmetric_config(0.9, 1.6, 5.0);
    const auto s = symmetric_state(c);
    const double base = transmitted_phase(2, 10.0, 1.0, s, c) -
                        transmitted_phase(1, 10.0, 1.0, s, c);
    for (auto [x, t] : std::vector<std::pair<double, double>>{{-3.0, 0.4}, {25.0, 9.0}}) {
        for (int n = 1; n <= 6; ++n) {
            const double inc = transmitted_phase(n + 1, x, t, s, c) -
                               transmitted_phase(n, x, t, s, c);
            CHECK(inc == doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("exact and opaque phases coincide for very opaque barriers") {
    const auto c = symmetric_config(8.2, 8.2, 3.0);
    const auto s = symmetric_state(c);
    for (int n : {1, 2}) {
        const double exact = transmitted_phase(n, c.L + c.b, 2.0, s, c);
        const double approx = transmitted_phase_opaque(n, c.L + c.b, 2.0, s, c);
        CHECK(std::abs(exact - approx) <= 1e-6);
    }
}

TEST_CASE("stationarity of the opaque phase recovers the exit times") {
    const auto c = symmetric_config(6.0, 6.0, 8.0);
    const auto s = symmetric_state(c);
    const double x = c.L + c.b;
    const double h = 1e-5 * s.k;
    for (int n : {1, 2, 3}) {
        auto dphi_dk = [&](double t) {
            const auto sp = kinematics_from_wavenumber(s.k + h, c);
            const auto sm = kinematics_from_wavenumber(s.k - h, c);
            return (transmitted_phase_opaque(n, x, t, sp, c) -
                    transmitted_phase_opaque(n, x, t, sm, c)) /
                   (2.0 * h);
        };
        // The derivative is affine in t; solve for its root directly.
        const double d0 = dphi_dk(0.0);
        const double d1 = dphi_dk(1.0);
        const double t_star = -d0 / (d1 - d0);
        CHECK(t_star == doctest::Approx(spm_exit_time(n, s.k, c)).epsilon(1e-6));
    }
}

TEST_CASE("exit time table from the direct substitution") {
    // m = hbar = 1, V0 = 1 gives chi = 1 at k = 1; L - a = 10, tau0 = 2.
    PhysicalConfig c;
    c.V0 = 1.0;
    c.a = 1.0;
    c.L = 11.0;
    c.b = 1.0;
    const double k = 1.0;
    CHECK(spm_exit_time(1, k, c) == doctest::Approx(14.0).epsilon(1e-12));
    CHECK(spm_exit_time(2, k, c) == doctest::Approx(38.0).epsilon(1e-12));
    CHECK(exit_time_spacing(k, c) == doctest::Approx(24.0).epsilon(1e-12));
    CHECK_THROWS_AS(spm_exit_time(0, k, c), IndexError);
    CHECK_THROWS_AS(spm_exit_time(1, 5.0, c), WavenumberOutOfRange);

    const auto preds = predict_exit_times(4, k, c);
    for (std::size_t i = 0; i + 1 < preds.size(); ++i) {
        CHECK(preds[i + 1].t_n - preds[i].t_n == doctest::Approx(24.0).epsilon(1e-12));
        CHECK(preds[i + 1].t_n > preds[i].t_n);
    }
}

TEST_CASE("exact-phase predictions converge to the opaque ones") {
    const auto c = symmetric_config(9.0, 9.0, 6.0);
    const auto s = symmetric_state(c);
    for (int n : {1, 2}) {
        const auto exact = predict_exit_time(n, s.k, c, PhaseFormula::exact_phase);
        const auto opaque = predict_exit_time(n, s.k, c, PhaseFormula::opaque_phase);
        CHECK(exact.t_n == doctest::Approx(opaque.t_n).epsilon(1e-6));
    }
    // A thin first barrier keeps almost none of its share of the delay.
    const auto thin = symmetric_config(0.05, 6.0, 6.0);
    const auto st = symmetric_state(thin);
    const auto exact = predict_exit_time(1, st.k, thin, PhaseFormula::exact_phase);
    const auto opaque = predict_exit_time(1, st.k, thin, PhaseFormula::opaque_phase);
    CHECK(exact.t_n < opaque.t_n);
}

TEST_CASE("series identities hold over random configurations") {
    std::mt19937 rng(4242u);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 60; ++i) {
        PhysicalConfig c;
        c.V0 = 0.5 + 4.0 * u(rng);
        const double e_frac = 0.05 + 0.9 * u(rng);
        const auto probe = kinematics_from_energy(e_frac * c.V0, c);
        c.a = (0.1 + 4.0 * u(rng)) / probe.chi;
        c.b = (0.1 + 4.0 * u(rng)) / probe.chi;
        c.L = c.a + 0.5 + 12.0 * u(rng);
        const auto s = kinematics_from_energy(e_frac * c.V0, c);

        const auto sol = exact_amplitudes(s, c);
        const Complex r = series_ratio(s, c);
        CHECK(std::abs(r) < 1.0);
        CHECK(std::abs(1.0 - r - sol.denom) <= 1e-12);
        CHECK(std::abs(series_prefactor(s, c) - sol.a1t_a2t * sol.denom) <=
              1e-12 * std::abs(sol.a1t_a2t * sol.denom));

        // One random partial sum against its tail bound.
        const int n = 1 + static_cast<int>(u(rng) * 20.0);
        const double bound = std::abs(series_prefactor(s, c)) * std::pow(std::abs(r), n) /
                             (1.0 - std::abs(r));
        const double err = std::abs(transmitted_partial_sum(s, c, n) - sol.a1t_a2t);
        CHECK(err <= bound * (1.0 + 1e-9) + 1e-14 * std::abs(sol.a1t_a2t));
    }
}

TEST_CASE("opaque deviation shrinks on average as the barriers thicken") {
    PhysicalConfig base;
    base.V0 = 2.0;
    const double k_ref = 0.45 * base.barrier_top_wavenumber();
    const auto probe = kinematics_from_wavenumber(k_ref, base);

    double prev_mean = 1e300;
    for (double level : {2.0, 4.0, 6.0, 8.0}) {
        PhysicalConfig c = base;
        c.a = level / probe.chi;
        c.b = c.a;
        c.L = c.a + 7.0;
        double acc = 0.0;
        int count = 0;
        for (int i = 0; i < 160; ++i) {
            const double k = (0.40 + 0.20 * i / 159.0) * c.barrier_top_wavenumber();
            const auto s = kinematics_from_wavenumber(k, c);
            if (resonance_proximity(s, c) <= 0.1) continue;
            const auto ex = exact_amplitudes(s, c).a1t_a2t;
            const auto op = opaque_amplitudes(s, c).a1t_a2t;
            acc += std::abs(op - ex) / std::abs(ex);
            ++count;
        }
        REQUIRE(count > 50);
        const double mean = acc / count;
        CHECK(mean < prev_mean);
        prev_mean = mean;
    }
}
