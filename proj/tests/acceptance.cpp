// Acceptance suite: one pass/fail line per criterion, non-zero exit on any
// failure.  Exercises the full pipeline, from the closed-form amplitudes
// through wave-packet propagation and the scenario front end.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "twinbarrier/twinbarrier.hpp"

using namespace twinbarrier;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    bool pass = false;
    std::string detail;
};

template <typename... Args>
std::string fmt(const char* format, Args... args) {
    char buf[200];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double rel_dev(Complex lhs, Complex rhs) {
    return std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
}

struct RandomCase {
    PhysicalConfig config;
    KinematicState state;
};

RandomCase draw_case(std::mt19937& rng, double chi_w_lo, double chi_w_hi) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PhysicalConfig c;
    c.V0 = 0.5 + 4.5 * u(rng);
    const double e_frac = 0.02 + 0.96 * u(rng);
    const auto probe = kinematics_from_energy(e_frac * c.V0, c);
    c.a = (chi_w_lo + (chi_w_hi - chi_w_lo) * u(rng)) / probe.chi;
    c.b = (chi_w_lo + (chi_w_hi - chi_w_lo) * u(rng)) / probe.chi;
    c.L = c.a + 0.5 + 19.5 * u(rng);
    return {c, kinematics_from_energy(e_frac * c.V0, c)};
}

// Shared scenario: thin first barrier (chi a ~ 0.5), opaque second
// (chi b ~ 6), wide inter-barrier region.
ScenarioConfig asymmetric_config() {
    ScenarioConfig cfg;
    cfg.experiment = Experiment::asymmetric_multipeak;
    cfg.physical.V0 = 1.0;
    cfg.physical.a = 0.4287;
    cfg.physical.L = 40.4287;
    cfg.physical.b = 5.145;
    cfg.modulation.k0 = 0.8;
    cfg.modulation.sigma = 0.04;
    cfg.modulation.k_min = 0.66;
    cfg.modulation.k_max = 0.94;
    cfg.launch_x0 = -50.0;
    cfg.grids.x_min = -80.0;
    cfg.grids.x_max = 60.0;
    cfg.grids.t_min = 0.0;
    cfg.grids.t_max = 520.0;
    cfg.grids.n_t = 2080;
    cfg.grids.n_k = 256;
    cfg.detectors = {-10.0, 45.5737};
    return cfg;
}

// Overlap regime: chi (a+b) = 8 at k0, split as chi a = 2 and chi b = 6 with
// a short gap, so the emitted train overlaps while the inter-barrier
// resonances stay resolvable by the momentum quadrature.
struct OverlapSetup {
    PhysicalConfig config;
    ModulationSpec spec;
    SynthesisOptions opts;
};

OverlapSetup overlap_setup() {
    OverlapSetup s;
    s.config.V0 = 1.0;
    s.config.a = 1.715;
    s.config.b = 5.145;
    s.config.L = s.config.a + 6.0;
    s.spec.k0 = 0.8;
    s.spec.sigma = 0.05;
    s.spec.k_min = 0.625;
    s.spec.k_max = 0.975;
    s.opts.n_k = 256;
    s.opts.launch_x0 = -40.0;
    return s;
}

Criterion unitarity() {
    std::mt19937 rng(12345u);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto rc = draw_case(rng, 0.1, 12.0);
        const auto sol = exact_amplitudes(rc.state, rc.config);
        worst = std::max(worst, std::abs(std::norm(sol.a1r) + std::norm(sol.a1t_a2t) - 1.0));
    }
    return {worst <= 1e-10, fmt("worst |R|^2+|T|^2 defect %.3e over 1000 draws", worst)};
}

Criterion oracle_equivalence() {
    std::mt19937 rng(12345u);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto rc = draw_case(rng, 0.1, 12.0);
        const auto exact = exact_amplitudes(rc.state, rc.config);
        const auto oracle = transfer_matrix_amplitudes(rc.state, rc.config);
        worst = std::max({worst, rel_dev(exact.a1r, oracle.a1r),
                          rel_dev(exact.a1t, oracle.a1t),
                          rel_dev(exact.a1t_a2r, oracle.a1t_a2r),
                          rel_dev(exact.a1t_a2t, oracle.a1t_a2t),
                          rel_dev(exact.denom, oracle.denom)});
    }
    return {worst <= 1e-10, fmt("worst amplitude deviation %.3e over 1000 draws", worst)};
}

Criterion boundary_continuity() {
    std::mt19937 rng(777u);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto rc = draw_case(rng, 0.1, 10.0);
        const auto& c = rc.config;
        const auto sol = exact_amplitudes(rc.state, c);
        const auto in = interior_coefficients(rc.state, c, sol);
        const double eps = 1e-8 * c.a;
        for (double x : {0.0, c.a, c.L, c.L + c.b}) {
            const Region left = region_of(x - eps, c);
            const Region right = region_of(x + eps, c);
            const Complex vl = stationary_wavefunction(left, x, rc.state, c, sol, in);
            const Complex vr = stationary_wavefunction(right, x, rc.state, c, sol, in);
            worst = std::max(worst, std::abs(vl - vr) /
                                        std::max(std::max(std::abs(vl), std::abs(vr)), 1e-30));
            const Complex dl =
                stationary_wavefunction_derivative(left, x, rc.state, c, sol, in);
            const Complex dr =
                stationary_wavefunction_derivative(right, x, rc.state, c, sol, in);
            worst = std::max(worst, std::abs(dl - dr) /
                                        std::max(std::max(std::abs(dl), std::abs(dr)), 1e-30));
        }
    }
    return {worst <= 1e-10,
            fmt("worst Psi/Psi_x interface mismatch %.3e over 100 configs", worst)};
}

Criterion series_identity() {
    double worst_ratio_err = 0.0;
    bool bound_ok = true;
    for (auto [wa, wb, gap] : {std::array<double, 3>{0.7, 0.7, 2.0},
                               std::array<double, 3>{1.5, 2.5, 4.5},
                               std::array<double, 3>{0.5, 3.0, 9.0}}) {
        PhysicalConfig c;
        c.V0 = 2.0;
        c.a = wa;
        c.b = wb;
        c.L = wa + gap;
        const auto s = kinematics_from_energy(1.0, c);
        const Complex exact = exact_amplitudes(s, c).a1t_a2t;
        const double r = std::abs(series_ratio(s, c));
        const double pref = std::abs(series_prefactor(s, c));

        std::vector<double> errors;
        double bound = pref * r / (1.0 - r);
        for (int n = 1; n <= 60; ++n) {
            const double err = std::abs(transmitted_partial_sum(s, c, n) - exact);
            errors.push_back(err);
            if (bound > 1e-12 * std::abs(exact) && err > bound * (1.0 + 1e-9)) bound_ok = false;
            bound *= r;
        }
        double acc = 0.0;
        int count = 0;
        for (std::size_t i = 1; i < errors.size(); ++i) {
            if (errors[i] < 1e3 * 2.2e-16 * std::abs(exact) || errors[i - 1] <= 0.0) break;
            acc += errors[i] / errors[i - 1];
            ++count;
        }
        if (count) worst_ratio_err = std::max(worst_ratio_err, std::abs(acc / count - r));
    }
    return {bound_ok && worst_ratio_err <= 1e-3,
            std::string("tail bound ") + (bound_ok ? "held" : "VIOLATED") +
                fmt("; worst measured-ratio error %.2e", worst_ratio_err)};
}

Criterion opaque_decay() {
    PhysicalConfig base;
    base.V0 = 2.0;
    const double top = base.barrier_top_wavenumber();
    PhysicalConfig probe_cfg = base;
    probe_cfg.a = 1.0;
    probe_cfg.L = 8.0;
    probe_cfg.b = 1.0;
    const auto probe = kinematics_from_wavenumber(0.45 * top, probe_cfg);

    std::vector<double> medians;
    for (double level : {3.0, 5.0, 8.0}) {
        PhysicalConfig c = base;
        c.a = level / probe.chi;
        c.b = c.a;
        c.L = c.a + 7.0;
        std::vector<double> devs;
        for (int i = 0; i < 400; ++i) {
            const double k = (0.30 + 0.40 * i / 399.0) * top;
            const auto s = kinematics_from_wavenumber(k, c);
            if (resonance_proximity(s, c) <= 0.1) continue;
            const auto ex = exact_amplitudes(s, c).a1t_a2t;
            const auto op = opaque_amplitudes(s, c).a1t_a2t;
            devs.push_back(std::abs(op - ex) / std::abs(ex));
        }
        std::sort(devs.begin(), devs.end());
        medians.push_back(devs[devs.size() / 2]);
    }
    const bool monotone = medians[0] > medians[1] && medians[1] > medians[2];
    const bool pass = monotone && medians[0] <= 1e-2 && medians[2] <= 1e-6;
    return {pass, fmt("median off-resonance deviation %.2e (chi=3) -> %.2e (chi=8), decreasing",
                      medians[0], medians[2])};
}

Criterion hartman_delay() {
    PhysicalConfig c;
    c.V0 = 2.0;
    c.a = 1.0;
    c.L = 4.0;
    c.b = 1.0;
    const double top = c.barrier_top_wavenumber();
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double k = top * (0.1 + 0.8 * i / 200.0);
        const double h = 1e-5 * k;
        const auto sp = kinematics_from_wavenumber(k + h, c);
        const auto sm = kinematics_from_wavenumber(k - h, c);
        const double numeric = std::abs((2.0 * sp.phi - 2.0 * sm.phi) / (2.0 * h));
        const auto s = kinematics_from_wavenumber(k, c);
        worst = std::max(worst,
                         std::abs(numeric - hartman_delay_length(s)) / hartman_delay_length(s));
    }
    return {worst <= 1e-6, fmt("worst |2 dphi/dk| vs 2/chi deviation %.3e", worst)};
}

Criterion spm_vs_propagation() {
    const auto report = run_scenario(asymmetric_config());
    const bool peaks_ok = report.checks.at("at_least_two_reflected_peaks");
    const bool spacing_ok = report.checks.at("spacing_within_tolerance");
    const bool t1_ok = report.checks.at("t1_within_tolerance");
    return {peaks_ok && spacing_ok && t1_ok,
            fmt("%.0f reflected peaks; spacing error %.2e; first-arrival error %.2e",
                report.metrics.at("n_reflected_peaks").value,
                report.metrics.at("spacing_rel_error").value,
                report.metrics.at("t1_rel_error").value)};
}

Criterion filter_effect() {
    const auto asym = asymmetric_config();
    const auto overlap = overlap_setup();

    SynthesisOptions opts;
    opts.n_k = 256;
    bool above = true;
    double worst_shift = 1e300;
    for (const auto& [spec, config] : std::vector<std::pair<ModulationSpec, PhysicalConfig>>{
             {asym.modulation, asym.physical}, {overlap.spec, overlap.config}}) {
        const double mean = effective_momentum(spec, config, MomentumMethod::mean, opts);
        above = above && mean > spec.k0;
        worst_shift = std::min(worst_shift, mean - spec.k0);
    }

    PhysicalConfig doubled = overlap.config;
    doubled.b = 2.0 * overlap.config.b;
    const double base =
        effective_momentum(overlap.spec, overlap.config, MomentumMethod::mean, opts);
    const double grown = effective_momentum(overlap.spec, doubled, MomentumMethod::mean, opts);
    const bool monotone = grown >= base - 1e-12;
    return {above && monotone, fmt("smallest upward shift %.3e; shift after doubling b %+.3e",
                                   worst_shift, grown - base)};
}

Criterion overlap_regime() {
    const auto setup = overlap_setup();
    const auto& c = setup.config;
    const double det = c.L + c.b;
    const auto probe = kinematics_from_wavenumber(setup.spec.k0, c);
    const double chi_ab = probe.chi * (c.a + c.b);

    const auto field =
        synthesize_packet(setup.spec, c, FieldMode::region(RegionComponent::transmitted),
                          linspace(det - 0.5, det + 0.5, 3), linspace(0.0, 420.0, 3360),
                          setup.opts);
    const auto peaks = detect_peaks(probability_time_series(field, det), 0.05);

    const double k_eff = effective_momentum(setup.spec, c, MomentumMethod::mean, setup.opts);
    const double spacing = exit_time_spacing(k_eff, c);
    const double gap = std::abs(peaks.mean_arrival - peaks.peak_times.front());

    const auto snap = synthesize_packet(setup.spec, c, FieldMode::exact(),
                                        linspace(det, 260.0, 1236), {250.0}, setup.opts);
    const auto stats = packet_statistics(snap, 250.0, Region::right);

    const bool pass = chi_ab >= 8.0 && stats.rms_width > (c.a + c.b) && gap > 0.25 * spacing;
    return {pass, fmt("RMS width %.1f vs a+b = %.2f; |mean - first peak| = %.2f spacings",
                      stats.rms_width, c.a + c.b, gap / spacing)};
}

Criterion determinism_io() {
    ScenarioConfig cfg;
    cfg.experiment = Experiment::amplitude_scan;
    cfg.physical.V0 = 2.0;
    cfg.physical.a = 1.0;
    cfg.physical.L = 3.0;
    cfg.physical.b = 1.0;
    cfg.modulation.k0 = 1.0;
    cfg.modulation.sigma = 0.05;
    cfg.modulation.k_min = 0.8;
    cfg.modulation.k_max = 1.2;
    cfg.scan.n = 200;
    cfg.seed = 42u;

    const auto dir1 = fs::temp_directory_path() / "twinbarrier_accept_run1";
    const auto dir2 = fs::temp_directory_path() / "twinbarrier_accept_run2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    const auto report = run_scenario(cfg);
    emit_report(report, dir1);
    emit_report(run_scenario(cfg), dir2);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), {});
    };
    const bool csv_identical =
        slurp(dir1 / "amplitudes.csv") == slurp(dir2 / "amplitudes.csv") &&
        !slurp(dir1 / "amplitudes.csv").empty();

    auto j1 = read_summary(dir1 / "summary.json");
    auto j2 = read_summary(dir2 / "summary.json");
    j1.erase("timestamp");
    j2.erase("timestamp");
    const bool summary_identical = (j1 == j2);

    const auto parsed = read_csv(dir1 / "amplitudes.csv");
    bool lossless = parsed.rows() == report.tables.front().rows();
    double worst = 0.0;
    for (std::size_t col = 0; lossless && col < parsed.columns.size(); ++col)
        for (std::size_t row = 0; row < parsed.rows(); ++row) {
            const double a = parsed.data[col][row];
            const double b = report.tables.front().data[col][row];
            const double dev = std::abs(a - b) / std::max(std::abs(b), 1e-300);
            worst = std::max(worst, dev);
            if (dev > 1e-12) lossless = false;  // must hold >= 12 significant digits
        }
    return {csv_identical && summary_identical && lossless,
            std::string("repeat runs byte-identical (timestamp excluded): ") +
                (csv_identical && summary_identical ? "yes" : "NO") +
                fmt("; CSV re-parse worst relative error %.1e", worst)};
}

}  // namespace

int main() {
    using Entry = std::pair<const char*, std::function<Criterion()>>;
    const std::vector<Entry> criteria = {
        {"unitarity over random opacities", unitarity},
        {"closed form vs transfer-matrix oracle", oracle_equivalence},
        {"wavefunction continuity at the interfaces", boundary_continuity},
        {"geometric series identity and tail bound", series_identity},
        {"opaque-limit deviation decays with thickness", opaque_decay},
        {"delay length vs finite differences", hartman_delay},
        {"SPM exit times vs propagated packets", spm_vs_propagation},
        {"filter effect on the transmitted momentum", filter_effect},
        {"overlap regime: mean far from the first maximum", overlap_regime},
        {"deterministic, lossless outputs", determinism_io},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Criterion result;
        try {
            result = criteria[i].second();
        } catch (const std::exception& e) {
            result = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] %2zu. %s — %s\n", result.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first, result.detail.c_str());
        if (!result.pass) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
