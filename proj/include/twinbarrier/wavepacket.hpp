#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "twinbarrier/errors.hpp"
#include "twinbarrier/kinematics.hpp"
#include "twinbarrier/modulation.hpp"
#include "twinbarrier/quadrature.hpp"
#include "twinbarrier/scattering.hpp"
#include "twinbarrier/series.hpp"

namespace twinbarrier {

inline std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 2) throw std::invalid_argument("linspace needs at least two points");
    std::vector<double> out(static_cast<std::size_t>(n));
    const double h = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + i * h;
    out.back() = hi;
    return out;
}

/// Directional pieces of the stationary solution a packet can be built from.
enum class RegionComponent { reflected, intermediate_forward, intermediate_backward, transmitted };

/// Which stationary amplitude enters the momentum superposition.
struct FieldMode {
    enum class Kind { exact, series_term, partial_sum, region_component };

    Kind kind = Kind::exact;
    int order = 0;  ///< term index n (series_term) or number of terms (partial_sum)
    RegionComponent component = RegionComponent::transmitted;

    static FieldMode exact() { return {Kind::exact, 0, RegionComponent::transmitted}; }
    static FieldMode series_term(int n) { return {Kind::series_term, n, RegionComponent::transmitted}; }
    static FieldMode partial_sum(int n) { return {Kind::partial_sum, n, RegionComponent::transmitted}; }
    static FieldMode region(RegionComponent c) { return {Kind::region_component, 0, c}; }
};

inline std::string to_string(const FieldMode& m) {
    switch (m.kind) {
        case FieldMode::Kind::exact: return "exact";
        case FieldMode::Kind::series_term: return "series_term(" + std::to_string(m.order) + ")";
        case FieldMode::Kind::partial_sum: return "partial_sum(" + std::to_string(m.order) + ")";
        case FieldMode::Kind::region_component:
            switch (m.component) {
                case RegionComponent::reflected: return "reflected";
                case RegionComponent::intermediate_forward: return "intermediate_forward";
                case RegionComponent::intermediate_backward: return "intermediate_backward";
                case RegionComponent::transmitted: return "transmitted";
            }
    }
    return "unknown";
}

struct SynthesisOptions {
    int n_k = 256;                    ///< initial Simpson interval count (>= 64)
    double rel_tol = 1e-6;            ///< grid-doubling convergence target (field L2)
    double abs_floor_frac = 1e-9;     ///< absolute RMS floor as a fraction of the
                                      ///< incident packet scale; fields this small
                                      ///< count as converged (a strictly relative
                                      ///< test can never terminate on a zero field)
    int max_intervals = (1 << 16);    ///< refinement cap
    bool auto_refine = true;          ///< double n_k until converged
    std::optional<double> launch_x0;  ///< packet launch center; default -2/sigma
    unsigned threads = 0;             ///< worker threads; 0 = hardware concurrency
    double chi_width_cap = kDefaultChiWidthCap;
};

/// Complex field Psi(x, t) sampled on a rectangular grid, row-major in t.
struct PacketField {
    std::vector<double> x_grid;
    std::vector<double> t_grid;
    std::vector<Complex> values;
    FieldMode mode;
    PhysicalConfig config;
    double launch_x0 = 0.0;
    int n_k_used = 0;

    const Complex& at(std::size_t it, std::size_t ix) const {
        return values[it * x_grid.size() + ix];
    }
};

namespace detail {

inline void require_strictly_increasing(const std::vector<double>& g, const char* name) {
    if (g.empty()) throw ValidationError(name, "grid must not be empty");
    for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1])) throw ValidationError(name, "grid must be strictly increasing");
}

struct SynthesisNode {
    double k = 0.0;
    double E = 0.0;
    Complex weight;  // Simpson weight * g(k) * e^{-i k x0} / sqrt(2 pi)
    // Exact-mode data.
    KinematicState state{};
    ScatteringSolution sol{};
    InteriorCoefficients inter{};
    // Single-amplitude modes: field row is amp * e^{i dir k x}.
    Complex amp;
    double dir = 1.0;
};

inline std::vector<SynthesisNode> synthesis_nodes(const ModulationSpec& spec,
                                                  const PhysicalConfig& config, FieldMode mode,
                                                  int n_intervals, double launch_x0,
                                                  double chi_width_cap) {
    const auto nodes = simpson_nodes(spec.k_min, spec.k_max, n_intervals);
    const auto weights = simpson_weights(spec.k_min, spec.k_max, n_intervals);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);

    std::vector<SynthesisNode> out(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        SynthesisNode& n = out[j];
        n.k = nodes[j];
        n.state = kinematics_from_wavenumber(n.k, config);
        n.E = n.state.E;
        n.weight = weights[j] * modulation_amplitude(n.k, spec) * norm *
                   std::polar(1.0, -n.k * launch_x0);
        n.sol = exact_amplitudes(n.state, config, chi_width_cap);
        switch (mode.kind) {
            case FieldMode::Kind::exact:
                n.inter = interior_coefficients(n.state, config, n.sol);
                break;
            case FieldMode::Kind::series_term:
                n.amp = transmitted_series_term(n.state, config, mode.order, chi_width_cap);
                n.dir = 1.0;
                break;
            case FieldMode::Kind::partial_sum:
                n.amp = transmitted_partial_sum(n.state, config, mode.order, chi_width_cap);
                n.dir = 1.0;
                break;
            case FieldMode::Kind::region_component:
                switch (mode.component) {
                    case RegionComponent::reflected:
                        n.amp = n.sol.a1r;
                        n.dir = -1.0;
                        break;
                    case RegionComponent::intermediate_forward:
                        n.amp = n.sol.a1t;
                        n.dir = 1.0;
                        break;
                    case RegionComponent::intermediate_backward:
                        n.amp = n.sol.a1t_a2r;
                        n.dir = -1.0;
                        break;
                    case RegionComponent::transmitted:
                        n.amp = n.sol.a1t_a2t;
                        n.dir = 1.0;
                        break;
                }
                break;
        }
    }
    return out;
}

inline void synthesis_row(const SynthesisNode& n, FieldMode mode, const PhysicalConfig& config,
                          const std::vector<double>& xs, std::vector<Complex>& row) {
    if (mode.kind == FieldMode::Kind::exact) {
        for (std::size_t i = 0; i < xs.size(); ++i)
            row[i] = stationary_wavefunction(xs[i], n.state, config, n.sol, n.inter);
    } else {
        for (std::size_t i = 0; i < xs.size(); ++i)
            row[i] = n.amp * std::polar(1.0, n.dir * n.k * xs[i]);
    }
}

/// One full momentum quadrature of the field.  Threads split the t rows; the
/// per-cell summation order over momentum nodes is fixed, so the result is
/// identical to the sequential evaluation for any thread count.
inline std::vector<Complex> evaluate_field(const std::vector<SynthesisNode>& nodes,
                                           FieldMode mode, const PhysicalConfig& config,
                                           const std::vector<double>& xs,
                                           const std::vector<double>& ts, double hbar,
                                           unsigned threads) {
    const std::size_t nx = xs.size();
    const std::size_t nt = ts.size();
    std::vector<Complex> field(nx * nt, Complex{0.0});

    unsigned n_workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(nt));

    auto worker = [&](std::size_t t_begin, std::size_t t_end) {
        std::vector<Complex> row(nx);
        for (const auto& n : nodes) {
            if (n.weight == Complex{0.0}) continue;
            synthesis_row(n, mode, config, xs, row);
            for (std::size_t it = t_begin; it < t_end; ++it) {
                const Complex factor = n.weight * std::polar(1.0, -n.E * ts[it] / hbar);
                Complex* out = field.data() + it * nx;
                for (std::size_t ix = 0; ix < nx; ++ix) out[ix] += factor * row[ix];
            }
        }
    };

    if (n_workers <= 1) {
        worker(0, nt);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        const std::size_t chunk = (nt + n_workers - 1) / n_workers;
        for (unsigned w = 0; w < n_workers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(nt, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return field;
}

struct FieldDeviation {
    double rms_diff = 0.0;
    double rms_cur = 0.0;
};

inline FieldDeviation field_deviation(const std::vector<Complex>& cur,
                                      const std::vector<Complex>& prev) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
        num += std::norm(cur[i] - prev[i]);
        den += std::norm(cur[i]);
    }
    const double n = static_cast<double>(cur.size());
    return {std::sqrt(num / n), std::sqrt(den / n)};
}

/// Amplitude scale of the incident packet, used for the absolute convergence
/// floor: (2 pi)^{-1/2} integral of g over the window.
inline double incident_scale(const ModulationSpec& spec) {
    double acc = 0.0;
    const int n = 512;
    const double h = (spec.k_max - spec.k_min) / n;
    for (int j = 0; j <= n; ++j)
        acc += modulation_amplitude(spec.k_min + j * h, spec) * ((j == 0 || j == n) ? 0.5 : 1.0);
    return acc * h / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace detail

/// Builds Psi(x, t) = (2 pi)^{-1/2} Int g(k) e^{-i k x0} Psi_mode(k, x)
/// e^{-i E(k) t / hbar} dk by composite Simpson quadrature over the
/// modulation window, doubling the node count until the field is stable in
/// relative L2.
inline PacketField synthesize_packet(const ModulationSpec& spec, const PhysicalConfig& config,
                                     FieldMode mode, std::vector<double> x_grid,
                                     std::vector<double> t_grid,
                                     const SynthesisOptions& opts = {}) {
    validate(spec, config);
    detail::require_strictly_increasing(x_grid, "x_grid");
    detail::require_strictly_increasing(t_grid, "t_grid");
    if (opts.n_k < 64) throw std::invalid_argument("quadrature resolution n_k must be >= 64");
    if ((mode.kind == FieldMode::Kind::series_term || mode.kind == FieldMode::Kind::partial_sum) &&
        mode.order < 1)
        throw IndexError("series mode order must be >= 1");

    const double x0 = opts.launch_x0.value_or(default_launch_offset(spec));

    PacketField field;
    field.x_grid = std::move(x_grid);
    field.t_grid = std::move(t_grid);
    field.mode = mode;
    field.config = config;
    field.launch_x0 = x0;

    auto evaluate = [&](int n_intervals) {
        const auto nodes = detail::synthesis_nodes(spec, config, mode, n_intervals, x0,
                                                   opts.chi_width_cap);
        return detail::evaluate_field(nodes, mode, config, field.x_grid, field.t_grid,
                                      config.hbar, opts.threads);
    };

    if (!opts.auto_refine) {
        field.values = evaluate(opts.n_k);
        field.n_k_used = opts.n_k;
        return field;
    }

    const double floor = opts.abs_floor_frac * detail::incident_scale(spec);
    std::vector<Complex> prev = evaluate(opts.n_k);
    double moving = 0.0;
    for (int n = 2 * opts.n_k; n <= opts.max_intervals; n *= 2) {
        std::vector<Complex> cur = evaluate(n);
        const auto dev = detail::field_deviation(cur, prev);
        moving = dev.rms_diff;
        if (dev.rms_diff <= std::max(opts.rel_tol * dev.rms_cur, floor)) {
            field.values = std::move(cur);
            field.n_k_used = n;
            return field;
        }
        prev = std::move(cur);
    }
    throw QuadratureNotConverged("field quadrature still moving by " + std::to_string(moving) +
                                 " (RMS) past " + std::to_string(opts.max_intervals) +
                                 " intervals");
}

/// Probability density |Psi(detector_x, t)|^2 sampled on the field's t grid.
struct DetectorSeries {
    double detector_x = 0.0;
    std::vector<double> t;
    std::vector<double> values;
};

/// Extracts the arrival series at a detector position, interpolating the
/// complex field linearly in x when the detector sits between grid columns.
inline DetectorSeries probability_time_series(const PacketField& field, double detector_x) {
    const auto& xs = field.x_grid;
    if (detector_x < xs.front() || detector_x > xs.back())
        throw DetectorOutOfGrid("detector at " + std::to_string(detector_x) +
                                " lies outside the x grid");
    const auto upper = std::lower_bound(xs.begin(), xs.end(), detector_x);
    std::size_t hi = static_cast<std::size_t>(upper - xs.begin());
    if (hi == 0) hi = 1;
    if (hi >= xs.size()) hi = xs.size() - 1;
    const std::size_t lo = hi - 1;
    const double w = (detector_x - xs[lo]) / (xs[hi] - xs[lo]);

    DetectorSeries series;
    series.detector_x = detector_x;
    series.t = field.t_grid;
    series.values.resize(field.t_grid.size());
    for (std::size_t it = 0; it < field.t_grid.size(); ++it) {
        const Complex v = (1.0 - w) * field.at(it, lo) + w * field.at(it, hi);
        series.values[it] = std::norm(v);
    }
    return series;
}

struct PacketStatistics {
    double mean_x = 0.0;
    double rms_width = 0.0;
    double norm = 0.0;
};

namespace detail {

/// Integrates sampled values over [lo, hi] clipped against the sample range,
/// adding linearly interpolated partial cells at the clip boundaries.
/// Uniform odd-count interior runs use Simpson, anything else trapezoid.
struct SampledIntegral {
    std::vector<double> x;
    std::vector<double> w;  // quadrature weight per retained sample
};

inline SampledIntegral region_quadrature(const std::vector<double>& xs, double lo, double hi) {
    SampledIntegral q;
    if (hi <= xs.front() || lo >= xs.back()) return q;
    lo = std::max(lo, xs.front());
    hi = std::min(hi, xs.back());
    if (!(hi > lo)) return q;

    const auto first_in =
        std::lower_bound(xs.begin(), xs.end(), lo - 1e-12 * std::max(1.0, std::abs(lo)));
    const auto last_in =
        std::upper_bound(xs.begin(), xs.end(), hi + 1e-12 * std::max(1.0, std::abs(hi)));
    std::size_t i0 = static_cast<std::size_t>(first_in - xs.begin());
    std::size_t i1 = static_cast<std::size_t>(last_in - xs.begin());
    if (i1 <= i0 + 1) {
        // Region falls inside one cell: single trapezoid of interpolants.
        q.x = {lo, hi};
        q.w = {0.5 * (hi - lo), 0.5 * (hi - lo)};
        return q;
    }

    const std::size_t count = i1 - i0;
    const double h = xs[i0 + 1] - xs[i0];
    bool uniform = true;
    for (std::size_t i = i0 + 1; i + 1 < i1; ++i)
        if (std::abs((xs[i + 1] - xs[i]) - h) > 1e-9 * h) uniform = false;

    q.x.assign(xs.begin() + static_cast<std::ptrdiff_t>(i0),
               xs.begin() + static_cast<std::ptrdiff_t>(i1));
    q.w.assign(count, 0.0);
    if (uniform && count >= 3 && count % 2 == 1) {
        q.w.front() = q.w.back() = h / 3.0;
        for (std::size_t i = 1; i + 1 < count; ++i) q.w[i] = (i % 2 ? 4.0 : 2.0) * h / 3.0;
    } else {
        for (std::size_t i = 0; i + 1 < count; ++i) {
            const double half = 0.5 * (q.x[i + 1] - q.x[i]);
            q.w[i] += half;
            q.w[i + 1] += half;
        }
    }

    // Partial cells between the clip boundary and the first/last node.
    if (q.x.front() - lo > 1e-12 * std::max(1.0, std::abs(lo))) {
        const double half = 0.5 * (q.x.front() - lo);
        q.w.front() += half;
        q.x.insert(q.x.begin(), lo);
        q.w.insert(q.w.begin(), half);
    }
    if (hi - q.x.back() > 1e-12 * std::max(1.0, std::abs(hi))) {
        const double half = 0.5 * (hi - q.x.back());
        q.w.back() += half;
        q.x.push_back(hi);
        q.w.push_back(half);
    }
    return q;
}

inline double interpolate_density(const PacketField& field, std::size_t it, double x) {
    const auto& xs = field.x_grid;
    const auto upper = std::lower_bound(xs.begin(), xs.end(), x);
    std::size_t hi = static_cast<std::size_t>(upper - xs.begin());
    if (hi == 0) hi = 1;
    if (hi >= xs.size()) hi = xs.size() - 1;
    const std::size_t lo = hi - 1;
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return std::norm((1.0 - w) * field.at(it, lo) + w * field.at(it, hi));
}

}  // namespace detail

/// Probability-weighted mean position, RMS width, and norm of |Psi|^2
/// restricted to one region, evaluated at a grid time.
inline PacketStatistics packet_statistics(const PacketField& field, double t, Region region) {
    const auto& ts = field.t_grid;
    std::size_t it = ts.size();
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (std::abs(ts[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
            it = i;
            break;
        }
    if (it == ts.size()) throw std::invalid_argument("t is not a grid time");

    const auto [lo, hi] = region_bounds(region, field.config);
    const auto quad = detail::region_quadrature(field.x_grid, lo, hi);
    if (quad.x.empty()) throw EmptyRegion("region does not overlap the x grid");

    double norm = 0.0;
    double mean_acc = 0.0;
    std::vector<double> dens(quad.x.size());
    for (std::size_t i = 0; i < quad.x.size(); ++i) {
        dens[i] = detail::interpolate_density(field, it, quad.x[i]);
        norm += quad.w[i] * dens[i];
        mean_acc += quad.w[i] * dens[i] * quad.x[i];
    }
    if (norm < 1e-14) throw EmptyRegion("regional probability below 1e-14");

    const double mean = mean_acc / norm;
    double var = 0.0;
    for (std::size_t i = 0; i < quad.x.size(); ++i)
        var += quad.w[i] * dens[i] * (quad.x[i] - mean) * (quad.x[i] - mean);
    return PacketStatistics{mean, std::sqrt(std::max(var / norm, 0.0)), norm};
}

enum class MomentumMethod { peak, mean };

/// Effective wavenumber of the transmitted packet: the argmax of
/// |T(k) g(k)| (peak) or the |T g|^2-weighted mean (mean).  Both exceed k0
/// whenever the transmission grows across the modulation window.
inline double effective_momentum(const ModulationSpec& spec, const PhysicalConfig& config,
                                 MomentumMethod method, const SynthesisOptions& opts = {}) {
    validate(spec, config);
    const int n0 = std::max(opts.n_k, 64);

    double prev_mean = 0.0;
    for (int n = n0; n <= opts.max_intervals; n *= 2) {
        const auto nodes = simpson_nodes(spec.k_min, spec.k_max, n);
        const auto weights = simpson_weights(spec.k_min, spec.k_max, n);
        std::vector<double> amp(nodes.size());
        double total = 0.0;
        double first_moment = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const auto st = kinematics_from_wavenumber(nodes[j], config);
            const auto sol = exact_amplitudes(st, config, opts.chi_width_cap);
            amp[j] = std::abs(sol.a1t_a2t) * modulation_amplitude(nodes[j], spec);
            total += weights[j] * amp[j] * amp[j];
            first_moment += weights[j] * amp[j] * amp[j] * nodes[j];
        }
        if (!(total > 0.0))
            throw DegenerateDistribution("transmitted weight vanished over the window");

        if (method == MomentumMethod::mean) {
            const double mean = first_moment / total;
            if (n > n0 && std::abs(mean - prev_mean) <= 1e-8 * std::max(std::abs(mean), 1e-30))
                return mean;
            prev_mean = mean;
            continue;
        }

        // Peak: quadratically refined argmax once the grid is reasonably fine.
        if (n < 4 * n0) continue;
        std::size_t imax = 0;
        for (std::size_t j = 1; j < amp.size(); ++j)
            if (amp[j] > amp[imax]) imax = j;
        if (imax == 0 || imax + 1 == amp.size()) return nodes[imax];
        const double y0 = amp[imax - 1], y1 = amp[imax], y2 = amp[imax + 1];
        const double denom = y0 - 2.0 * y1 + y2;
        const double h = nodes[1] - nodes[0];
        if (denom >= 0.0) return nodes[imax];
        return nodes[imax] + 0.5 * h * (y0 - y2) / denom;
    }
    throw QuadratureNotConverged("effective momentum did not stabilize");
}

}  // namespace twinbarrier
