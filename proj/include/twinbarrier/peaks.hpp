#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "twinbarrier/errors.hpp"
#include "twinbarrier/wavepacket.hpp"

namespace twinbarrier {

/// Arrival-time structure of a detector series: interpolated peak positions,
/// their prominences, and the probability-weighted mean and RMS width of the
/// whole series.  The mean-versus-first-maximum gap is the quantity that
/// separates overlapping wave trains from a single packet.
struct PeakReport {
    double detector_x = 0.0;
    std::vector<double> peak_times;
    std::vector<double> peak_heights;
    std::vector<double> prominences;
    double mean_arrival = 0.0;
    double width = 0.0;
};

namespace detail {

/// Topographic prominence of the local maximum at index i: height above the
/// higher of the two valley floors separating it from higher ground (or the
/// series boundary).
inline double prominence_at(const std::vector<double>& s, std::size_t i) {
    double left_base = s[i];
    for (std::size_t j = i; j-- > 0;) {
        left_base = std::min(left_base, s[j]);
        if (s[j] > s[i]) break;
    }
    double right_base = s[i];
    for (std::size_t j = i + 1; j < s.size(); ++j) {
        right_base = std::min(right_base, s[j]);
        if (s[j] > s[i]) break;
    }
    return s[i] - std::max(left_base, right_base);
}

}  // namespace detail

/// Finds local maxima whose prominence clears min_prominence (a fraction of
/// the global maximum) and refines each by a three-point quadratic fit.
inline PeakReport detect_peaks(const DetectorSeries& series, double min_prominence = 0.05) {
    if (!(min_prominence > 0.0) || !(min_prominence < 1.0))
        throw std::invalid_argument("min_prominence must lie in (0, 1)");
    const auto& s = series.values;
    const auto& t = series.t;
    if (s.size() < 3) throw NoPeaksFound("series too short");

    const double global_max = *std::max_element(s.begin(), s.end());
    if (!(global_max > 0.0)) throw NoPeaksFound("series is identically zero");
    const double threshold = min_prominence * global_max;

    PeakReport report;
    report.detector_x = series.detector_x;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (!(s[i] > s[i - 1] && s[i] > s[i + 1])) continue;
        const double prom = detail::prominence_at(s, i);
        if (prom < threshold) continue;

        const double y0 = s[i - 1], y1 = s[i], y2 = s[i + 1];
        const double curv = y0 - 2.0 * y1 + y2;
        double t_peak = t[i];
        double h_peak = y1;
        if (curv < 0.0) {
            const double dt = 0.5 * (t[i + 1] - t[i - 1]);
            const double shift = 0.5 * (y0 - y2) / curv;
            t_peak = t[i] + shift * dt;
            h_peak = y1 - 0.25 * (y0 - y2) * shift;
        }
        report.peak_times.push_back(t_peak);
        report.peak_heights.push_back(h_peak);
        report.prominences.push_back(prom);
    }
    if (report.peak_times.empty())
        throw NoPeaksFound("no local maximum clears the prominence threshold");

    // Probability-weighted arrival statistics over the full series
    // (trapezoidal weights in t).
    double mass = 0.0, first = 0.0;
    std::vector<double> w(s.size(), 0.0);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double half = 0.5 * (t[i + 1] - t[i]);
        w[i] += half;
        w[i + 1] += half;
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        mass += w[i] * s[i];
        first += w[i] * s[i] * t[i];
    }
    if (mass > 0.0) {
        report.mean_arrival = first / mass;
        double var = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i)
            var += w[i] * s[i] * (t[i] - report.mean_arrival) * (t[i] - report.mean_arrival);
        report.width = std::sqrt(std::max(var / mass, 0.0));
    }
    return report;
}

}  // namespace twinbarrier
