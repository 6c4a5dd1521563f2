#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "twinbarrier/errors.hpp"

namespace twinbarrier {

/// Nodes of the composite Simpson rule on [lo, hi] with n intervals (n even).
inline std::vector<double> simpson_nodes(double lo, double hi, int n) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("Simpson needs an even n >= 2");
    if (!(hi > lo)) throw std::invalid_argument("empty integration interval");
    std::vector<double> x(static_cast<std::size_t>(n) + 1);
    const double h = (hi - lo) / n;
    for (int j = 0; j <= n; ++j) x[static_cast<std::size_t>(j)] = lo + j * h;
    x.back() = hi;
    return x;
}

/// Matching weights: h/3 {1, 4, 2, ..., 4, 1}.
inline std::vector<double> simpson_weights(double lo, double hi, int n) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("Simpson needs an even n >= 2");
    std::vector<double> w(static_cast<std::size_t>(n) + 1);
    const double h = (hi - lo) / n;
    w.front() = w.back() = h / 3.0;
    for (int j = 1; j < n; ++j) w[static_cast<std::size_t>(j)] = (j % 2 ? 4.0 : 2.0) * h / 3.0;
    return w;
}

/// Composite Simpson integral of f over [lo, hi] with n intervals.
template <typename F>
auto simpson(F&& f, double lo, double hi, int n) -> decltype(f(lo)) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("Simpson needs an even n >= 2");
    if (!(hi > lo)) throw std::invalid_argument("empty integration interval");
    const double h = (hi - lo) / n;
    auto acc = f(lo) + f(hi);
    for (int j = 1; j < n; ++j) acc += f(lo + j * h) * ((j % 2) ? 4.0 : 2.0);
    return acc * (h / 3.0);
}

/// Simpson with interval doubling until two successive refinements agree to
/// rel_tol.  Throws QuadratureNotConverged once max_intervals is exceeded.
template <typename F>
auto simpson_converged(F&& f, double lo, double hi, double rel_tol = 1e-8, int n_start = 64,
                       int max_intervals = (1 << 16), int* n_used = nullptr)
    -> decltype(f(lo)) {
    auto prev = simpson(f, lo, hi, n_start);
    double deviation = 0.0;
    for (int n = 2 * n_start; n <= max_intervals; n *= 2) {
        auto cur = simpson(f, lo, hi, n);
        deviation = std::abs(cur - prev);
        const double scale = std::max(std::abs(cur), 1e-300);
        if (deviation <= rel_tol * scale) {
            if (n_used) *n_used = n;
            return cur;
        }
        prev = cur;
    }
    throw QuadratureNotConverged("Simpson refinement stalled at " +
                                 std::to_string(max_intervals) + " intervals, deviation " +
                                 std::to_string(deviation));
}

}  // namespace twinbarrier
