#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "error.hpp"

namespace zeno::quad {

/// Sum with pairwise (cascade) reduction; deterministic for a fixed input order.
template <class T>
T pairwise_sum(std::span<const T> values) {
    if (values.empty()) return T{};
    if (values.size() <= 8) {
        T acc = values[0];
        for (std::size_t i = 1; i < values.size(); ++i) acc += values[i];
        return acc;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
    double magnitude = 0.0;  ///< Kronrod estimate of int |f|
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
AdaptiveResult gk15(const F& f, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double kronrod = fc * kronrod_w[7];
    double gauss = fc * gauss_w[3];
    double magnitude = std::abs(fc) * kronrod_w[7];
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kronrod_x[i];
        const double lo = f(centre - dx);
        const double hi = f(centre + dx);
        kronrod += kronrod_w[i] * (lo + hi);
        magnitude += kronrod_w[i] * (std::abs(lo) + std::abs(hi));
        if (i % 2 == 1) gauss += gauss_w[i / 2] * (lo + hi);
    }
    return {kronrod * half, std::abs((kronrod - gauss) * half), 1, magnitude * std::abs(half)};
}

struct Panel {
    double a;
    double b;
    int depth;
    AdaptiveResult estimate;
};

} // namespace detail

/// Globally adaptive Gauss-Kronrod 7/15 integration of f over [a, b] to an
/// absolute tolerance `tol`. The panel with the largest error estimate is
/// bisected until the summed estimate is below tol (or below the rounding
/// floor of int |f|). A panel that would need more than `max_depth` bisections
/// ends the search with ConvergenceError.
template <class F>
AdaptiveResult integrate(const F& f, double a, double b, double tol, int max_depth = 40) {
    AdaptiveResult acc;
    if (a == b) return acc;
    if (!(tol > 0.0)) throw ValidationError("quad::integrate: tolerance must be positive");
    std::vector<detail::Panel> panels{{a, b, 0, detail::gk15(f, a, b)}};
    auto worse = [](const detail::Panel& x, const detail::Panel& y) { return x.estimate.error < y.estimate.error; };
    auto totals = [&] {
        AdaptiveResult t;
        std::vector<detail::Panel> ordered = panels;
        std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
        for (const auto& p : ordered) {
            t.value += p.estimate.value;
            t.error += p.estimate.error;
            t.magnitude += p.estimate.magnitude;
        }
        t.intervals = static_cast<int>(panels.size());
        return t;
    };
    double error = panels.front().estimate.error;
    double magnitude = panels.front().estimate.magnitude;
    while (true) {
        // below roughly 50 ulp of int |f| the Gauss/Kronrod gap is rounding noise
        const double noise = 50.0 * std::numeric_limits<double>::epsilon() * magnitude;
        if (error <= std::max(tol, noise)) return totals();
        std::pop_heap(panels.begin(), panels.end(), worse);
        const detail::Panel worst = panels.back();
        panels.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (worst.depth >= max_depth || !(mid > worst.a && mid < worst.b)) {
            panels.push_back(worst);
            throw ConvergenceError("adaptive quadrature exceeded recursion depth", totals().value);
        }
        const detail::Panel left{worst.a, mid, worst.depth + 1, detail::gk15(f, worst.a, mid)};
        const detail::Panel right{mid, worst.b, worst.depth + 1, detail::gk15(f, mid, worst.b)};
        error += left.estimate.error + right.estimate.error - worst.estimate.error;
        magnitude += left.estimate.magnitude + right.estimate.magnitude - worst.estimate.magnitude;
        for (const auto& p : {left, right}) {
            panels.push_back(p);
            std::push_heap(panels.begin(), panels.end(), worse);
        }
    }
}

/// Composite Simpson weights for the nodes `x` (possibly non-uniform); the
/// node count must be odd (even number of intervals).
inline std::vector<double> simpson_weights(std::span<const double> x) {
    if (x.size() < 3 || x.size() % 2 == 0)
        throw ValidationError("simpson_weights: need an even number (>= 2) of intervals");
    std::vector<double> w(x.size(), 0.0);
    for (std::size_t i = 0; i + 2 < x.size(); i += 2) {
        const double h1 = x[i + 1] - x[i];
        const double h2 = x[i + 2] - x[i + 1];
        if (!(h1 > 0.0 && h2 > 0.0)) throw ValidationError("simpson_weights: nodes must increase");
        const double span = h1 + h2;
        w[i] += span / 6.0 * (2.0 - h2 / h1);
        w[i + 1] += span * span * span / (6.0 * h1 * h2);
        w[i + 2] += span / 6.0 * (2.0 - h1 / h2);
    }
    return w;
}

} // namespace zeno::quad
