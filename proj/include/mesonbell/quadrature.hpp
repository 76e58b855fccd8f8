#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mesonbell {

struct quadrature_error : std::runtime_error {
    double best_estimate;
    quadrature_error(const std::string& msg, double estimate)
        : std::runtime_error(msg), best_estimate(estimate) {}
};

namespace detail {

/// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half;
/// mirrored in use).
inline constexpr std::array<double, 8> gl16_x = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
inline constexpr std::array<double, 8> gl16_w = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

template <class F>
double gl16_panel_2d(const F& f, double ax, double bx, double ay, double by) {
    const double cx = 0.5 * (ax + bx), hx = 0.5 * (bx - ax);
    const double cy = 0.5 * (ay + by), hy = 0.5 * (by - ay);
    double xs[16], ys[16], wx[16], wy[16];
    for (int i = 0; i < 8; ++i) {
        xs[i] = cx - hx * gl16_x[i];
        xs[15 - i] = cx + hx * gl16_x[i];
        wx[i] = wx[15 - i] = gl16_w[i];
        ys[i] = cy - hy * gl16_x[i];
        ys[15 - i] = cy + hy * gl16_x[i];
        wy[i] = wy[15 - i] = gl16_w[i];
    }
    double sum = 0.0;
    for (int i = 0; i < 16; ++i) {
        double row = 0.0;
        for (int j = 0; j < 16; ++j) row += wy[j] * f(xs[i], ys[j]);
        sum += wx[i] * row;
    }
    return sum * hx * hy;
}

} // namespace detail

/// Double integral of f over [ax,bx] x [ay,by] by tensor-product
/// Gauss-Legendre, refined by uniform panel subdivision until two
/// successive levels agree to rel_tol (relative) or abs_floor (absolute).
/// Deterministic for fixed tolerance.
template <class F>
double integrate_2d(const F& f, double ax, double bx, double ay, double by,
                    double rel_tol = 1e-6, double abs_floor = 1e-300,
                    int max_level = 6) {
    if (!(bx >= ax) || !(by >= ay))
        throw std::invalid_argument("integrate_2d: inverted integration domain");
    if (bx == ax || by == ay) return 0.0;
    double prev = detail::gl16_panel_2d(f, ax, bx, ay, by);
    for (int level = 1; level <= max_level; ++level) {
        const int n = 1 << level;
        const double hx = (bx - ax) / n, hy = (by - ay) / n;
        double cur = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                cur += detail::gl16_panel_2d(f, ax + i * hx, ax + (i + 1) * hx,
                                             ay + j * hy, ay + (j + 1) * hy);
        const double diff = std::abs(cur - prev);
        if (diff <= rel_tol * std::abs(cur) || diff <= abs_floor) return cur;
        prev = cur;
    }
    throw quadrature_error("integrate_2d: no convergence below tolerance " +
                               std::to_string(rel_tol),
                           prev);
}

/// One-dimensional counterpart, for oracle integrals over a single time.
template <class F>
double integrate_1d(const F& f, double a, double b, double rel_tol = 1e-10,
                    int max_level = 12) {
    if (b == a) return 0.0;
    auto panel = [&](double lo, double hi) {
        const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
        double s = 0.0;
        for (int i = 0; i < 8; ++i)
            s += detail::gl16_w[i] *
                 (f(c - h * detail::gl16_x[i]) + f(c + h * detail::gl16_x[i]));
        return s * h;
    };
    double prev = panel(a, b);
    for (int level = 1; level <= max_level; ++level) {
        const int n = 1 << level;
        const double h = (b - a) / n;
        double cur = 0.0;
        for (int i = 0; i < n; ++i) cur += panel(a + i * h, a + (i + 1) * h);
        if (std::abs(cur - prev) <= rel_tol * std::abs(cur)) return cur;
        prev = cur;
    }
    throw quadrature_error("integrate_1d: no convergence", prev);
}

} // namespace mesonbell
