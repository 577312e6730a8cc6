#pragma once

// Entrance (zeta = 0) data: smooth ramp/bump segments and the boundary
// profile consumed by both solvers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace tripod {

/// C2 step on [0,1]: 6x^5 - 15x^4 + 10x^3, clamped outside.
inline double smoothstep(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
}

inline double smoothstep_derivative(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const double t = x * (1.0 - x);
    return 30.0 * t * t;
}

enum class SegmentShape { ramp, bump };

/// A ramp rises by `amplitude` across [center - width/2, center + width/2];
/// a bump rises and falls back over the same support.
struct Segment {
    SegmentShape shape = SegmentShape::bump;
    double center = 0.0;
    double width = 1.0;
    double amplitude = 0.0;

    double lo() const { return center - 0.5 * width; }
    double hi() const { return center + 0.5 * width; }

    double operator()(double w) const {
        if (shape == SegmentShape::ramp) return amplitude * smoothstep((w - center) / width + 0.5);
        return amplitude * smoothstep(1.0 - std::abs(w - center) / (0.5 * width));
    }

    double derivative(double w) const {
        if (shape == SegmentShape::ramp) return amplitude * smoothstep_derivative((w - center) / width + 0.5) / width;
        const double x = 1.0 - std::abs(w - center) / (0.5 * width);
        const double sign = w < center ? 1.0 : -1.0;
        return amplitude * sign * smoothstep_derivative(x) / (0.5 * width);
    }
};

/// Constant base plus a sum of segments.
struct SegmentProfile {
    double base = 0.0;
    std::vector<Segment> segments;

    double operator()(double w) const {
        double v = base;
        for (const auto& s : segments) v += s(w);
        return v;
    }

    double derivative(double w) const {
        double v = 0.0;
        for (const auto& s : segments) v += s.derivative(w);
        return v;
    }
};

/// Linear interpolation on a uniform grid starting at x0; clamps outside.
inline double interp_uniform(std::span<const double> y, double x0, double dx, double x) {
    if (y.empty()) return 0.0;
    const double s = (x - x0) / dx;
    if (s <= 0.0) return y.front();
    const auto last = static_cast<double>(y.size() - 1);
    if (s >= last) return y.back();
    const auto i = static_cast<std::size_t>(s);
    const double f = s - static_cast<double>(i);
    return y[i] + f * (y[i + 1] - y[i]);
}

/// Cubic (Catmull-Rom) interpolation on a uniform grid; clamps outside.
inline double cubic_uniform(std::span<const double> y, double x0, double dx, double x) {
    const std::size_t n = y.size();
    if (n < 4) return interp_uniform(y, x0, dx, x);
    const double s = (x - x0) / dx;
    if (s <= 0.0) return y.front();
    if (s >= static_cast<double>(n - 1)) return y.back();
    const auto i = static_cast<std::size_t>(s);
    const double t = s - static_cast<double>(i);
    const double p0 = y[i == 0 ? 0 : i - 1];
    const double p1 = y[i];
    const double p2 = y[i + 1];
    const double p3 = y[std::min(i + 2, n - 1)];
    return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
}

/// Entrance data in nonlinear-time coordinates.  theta0/phi0 are functions of
/// w; omega0 is the entrance generalized Rabi frequency as a function of tau
/// (dimensionless; constant 1 unless a scenario says otherwise).
struct BoundaryProfile {
    std::function<double(double)> theta0;
    std::function<double(double)> phi0;
    std::function<double(double)> omega0 = [](double) { return 1.0; };
    double beta = 0.0;
    bool omega0_constant = true;

    /// Optional derivative callbacks used for adiabaticity checks; finite
    /// differences are used when absent.
    std::function<double(double)> dtheta0;
    std::function<double(double)> dphi0;
};

inline std::vector<double> sample(const std::function<double(double)>& f, double x0, double dx, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = f(x0 + dx * static_cast<double>(i));
    return out;
}

}  // namespace tripod
