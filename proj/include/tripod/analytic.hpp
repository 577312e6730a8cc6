#pragma once

// Exact simple-wave families of the reduced system and tools to recognise
// them in solver output.
//
// Slow pulses depend on w - zeta only and keep cos(phi) sin(mu) fixed; fast
// pulses depend on w only and keep cos(phi) cos(mu) fixed.  In both cases the
// second relation pins theta:
//     slow:  sin(theta - C2) = cos(mu) / sqrt(1 - C1^2)
//     fast:  sin(theta - C4) = sin(mu) / sqrt(1 - C3^2)

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "tripod/core.hpp"
#include "tripod/errors.hpp"
#include "tripod/reduced.hpp"

namespace tripod {

enum class Family { slow, fast };

inline const char* to_string(Family f) { return f == Family::slow ? "slow" : "fast"; }

struct FamilyParams {
    Family family = Family::slow;
    double c_amp = 0.5;    ///< C1 (slow) or C3 (fast), in (0, 1)
    double c_shift = 0.0;  ///< C2 (slow) or C4 (fast)
    std::vector<double> mu;  ///< mu sampled along the family's argument
    int branch = 1;          ///< sign of sin(phi) at the first sample
};

struct FamilyProfile {
    std::vector<double> theta;
    std::vector<double> phi;
    std::vector<double> mu;
};

namespace detail {

// |cos phi| = c_amp / a(mu), sin(theta - C) = b(mu) / sqrt(1 - c_amp^2).
inline double family_a(Family f, double mu) { return f == Family::slow ? std::sin(mu) : std::cos(mu); }
inline double family_b(Family f, double mu) { return f == Family::slow ? std::cos(mu) : std::sin(mu); }

// Sign of sin(phi) relative to cos(theta - C): +sign(sin mu) for slow,
// -sign(cos mu) for fast.
inline double family_orientation(Family f, double mu) {
    return f == Family::slow ? (std::sin(mu) < 0.0 ? -1.0 : 1.0) : (std::cos(mu) < 0.0 ? 1.0 : -1.0);
}

inline double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

}  // namespace detail

/// Angles of one family member at a single mu.  eps = +1 selects
/// theta - C in [-pi/2, pi/2], eps = -1 the other half turn.
inline AngleTriple family_angles(Family f, double c_amp, double c_shift, double eps, double mu) {
    const double a = std::abs(detail::family_a(f, mu));
    const double k = std::sqrt(1.0 - c_amp * c_amp);
    const double cp = detail::clamp_unit(c_amp / a);
    const double sp = eps * detail::family_orientation(f, mu) * std::sqrt(std::max(0.0, 1.0 - cp * cp));
    const double x = std::asin(detail::clamp_unit(detail::family_b(f, mu) / k));
    AngleTriple out;
    out.phi = std::atan2(sp, cp);
    out.theta = eps > 0.0 ? c_shift + x : c_shift + std::numbers::pi - x;
    return out;
}

inline std::vector<std::string> admissibility_violations(const FamilyParams& p) {
    std::vector<std::string> v;
    const char* name = to_string(p.family);
    if (!(p.c_amp > 0.0 && p.c_amp < 1.0)) v.push_back(std::string(name) + " family: amplitude constant must lie in (0, 1)");
    if (p.branch != 1 && p.branch != -1) v.push_back(std::string(name) + " family: branch must be +1 or -1");
    if (!std::isfinite(p.c_shift)) v.push_back(std::string(name) + " family: shift constant must be finite");
    for (std::size_t i = 0; i < p.mu.size() && v.empty(); ++i) {
        const double a = std::abs(detail::family_a(p.family, p.mu[i]));
        if (!std::isfinite(p.mu[i]) || a < p.c_amp * (1.0 - 1e-12))
            v.push_back(std::string(name) + " family: |" + (p.family == Family::slow ? "sin" : "cos") +
                        " mu| < amplitude constant at sample " + std::to_string(i) + " (mu=" + std::to_string(p.mu[i]) +
                        "), |cos phi| would exceed 1");
    }
    return v;
}

/// theta, phi along a family profile.  Signs are fixed at the first sample by
/// `branch`; the profile stays on the branch continuous in its argument.
inline FamilyProfile generate_family(const FamilyParams& p) {
    if (auto v = admissibility_violations(p); !v.empty()) throw DomainError(v.front());
    FamilyProfile out;
    out.mu = p.mu;
    if (p.mu.empty()) return out;
    const double eps = static_cast<double>(p.branch) * detail::family_orientation(p.family, p.mu.front());
    out.theta.resize(p.mu.size());
    out.phi.resize(p.mu.size());
    for (std::size_t i = 0; i < p.mu.size(); ++i) {
        const AngleTriple a = family_angles(p.family, p.c_amp, p.c_shift, eps, p.mu[i]);
        out.theta[i] = a.theta;
        out.phi[i] = a.phi;
    }
    return out;
}

/// Family constants through a given state (theta, phi, mu): the member of the
/// family that passes through it.
struct FamilyConstants {
    double c_amp = 0.0;
    double c_shift = 0.0;
    double eps = 1.0;  ///< which half turn theta - C lies in
};

inline FamilyConstants family_through(Family f, const AngleTriple& at, double mu) {
    FamilyConstants c;
    c.c_amp = std::abs(std::cos(at.phi) * detail::family_a(f, mu));
    const double sp = std::sin(at.phi);
    // cos(theta - C) has the sign of sin(phi) times the family orientation.
    c.eps = sp * detail::family_orientation(f, mu) < 0.0 ? -1.0 : 1.0;
    const double k = std::sqrt(std::max(0.0, 1.0 - c.c_amp * c.c_amp));
    const double x = k > 0.0 ? std::asin(detail::clamp_unit(detail::family_b(f, mu) / k)) : 0.0;
    c.c_shift = c.eps > 0.0 ? at.theta - x : at.theta - std::numbers::pi + x;
    return c;
}

enum class PulseLabel { slow, fast, mixed, indeterminate };

inline const char* to_string(PulseLabel l) {
    switch (l) {
        case PulseLabel::slow: return "Slow";
        case PulseLabel::fast: return "Fast";
        case PulseLabel::mixed: return "Mixed";
        case PulseLabel::indeterminate: return "Indeterminate";
    }
    return "?";
}

inline constexpr double classification_threshold = 0.02;

struct PulseClassification {
    PulseLabel label = PulseLabel::indeterminate;
    double slow_invariant_spread = 0.0;  ///< relative spread of |cos phi sin mu|
    double fast_invariant_spread = 0.0;  ///< relative spread of |cos phi cos mu|
};

/// A window of samples at fixed zeta.
struct PulseWindow {
    std::vector<double> theta;
    std::vector<double> phi;
    std::vector<double> mu;
};

namespace detail {

inline double relative_spread(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    for (double v : x) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    const double mean = sum / static_cast<double>(x.size());
    if (mean == 0.0) return hi > lo ? std::numeric_limits<double>::infinity() : 0.0;
    return (hi - lo) / mean;
}

inline std::vector<double> invariant(const PulseWindow& w, Family f) {
    std::vector<double> out(w.mu.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(std::cos(w.phi[i]) * family_a(f, w.mu[i]));
    return out;
}

inline void check_window(const PulseWindow& w) {
    if (w.theta.size() != w.phi.size() || w.theta.size() != w.mu.size())
        throw DomainError("pulse window: theta, phi, mu lengths differ");
}

}  // namespace detail

/// Windows whose angles vary by less than this are Indeterminate.
inline constexpr double constant_window_tolerance = 1e-9;

inline PulseClassification classify(const PulseWindow& w) {
    detail::check_window(w);
    PulseClassification c;
    auto range = [](std::span<const double> x) {
        if (x.empty()) return 0.0;
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        return *hi - *lo;
    };
    if (std::max({range(w.theta), range(w.phi), range(w.mu)}) <= constant_window_tolerance) return c;
    c.slow_invariant_spread = detail::relative_spread(detail::invariant(w, Family::slow));
    c.fast_invariant_spread = detail::relative_spread(detail::invariant(w, Family::fast));
    const bool slow = c.slow_invariant_spread < classification_threshold;
    const bool fast = c.fast_invariant_spread < classification_threshold;
    c.label = slow && !fast ? PulseLabel::slow : fast && !slow ? PulseLabel::fast : PulseLabel::mixed;
    return c;
}

struct FitResult {
    Family family = Family::slow;
    double c_amp = 0.0;
    double c_shift = 0.0;  ///< reduced to (-pi/2, pi/2]
    double rms = 0.0;      ///< over both relations
    PulseClassification classification;
};

class FitRefused : public std::runtime_error {
public:
    FitRefused(const std::string& what, PulseClassification c) : std::runtime_error(what), classification_(c) {}
    const PulseClassification& classification() const noexcept { return classification_; }

private:
    PulseClassification classification_;
};

namespace detail {

inline double reduce_half_turn(double x) {
    const double pi = std::numbers::pi;
    double r = std::remainder(x, pi);  // [-pi/2, pi/2]
    if (r <= -0.5 * pi) r += pi;
    return r;
}

}  // namespace detail

/// Separable least squares: the amplitude constant is the mean invariant,
/// the shift minimises the theta relation over one half turn (coarse scan,
/// then Brent).
inline FitResult fit_constants(const PulseWindow& w, Family family) {
    detail::check_window(w);
    FitResult r;
    r.family = family;
    r.classification = classify(w);
    const PulseLabel want = family == Family::slow ? PulseLabel::slow : PulseLabel::fast;
    if (r.classification.label != want)
        throw FitRefused(std::string("fit: window classified ") + to_string(r.classification.label) + ", not " +
                             to_string(want),
                         r.classification);

    const std::vector<double> inv = detail::invariant(w, family);
    double sum = 0.0;
    for (double v : inv) sum += v;
    r.c_amp = sum / static_cast<double>(inv.size());
    const double k = std::sqrt(std::max(0.0, 1.0 - r.c_amp * r.c_amp));
    std::vector<double> target(w.mu.size());
    for (std::size_t i = 0; i < target.size(); ++i) target[i] = std::abs(detail::family_b(family, w.mu[i])) / k;

    auto cost = [&](double c) {
        double s = 0.0;
        for (std::size_t i = 0; i < target.size(); ++i) {
            const double e = std::abs(std::sin(w.theta[i] - c)) - target[i];
            s += e * e;
        }
        return s;
    };
    const double pi = std::numbers::pi;
    constexpr int scan = 720;
    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int j = 0; j < scan; ++j) {
        const double c = -0.5 * pi + pi * j / scan;
        if (const double v = cost(c); v < best_cost) {
            best_cost = v;
            best = j;
        }
    }
    const double step = pi / scan;
    const double centre = -0.5 * pi + step * best;
    const auto m = boost::math::tools::brent_find_minima(cost, centre - step, centre + step,
                                                         std::numeric_limits<double>::digits / 2 + 8);
    r.c_shift = detail::reduce_half_turn(m.first);

    double ss = m.second;
    for (double v : inv) ss += (v - r.c_amp) * (v - r.c_amp);
    r.rms = std::sqrt(ss / static_cast<double>(2 * inv.size()));
    return r;
}

}  // namespace tripod
