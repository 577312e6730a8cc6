#pragma once

// Adiabatic propagation in (zeta, w): the two angles obey a quasilinear
// hyperbolic system with characteristic speeds 0 and 1, coupled through the
// dark-state mixing angle nu, which is a w-integral over each slice.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tripod/errors.hpp"
#include "tripod/profile.hpp"

namespace tripod {

/// Reduced equations are singular where cos(phi) vanishes.
inline constexpr double cos_phi_floor = 1e-3;

/// Superposition angle mu of the lower-level state sin(mu) Phi1 + cos(mu) Phi2.
/// Adiabatic transport rotates the dark pair by nu (d nu = sin(phi) d theta),
/// which in this parameterization lowers mu.
inline double superposition_angle(double beta, double nu) { return beta - nu; }

struct Grid {
    double dw = 0.01;
    double dzeta = 0.01;
    double w_max = 1.0;
    double zeta_max = 1.0;

    std::size_t n_w() const { return static_cast<std::size_t>(std::llround(w_max / dw)) + 1; }
    std::size_t n_zeta_steps() const { return static_cast<std::size_t>(std::llround(zeta_max / dzeta)); }

    /// Every violation, empty when the grid is usable.
    std::vector<std::string> violations() const {
        std::vector<std::string> v;
        if (!(dw > 0.0) || !std::isfinite(dw)) v.push_back("grid.dw must be positive");
        if (!(dzeta > 0.0) || !std::isfinite(dzeta)) v.push_back("grid.dzeta must be positive");
        if (!(w_max > 0.0) || !std::isfinite(w_max)) v.push_back("grid.w_max must be positive");
        if (!(zeta_max >= 0.0) || !std::isfinite(zeta_max)) v.push_back("grid.zeta_max must be non-negative");
        if (!v.empty()) return v;
        if (dzeta > dw * (1.0 + 1e-12))
            v.push_back("CFL violated: grid.dzeta (" + std::to_string(dzeta) + ") exceeds grid.dw (" +
                        std::to_string(dw) + ")");
        const auto on_grid = [](double len, double step) {
            const double n = len / step;
            return std::abs(n - std::round(n)) <= 1e-6 * std::max(1.0, n);
        };
        if (!on_grid(w_max, dw)) v.push_back("grid.w_max is not a multiple of grid.dw");
        if (!on_grid(zeta_max, dzeta)) v.push_back("grid.zeta_max is not a multiple of grid.dzeta");
        return v;
    }

    void validate() const {
        if (auto v = violations(); !v.empty()) throw ConfigError(std::move(v));
    }
};

/// Monotone map between retarded time tau and nonlinear time
/// w = (1/G) int_{-inf}^{tau} Omega0^2.
class NonlinearTime {
public:
    NonlinearTime(std::vector<double> tau, std::vector<double> w) : tau_(std::move(tau)), w_(std::move(w)) {}

    const std::vector<double>& tau() const { return tau_; }
    const std::vector<double>& w() const { return w_; }

    double to_w(double t) const { return lookup(tau_, w_, t); }

    /// Inverse; on flat stretches (Omega0 = 0) returns the earliest tau.
    double to_tau(double w) const {
        if (w <= w_.front()) return tau_.front();
        if (w >= w_.back()) return tau_.back();
        const auto it = std::lower_bound(w_.begin(), w_.end(), w);
        const auto i = static_cast<std::size_t>(it - w_.begin());
        if (w_[i] == w) return tau_[i];
        const double f = (w - w_[i - 1]) / (w_[i] - w_[i - 1]);
        return tau_[i - 1] + f * (tau_[i] - tau_[i - 1]);
    }

private:
    static double lookup(const std::vector<double>& x, const std::vector<double>& y, double v) {
        if (v <= x.front()) return y.front();
        if (v >= x.back()) return y.back();
        const auto it = std::upper_bound(x.begin(), x.end(), v);
        const auto i = static_cast<std::size_t>(it - x.begin());
        const double f = (v - x[i - 1]) / (x[i] - x[i - 1]);
        return y[i - 1] + f * (y[i] - y[i - 1]);
    }

    std::vector<double> tau_;
    std::vector<double> w_;
};

/// Trapezoidal accumulation of Omega0^2 / G over increasing tau samples.
inline NonlinearTime nonlinear_time(std::span<const double> tau, std::span<const double> omega0, double G) {
    if (tau.size() != omega0.size() || tau.size() < 2)
        throw DomainError("nonlinear_time: need matching tau/omega0 samples (at least two)");
    if (!(G > 0.0) || !std::isfinite(G)) throw DomainError("nonlinear_time: G must be positive");
    std::vector<double> w(tau.size(), 0.0);
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (!std::isfinite(tau[i]) || !std::isfinite(omega0[i])) throw DomainError("nonlinear_time: NaN input");
        if (i > 0) {
            if (!(tau[i] > tau[i - 1])) throw DomainError("nonlinear_time: tau must increase");
            const double h = tau[i] - tau[i - 1];
            w[i] = w[i - 1] + 0.5 * h * (omega0[i - 1] * omega0[i - 1] + omega0[i] * omega0[i]) / G;
        }
    }
    return {std::vector<double>(tau.begin(), tau.end()), std::move(w)};
}

struct AngleRates {
    double theta_zeta = 0.0;
    double phi_zeta = 0.0;
};

/// zeta-derivatives of (theta, phi) from their w-derivatives.  The advection
/// matrix has eigenvalues {0, 1}.
inline AngleRates quasilinear_rhs(double theta_w, double phi_w, double /*theta*/, double phi, double mu,
                                  double zeta = std::nan(""), double w = std::nan("")) {
    const double cp = std::cos(phi);
    if (!(std::abs(cp) >= cos_phi_floor))
        throw SingularityError("|cos phi| below " + std::to_string(cos_phi_floor) + " at zeta=" +
                                   std::to_string(zeta) + ", w=" + std::to_string(w),
                               zeta, w);
    const double s = std::sin(mu), c = std::cos(mu);
    return {(s * c / cp) * phi_w - s * s * theta_w, -c * c * phi_w + s * c * cp * theta_w};
}

/// nu(w) = int_0^w sin(phi) dtheta, trapezoidal in w; nu(0) = 0.
inline std::vector<double> update_nu(std::span<const double> theta, std::span<const double> phi) {
    std::vector<double> nu(theta.size(), 0.0);
    for (std::size_t i = 1; i < theta.size(); ++i)
        nu[i] = nu[i - 1] + 0.5 * (std::sin(phi[i]) + std::sin(phi[i - 1])) * (theta[i] - theta[i - 1]);
    return nu;
}

/// Snapshots of the angle fields.  Row s holds the slice at zeta[s].
struct ReducedField {
    double beta = 0.0;
    double dw = 0.0;
    std::vector<double> zeta;
    std::vector<std::vector<double>> theta;
    std::vector<std::vector<double>> phi;
    std::vector<std::vector<double>> nu;  ///< empty in the mixed-state regime
    std::vector<double> omega0;           ///< entrance Omega0 on the w grid; never modified

    std::size_t n_w() const { return theta.empty() ? 0 : theta.front().size(); }
    std::size_t n_snapshots() const { return zeta.size(); }
    double w(std::size_t i) const { return dw * static_cast<double>(i); }
    bool has_nu() const { return !nu.empty(); }
    double mu(std::size_t s, std::size_t i) const { return superposition_angle(beta, nu[s][i]); }
};

struct SliceView {
    std::span<const double> theta;
    std::span<const double> phi;
    std::span<const double> nu;
};

using SliceObserver = std::function<void(std::size_t step, double zeta, const SliceView&)>;

struct PropagateOptions {
    std::size_t snapshot_every = 1;  ///< store every k-th slice (the last one always)
    SliceObserver observer;          ///< sees every slice, stored or not
};

namespace detail {

inline void check_cos(double phi, double zeta, double w) {
    if (!(std::abs(std::cos(phi)) >= cos_phi_floor))
        throw SingularityError("|cos phi| below " + std::to_string(cos_phi_floor) + " at zeta=" +
                                   std::to_string(zeta) + ", w=" + std::to_string(w),
                               zeta, w);
}

inline void store(ReducedField& f, double zeta, const std::vector<double>& th, const std::vector<double>& ph,
                  const std::vector<double>* nu) {
    f.zeta.push_back(zeta);
    f.theta.push_back(th);
    f.phi.push_back(ph);
    if (nu) f.nu.push_back(*nu);
}

inline std::vector<double> sample_omega0(const BoundaryProfile& b, std::size_t n, double dw) {
    // omega0 is a function of tau; w == tau when it is constant 1 (G = 1).
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = b.omega0(dw * static_cast<double>(i));
    return out;
}

}  // namespace detail

/// March the reduced system from zeta = 0 to zeta_max.
///
/// Each step is a two-stage characteristic update.  The predictor is the
/// first-order upwind step of quasilinear_rhs.  The corrector re-imposes the
/// two characteristic relations
///     l0 . dU = 0 along w = const             (speed 0)
///     l1 . dU = 0 along w - zeta = const      (speed 1)
/// with l0 = (cos mu, sin mu / cos phi) and l1 = (-sin mu, cos mu / cos phi)
/// evaluated at the midpoint of each characteristic, the foot of the speed-1
/// characteristic being linearly interpolated when dzeta < dw.  For frozen
/// coefficients this reduces to the upwind step, and at dzeta = dw linear
/// advection is exact.  nu is rebuilt from each slice and mu = beta - nu.
inline ReducedField propagate(const BoundaryProfile& b, const Grid& g, const PropagateOptions& opt = {}) {
    g.validate();
    const std::size_t n = g.n_w();
    const std::size_t steps = g.n_zeta_steps();
    const double dw = g.dw, dz = g.dzeta, lam = dz / dw;
    const std::size_t every = std::max<std::size_t>(1, opt.snapshot_every);

    std::vector<double> th = sample(b.theta0, 0.0, dw, n);
    std::vector<double> ph = sample(b.phi0, 0.0, dw, n);
    for (std::size_t i = 0; i < n; ++i) detail::check_cos(ph[i], 0.0, dw * static_cast<double>(i));
    std::vector<double> nu = update_nu(th, ph);

    ReducedField f;
    f.beta = b.beta;
    f.dw = dw;
    f.omega0 = detail::sample_omega0(b, n, dw);
    detail::store(f, 0.0, th, ph, &nu);
    if (opt.observer) opt.observer(0, 0.0, {th, ph, nu});

    std::vector<double> th_p(n), ph_p(n), th_n(n), ph_n(n);
    for (std::size_t step = 1; step <= steps; ++step) {
        const double zeta = dz * static_cast<double>(step);

        // Predictor: upwind Euler.
        th_p[0] = th[0];
        ph_p[0] = ph[0];
        for (std::size_t i = 1; i < n; ++i) {
            const auto r = quasilinear_rhs((th[i] - th[i - 1]) / dw, (ph[i] - ph[i - 1]) / dw, th[i], ph[i],
                                           superposition_angle(b.beta, nu[i]), zeta - dz,
                                           dw * static_cast<double>(i));
            th_p[i] = th[i] + dz * r.theta_zeta;
            ph_p[i] = ph[i] + dz * r.phi_zeta;
        }
        const std::vector<double> nu_p = update_nu(th_p, ph_p);

        // Corrector on the characteristics.
        th_n[0] = th[0];
        ph_n[0] = ph[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double wi = dw * static_cast<double>(i);
            const double th_f = th[i] - lam * (th[i] - th[i - 1]);
            const double ph_f = ph[i] - lam * (ph[i] - ph[i - 1]);
            const double nu_f = nu[i] - lam * (nu[i] - nu[i - 1]);

            const double ph0 = 0.5 * (ph[i] + ph_p[i]);
            const double mu0 = superposition_angle(b.beta, 0.5 * (nu[i] + nu_p[i]));
            const double ph1 = 0.5 * (ph_f + ph_p[i]);
            const double mu1 = superposition_angle(b.beta, 0.5 * (nu_f + nu_p[i]));
            detail::check_cos(ph0, zeta, wi);
            detail::check_cos(ph1, zeta, wi);

            const double a00 = std::cos(mu0), a01 = std::sin(mu0) / std::cos(ph0);
            const double a10 = -std::sin(mu1), a11 = std::cos(mu1) / std::cos(ph1);
            const double r0 = a00 * th[i] + a01 * ph[i];
            const double r1 = a10 * th_f + a11 * ph_f;
            const double det = a00 * a11 - a01 * a10;
            th_n[i] = (r0 * a11 - a01 * r1) / det;
            ph_n[i] = (a00 * r1 - a10 * r0) / det;
            detail::check_cos(ph_n[i], zeta, wi);
        }
        th.swap(th_n);
        ph.swap(ph_n);
        nu = update_nu(th, ph);

        if (opt.observer) opt.observer(step, zeta, {th, ph, nu});
        if (step % every == 0 || step == steps) detail::store(f, zeta, th, ph, &nu);
    }
    return f;
}

/// Equal-weight mixture of the two dark states: both angles advect at half
/// speed, theta(zeta, w) = theta0(w - zeta/2).  Evaluated in closed form from
/// the boundary functions.  nu is not defined here.
inline ReducedField mixed_state_propagate(const BoundaryProfile& b, const Grid& g, const PropagateOptions& opt = {}) {
    g.validate();
    const std::size_t n = g.n_w();
    const std::size_t steps = g.n_zeta_steps();
    const std::size_t every = std::max<std::size_t>(1, opt.snapshot_every);
    const double theta_q = b.theta0(0.0), phi_q = b.phi0(0.0);

    ReducedField f;
    f.beta = b.beta;
    f.dw = g.dw;
    f.omega0 = detail::sample_omega0(b, n, g.dw);

    std::vector<double> th(n), ph(n);
    for (std::size_t step = 0; step <= steps; ++step) {
        const double zeta = g.dzeta * static_cast<double>(step);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = g.dw * static_cast<double>(i) - 0.5 * zeta;
            th[i] = x >= 0.0 ? b.theta0(x) : theta_q;
            ph[i] = x >= 0.0 ? b.phi0(x) : phi_q;
        }
        if (opt.observer) opt.observer(step, zeta, {th, ph, {}});
        if (step % every == 0 || step == steps) detail::store(f, zeta, th, ph, nullptr);
    }
    return f;
}

/// Left-hand side of the solvability condition of the two characteristic
/// relations,
///     theta_u1 theta_u2 + phi_u1 phi_u2 / cos^2 phi,
/// with d/du1 = d/dzeta|_w and d/du2 = d/dzeta|_w + d/dw|_zeta, by centered
/// differences.  Vanishes on exact solutions.
inline double solvability_stencil(std::span<const double> th_prev, std::span<const double> th,
                                  std::span<const double> th_next, std::span<const double> ph_prev,
                                  std::span<const double> ph, std::span<const double> ph_next, std::size_t i,
                                  double dzeta, double dw) {
    const double th_z = (th_next[i] - th_prev[i]) / (2.0 * dzeta);
    const double ph_z = (ph_next[i] - ph_prev[i]) / (2.0 * dzeta);
    const double th_w = (th[i + 1] - th[i - 1]) / (2.0 * dw);
    const double ph_w = (ph[i + 1] - ph[i - 1]) / (2.0 * dw);
    const double c = std::cos(ph[i]);
    return th_z * (th_z + th_w) + ph_z * (ph_z + ph_w) / (c * c);
}

struct SolvabilityResidual {
    std::vector<double> zeta;              ///< interior slice positions
    std::vector<std::vector<double>> lhs;  ///< per interior slice, per w sample (edges 0)
    double max_abs = 0.0;
};

/// Residual over consecutive snapshots (uniform snapshot spacing required).
inline SolvabilityResidual solvability_residual(const ReducedField& f) {
    SolvabilityResidual out;
    const std::size_t ns = f.n_snapshots(), n = f.n_w();
    if (ns < 3 || n < 3) return out;
    for (std::size_t s = 1; s + 1 < ns; ++s) {
        const double h0 = f.zeta[s] - f.zeta[s - 1], h1 = f.zeta[s + 1] - f.zeta[s];
        if (std::abs(h0 - h1) > 1e-9 * std::max(1.0, std::abs(h0)))
            throw DomainError("solvability_residual: snapshots are not uniformly spaced in zeta");
        std::vector<double> row(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            row[i] = solvability_stencil(f.theta[s - 1], f.theta[s], f.theta[s + 1], f.phi[s - 1], f.phi[s],
                                         f.phi[s + 1], i, h0, f.dw);
            out.max_abs = std::max(out.max_abs, std::abs(row[i]));
        }
        out.zeta.push_back(f.zeta[s]);
        out.lhs.push_back(std::move(row));
    }
    return out;
}

/// Streaming variant: feed every slice of a run (as a PropagateOptions
/// observer) and read the max residual at the end without storing history.
class SolvabilityMonitor {
public:
    SolvabilityMonitor(double dzeta, double dw) : dzeta_(dzeta), dw_(dw) {}

    void operator()(std::size_t, double, const SliceView& s) {
        th_[0].swap(th_[1]);
        th_[1].swap(th_[2]);
        ph_[0].swap(ph_[1]);
        ph_[1].swap(ph_[2]);
        th_[2].assign(s.theta.begin(), s.theta.end());
        ph_[2].assign(s.phi.begin(), s.phi.end());
        if (++seen_ < 3) return;
        const std::size_t n = th_[1].size();
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double r = std::abs(solvability_stencil(th_[0], th_[1], th_[2], ph_[0], ph_[1], ph_[2], i, dzeta_, dw_));
            if (r > max_abs_) {
                max_abs_ = r;
                where_zeta_ = static_cast<double>(seen_ - 2) * dzeta_;
                where_w_ = static_cast<double>(i) * dw_;
            }
        }
    }

    double max_abs() const { return max_abs_; }
    double where_zeta() const { return where_zeta_; }
    double where_w() const { return where_w_; }

private:
    double dzeta_, dw_;
    std::vector<double> th_[3], ph_[3];
    std::size_t seen_ = 0;
    double max_abs_ = 0.0, where_zeta_ = 0.0, where_w_ = 0.0;
};

}  // namespace tripod
