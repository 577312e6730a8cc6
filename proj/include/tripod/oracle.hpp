#pragma once

// Full Maxwell-Schroedinger integration in the retarded frame (zeta, tau):
//     i da_j/dtau = -conj(Omega_j) a_0,   i da_0/dtau = -sum_j Omega_j a_j,
//     dOmega_j/dzeta = i G a_0 conj(a_j).
// No adiabatic approximation is made; this is the reference the reduced
// solver is checked against.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tripod/core.hpp"
#include "tripod/errors.hpp"
#include "tripod/profile.hpp"
#include "tripod/reduced.hpp"

namespace tripod {

/// RK4 steps must resolve the Rabi oscillation: dtau * Omega_max <= this.
inline constexpr double max_rabi_phase_per_step = 0.05;

struct OracleGrid {
    double dtau = 0.05;
    double dzeta = 0.1;
    double tau_max = 10.0;
    double zeta_max = 1.0;
    double G = 1.0;
    std::size_t snapshot_every = 1;   ///< zeta steps between stored slices
    std::size_t store_tau_every = 1;  ///< tau samples between stored points
    std::size_t max_cells = 4'000'000'000;       ///< cap on n_tau * n_zeta_steps
    std::size_t max_stored = 40'000'000;         ///< cap on stored RabiTriples

    std::size_t n_tau() const { return static_cast<std::size_t>(std::llround(tau_max / dtau)) + 1; }
    std::size_t n_zeta_steps() const { return static_cast<std::size_t>(std::llround(zeta_max / dzeta)); }

    std::vector<std::string> violations() const {
        std::vector<std::string> v;
        if (!(dtau > 0.0)) v.push_back("oracle.dtau must be positive");
        if (!(dzeta > 0.0)) v.push_back("oracle.dzeta must be positive");
        if (!(tau_max > 0.0)) v.push_back("oracle tau range must be positive");
        if (!(zeta_max >= 0.0)) v.push_back("oracle zeta range must be non-negative");
        if (!(G > 0.0)) v.push_back("oracle coupling G must be positive");
        if (!v.empty()) return v;
        const double cells = static_cast<double>(n_tau()) * static_cast<double>(std::max<std::size_t>(1, n_zeta_steps()));
        if (cells > static_cast<double>(max_cells))
            v.push_back("oracle grid too large: " + std::to_string(cells) + " cell updates exceeds cap " +
                        std::to_string(max_cells));
        const auto snaps = n_zeta_steps() / std::max<std::size_t>(1, snapshot_every) + 2;
        const auto stored = snaps * (n_tau() / std::max<std::size_t>(1, store_tau_every) + 1);
        if (stored > max_stored)
            v.push_back("oracle snapshot storage too large: " + std::to_string(stored) + " samples exceeds cap " +
                        std::to_string(max_stored));
        return v;
    }
};

/// Atom amplitudes along one zeta slice, one entry per tau sample.
struct AtomTrajectory {
    std::vector<AtomState> a;

    double max_norm_drift() const {
        double d = 0.0;
        for (const auto& s : a) d = std::max(d, std::abs(s.norm2() - 1.0));
        return d;
    }
    double max_excited() const {
        double m = 0.0;
        for (const auto& s : a) m = std::max(m, std::norm(s[0]));
        return m;
    }
};

namespace detail {

inline RabiTriple midpoint_field(std::span<const RabiTriple> f, std::size_t k) {
    // Field at tau_k + dtau/2 as the mean of its neighbours.  A one-sided
    // higher-order stencil weights f[k+1] below 1/2, which acts as a delay of
    // order dtau in the atomic response and makes the slice grow in zeta at a
    // rate proportional to dtau.
    RabiTriple r;
    for (std::size_t j = 0; j < 3; ++j) r[j] = 0.5 * (f[k][j] + f[k + 1][j]);
    return r;
}

inline AtomState schroedinger_rhs(const RabiTriple& r, const AtomState& s) {
    return cplx(0.0, 1.0) * hamiltonian_apply(r, s);
}

inline AtomState rk4_step(const AtomState& y, const AtomState& k1, const RabiTriple& fm, const RabiTriple& f1,
                          double dtau) {
    const cplx half(0.5 * dtau), full(dtau), sixth(dtau / 6.0), two(2.0);
    const AtomState k2 = schroedinger_rhs(fm, y + half * k1);
    const AtomState k3 = schroedinger_rhs(fm, y + half * k2);
    const AtomState k4 = schroedinger_rhs(f1, y + full * k3);
    return y + sixth * (k1 + two * k2 + two * k3 + k4);
}

inline AtomState rk4_step(const AtomState& y, const RabiTriple& f0, const RabiTriple& fm, const RabiTriple& f1,
                          double dtau) {
    return rk4_step(y, schroedinger_rhs(f0, y), fm, f1, dtau);
}

inline void check_dtau(std::span<const RabiTriple> fields, double dtau) {
    double omax = 0.0;
    for (const auto& r : fields) omax = std::max(omax, r.generalized());
    // 1% slack: fields inside the medium may exceed the entrance Omega0 slightly.
    if (dtau * omax > max_rabi_phase_per_step * 1.01)
        throw ConfigError("oracle.dtau too large: dtau*Omega_max = " + std::to_string(dtau * omax) + " exceeds " +
                          std::to_string(max_rabi_phase_per_step));
}

inline RabiTriple source_at(const AtomState& a, double G) {
    const cplx iG(0.0, G);
    RabiTriple s;
    for (std::size_t j = 0; j < 3; ++j) s[j] = iG * a[0] * std::conj(a[j + 1]);
    return s;
}

}  // namespace detail

/// Integrate one slice's atoms through its fields (uniform tau spacing dtau)
/// with classic RK4.
inline AtomTrajectory atom_evolve(std::span<const RabiTriple> fields, double dtau, const AtomState& init) {
    if (fields.empty()) return {};
    detail::check_dtau(fields, dtau);
    AtomTrajectory t;
    t.a.resize(fields.size());
    t.a[0] = init;
    for (std::size_t k = 0; k + 1 < fields.size(); ++k)
        t.a[k + 1] = detail::rk4_step(t.a[k], fields[k], detail::midpoint_field(fields, k), fields[k + 1], dtau);
    return t;
}

/// Source term i G a0 conj(a_j) of the field equation along a slice.
inline std::vector<RabiTriple> field_source(const AtomTrajectory& t, double G) {
    std::vector<RabiTriple> s(t.a.size());
    for (std::size_t k = 0; k < t.a.size(); ++k) s[k] = detail::source_at(t.a[k], G);
    return s;
}

inline std::vector<RabiTriple> euler_field_step(std::span<const RabiTriple> fields, const AtomTrajectory& traj,
                                                double dzeta, double G) {
    std::vector<RabiTriple> out(fields.begin(), fields.end());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const RabiTriple s = detail::source_at(traj.a[k], G);
        for (std::size_t j = 0; j < 3; ++j) out[k][j] += dzeta * s[j];
    }
    return out;
}

struct FieldStep {
    std::vector<RabiTriple> fields;  ///< slice at zeta + dzeta
    AtomTrajectory trajectory;       ///< atoms evolved on those fields
    std::size_t max_iterations = 0;  ///< worst local corrector count
    std::size_t unconverged = 0;     ///< tau points that hit the iteration cap
};

/// Predictor-corrector step in zeta that averages the source terms of both
/// slices,
///     Omega(zeta+dz) = Omega(zeta) + dz/2 [S(zeta) + S(zeta+dz)],
/// with the corrector iterated to self-consistency.  Atoms are causal in tau,
/// so the new slice is built in one forward tau sweep: at each tau_k the
/// Euler prediction is refined by re-evolving the atoms over the last tau
/// step on the current estimate until it stops changing.  A single global
/// corrector pass (plain Heun) amplifies the undamped resonant ringing left
/// behind by a pulse; the converged corrector is neutral on it.
inline FieldStep field_step(std::span<const RabiTriple> fields, const AtomTrajectory& traj, const AtomState& init,
                            double dtau, double dzeta, double G, std::size_t max_iterations = 30,
                            double tolerance = 1e-12) {
    const std::size_t n = fields.size();
    FieldStep out;
    out.fields.resize(n);
    out.trajectory.a.resize(n);
    if (n == 0) return out;
    auto& f = out.fields;
    auto& a = out.trajectory.a;

    const RabiTriple s00 = detail::source_at(traj.a[0], G);
    a[0] = init;
    {
        const RabiTriple s1 = detail::source_at(a[0], G);
        for (std::size_t j = 0; j < 3; ++j) f[0][j] = fields[0][j] + 0.5 * dzeta * (s00[j] + s1[j]);
    }
    for (std::size_t k = 1; k < n; ++k) {
        const RabiTriple s0 = detail::source_at(traj.a[k], G);
        for (std::size_t j = 0; j < 3; ++j) f[k][j] = fields[k][j] + dzeta * s0[j];
        const AtomState k1 = detail::schroedinger_rhs(f[k - 1], a[k - 1]);
        std::size_t it = 0;
        for (; it < max_iterations; ++it) {
            const RabiTriple fm = detail::midpoint_field(f, k - 1);
            a[k] = detail::rk4_step(a[k - 1], k1, fm, f[k], dtau);
            const RabiTriple s1 = detail::source_at(a[k], G);
            double change = 0.0;
            for (std::size_t j = 0; j < 3; ++j) {
                const cplx next = fields[k][j] + 0.5 * dzeta * (s0[j] + s1[j]);
                change = std::max(change, std::abs(next - f[k][j]));
                f[k][j] = next;
            }
            if (change <= tolerance) break;
        }
        if (it == max_iterations) ++out.unconverged;
        out.max_iterations = std::max(out.max_iterations, std::min(it + 1, max_iterations));
    }
    // The atoms at tau_k saw the last-but-one estimate of f[k]; the difference
    // is below the tolerance.
    detail::check_dtau(f, dtau * (1.0 - 1e-12));
    return out;
}

/// Field snapshots.  omega[s][k] is the slice at zeta[s], tau = k * dtau_stored.
struct RabiGrid {
    std::vector<double> zeta;
    double dtau = 0.0;  ///< spacing of the stored tau samples
    std::vector<std::vector<RabiTriple>> omega;
    std::vector<std::vector<double>> excited;  ///< |a0|^2 on the same points

    std::size_t n_tau() const { return omega.empty() ? 0 : omega.front().size(); }
    double tau(std::size_t k) const { return dtau * static_cast<double>(k); }
};

struct AdiabaticityReport {
    double max_theta_rate = 0.0;    ///< max |dtheta/dtau| / Omega
    double max_phi_rate = 0.0;      ///< max |dphi/dtau| / Omega
    double max_excited = 0.0;       ///< max |a0|^2
    double max_norm_drift = 0.0;    ///< max | sum |a_i|^2 - 1 |
    double exchange_residual = 0.0; ///< max | d_zeta Omega^2 + G d_tau |a0|^2 |
    double max_dzeta_power = 0.0;   ///< max | d_zeta Omega^2 |
    double max_dtau_excited = 0.0;  ///< max | G d_tau |a0|^2 |
};

struct OracleRun {
    RabiGrid grid;
    AdiabaticityReport report;
    double beta = 0.0;
    double omega0 = 1.0;
    double G = 1.0;
    Phases chi = zero_phases;
    double w_per_tau = 1.0;  ///< w = w_per_tau * tau for constant Omega0
};

namespace detail {

inline void track_rates(AdiabaticityReport& rep, std::span<const RabiTriple> f, double dtau, const Phases& chi) {
    if (f.size() < 2) return;
    AngleTriple prev = rabi_to_signed_angles(f[0], chi);
    for (std::size_t k = 1; k < f.size(); ++k) {
        const AngleTriple cur = rabi_to_signed_angles(f[k], chi);
        const double om = 0.5 * (f[k].generalized() + f[k - 1].generalized());
        if (om > 0.0) {
            double dth = cur.theta - prev.theta;
            if (dth > std::numbers::pi) dth -= 2.0 * std::numbers::pi;
            if (dth < -std::numbers::pi) dth += 2.0 * std::numbers::pi;
            rep.max_theta_rate = std::max(rep.max_theta_rate, std::abs(dth) / dtau / om);
            rep.max_phi_rate = std::max(rep.max_phi_rate, std::abs(cur.phi - prev.phi) / dtau / om);
        }
        prev = cur;
    }
}

inline void track_conservation(AdiabaticityReport& rep, std::span<const RabiTriple> f0, std::span<const RabiTriple> f1,
                               const AtomTrajectory& t0, const AtomTrajectory& t1, double dtau, double dzeta,
                               double G) {
    const std::size_t n = f0.size();
    for (std::size_t k = 1; k + 1 < n; ++k) {
        const double p0 = std::norm(f0[k][0]) + std::norm(f0[k][1]) + std::norm(f0[k][2]);
        const double p1 = std::norm(f1[k][0]) + std::norm(f1[k][1]) + std::norm(f1[k][2]);
        const double dz = (p1 - p0) / dzeta;
        const double d0 = (std::norm(t0.a[k + 1][0]) - std::norm(t0.a[k - 1][0])) / (2.0 * dtau);
        const double d1 = (std::norm(t1.a[k + 1][0]) - std::norm(t1.a[k - 1][0])) / (2.0 * dtau);
        const double dt = 0.5 * G * (d0 + d1);
        rep.max_dzeta_power = std::max(rep.max_dzeta_power, std::abs(dz));
        rep.max_dtau_excited = std::max(rep.max_dtau_excited, std::abs(dt));
        rep.exchange_residual = std::max(rep.exchange_residual, std::abs(dz + dt));
    }
}

inline void store_slice(RabiGrid& g, double zeta, std::span<const RabiTriple> f, const AtomTrajectory& t,
                        std::size_t every) {
    g.zeta.push_back(zeta);
    std::vector<RabiTriple> row;
    std::vector<double> ex;
    for (std::size_t k = 0; k < f.size(); k += every) {
        row.push_back(f[k]);
        ex.push_back(std::norm(t.a[k][0]));
    }
    g.omega.push_back(std::move(row));
    g.excited.push_back(std::move(ex));
}

}  // namespace detail

/// Entrance fields Omega0 * (sin th cos ph, cos th cos ph, sin ph) on the tau grid.
inline std::vector<RabiTriple> boundary_fields(const BoundaryProfile& b, const OracleGrid& g, double omega0,
                                               const Phases& chi = zero_phases) {
    const double w_per_tau = omega0 * omega0 / g.G;
    std::vector<RabiTriple> f(g.n_tau());
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double w = w_per_tau * g.dtau * static_cast<double>(k);
        f[k] = angles_to_rabi(omega0, {b.theta0(w), b.phi0(w), 0.0}, chi);
    }
    return f;
}

/// March the full system over zeta.  Every slice starts (tau = 0) in
/// sin(beta) Phi1 + cos(beta) Phi2 at the quiescent entrance angles.
/// The entrance Omega0 must be constant.
inline OracleRun propagate_full(const BoundaryProfile& b, const OracleGrid& g, const Phases& chi = zero_phases) {
    if (auto v = g.violations(); !v.empty()) throw ConfigError(std::move(v));
    if (!b.omega0_constant) throw ConfigError("oracle requires a constant entrance Omega0");
    const double omega0 = b.omega0(0.0);
    if (!(omega0 > 0.0)) throw ConfigError("oracle requires a positive Omega0");
    if (g.dtau * omega0 > max_rabi_phase_per_step * (1.0 + 1e-12))
        throw ConfigError("oracle.dtau too large: dtau*Omega0 = " + std::to_string(g.dtau * omega0) + " exceeds " +
                          std::to_string(max_rabi_phase_per_step));

    OracleRun run;
    run.beta = b.beta;
    run.omega0 = omega0;
    run.G = g.G;
    run.chi = chi;
    run.w_per_tau = omega0 * omega0 / g.G;

    const AtomState init = state_from_mixing({b.theta0(0.0), b.phi0(0.0), 0.0}, b.beta, chi);
    const std::size_t steps = g.n_zeta_steps();
    const std::size_t every = std::max<std::size_t>(1, g.snapshot_every);
    const std::size_t tau_every = std::max<std::size_t>(1, g.store_tau_every);
    run.grid.dtau = g.dtau * static_cast<double>(tau_every);

    std::vector<RabiTriple> fields = boundary_fields(b, g, omega0, chi);
    AtomTrajectory traj = atom_evolve(fields, g.dtau, init);
    auto& rep = run.report;
    auto absorb = [&](const AtomTrajectory& t) {
        rep.max_norm_drift = std::max(rep.max_norm_drift, t.max_norm_drift());
        rep.max_excited = std::max(rep.max_excited, t.max_excited());
    };
    absorb(traj);
    detail::track_rates(rep, fields, g.dtau, chi);
    detail::store_slice(run.grid, 0.0, fields, traj, tau_every);

    for (std::size_t step = 1; step <= steps; ++step) {
        FieldStep next = field_step(fields, traj, init, g.dtau, g.dzeta, g.G);
        absorb(next.trajectory);
        detail::track_conservation(rep, fields, next.fields, traj, next.trajectory, g.dtau, g.dzeta, g.G);
        fields = std::move(next.fields);
        traj = std::move(next.trajectory);
        if (step % every == 0 || step == steps) {
            detail::track_rates(rep, fields, g.dtau, chi);
            detail::store_slice(run.grid, g.dzeta * static_cast<double>(step), fields, traj, tau_every);
        }
    }
    return run;
}

inline double conservation_check(const OracleRun& run) { return run.report.exchange_residual; }

/// Oracle fields as signed angles on the stored grid, in w coordinates.
/// theta is unwrapped along w; nu is rebuilt from the angles.
inline ReducedField oracle_angles(const OracleRun& run) {
    ReducedField f;
    f.beta = run.beta;
    f.dw = run.grid.dtau * run.w_per_tau;
    f.zeta = run.grid.zeta;
    for (const auto& row : run.grid.omega) {
        std::vector<double> th(row.size()), ph(row.size());
        for (std::size_t k = 0; k < row.size(); ++k) {
            const AngleTriple a = rabi_to_signed_angles(row[k], run.chi);
            th[k] = a.theta;
            ph[k] = a.phi;
            if (k > 0) {
                while (th[k] - th[k - 1] > std::numbers::pi) th[k] -= 2.0 * std::numbers::pi;
                while (th[k] - th[k - 1] < -std::numbers::pi) th[k] += 2.0 * std::numbers::pi;
            }
        }
        f.nu.push_back(update_nu(th, ph));
        f.theta.push_back(std::move(th));
        f.phi.push_back(std::move(ph));
    }
    f.omega0.assign(f.n_w(), run.omega0);
    return f;
}

struct AngleError {
    double max_abs = 0.0;
    double rms = 0.0;
    double where_zeta = 0.0;
    double where_w = 0.0;
};

struct Comparison {
    AngleError theta;
    AngleError phi;
    std::vector<double> zeta;                     ///< matched slices
    std::vector<std::vector<double>> theta_error; ///< reduced - oracle, per matched slice, on oracle w points
    std::vector<std::vector<double>> phi_error;

    double max_abs() const { return std::max(theta.max_abs, phi.max_abs); }
};

/// Compare oracle and reduced angles on the oracle's stored (zeta, w) points.
/// Every oracle snapshot must have a reduced snapshot at the same zeta; the
/// reduced fields are cubic-interpolated in w.
inline Comparison compare_to_reduced(const OracleRun& oracle, const ReducedField& reduced) {
    const ReducedField o = oracle_angles(oracle);
    if (std::abs(o.beta - reduced.beta) > 1e-12) throw ConfigError("compare: runs use different beta");
    if (reduced.n_snapshots() == 0 || o.n_snapshots() == 0) throw ConfigError("compare: empty run");
    const double w_end = o.w(o.n_w() - 1);
    if (reduced.w(reduced.n_w() - 1) + 1e-9 < w_end) throw ConfigError("compare: reduced w range shorter than oracle");

    auto find = [&](double z) -> std::size_t {
        for (std::size_t s = 0; s < reduced.n_snapshots(); ++s)
            if (std::abs(reduced.zeta[s] - z) <= 1e-9 * std::max(1.0, std::abs(z))) return s;
        throw ConfigError("compare: no reduced snapshot at zeta=" + std::to_string(z));
    };

    // Both runs must start from the same entrance data.
    {
        const std::size_t r0 = find(0.0);
        for (std::size_t k = 0; k < o.n_w(); ++k) {
            const double w = o.w(k);
            double dth = cubic_uniform(reduced.theta[r0], 0.0, reduced.dw, w) - o.theta[0][k];
            dth = std::remainder(dth, 2.0 * std::numbers::pi);
            const double dph = cubic_uniform(reduced.phi[r0], 0.0, reduced.dw, w) - o.phi[0][k];
            if (std::abs(dth) > 1e-4 || std::abs(dph) > 1e-4)
                throw ConfigError("compare: entrance data differ at w=" + std::to_string(w));
        }
    }

    Comparison c;
    double sum_th = 0.0, sum_ph = 0.0;
    std::size_t count = 0;
    for (std::size_t s = 0; s < o.n_snapshots(); ++s) {
        const std::size_t r = find(o.zeta[s]);
        std::vector<double> eth(o.n_w()), eph(o.n_w());
        // theta is only defined modulo 2 pi; take the reduced branch at w = 0.
        const double turn = 2.0 * std::numbers::pi;
        const double shift = turn * std::round((reduced.theta[r][0] - o.theta[s][0]) / turn);
        for (std::size_t k = 0; k < o.n_w(); ++k) {
            const double w = o.w(k);
            eth[k] = cubic_uniform(reduced.theta[r], 0.0, reduced.dw, w) - (o.theta[s][k] + shift);
            eph[k] = cubic_uniform(reduced.phi[r], 0.0, reduced.dw, w) - o.phi[s][k];
            if (std::abs(eth[k]) > c.theta.max_abs) c.theta = {std::abs(eth[k]), 0.0, o.zeta[s], w};
            if (std::abs(eph[k]) > c.phi.max_abs) c.phi = {std::abs(eph[k]), 0.0, o.zeta[s], w};
            sum_th += eth[k] * eth[k];
            sum_ph += eph[k] * eph[k];
            ++count;
        }
        c.zeta.push_back(o.zeta[s]);
        c.theta_error.push_back(std::move(eth));
        c.phi_error.push_back(std::move(eph));
    }
    c.theta.rms = std::sqrt(sum_th / static_cast<double>(count));
    c.phi.rms = std::sqrt(sum_ph / static_cast<double>(count));
    return c;
}

}  // namespace tripod
