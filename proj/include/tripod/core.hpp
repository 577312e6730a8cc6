#pragma once

// Algebraic layer of the tripod model: angle parameterization of the three
// Rabi frequencies, the two dark states, the dark-state mixing rotation and
// the assembly of the lower-level amplitudes from a mixing angle.
//
// Level |0> is the excited state; |1>,|2>,|3> are the lower states, each
// coupled to |0> by one field.  Everything here is a pure function.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace tripod {

using cplx = std::complex<double>;

/// Field angles.  theta distributes cos(phi)*Omega between fields 1 and 2,
/// phi sets the share of field 3.  nu is the dark-state mixing angle.
struct AngleTriple {
    double theta = 0.0;
    double phi = 0.0;
    double nu = 0.0;
};

/// Phases chi_j of the three fields.
using Phases = std::array<double, 3>;

inline constexpr Phases zero_phases{0.0, 0.0, 0.0};

struct RabiTriple {
    std::array<cplx, 3> omega{};

    cplx& operator[](std::size_t j) { return omega[j]; }
    const cplx& operator[](std::size_t j) const { return omega[j]; }

    /// Generalized Rabi frequency (root-sum-square of the three amplitudes).
    double generalized() const {
        return std::sqrt(std::norm(omega[0]) + std::norm(omega[1]) + std::norm(omega[2]));
    }
};

/// Amplitudes (a0, a1, a2, a3); a0 belongs to the excited state.
struct AtomState {
    std::array<cplx, 4> a{};

    cplx& operator[](std::size_t i) { return a[i]; }
    const cplx& operator[](std::size_t i) const { return a[i]; }

    double norm2() const {
        return std::norm(a[0]) + std::norm(a[1]) + std::norm(a[2]) + std::norm(a[3]);
    }

    friend AtomState operator+(AtomState x, const AtomState& y) {
        for (std::size_t i = 0; i < 4; ++i) x.a[i] += y.a[i];
        return x;
    }
    friend AtomState operator*(cplx s, AtomState x) {
        for (auto& v : x.a) v *= s;
        return x;
    }
};

/// The two dark states as 3-vectors over |1>,|2>,|3>.
struct DarkBasis {
    std::array<cplx, 3> phi1{};
    std::array<cplx, 3> phi2{};
};

using Matrix2 = std::array<std::array<double, 2>, 2>;

inline RabiTriple angles_to_rabi(double omega, const AngleTriple& a, const Phases& chi = zero_phases) {
    const double st = std::sin(a.theta), ct = std::cos(a.theta);
    const double sp = std::sin(a.phi), cp = std::cos(a.phi);
    // std::polar is unspecified for negative magnitudes, and angles here are signed.
    RabiTriple r;
    r[0] = omega * st * cp * cplx(std::cos(chi[0]), std::sin(chi[0]));
    r[1] = omega * ct * cp * cplx(std::cos(chi[1]), std::sin(chi[1]));
    r[2] = omega * sp * cplx(std::cos(chi[2]), std::sin(chi[2]));
    return r;
}

enum class AngleStatus {
    ok,
    theta_undefined,  ///< cos(phi) == 0: fields 1 and 2 vanish, theta set to 0
    undefined,        ///< Omega == 0: nothing is defined, zeros returned
};

struct AngleRecovery {
    double omega = 0.0;
    AngleTriple angles{};
    Phases chi{};
    AngleStatus status = AngleStatus::ok;
};

/// Principal-branch inverse of angles_to_rabi: theta, phi in [0, pi/2] from the
/// magnitudes, chi_j = arg(Omega_j).
inline AngleRecovery rabi_to_angles(const RabiTriple& r) {
    AngleRecovery out;
    out.omega = r.generalized();
    if (out.omega == 0.0) {
        out.status = AngleStatus::undefined;
        return out;
    }
    for (std::size_t j = 0; j < 3; ++j) out.chi[j] = std::abs(r[j]) > 0.0 ? std::arg(r[j]) : 0.0;
    const double m1 = std::abs(r[0]), m2 = std::abs(r[1]), m3 = std::abs(r[2]);
    const double m12 = std::hypot(m1, m2);
    out.angles.phi = std::atan2(m3, m12);
    if (m12 == 0.0) {
        out.angles.theta = 0.0;
        out.status = AngleStatus::theta_undefined;
    } else {
        out.angles.theta = std::atan2(m1, m2);
    }
    return out;
}

/// Signed angles relative to known field phases: the real parts of
/// Omega_j e^{-i chi_j} keep their sign, so phi ranges over [-pi/2, pi/2] and
/// theta over (-pi, pi].  This is the branch a solver with fixed phases uses.
inline AngleTriple rabi_to_signed_angles(const RabiTriple& r, const Phases& chi = zero_phases) {
    std::array<double, 3> x{};
    for (std::size_t j = 0; j < 3; ++j) x[j] = (r[j] * cplx(std::cos(chi[j]), -std::sin(chi[j]))).real();
    AngleTriple a;
    a.phi = std::atan2(x[2], std::hypot(x[0], x[1]));
    a.theta = std::atan2(x[0], x[1]);
    return a;
}

inline DarkBasis dark_states(const AngleTriple& a, const Phases& chi = zero_phases) {
    const double st = std::sin(a.theta), ct = std::cos(a.theta);
    const double sp = std::sin(a.phi), cp = std::cos(a.phi);
    const cplx e1(std::cos(chi[0]), -std::sin(chi[0]));
    const cplx e2(std::cos(chi[1]), -std::sin(chi[1]));
    const cplx e3(std::cos(chi[2]), -std::sin(chi[2]));
    DarkBasis b;
    b.phi1 = {ct * e1, -st * e2, cplx{}};
    b.phi2 = {st * sp * e1, ct * sp * e2, -cp * e3};
    return b;
}

/// Returns -H s / hbar: component 0 is sum_j Omega_j a_j, component j is
/// conj(Omega_j) a_0.  The Schroedinger equation reads i da/dt = -(result).
inline AtomState hamiltonian_apply(const RabiTriple& r, const AtomState& s) {
    AtomState out;
    out[0] = r[0] * s[1] + r[1] * s[2] + r[2] * s[3];
    for (std::size_t j = 0; j < 3; ++j) out[j + 1] = std::conj(r[j]) * s[0];
    return out;
}

inline Matrix2 mixing_matrix(double nu) {
    const double c = std::cos(nu), s = std::sin(nu);
    return {{{c, s}, {-s, c}}};
}

/// Lower-level amplitudes sin(mu) Phi1 + cos(mu) Phi2, with a0 = 0.
inline AtomState state_from_mixing(const AngleTriple& a, double mu, const Phases& chi = zero_phases) {
    const DarkBasis b = dark_states(a, chi);
    const double sm = std::sin(mu), cm = std::cos(mu);
    AtomState s;
    for (std::size_t j = 0; j < 3; ++j) s[j + 1] = sm * b.phi1[j] + cm * b.phi2[j];
    return s;
}

}  // namespace tripod
