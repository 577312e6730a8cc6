#pragma once

// CGS conversions between laboratory quantities and the dimensionless
// solver units (G = 1, Omega0 = 1).

#include <cmath>
#include <numbers>

#include "tripod/errors.hpp"

namespace tripod {

namespace cgs {
inline constexpr double hbar = 1.0546e-27;  // erg s
inline constexpr double c = 2.9979e10;      // cm/s
}  // namespace cgs

/// Medium parameters in CGS.  The coupling G is always recomputed.
struct MediumParams {
    double d = 0.0;           ///< transition dipole moment, esu cm
    double k = 0.0;           ///< wave number, 1/cm
    double n = 0.0;           ///< number density, 1/cm^3
    double hbar = cgs::hbar;  ///< erg s
    double c = cgs::c;        ///< cm/s

    double G() const;
};

/// G = 2 pi k n d^2 / hbar, in 1/(s cm).
inline double coupling_constant(double d, double k, double n, double hbar = cgs::hbar) {
    if (!std::isfinite(d) || !std::isfinite(k) || !std::isfinite(n) || !std::isfinite(hbar))
        throw DomainError("coupling_constant: non-finite input");
    if (!(hbar > 0.0)) throw DomainError("coupling_constant: hbar must be positive");
    return 2.0 * std::numbers::pi * k * n * d * d / hbar;
}

inline double MediumParams::G() const { return coupling_constant(d, k, n, hbar); }

/// Rabi frequency d E / hbar of a wave with intensity I (erg s^-1 cm^-2),
/// field written as E exp[i k (z - c t)] + c.c., so I = c |E|^2 / (2 pi).
inline double rabi_from_intensity(double intensity, const MediumParams& p) {
    if (!std::isfinite(intensity)) throw DomainError("rabi_from_intensity: non-finite intensity");
    if (intensity < 0.0) throw DomainError("rabi_from_intensity: negative intensity");
    const double field = std::sqrt(2.0 * std::numbers::pi * intensity / p.c);
    return p.d * field / p.hbar;
}

enum class PulseFamily { slow, fast, mixed };

/// Group velocity of a pulse family: slow (1/c + G/Omega^2)^-1, fast c,
/// mixed-state (1/c + G/(2 Omega^2))^-1.
inline double group_velocity(double omega, double G, double c, PulseFamily family) {
    if (family == PulseFamily::fast) return c;
    if (!(omega > 0.0)) throw DomainError("group_velocity: Omega must be positive for slow/mixed pulses");
    const double weight = family == PulseFamily::slow ? 1.0 : 0.5;
    return 1.0 / (1.0 / c + weight * G / (omega * omega));
}

/// Extra transit time over a length L relative to propagation at c.
inline double delay(double length, double group_velocity, double c) {
    return length * (1.0 / group_velocity - 1.0 / c);
}

}  // namespace tripod
