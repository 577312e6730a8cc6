#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "tripod/core.hpp"

using namespace tripod;

namespace {

std::vector<AngleTriple> sample_angles(int n, unsigned seed = 7) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> th(-3.0, 3.0), ph(-1.5, 1.5), nu(-3.0, 3.0);
    std::vector<AngleTriple> out;
    for (int i = 0; i < n; ++i) out.push_back({th(rng), ph(rng), nu(rng)});
    return out;
}

cplx dot(const std::array<cplx, 3>& a, const std::array<cplx, 3>& b) {
    return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1] + std::conj(a[2]) * b[2];
}

}  // namespace

TEST(AnglesToRabi, GeneralizedFrequencyIsOmega) {
    for (const auto& a : sample_angles(200)) {
        const RabiTriple r = angles_to_rabi(1.7, a, {0.3, -1.1, 2.0});
        EXPECT_NEAR(r.generalized(), 1.7, 1e-14);
    }
}

TEST(AnglesToRabi, SharesMatchParameterization) {
    const RabiTriple r = angles_to_rabi(2.0, {0.4, 0.3, 0.0});
    EXPECT_NEAR(r[0].real(), 2.0 * std::sin(0.4) * std::cos(0.3), 1e-15);
    EXPECT_NEAR(r[1].real(), 2.0 * std::cos(0.4) * std::cos(0.3), 1e-15);
    EXPECT_NEAR(r[2].real(), 2.0 * std::sin(0.3), 1e-15);
}

TEST(RabiToAngles, PrincipalRoundTrip) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.01, std::numbers::pi / 2 - 0.01), c(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const AngleTriple a{u(rng), u(rng), 0.0};
        const Phases chi{c(rng), c(rng), c(rng)};
        const AngleRecovery back = rabi_to_angles(angles_to_rabi(0.8, a, chi));
        ASSERT_EQ(back.status, AngleStatus::ok);
        EXPECT_NEAR(back.omega, 0.8, 1e-14);
        EXPECT_NEAR(back.angles.theta, a.theta, 1e-12);
        EXPECT_NEAR(back.angles.phi, a.phi, 1e-12);
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(std::remainder(back.chi[j] - chi[j], 2 * std::numbers::pi), 0.0, 1e-12);
    }
}

TEST(RabiToAngles, DegenerateCases) {
    EXPECT_EQ(rabi_to_angles(RabiTriple{}).status, AngleStatus::undefined);
    RabiTriple top;
    top[2] = cplx(0.0, 2.0);
    const AngleRecovery r = rabi_to_angles(top);
    EXPECT_EQ(r.status, AngleStatus::theta_undefined);
    EXPECT_EQ(r.angles.theta, 0.0);
    EXPECT_DOUBLE_EQ(r.angles.phi, std::numbers::pi / 2);
    EXPECT_DOUBLE_EQ(r.chi[2], std::numbers::pi / 2);
}

TEST(RabiToSignedAngles, RoundTripKeepsSigns) {
    const Phases chi{0.2, 0.9, -0.4};
    for (auto a : sample_angles(300)) {
        a.nu = 0.0;
        const AngleTriple b = rabi_to_signed_angles(angles_to_rabi(1.0, a, chi), chi);
        EXPECT_NEAR(b.phi, a.phi, 1e-12);
        EXPECT_NEAR(std::remainder(b.theta - a.theta, 2 * std::numbers::pi), 0.0, 1e-12);
    }
}

TEST(DarkStates, OrthonormalAndDark) {
    const Phases chi{0.5, -0.2, 1.3};
    for (const auto& a : sample_angles(200)) {
        const DarkBasis d = dark_states(a, chi);
        EXPECT_NEAR(std::abs(dot(d.phi1, d.phi1)), 1.0, 1e-14);
        EXPECT_NEAR(std::abs(dot(d.phi2, d.phi2)), 1.0, 1e-14);
        EXPECT_NEAR(std::abs(dot(d.phi1, d.phi2)), 0.0, 1e-14);
        const RabiTriple r = angles_to_rabi(1.0, a, chi);
        for (const auto& v : {d.phi1, d.phi2}) {
            AtomState s;
            for (std::size_t j = 0; j < 3; ++j) s[j + 1] = v[j];
            const AtomState h = hamiltonian_apply(r, s);
            for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(h[i]), 0.0, 1e-14);
        }
    }
}

TEST(HamiltonianApply, CouplesOnlyThroughExcitedState) {
    const RabiTriple r = angles_to_rabi(1.0, {0.3, 0.2, 0.0}, {0.1, 0.2, 0.3});
    AtomState s;
    s[0] = cplx(0.3, -0.4);
    const AtomState h = hamiltonian_apply(r, s);
    EXPECT_EQ(h[0], cplx(0.0));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(h[j + 1] - std::conj(r[j]) * s[0]), 0.0, 1e-15);
}

TEST(MixingMatrix, IsRotation) {
    for (double nu : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
        const Matrix2 m = mixing_matrix(nu);
        EXPECT_NEAR(m[0][0] * m[1][1] - m[0][1] * m[1][0], 1.0, 1e-15);
        EXPECT_NEAR(m[0][0] * m[0][0] + m[0][1] * m[0][1], 1.0, 1e-15);
        EXPECT_NEAR(m[0][0] * m[1][0] + m[0][1] * m[1][1], 0.0, 1e-15);
    }
    const Matrix2 a = mixing_matrix(0.4), b = mixing_matrix(0.5), ab = mixing_matrix(0.9);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) EXPECT_NEAR(a[i][0] * b[0][j] + a[i][1] * b[1][j], ab[i][j], 1e-15);
}

TEST(StateFromMixing, NormalizedAndDark) {
    for (const auto& a : sample_angles(200, 11)) {
        const AtomState s = state_from_mixing(a, a.nu, {0.4, 0.0, -0.9});
        EXPECT_NEAR(s.norm2(), 1.0, 1e-14);
        EXPECT_EQ(s[0], cplx(0.0));
        const AtomState h = hamiltonian_apply(angles_to_rabi(1.0, a, {0.4, 0.0, -0.9}), s);
        EXPECT_NEAR(std::abs(h[0]), 0.0, 1e-14);
    }
}

TEST(StateFromMixing, PreparedSwitchingState) {
    const AtomState s = state_from_mixing({0.50, -0.65, 0.0}, 0.0);
    EXPECT_NEAR(s[1].real(), -0.29, 0.01);
    EXPECT_NEAR(s[2].real(), -0.53, 0.01);
    EXPECT_NEAR(s[3].real(), -0.80, 0.01);
}

TEST(StateFromMixing, PureLevelThreeAtZeroAngles) {
    const AtomState s = state_from_mixing({0.0, 0.0, 0.0}, 0.0);
    EXPECT_NEAR(std::abs(s[3]), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(s[1]) + std::abs(s[2]), 0.0, 1e-15);
}
