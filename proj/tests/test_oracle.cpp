#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "tripod/oracle.hpp"

using namespace tripod;

namespace {

BoundaryProfile pulse(double scale, double beta = 1.12) {
    const Segment th{SegmentShape::bump, 3.0 * scale, 3.0 * scale, 0.8}, ph{SegmentShape::bump, 4.0 * scale, 3.0 * scale, 0.6};
    BoundaryProfile b;
    b.beta = beta;
    b.theta0 = [=](double w) { return 0.3 + th(w); };
    b.phi0 = [=](double w) { return 0.2 + ph(w); };
    return b;
}

std::vector<RabiTriple> constant_fields(const RabiTriple& r, std::size_t n) { return std::vector<RabiTriple>(n, r); }

double max_field_difference(const std::vector<RabiTriple>& a, const std::vector<RabiTriple>& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        for (std::size_t j = 0; j < 3; ++j) d = std::max(d, std::abs(a[k][j] - b[k][j]));
    return d;
}

}  // namespace

TEST(AtomEvolve, RabiFloppingMatchesClosedForm) {
    RabiTriple r;
    r[0] = 1.0;
    AtomState init;
    init[0] = 1.0;
    const double dtau = 0.01;
    const AtomTrajectory t = atom_evolve(constant_fields(r, 1001), dtau, init);
    for (std::size_t k = 0; k < t.a.size(); k += 50) {
        const double tau = dtau * static_cast<double>(k);
        EXPECT_NEAR(std::norm(t.a[k][0]), std::cos(tau) * std::cos(tau), 1e-9);
        EXPECT_NEAR(std::abs(t.a[k][1] - cplx(0.0, std::sin(tau))), 0.0, 1e-9);
    }
}

TEST(AtomEvolve, DarkStateIsStationary) {
    const AngleTriple a{0.4, -0.3, 0.0};
    const Phases chi{0.2, 0.0, -0.7};
    const AtomState init = state_from_mixing(a, 0.9, chi);
    const AtomTrajectory t = atom_evolve(constant_fields(angles_to_rabi(1.0, a, chi), 2000), 0.05, init);
    for (const auto& s : t.a)
        for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(s[i] - init[i]), 0.0, 1e-13);
}

TEST(AtomEvolve, KeepsNormAlongAPulse) {
    const BoundaryProfile b = pulse(20.0);
    OracleGrid g;
    g.tau_max = 160.0;
    const AtomTrajectory t = atom_evolve(boundary_fields(b, g, 1.0), g.dtau,
                                         state_from_mixing({b.theta0(0), b.phi0(0), 0}, b.beta));
    EXPECT_LT(t.max_norm_drift(), 1e-10);
    EXPECT_LT(t.max_excited(), 1e-2);
}

TEST(AtomEvolve, RejectsCoarseTauStep) {
    RabiTriple r;
    r[0] = 1.0;
    EXPECT_THROW(atom_evolve(constant_fields(r, 10), 0.2, AtomState{}), ConfigError);
}

TEST(FieldStep, DarkSliceIsStationary) {
    const AngleTriple a{0.3, 0.2, 0.0};
    const auto fields = constant_fields(angles_to_rabi(1.0, a), 400);
    const AtomState init = state_from_mixing(a, 1.1);
    const AtomTrajectory t = atom_evolve(fields, 0.05, init);
    const FieldStep s = field_step(fields, t, init, 0.05, 2.0, 1.0);
    EXPECT_LT(max_field_difference(s.fields, fields), 1e-14);
    EXPECT_EQ(s.unconverged, 0u);
}

TEST(FieldStep, DiffersFromEulerAtSecondOrder) {
    const BoundaryProfile b = pulse(5.0);
    OracleGrid g;
    g.tau_max = 40.0;
    const auto fields = boundary_fields(b, g, 1.0);
    const AtomState init = state_from_mixing({b.theta0(0), b.phi0(0), 0}, b.beta);
    const AtomTrajectory t = atom_evolve(fields, g.dtau, init);
    auto gap = [&](double dz) {
        return max_field_difference(field_step(fields, t, init, g.dtau, dz, 1.0).fields, euler_field_step(fields, t, dz, 1.0));
    };
    const double r = gap(0.05) / gap(0.025);
    EXPECT_GT(r, 3.5);
    EXPECT_LT(r, 4.5);
}

TEST(PropagateFull, SecondOrderInZeta) {
    const BoundaryProfile b = pulse(5.0);
    auto run = [&](double dz) {
        OracleGrid g;
        g.dtau = 0.04;
        g.tau_max = 40.0;
        g.zeta_max = 4.0;
        g.dzeta = dz;
        g.snapshot_every = static_cast<std::size_t>(std::llround(4.0 / dz));
        return propagate_full(b, g).grid.omega.back();
    };
    const auto ref = run(0.0625);
    const double e1 = max_field_difference(run(0.5), ref), e2 = max_field_difference(run(0.25), ref);
    EXPECT_GT(e1 / e2, 3.0);
}

TEST(PropagateFull, ConservesNormAndExchangeLaw) {
    auto run = [](double dz) {
        OracleGrid g;
        g.tau_max = 160.0;
        g.zeta_max = 40.0;
        g.dzeta = dz;
        g.snapshot_every = static_cast<std::size_t>(std::llround(10.0 / dz));
        return propagate_full(pulse(20.0), g);
    };
    const OracleRun a = run(0.5), b = run(0.25);
    EXPECT_LT(b.report.max_norm_drift, 1e-8);
    EXPECT_EQ(b.grid.zeta.size(), 5u);
    EXPECT_GT(a.report.exchange_residual / b.report.exchange_residual, 2.5);
    EXPECT_LT(b.report.exchange_residual, 0.1 * b.report.max_dtau_excited);
}

TEST(PropagateFull, StaysBoundedOverLongZeta) {
    // Long march inside a stationary fast pulse; a delayed atomic response
    // would grow here without bound.
    OracleGrid g;
    g.tau_max = 400.0;
    g.zeta_max = 3000.0;
    g.dzeta = 5.0;
    g.snapshot_every = 600;
    g.store_tau_every = 20;
    const OracleRun r = propagate_full(pulse(100.0), g);
    double peak = 0.0;
    for (const auto& row : r.grid.omega)
        for (const auto& f : row) peak = std::max(peak, f.generalized());
    EXPECT_LT(peak, 1.001);
    EXPECT_LT(r.report.max_excited, 1e-3);
}

TEST(PropagateFull, Rejections) {
    OracleGrid g;
    g.tau_max = 10.0;
    g.dtau = 0.1;
    EXPECT_THROW(propagate_full(pulse(1.0), g), ConfigError);
    g.dtau = 0.05;
    BoundaryProfile b = pulse(1.0);
    b.omega0_constant = false;
    EXPECT_THROW(propagate_full(b, g), ConfigError);
    g.dzeta = -1.0;
    EXPECT_THROW(propagate_full(pulse(1.0), g), ConfigError);
}

TEST(OracleAngles, RecoverEntranceData) {
    OracleGrid g;
    g.tau_max = 100.0;
    g.zeta_max = 0.0;
    const BoundaryProfile b = pulse(10.0);
    const ReducedField f = oracle_angles(propagate_full(b, g));
    for (std::size_t k = 0; k < f.n_w(); ++k) {
        EXPECT_NEAR(f.theta[0][k], b.theta0(f.w(k)), 1e-12);
        EXPECT_NEAR(f.phi[0][k], b.phi0(f.w(k)), 1e-12);
    }
}

TEST(CompareToReduced, AdiabaticPulseAgrees) {
    const BoundaryProfile b = pulse(20.0);
    OracleGrid g;
    g.tau_max = 160.0;
    g.zeta_max = 40.0;
    g.dzeta = 1.0;
    g.snapshot_every = 10;
    g.store_tau_every = 4;
    const OracleRun o = propagate_full(b, g);
    PropagateOptions opt;
    opt.snapshot_every = 50;
    const ReducedField r = propagate(b, Grid{0.2, 0.2, 160.0, 40.0}, opt);
    const Comparison c = compare_to_reduced(o, r);
    EXPECT_LT(c.max_abs(), 0.1);
    EXPECT_EQ(c.zeta.size(), 5u);

    ReducedField other = r;
    other.beta += 0.1;
    EXPECT_THROW(compare_to_reduced(o, other), ConfigError);
}
