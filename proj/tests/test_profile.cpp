#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "tripod/profile.hpp"

using namespace tripod;

TEST(Smoothstep, EndpointsAndClamp) {
    EXPECT_EQ(smoothstep(-1.0), 0.0);
    EXPECT_EQ(smoothstep(0.0), 0.0);
    EXPECT_EQ(smoothstep(1.0), 1.0);
    EXPECT_EQ(smoothstep(2.0), 1.0);
    EXPECT_DOUBLE_EQ(smoothstep(0.5), 0.5);
}

TEST(Smoothstep, DerivativeMatchesFiniteDifference) {
    const double h = 1e-6;
    for (double x = 0.05; x < 1.0; x += 0.05)
        EXPECT_NEAR(smoothstep_derivative(x), (smoothstep(x + h) - smoothstep(x - h)) / (2 * h), 1e-8);
}

TEST(Smoothstep, SecondDerivativeVanishesAtEnds) {
    const double h = 1e-4;
    EXPECT_LT(smoothstep_derivative(h) / h, 1e-2);
    EXPECT_LT(smoothstep_derivative(1.0 - h) / h, 1e-2);
}

TEST(Segment, RampRisesByAmplitude) {
    const Segment s{SegmentShape::ramp, 5.0, 2.0, -0.65};
    EXPECT_EQ(s(3.9), 0.0);
    EXPECT_DOUBLE_EQ(s(6.1), -0.65);
    EXPECT_DOUBLE_EQ(s(5.0), -0.325);
    EXPECT_DOUBLE_EQ(s.lo(), 4.0);
    EXPECT_DOUBLE_EQ(s.hi(), 6.0);
}

TEST(Segment, BumpReturnsToZero) {
    const Segment s{SegmentShape::bump, 3.0, 3.0, 0.8};
    EXPECT_EQ(s(1.5), 0.0);
    EXPECT_EQ(s(4.5), 0.0);
    EXPECT_DOUBLE_EQ(s(3.0), 0.8);
    EXPECT_NEAR(s(2.4), s(3.6), 1e-15);
}

TEST(Segment, DerivativeMatchesFiniteDifference) {
    const double h = 1e-6;
    for (const Segment s : {Segment{SegmentShape::ramp, 2.0, 1.5, 0.5}, Segment{SegmentShape::bump, 2.0, 1.5, -0.3}})
        for (double w = 1.0; w < 3.0; w += 0.07) EXPECT_NEAR(s.derivative(w), (s(w + h) - s(w - h)) / (2 * h), 1e-7);
}

TEST(SegmentProfile, SumsSegmentsOnBase) {
    const SegmentProfile p{0.3, {{SegmentShape::bump, 3.0, 2.0, 0.5}, {SegmentShape::ramp, 6.0, 2.0, 0.2}}};
    EXPECT_DOUBLE_EQ(p(0.0), 0.3);
    EXPECT_DOUBLE_EQ(p(3.0), 0.8);
    EXPECT_DOUBLE_EQ(p(10.0), 0.5);
    EXPECT_DOUBLE_EQ(p.derivative(3.0), 0.0);
}

TEST(Interpolation, LinearIsExactOnLines) {
    std::vector<double> y;
    for (int i = 0; i < 11; ++i) y.push_back(2.0 - 0.5 * (1.0 + 0.1 * i));
    for (double x = 1.0; x <= 2.0; x += 0.013) EXPECT_NEAR(interp_uniform(y, 1.0, 0.1, x), 2.0 - 0.5 * x, 1e-14);
    EXPECT_EQ(interp_uniform(y, 1.0, 0.1, 0.0), y.front());
    EXPECT_EQ(interp_uniform(y, 1.0, 0.1, 9.0), y.back());
}

TEST(Interpolation, CubicIsExactOnQuadraticsInside) {
    std::vector<double> y;
    auto q = [](double x) { return 1.0 - 2.0 * x + 3.0 * x * x; };
    for (int i = 0; i < 21; ++i) y.push_back(q(0.05 * i));
    for (double x = 0.05; x <= 0.95; x += 0.0123) EXPECT_NEAR(cubic_uniform(y, 0.0, 0.05, x), q(x), 1e-13);
}

TEST(Interpolation, CubicReproducesNodes) {
    const std::vector<double> y{0.3, -1.0, 2.5, 0.7, 0.1, 4.0};
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(cubic_uniform(y, 0.0, 1.0, static_cast<double>(i)), y[i], 1e-15);
}

TEST(Sample, UniformGrid) {
    const auto v = sample([](double x) { return x * x; }, 1.0, 0.5, 4);
    ASSERT_EQ(v.size(), 4u);
    EXPECT_DOUBLE_EQ(v[3], 6.25);
}
