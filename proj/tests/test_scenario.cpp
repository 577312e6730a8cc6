#include <gtest/gtest.h>

#include <string>

#include "tripod/scenario.hpp"

using namespace tripod;

namespace {

std::string preset(const std::string& name) { return read_text_file(std::string(TRIPOD_PRESET_DIR) + "/" + name); }

const char* minimal = R"(
[scenario]
name = t
mode = reduced
beta = 0.5
w0 = 20

[grid]
dw = 0.05
dzeta = 0.05
w_max = 6
zeta_max = 2

[background]
theta = 0.3
phi = 0.2

[segment.1]
angle = theta
shape = bump
center = 2
width = 2
amplitude = 0.2
)";

std::vector<std::string> violations_of(const std::string& text, const std::vector<Override>& ov = {},
                                       std::optional<Mode> forced = std::nullopt) {
    try {
        parse_scenario(text, ov, forced);
    } catch (const ConfigError& e) {
        return e.violations();
    }
    return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& what) {
    for (const auto& s : v)
        if (s.find(what) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST(ParseIni, SectionsKeysAndComments) {
    std::vector<std::string> v;
    const IniDocument d = parse_ini("; head\n[a]\nx = 1 ; trailing\n# full\n[b]\ny=two words\n", v);
    EXPECT_TRUE(v.empty());
    ASSERT_EQ(d.sections.size(), 2u);
    EXPECT_EQ(d.find("a")->keys.at("x").value, "1");
    EXPECT_EQ(d.find("a")->keys.at("x").line, 3);
    EXPECT_EQ(d.find("b")->keys.at("y").value, "two words");
    EXPECT_EQ(d.find("c"), nullptr);
}

TEST(ParseIni, ReportsEveryProblemWithItsLine) {
    std::vector<std::string> v;
    parse_ini("k = 1\n[a]\nx = 1\nx = 2\n[a]\n[bad\nnoequals\n", v);
    ASSERT_EQ(v.size(), 5u);
    EXPECT_EQ(v[0].rfind("line 1:", 0), 0u);
    EXPECT_NE(v[1].find("duplicate key 'x'"), std::string::npos);
    EXPECT_EQ(v[1].rfind("line 4:", 0), 0u);
    EXPECT_NE(v[2].find("duplicate section [a]"), std::string::npos);
    EXPECT_NE(v[3].find("malformed section"), std::string::npos);
    EXPECT_NE(v[4].find("expected key = value"), std::string::npos);
}

TEST(ParseScenario, PresetsParse) {
    for (const char* name : {"fig2.ini", "fig3.ini", "fig4.ini", "units.ini"}) {
        EXPECT_NO_THROW(parse_scenario(preset(name))) << name;
    }
}

TEST(ParseScenario, ScalesByW0) {
    const Scenario sc = parse_scenario(minimal);
    EXPECT_DOUBLE_EQ(sc.grid.dw, 1.0);
    EXPECT_DOUBLE_EQ(sc.grid.w_max, 120.0);
    EXPECT_DOUBLE_EQ(sc.grid.zeta_max, 40.0);
    ASSERT_EQ(sc.segments.size(), 1u);
    EXPECT_DOUBLE_EQ(sc.segments[0].segment.center, 40.0);
    EXPECT_EQ(sc.output.profiles, (std::vector<double>{0.0, 40.0}));
    const BoundaryProfile b = sc.boundary();
    EXPECT_DOUBLE_EQ(b.theta0(40.0), 0.5);
    EXPECT_DOUBLE_EQ(b.phi0(40.0), 0.2);
}

TEST(ParseScenario, OracleGridDefaults) {
    const OracleGrid g = parse_scenario(minimal, {}, Mode::oracle).oracle_grid();
    EXPECT_DOUBLE_EQ(g.dzeta, 1.0);
    EXPECT_DOUBLE_EQ(g.tau_max, 120.0);
    EXPECT_EQ(g.snapshot_every, 20u);
    EXPECT_EQ(g.store_tau_every, 20u);
}

TEST(ParseScenario, CollectsAllViolations) {
    std::string text = minimal;
    text.replace(text.find("dzeta = 0.05"), 12, "dzeta = 0.1");
    text.replace(text.find("shape = bump"), 12, "shape = spike");
    text += "\n[extra]\nq = 1\n[background2]\n";
    const auto v = violations_of(text + "[output]\nstride = 0\n");
    EXPECT_TRUE(mentions(v, "CFL"));
    EXPECT_TRUE(mentions(v, "expected ramp|bump, got 'spike'"));
    EXPECT_TRUE(mentions(v, "unknown section [extra]"));
    EXPECT_TRUE(mentions(v, "unknown section [background2]"));
    EXPECT_TRUE(mentions(v, "output.stride"));
    EXPECT_GE(v.size(), 5u);
}

TEST(ParseScenario, UnknownKeysAndBadNumbers) {
    std::string text = minimal;
    text.replace(text.find("beta = 0.5"), 10, "beta = 0.5x\ncolour = red");
    const auto v = violations_of(text);
    EXPECT_TRUE(mentions(v, "unknown key 'colour' in [scenario]"));
    EXPECT_TRUE(mentions(v, "not a finite number: '0.5x'"));
}

TEST(ParseScenario, OverridesAndForcedMode) {
    const Scenario sc = parse_scenario(minimal, {{"w0", "40"}, {"grid.dzeta", "0.025"}}, Mode::compare);
    EXPECT_EQ(sc.mode, Mode::compare);
    EXPECT_DOUBLE_EQ(sc.w0, 40.0);
    EXPECT_DOUBLE_EQ(sc.grid.dzeta, 1.0);
    EXPECT_TRUE(mentions(violations_of(minimal, {{"segment.1.center", "3"}}), "only beta, w0"));
}

TEST(ParseScenario, SmallW0IsErrorForOracleOnly) {
    const Scenario sc = parse_scenario(minimal, {{"w0", "5"}});
    ASSERT_EQ(sc.warnings.size(), 1u);
    EXPECT_NE(sc.warnings[0].find("scale-free"), std::string::npos);
    EXPECT_TRUE(mentions(violations_of(minimal, {{"w0", "5"}}, Mode::oracle), "not large compared"));
}

TEST(ParseScenario, SteepEntranceIsErrorForOracleOnly) {
    std::string text = minimal;
    text.replace(text.find("amplitude = 0.2"), 15, "amplitude = 1.4");
    EXPECT_FALSE(parse_scenario(text).warnings.empty());
    EXPECT_TRUE(mentions(violations_of(text, {}, Mode::oracle), "entrance slope"));
}

TEST(ParseScenario, CosPhiFloorNamesSegment) {
    std::string text = minimal;
    text += "\n[segment.2]\nangle = phi\nshape = bump\ncenter = 4\nwidth = 2\namplitude = 1.3707963267948966\n";
    const auto v = violations_of(text);
    EXPECT_TRUE(mentions(v, "|cos phi|"));
    EXPECT_TRUE(mentions(v, "[segment.2]"));
    EXPECT_NO_THROW(parse_scenario(text, {}, Mode::mixed));
}

TEST(ParseScenario, FamilyRules) {
    const std::string fam = "\n[family.1]\nfamily = slow\nshape = bump\ncenter = 2\nwidth = 2\namplitude = -0.2\n";
    EXPECT_TRUE(mentions(violations_of(std::string(minimal) + fam), "cannot be combined"));

    std::string only = minimal;
    only.erase(only.find("[segment.1]"));
    only.replace(only.find("beta = 0.5"), 10, "beta = 1.8");
    EXPECT_NO_THROW(parse_scenario(only + fam));
    EXPECT_TRUE(mentions(violations_of(only + fam, {}, Mode::mixed), "mixed-state"));

    const std::string second = "\n[family.2]\nfamily = fast\nshape = bump\ncenter = 2.5\nwidth = 2\namplitude = 0.1\n";
    EXPECT_TRUE(mentions(violations_of(only + fam + second), "overlaps"));
}

TEST(ParseScenario, ProfilesMustBeSampled) {
    std::string text = std::string(minimal) + "\n[output]\nprofiles = 0, 0.51, 3\n";
    const auto v = violations_of(text);
    EXPECT_TRUE(mentions(v, "not a multiple of grid.dzeta"));
    EXPECT_TRUE(mentions(v, "outside [0, zeta_max]"));
    EXPECT_TRUE(mentions(violations_of(std::string(minimal) + "\n[output]\nprofiles = 0.5\n", {}, Mode::oracle),
                         "snapshot_every"));
}

TEST(ParseScenario, UnitsMode) {
    const Scenario sc = parse_scenario(preset("units.ini"));
    EXPECT_EQ(sc.mode, Mode::units);
    EXPECT_DOUBLE_EQ(sc.medium.intensity, 3.0);
    EXPECT_TRUE(mentions(violations_of("[scenario]\nmode = units\n[medium]\nd = 1\nk = 1\nn = 1\nintensity = -1\nlength = 1\n"),
                         "intensity must be positive"));
    EXPECT_TRUE(mentions(violations_of("[scenario]\nmode = units\n"), "[medium]"));
}

TEST(ParseScenario, RejectsUnsafeName) {
    std::string text = minimal;
    text.replace(text.find("name = t"), 8, "name = ../x");
    EXPECT_TRUE(mentions(violations_of(text), "scenario.name"));
}

TEST(LoadScenario, MissingFile) { EXPECT_THROW(load_scenario("/nonexistent/x.ini"), ConfigError); }
