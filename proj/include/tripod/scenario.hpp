#pragma once

// Scenario files: sectioned key = value text.
//
//   [scenario]   name, mode (reduced|oracle|mixed|compare|units), beta, w0
//   [grid]       dw, dzeta, w_max, zeta_max              (units of w0)
//   [background] theta, phi                              (radians)
//   [segment.N]  angle (theta|phi), shape (ramp|bump), center, width (units of w0), amplitude
//   [family.N]   family (slow|fast), shape, center, width, amplitude (change of mu)
//   [output]     profiles (zeta list, units of w0), stride, snapshot_every (units of w0),
//                classify, fit, window_threshold
//   [oracle]     dtau, dzeta (absolute), store_tau_every
//   [compare]    threshold (radians)
//   [medium]     d, k, n, intensity (mW/cm^2), length (cm)       -- units mode
//
// ';' and '#' start comments.  Every problem found is reported, with its line.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tripod/analytic.hpp"
#include "tripod/errors.hpp"
#include "tripod/oracle.hpp"
#include "tripod/profile.hpp"
#include "tripod/reduced.hpp"

namespace tripod {

struct IniEntry {
    std::string value;
    int line = 0;
};

struct IniSection {
    std::string name;
    int line = 0;
    std::map<std::string, IniEntry> keys;
};

struct IniDocument {
    std::vector<IniSection> sections;

    IniSection* find(const std::string& name) {
        for (auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
    const IniSection* find(const std::string& name) const { return const_cast<IniDocument*>(this)->find(name); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string at_line(int line) { return "line " + std::to_string(line) + ": "; }

}  // namespace detail

inline IniDocument parse_ini(const std::string& text, std::vector<std::string>& violations) {
    IniDocument doc;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    IniSection* current = nullptr;
    while (std::getline(in, raw)) {
        ++line;
        const auto cut = raw.find_first_of(";#");
        const std::string s = detail::trim(cut == std::string::npos ? raw : raw.substr(0, cut));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') {
                violations.push_back(detail::at_line(line) + "malformed section header '" + s + "'");
                current = nullptr;
                continue;
            }
            const std::string name = detail::trim(s.substr(1, s.size() - 2));
            if (doc.find(name)) {
                violations.push_back(detail::at_line(line) + "duplicate section [" + name + "]");
                current = nullptr;
                continue;
            }
            doc.sections.push_back({name, line, {}});
            current = &doc.sections.back();
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            violations.push_back(detail::at_line(line) + "expected key = value, got '" + s + "'");
            continue;
        }
        if (!current) {
            violations.push_back(detail::at_line(line) + "key outside of a section");
            continue;
        }
        const std::string key = detail::trim(s.substr(0, eq));
        if (current->keys.count(key)) {
            violations.push_back(detail::at_line(line) + "duplicate key '" + key + "' in [" + current->name + "]");
            continue;
        }
        current->keys[key] = {detail::trim(s.substr(eq + 1)), line};
    }
    return doc;
}

enum class Mode { reduced, oracle, mixed, compare, units };

inline const char* to_string(Mode m) {
    switch (m) {
        case Mode::reduced: return "reduced";
        case Mode::oracle: return "oracle";
        case Mode::mixed: return "mixed";
        case Mode::compare: return "compare";
        case Mode::units: return "units";
    }
    return "?";
}

enum class Angle { theta, phi };

struct SegmentSpec {
    std::string section;
    Angle angle = Angle::theta;
    Segment segment;  ///< absolute w units
};

struct FamilySpec {
    std::string section;
    Family family = Family::slow;
    Segment mu;  ///< change of mu across the pulse, absolute w units
};

struct OutputSpec {
    std::vector<double> profiles;  ///< absolute zeta values
    std::size_t stride = 1;
    double snapshot_every = 0.0;  ///< absolute; 0 means w0
    bool classify = true;
    bool fit = true;
    double window_threshold = 1e-3;
};

struct OracleSpec {
    double dtau = 0.05;
    double dzeta = 0.0;  ///< absolute; 0 means 1
    std::size_t store_tau_every = 0;  ///< 0: choose so stored spacing matches grid.dw
};

struct MediumSpec {
    double d = 0.0;
    double k = 0.0;
    double n = 0.0;
    double intensity = 0.0;  ///< mW/cm^2
    double length = 0.0;     ///< cm
};

/// Smallest w0 accepted for oracle runs (w0 >> Omega/G = 1).
inline constexpr double min_oracle_w0 = 10.0;
/// Largest entrance slope |d angle / dw| accepted for oracle runs.
inline constexpr double max_oracle_slope = 0.1;

struct Scenario {
    std::string name = "scenario";
    Mode mode = Mode::reduced;
    double beta = 0.0;
    double w0 = 1.0;
    Grid grid;  ///< absolute units
    double theta_background = 0.0;
    double phi_background = 0.0;
    std::vector<SegmentSpec> segments;
    std::vector<FamilySpec> families;
    OutputSpec output;
    OracleSpec oracle;
    double compare_threshold = 0.05;
    MediumSpec medium;
    std::vector<std::string> warnings;

    BoundaryProfile boundary() const;
    OracleGrid oracle_grid() const;
    std::size_t snapshot_steps() const;
};

namespace detail {

/// Family pulses laid end to end along w.  Each one starts from the state
/// the previous ones left behind and carries the family constants through it.
struct FamilyPiece {
    std::string section;
    Family family;
    Segment mu;
    FamilyConstants constants;
    double mu_start;
};

struct FamilyChain {
    AngleTriple background;
    double beta;
    std::vector<FamilyPiece> pieces;
    std::vector<AngleTriple> after;  ///< state after each piece

    AngleTriple at(double w) const {
        AngleTriple s = background;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            const auto& p = pieces[i];
            if (w < p.mu.lo()) return s;
            if (w <= p.mu.hi()) {
                const double mu = p.mu_start + p.mu(w);
                return family_angles(p.family, p.constants.c_amp, p.constants.c_shift, p.constants.eps, mu);
            }
            s = after[i];
        }
        return s;
    }
};

inline FamilyChain build_chain(const Scenario& sc) {
    FamilyChain ch;
    ch.background = {sc.theta_background, sc.phi_background, 0.0};
    ch.beta = sc.beta;
    std::vector<FamilySpec> fs = sc.families;
    std::sort(fs.begin(), fs.end(), [](const auto& a, const auto& b) { return a.mu.lo() < b.mu.lo(); });
    AngleTriple state = ch.background;
    double mu = sc.beta;
    for (const auto& f : fs) {
        FamilyPiece p{f.section, f.family, f.mu, family_through(f.family, state, mu), mu};
        const double mu_end = mu + f.mu(f.mu.hi());
        state = family_angles(p.family, p.constants.c_amp, p.constants.c_shift, p.constants.eps, mu_end);
        ch.pieces.push_back(p);
        ch.after.push_back(state);
        mu = mu_end;
    }
    return ch;
}

}  // namespace detail

inline BoundaryProfile Scenario::boundary() const {
    BoundaryProfile b;
    b.beta = beta;
    if (!families.empty()) {
        const auto ch = std::make_shared<detail::FamilyChain>(detail::build_chain(*this));
        b.theta0 = [ch](double w) { return ch->at(w).theta; };
        b.phi0 = [ch](double w) { return ch->at(w).phi; };
        return b;
    }
    SegmentProfile th{theta_background, {}}, ph{phi_background, {}};
    for (const auto& s : segments) (s.angle == Angle::theta ? th : ph).segments.push_back(s.segment);
    b.theta0 = th;
    b.phi0 = ph;
    b.dtheta0 = [th](double w) { return th.derivative(w); };
    b.dphi0 = [ph](double w) { return ph.derivative(w); };
    return b;
}

inline std::size_t Scenario::snapshot_steps() const {
    const double every = output.snapshot_every > 0.0 ? output.snapshot_every : w0;
    return static_cast<std::size_t>(std::max(1LL, std::llround(every / grid.dzeta)));
}

inline OracleGrid Scenario::oracle_grid() const {
    OracleGrid g;
    g.dtau = oracle.dtau;
    g.dzeta = oracle.dzeta > 0.0 ? oracle.dzeta : 1.0;
    g.tau_max = grid.w_max;
    g.zeta_max = grid.zeta_max;
    const double every = output.snapshot_every > 0.0 ? output.snapshot_every : w0;
    g.snapshot_every = static_cast<std::size_t>(std::max(1LL, std::llround(every / g.dzeta)));
    g.store_tau_every = oracle.store_tau_every > 0
                            ? oracle.store_tau_every
                            : static_cast<std::size_t>(std::max(1LL, std::llround(grid.dw / g.dtau)));
    return g;
}

/// Keys a sweep may vary.
inline const std::vector<std::string>& sweepable_keys() {
    static const std::vector<std::string> keys{"scenario.beta", "scenario.w0",  "grid.dw",      "grid.dzeta",
                                               "grid.w_max",    "grid.zeta_max", "oracle.dtau", "oracle.dzeta"};
    return keys;
}

/// "beta" and "w0" are shorthands for their [scenario] keys.
inline std::string canonical_key(const std::string& key) {
    if (key == "beta" || key == "w0") return "scenario." + key;
    return key;
}

struct Override {
    std::string key;  ///< section.key
    std::string value;
};

namespace detail {

class ScenarioReader {
public:
    ScenarioReader(IniDocument& doc, std::vector<std::string>& v) : doc_(doc), v_(v) {}

    const IniSection* section(const std::string& name) const { return doc_.find(name); }

    void check_keys(const IniSection& s, std::initializer_list<const char*> allowed) {
        for (const auto& [k, e] : s.keys) {
            if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }) == allowed.end())
                v_.push_back(at_line(e.line) + "unknown key '" + k + "' in [" + s.name + "]");
        }
    }

    std::optional<double> number(const IniSection* s, const char* key, bool required = false) {
        if (!s) {
            if (required) v_.push_back(std::string("missing section for required key '") + key + "'");
            return std::nullopt;
        }
        const auto it = s->keys.find(key);
        if (it == s->keys.end()) {
            if (required)
                v_.push_back(at_line(s->line) + "[" + s->name + "] is missing required key '" + key + "'");
            return std::nullopt;
        }
        try {
            std::size_t used = 0;
            const double x = std::stod(it->second.value, &used);
            if (used != it->second.value.size() || !std::isfinite(x)) throw std::invalid_argument("");
            return x;
        } catch (const std::exception&) {
            v_.push_back(at_line(it->second.line) + s->name + "." + key + ": not a finite number: '" +
                         it->second.value + "'");
            return std::nullopt;
        }
    }

    std::optional<std::string> word(const IniSection* s, const char* key, std::initializer_list<const char*> choices,
                                    bool required = false) {
        if (!s) return std::nullopt;
        const auto it = s->keys.find(key);
        if (it == s->keys.end()) {
            if (required)
                v_.push_back(at_line(s->line) + "[" + s->name + "] is missing required key '" + key + "'");
            return std::nullopt;
        }
        for (const char* c : choices)
            if (it->second.value == c) return it->second.value;
        std::string list;
        for (const char* c : choices) list += (list.empty() ? "" : "|") + std::string(c);
        v_.push_back(at_line(it->second.line) + s->name + "." + key + ": expected " + list + ", got '" +
                     it->second.value + "'");
        return std::nullopt;
    }

    std::optional<bool> boolean(const IniSection* s, const char* key) {
        const auto w = word(s, key, {"true", "false"});
        if (!w) return std::nullopt;
        return *w == "true";
    }

    std::optional<std::vector<double>> list(const IniSection* s, const char* key) {
        if (!s) return std::nullopt;
        const auto it = s->keys.find(key);
        if (it == s->keys.end()) return std::nullopt;
        std::vector<double> out;
        std::stringstream ss(it->second.value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            try {
                std::size_t used = 0;
                const double x = std::stod(item, &used);
                if (used != item.size() || !std::isfinite(x)) throw std::invalid_argument("");
                out.push_back(x);
            } catch (const std::exception&) {
                v_.push_back(at_line(it->second.line) + s->name + "." + key + ": bad list entry '" + item + "'");
            }
        }
        return out;
    }

    int line_of(const IniSection* s, const char* key) const {
        if (!s) return 0;
        const auto it = s->keys.find(key);
        return it == s->keys.end() ? s->line : it->second.line;
    }

private:
    IniDocument& doc_;
    std::vector<std::string>& v_;
};

inline bool is_multiple(double x, double step) {
    const double n = x / step;
    return std::abs(n - std::round(n)) <= 1e-9 * std::max(1.0, std::abs(n));
}

inline Segment read_segment(ScenarioReader& r, const IniSection& s, double w0) {
    Segment seg;
    if (const auto shape = r.word(&s, "shape", {"ramp", "bump"}, true))
        seg.shape = *shape == "ramp" ? SegmentShape::ramp : SegmentShape::bump;
    seg.center = r.number(&s, "center", true).value_or(0.0) * w0;
    seg.width = r.number(&s, "width", true).value_or(1.0) * w0;
    seg.amplitude = r.number(&s, "amplitude", true).value_or(0.0);
    return seg;
}

}  // namespace detail

/// Parse and validate.  Throws ConfigError listing every violation.
/// `forced` replaces the file's mode (the compare subcommand uses it).
inline Scenario parse_scenario(const std::string& text, const std::vector<Override>& overrides = {},
                               std::optional<Mode> forced = std::nullopt) {
    std::vector<std::string> v;
    IniDocument doc = parse_ini(text, v);

    for (const auto& o : overrides) {
        const std::string key = canonical_key(o.key);
        const auto& allowed = sweepable_keys();
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            v.push_back("override '" + o.key + "': only beta, w0, grid steps and oracle steps may be varied");
            continue;
        }
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot), k = key.substr(dot + 1);
        IniSection* s = doc.find(sec);
        if (!s) {
            doc.sections.push_back({sec, 0, {}});
            s = &doc.sections.back();
        }
        const int line = s->keys.count(k) ? s->keys[k].line : 0;
        s->keys[k] = {o.value, line};
    }

    detail::ScenarioReader r(doc, v);
    Scenario sc;

    const std::initializer_list<const char*> known_fixed = {"scenario", "grid",    "background", "output",
                                                            "oracle",   "compare", "medium"};
    for (const auto& s : doc.sections) {
        const bool fixed = std::find_if(known_fixed.begin(), known_fixed.end(),
                                        [&](const char* k) { return s.name == k; }) != known_fixed.end();
        if (!fixed && s.name.rfind("segment.", 0) != 0 && s.name.rfind("family.", 0) != 0)
            v.push_back(detail::at_line(s.line) + "unknown section [" + s.name + "]");
    }

    const IniSection* scen = r.section("scenario");
    if (!scen) {
        v.push_back("missing [scenario] section");
        throw ConfigError(v);
    }
    r.check_keys(*scen, {"name", "mode", "beta", "w0"});
    if (auto it = scen->keys.find("name"); it != scen->keys.end()) {
        sc.name = it->second.value;
        const bool safe = !sc.name.empty() && std::all_of(sc.name.begin(), sc.name.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
        });
        if (!safe || sc.name == "." || sc.name == "..")
            v.push_back(detail::at_line(it->second.line) + "scenario.name must be non-empty [A-Za-z0-9_.-]");
    }
    if (auto m = r.word(scen, "mode", {"reduced", "oracle", "mixed", "compare", "units"}, true)) {
        sc.mode = *m == "reduced"   ? Mode::reduced
                  : *m == "oracle"  ? Mode::oracle
                  : *m == "mixed"   ? Mode::mixed
                  : *m == "compare" ? Mode::compare
                                    : Mode::units;
    }
    if (forced) sc.mode = *forced;

    if (sc.mode == Mode::units) {
        const IniSection* med = r.section("medium");
        if (!med) v.push_back("units mode needs a [medium] section");
        else {
            r.check_keys(*med, {"d", "k", "n", "intensity", "length"});
            sc.medium.d = r.number(med, "d", true).value_or(0.0);
            sc.medium.k = r.number(med, "k", true).value_or(0.0);
            sc.medium.n = r.number(med, "n", true).value_or(0.0);
            sc.medium.intensity = r.number(med, "intensity", true).value_or(0.0);
            sc.medium.length = r.number(med, "length", true).value_or(0.0);
            if (!(sc.medium.d > 0.0 && sc.medium.k > 0.0 && sc.medium.n > 0.0))
                v.push_back(detail::at_line(med->line) + "medium: d, k, n must be positive");
            if (!(sc.medium.intensity > 0.0))
                v.push_back(detail::at_line(r.line_of(med, "intensity")) + "medium.intensity must be positive");
            if (sc.medium.length < 0.0)
                v.push_back(detail::at_line(r.line_of(med, "length")) + "medium.length must be non-negative");
        }
        if (!v.empty()) throw ConfigError(v);
        return sc;
    }
    if (r.section("medium")) v.push_back(detail::at_line(r.section("medium")->line) + "[medium] is only used in units mode");

    sc.beta = r.number(scen, "beta", true).value_or(0.0);
    sc.w0 = r.number(scen, "w0", true).value_or(1.0);
    if (!(sc.w0 > 0.0)) {
        v.push_back(detail::at_line(r.line_of(scen, "w0")) + "scenario.w0 must be positive");
        sc.w0 = 1.0;
    }
    const bool oracle = sc.mode == Mode::oracle || sc.mode == Mode::compare;
    if (sc.w0 < min_oracle_w0) {
        const std::string msg = "scenario.w0 = " + std::to_string(sc.w0) + " is not large compared with Omega/G = 1 (need >= " +
                                std::to_string(min_oracle_w0) + ")";
        if (oracle) v.push_back(detail::at_line(r.line_of(scen, "w0")) + msg);
        else sc.warnings.push_back(msg + "; the reduced equations are scale-free, continuing");
    }

    const IniSection* grid = r.section("grid");
    if (!grid) v.push_back("missing [grid] section");
    else {
        r.check_keys(*grid, {"dw", "dzeta", "w_max", "zeta_max"});
        sc.grid.dw = r.number(grid, "dw").value_or(0.01) * sc.w0;
        sc.grid.dzeta = r.number(grid, "dzeta").value_or(sc.grid.dw / sc.w0) * sc.w0;
        sc.grid.w_max = r.number(grid, "w_max", true).value_or(1.0) * sc.w0;
        sc.grid.zeta_max = r.number(grid, "zeta_max", true).value_or(0.0) * sc.w0;
        for (auto& g : sc.grid.violations()) v.push_back(detail::at_line(grid->line) + "[grid] " + g);
    }

    if (const IniSection* bg = r.section("background")) {
        r.check_keys(*bg, {"theta", "phi"});
        sc.theta_background = r.number(bg, "theta").value_or(0.0);
        sc.phi_background = r.number(bg, "phi").value_or(0.0);
    }

    for (const auto& s : doc.sections) {
        if (s.name.rfind("segment.", 0) == 0) {
            r.check_keys(s, {"angle", "shape", "center", "width", "amplitude"});
            SegmentSpec seg;
            seg.section = s.name;
            if (auto a = r.word(&s, "angle", {"theta", "phi"}, true)) seg.angle = *a == "theta" ? Angle::theta : Angle::phi;
            seg.segment = detail::read_segment(r, s, sc.w0);
            if (!(seg.segment.width > 0.0)) v.push_back(detail::at_line(r.line_of(&s, "width")) + s.name + ".width must be positive");
            sc.segments.push_back(seg);
        } else if (s.name.rfind("family.", 0) == 0) {
            r.check_keys(s, {"family", "shape", "center", "width", "amplitude"});
            FamilySpec f;
            f.section = s.name;
            if (auto a = r.word(&s, "family", {"slow", "fast"}, true)) f.family = *a == "slow" ? Family::slow : Family::fast;
            f.mu = detail::read_segment(r, s, sc.w0);
            if (!(f.mu.width > 0.0)) v.push_back(detail::at_line(r.line_of(&s, "width")) + s.name + ".width must be positive");
            sc.families.push_back(f);
        }
    }
    if (!sc.segments.empty() && !sc.families.empty())
        v.push_back("[segment.N] and [family.N] sections cannot be combined in one scenario");
    if (!sc.families.empty() && sc.mode == Mode::mixed)
        v.push_back("family pulses need the dark-state mixing angle, which the mixed-state regime does not define");
    {
        std::vector<FamilySpec> fs = sc.families;
        std::sort(fs.begin(), fs.end(), [](const auto& a, const auto& b) { return a.mu.lo() < b.mu.lo(); });
        for (std::size_t i = 1; i < fs.size(); ++i)
            if (fs[i].mu.lo() < fs[i - 1].mu.hi())
                v.push_back("[" + fs[i].section + "] overlaps [" + fs[i - 1].section + "]; family pulses must be disjoint");
    }

    if (const IniSection* out = r.section("output")) {
        r.check_keys(*out, {"profiles", "stride", "snapshot_every", "classify", "fit", "window_threshold"});
        if (auto p = r.list(out, "profiles"))
            for (double z : *p) sc.output.profiles.push_back(z * sc.w0);
        if (auto s = r.number(out, "stride")) {
            if (*s < 1.0 || std::floor(*s) != *s)
                v.push_back(detail::at_line(r.line_of(out, "stride")) + "output.stride must be a positive integer");
            else sc.output.stride = static_cast<std::size_t>(*s);
        }
        if (auto s = r.number(out, "snapshot_every")) {
            if (!(*s > 0.0)) v.push_back(detail::at_line(r.line_of(out, "snapshot_every")) + "output.snapshot_every must be positive");
            else sc.output.snapshot_every = *s * sc.w0;
        }
        if (auto b = r.boolean(out, "classify")) sc.output.classify = *b;
        if (auto b = r.boolean(out, "fit")) sc.output.fit = *b;
        if (auto t = r.number(out, "window_threshold")) {
            if (!(*t > 0.0 && *t < 1.0))
                v.push_back(detail::at_line(r.line_of(out, "window_threshold")) + "output.window_threshold must lie in (0, 1)");
            else sc.output.window_threshold = *t;
        }
    }
    if (sc.output.profiles.empty()) sc.output.profiles = {0.0, sc.grid.zeta_max};

    if (const IniSection* o = r.section("oracle")) {
        r.check_keys(*o, {"dtau", "dzeta", "store_tau_every"});
        sc.oracle.dtau = r.number(o, "dtau").value_or(sc.oracle.dtau);
        if (auto z = r.number(o, "dzeta")) sc.oracle.dzeta = *z;
        if (auto e = r.number(o, "store_tau_every")) {
            if (*e < 1.0 || std::floor(*e) != *e)
                v.push_back(detail::at_line(r.line_of(o, "store_tau_every")) + "oracle.store_tau_every must be a positive integer");
            else sc.oracle.store_tau_every = static_cast<std::size_t>(*e);
        }
    }
    if (const IniSection* c = r.section("compare")) {
        r.check_keys(*c, {"threshold"});
        sc.compare_threshold = r.number(c, "threshold").value_or(sc.compare_threshold);
        if (!(sc.compare_threshold > 0.0)) v.push_back(detail::at_line(c->line) + "compare.threshold must be positive");
    }

    // Sampling of the requested zeta values.
    const int out_line = r.line_of(r.section("output"), "profiles");
    const double snap = sc.output.snapshot_every > 0.0 ? sc.output.snapshot_every : sc.w0;
    if (sc.grid.dzeta > 0.0) {
        for (double z : sc.output.profiles) {
            if (z < -1e-12 || z > sc.grid.zeta_max * (1.0 + 1e-12))
                v.push_back(detail::at_line(out_line) + "profile zeta " + std::to_string(z / sc.w0) + " w0 outside [0, zeta_max]");
            else if (!detail::is_multiple(z, sc.grid.dzeta))
                v.push_back(detail::at_line(out_line) + "profile zeta " + std::to_string(z / sc.w0) + " w0 is not a multiple of grid.dzeta");
            else if (oracle && !detail::is_multiple(z, snap) && std::abs(z - sc.grid.zeta_max) > 1e-9 * sc.w0)
                v.push_back(detail::at_line(out_line) + "profile zeta " + std::to_string(z / sc.w0) +
                            " w0 is not a multiple of output.snapshot_every (oracle slices are stored only there)");
        }
        if (!detail::is_multiple(snap, sc.grid.dzeta))
            v.push_back("output.snapshot_every must be a multiple of grid.dzeta");
    }

    if (oracle) {
        const OracleGrid og = sc.oracle_grid();
        for (auto& g : og.violations()) v.push_back("[oracle] " + g);
        if (og.dzeta > 0.0 && !detail::is_multiple(snap, og.dzeta))
            v.push_back("output.snapshot_every must be a multiple of oracle.dzeta");
        if (og.dzeta > 0.0 && !detail::is_multiple(sc.grid.zeta_max, og.dzeta))
            v.push_back("grid.zeta_max must be a multiple of oracle.dzeta");
        if (sc.oracle.dtau * 1.0 > max_rabi_phase_per_step * (1.0 + 1e-12))
            v.push_back("oracle.dtau * Omega0 exceeds " + std::to_string(max_rabi_phase_per_step));
    }

    // Entrance data: admissibility, singularity floor, adiabaticity.
    if (v.empty()) {
        try {
            if (!sc.families.empty()) {
                const auto ch = detail::build_chain(sc);
                for (std::size_t i = 0; i < ch.pieces.size(); ++i) {
                    const auto& p = ch.pieces[i];
                    FamilyParams fp{p.family, p.constants.c_amp, p.constants.c_shift, {}, 1};
                    const std::size_t n = 256;
                    for (std::size_t j = 0; j <= n; ++j)
                        fp.mu.push_back(p.mu_start + p.mu(p.mu.lo() + p.mu.width * static_cast<double>(j) / n));
                    for (auto& msg : admissibility_violations(fp)) {
                        const auto* s = doc.find(p.section);
                        v.push_back(detail::at_line(s ? s->line : 0) + "[" + p.section + "] " + msg);
                    }
                }
            }
            if (v.empty()) {
                const BoundaryProfile b = sc.boundary();
                const std::size_t n = sc.grid.n_w();
                double worst_cos = 1.0, worst_w = 0.0, slope = 0.0, slope_w = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double w = sc.grid.dw * static_cast<double>(i);
                    const double c = std::abs(std::cos(b.phi0(w)));
                    if (c < worst_cos) worst_cos = c, worst_w = w;
                    if (i > 0) {
                        const double wp = w - sc.grid.dw;
                        const double s = std::max(std::abs(b.theta0(w) - b.theta0(wp)), std::abs(b.phi0(w) - b.phi0(wp))) /
                                         sc.grid.dw;
                        if (s > slope) slope = s, slope_w = w;
                    }
                }
                if (worst_cos < cos_phi_floor && sc.mode != Mode::mixed) {
                    std::string where;
                    for (const auto& s : sc.segments)
                        if (s.angle == Angle::phi && worst_w >= s.segment.lo() && worst_w <= s.segment.hi())
                            where += " [" + s.section + "]";
                    v.push_back("entrance |cos phi| = " + std::to_string(worst_cos) + " < " + std::to_string(cos_phi_floor) +
                                " at w = " + std::to_string(worst_w / sc.w0) + " w0" + where);
                }
                if (slope > max_oracle_slope) {
                    const std::string msg = "entrance slope " + std::to_string(slope) + " at w = " +
                                            std::to_string(slope_w / sc.w0) + " w0 is not small compared with Omega^2/G";
                    if (oracle) v.push_back(msg);
                    else sc.warnings.push_back(msg);
                }
            }
        } catch (const DomainError& e) {
            v.push_back(e.what());
        }
    }

    if (!v.empty()) throw ConfigError(v);
    return sc;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Scenario load_scenario(const std::string& path, const std::vector<Override>& overrides = {},
                              std::optional<Mode> forced = std::nullopt) {
    return parse_scenario(read_text_file(path), overrides, forced);
}

}  // namespace tripod
