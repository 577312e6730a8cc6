#pragma once

// Scenario execution.  Runs produce their files in memory; the caller owns
// the disk.  Everything written is a deterministic function of the scenario:
// timings are returned separately and never enter a file.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tripod/analytic.hpp"
#include "tripod/core.hpp"
#include "tripod/errors.hpp"
#include "tripod/oracle.hpp"
#include "tripod/physical.hpp"
#include "tripod/reduced.hpp"
#include "tripod/scenario.hpp"

namespace tripod {

using json = nlohmann::ordered_json;

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_validation = 2, exit_singularity = 3, exit_threshold = 4 };

struct OutputFile {
    std::string name;
    std::string content;
};

struct RunOutcome {
    json report;
    std::vector<OutputFile> files;  ///< report.json last
    int exit_code = exit_ok;
    double seconds = 0.0;
};

namespace detail {

inline std::string sci(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.8e", x);
    return buf;
}

inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline bool same_zeta(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * std::max(1.0, scale); }

}  // namespace detail

inline constexpr const char* profile_header = "zeta,w,theta,phi,nu,sin_theta,sin_phi,sin_nu";

/// Rows for the given snapshots of f, every `stride`-th w sample.
/// Returns the largest violation of the field-share identity over the rows.
inline double format_profiles(std::string& out, const ReducedField& f, std::size_t stride) {
    double worst = 0.0;
    stride = std::max<std::size_t>(1, stride);
    for (std::size_t s = 0; s < f.n_snapshots(); ++s) {
        for (std::size_t i = 0; i < f.n_w(); i += stride) {
            const double th = f.theta[s][i], ph = f.phi[s][i];
            const double nu = f.has_nu() ? f.nu[s][i] : std::numeric_limits<double>::quiet_NaN();
            const double a = std::sin(th) * std::cos(ph), b = std::cos(th) * std::cos(ph), c = std::sin(ph);
            worst = std::max(worst, std::abs(a * a + b * b + c * c - 1.0));
            out += detail::sci(f.zeta[s]) + ',' + detail::sci(f.w(i)) + ',' + detail::sci(th) + ',' + detail::sci(ph) +
                   ',' + detail::sci(nu) + ',' + detail::sci(std::sin(th)) + ',' + detail::sci(std::sin(ph)) + ',' +
                   detail::sci(std::sin(nu)) + '\n';
        }
    }
    return worst;
}

/// One slice read back from a profile table.
struct ProfileSlice {
    double zeta = 0.0;
    std::vector<double> w, theta, phi, nu;
};

/// Parse a profile table and return the slice at `zeta` (the last slice when
/// absent), restricted to lo <= w <= hi.
inline ProfileSlice read_profile_slice(const std::string& text, std::optional<double> zeta = std::nullopt,
                                       double lo = -std::numeric_limits<double>::infinity(),
                                       double hi = std::numeric_limits<double>::infinity()) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != profile_header)
        throw ConfigError(std::string("profile table must start with the header ") + profile_header);
    std::vector<std::array<double, 5>> rows;
    int n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (detail::trim(line).empty()) continue;
        std::array<double, 5> r{};
        std::istringstream ls(line);
        std::string cell;
        for (std::size_t k = 0; k < 5; ++k) {
            if (!std::getline(ls, cell, ',')) throw ConfigError("profile line " + std::to_string(n) + ": too few columns");
            try {
                r[k] = std::stod(cell);
            } catch (const std::exception&) {
                throw ConfigError("profile line " + std::to_string(n) + ": bad number '" + cell + "'");
            }
        }
        rows.push_back(r);
    }
    if (rows.empty()) throw ConfigError("profile table has no rows");
    ProfileSlice out;
    out.zeta = zeta.value_or(rows.back()[0]);
    double scale = 1.0;
    for (const auto& r : rows) scale = std::max(scale, std::abs(r[0]));
    for (const auto& r : rows) {
        if (!detail::same_zeta(r[0], out.zeta, scale) || r[1] < lo || r[1] > hi) continue;
        out.w.push_back(r[1]);
        out.theta.push_back(r[2]);
        out.phi.push_back(r[3]);
        out.nu.push_back(r[4]);
    }
    if (out.w.empty()) throw ConfigError("profile table has no rows at zeta " + std::to_string(out.zeta) + " in the window");
    for (double v : out.nu)
        if (std::isnan(v)) throw ConfigError("profile slice has no nu column values (mixed-state output cannot be fitted)");
    return out;
}

struct WindowRange {
    std::size_t lo = 0;
    std::size_t hi = 0;  ///< inclusive
};

/// Stretches of a slice where the angles change: samples whose slope exceeds
/// `threshold` times the slice maximum, with gaps shorter than `merge` samples
/// closed (a bump has a flat top where its slope vanishes).
inline std::vector<WindowRange> find_windows(std::span<const double> theta, std::span<const double> phi,
                                             double threshold, std::size_t merge) {
    const std::size_t n = theta.size();
    std::vector<WindowRange> out;
    if (n < 3) return out;
    std::vector<double> slope(n, 0.0);
    double peak = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        slope[i] = std::max(std::abs(theta[i + 1] - theta[i - 1]), std::abs(phi[i + 1] - phi[i - 1]));
        peak = std::max(peak, slope[i]);
    }
    if (peak <= 2.0 * constant_window_tolerance) return out;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (slope[i] <= threshold * peak) continue;
        if (!out.empty() && i - out.back().hi <= merge + 1) out.back().hi = i;
        else out.push_back({i, i});
    }
    return out;
}

struct PulseReport {
    double zeta = 0.0;
    double w_lo = 0.0;
    double w_hi = 0.0;
    PulseClassification classification;
    bool fitted = false;
    FitResult fit;
};

inline PulseWindow window_of(const ReducedField& f, std::size_t s, const WindowRange& r) {
    PulseWindow w;
    for (std::size_t i = r.lo; i <= r.hi; ++i) {
        w.theta.push_back(f.theta[s][i]);
        w.phi.push_back(f.phi[s][i]);
        w.mu.push_back(f.mu(s, i));
    }
    return w;
}

inline std::vector<PulseReport> analyse_pulses(const ReducedField& f, double threshold, double merge_length,
                                               bool fit) {
    std::vector<PulseReport> out;
    if (!f.has_nu()) return out;
    const auto merge = static_cast<std::size_t>(std::llround(merge_length / f.dw));
    for (std::size_t s = 0; s < f.n_snapshots(); ++s) {
        for (const auto& r : find_windows(f.theta[s], f.phi[s], threshold, merge)) {
            PulseReport p;
            p.zeta = f.zeta[s];
            p.w_lo = f.w(r.lo);
            p.w_hi = f.w(r.hi);
            const PulseWindow w = window_of(f, s, r);
            p.classification = classify(w);
            const auto label = p.classification.label;
            if (fit && (label == PulseLabel::slow || label == PulseLabel::fast)) {
                p.fit = fit_constants(w, label == PulseLabel::slow ? Family::slow : Family::fast);
                p.fitted = true;
            }
            out.push_back(p);
        }
    }
    return out;
}

inline json to_json(const PulseReport& p) {
    json j;
    j["zeta"] = p.zeta;
    j["w_lo"] = p.w_lo;
    j["w_hi"] = p.w_hi;
    j["label"] = to_string(p.classification.label);
    j["slow_invariant_spread"] = detail::num(p.classification.slow_invariant_spread);
    j["fast_invariant_spread"] = detail::num(p.classification.fast_invariant_spread);
    if (p.fitted) {
        j["fit"] = {{"family", to_string(p.fit.family)},
                    {"c_amp", p.fit.c_amp},
                    {"c_shift", p.fit.c_shift},
                    {"rms", p.fit.rms}};
    }
    return j;
}

/// How an angle's entrance perturbation moved between the first and last
/// snapshot: left in place (fast), shifted by zeta in w (slow), or neither.
struct Behaviour {
    std::string label;
    double fast_error = 0.0;  ///< max |X(zeta, w) - X(0, w)|
    double slow_error = 0.0;  ///< max |X(zeta, w) - X(0, w - zeta)|
    double amplitude = 0.0;   ///< max |X(0, w) - X(0, 0)|
};

inline Behaviour assess(const ReducedField& f, Angle angle) {
    Behaviour b;
    const auto& rows = angle == Angle::theta ? f.theta : f.phi;
    if (rows.size() < 2) {
        b.label = "static";
        return b;
    }
    const auto& first = rows.front();
    const auto& last = rows.back();
    const double zeta = f.zeta.back();
    for (std::size_t i = 0; i < f.n_w(); ++i) {
        b.amplitude = std::max(b.amplitude, std::abs(first[i] - first[0]));
        b.fast_error = std::max(b.fast_error, std::abs(last[i] - first[i]));
        b.slow_error = std::max(b.slow_error, std::abs(last[i] - cubic_uniform(first, 0.0, f.dw, f.w(i) - zeta)));
    }
    if (b.amplitude <= constant_window_tolerance) b.label = "static";
    else if (b.fast_error < 0.1 * b.amplitude && b.fast_error < b.slow_error) b.label = "fast";
    else if (b.slow_error < 0.1 * b.amplitude && b.slow_error < b.fast_error) b.label = "slow";
    else b.label = "neither";
    return b;
}

inline json to_json(const Behaviour& b) {
    return {{"behaviour", b.label}, {"fast_error", b.fast_error}, {"slow_error", b.slow_error}, {"amplitude", b.amplitude}};
}

inline json scenario_echo(const Scenario& sc) {
    json j;
    j["name"] = sc.name;
    j["mode"] = to_string(sc.mode);
    if (sc.mode == Mode::units) {
        j["medium"] = {{"d", sc.medium.d},
                       {"k", sc.medium.k},
                       {"n", sc.medium.n},
                       {"intensity_mW_cm2", sc.medium.intensity},
                       {"length_cm", sc.medium.length}};
        return j;
    }
    j["beta"] = sc.beta;
    j["w0"] = sc.w0;
    j["grid"] = {{"dw", sc.grid.dw}, {"dzeta", sc.grid.dzeta}, {"w_max", sc.grid.w_max}, {"zeta_max", sc.grid.zeta_max}};
    j["background"] = {{"theta", sc.theta_background}, {"phi", sc.phi_background}};
    json segs = json::array();
    for (const auto& s : sc.segments)
        segs.push_back({{"section", s.section},
                        {"angle", s.angle == Angle::theta ? "theta" : "phi"},
                        {"shape", s.segment.shape == SegmentShape::ramp ? "ramp" : "bump"},
                        {"center", s.segment.center},
                        {"width", s.segment.width},
                        {"amplitude", s.segment.amplitude}});
    j["segments"] = segs;
    json fams = json::array();
    for (const auto& f : sc.families)
        fams.push_back({{"section", f.section},
                        {"family", to_string(f.family)},
                        {"shape", f.mu.shape == SegmentShape::ramp ? "ramp" : "bump"},
                        {"center", f.mu.center},
                        {"width", f.mu.width},
                        {"amplitude", f.mu.amplitude}});
    j["families"] = fams;
    j["profiles"] = sc.output.profiles;
    j["stride"] = sc.output.stride;
    if (sc.mode == Mode::oracle || sc.mode == Mode::compare) {
        const OracleGrid g = sc.oracle_grid();
        j["oracle"] = {{"dtau", g.dtau},
                       {"dzeta", g.dzeta},
                       {"snapshot_every", g.snapshot_every},
                       {"store_tau_every", g.store_tau_every}};
        j["compare_threshold"] = sc.compare_threshold;
    }
    return j;
}

namespace detail {

struct ReducedProducts {
    ReducedField snapshots;  ///< uniform, every snapshot_steps
    ReducedField profiles;   ///< requested zeta values
    double solvability_max = 0.0;
    double solvability_zeta = 0.0;
    double solvability_w = 0.0;
    double nu_origin_max = 0.0;
};

inline ReducedProducts run_reduced(const Scenario& sc, bool mixed) {
    const BoundaryProfile b = sc.boundary();
    const Grid& g = sc.grid;
    std::vector<std::size_t> wanted;
    for (double z : sc.output.profiles) wanted.push_back(static_cast<std::size_t>(std::llround(z / g.dzeta)));
    std::sort(wanted.begin(), wanted.end());
    wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());

    ReducedProducts p;
    p.profiles.beta = sc.beta;
    p.profiles.dw = g.dw;
    SolvabilityMonitor monitor(g.dzeta, g.dw);
    PropagateOptions opt;
    opt.snapshot_every = sc.snapshot_steps();
    opt.observer = [&](std::size_t step, double zeta, const SliceView& s) {
        monitor(step, zeta, s);
        if (!s.nu.empty()) p.nu_origin_max = std::max(p.nu_origin_max, std::abs(s.nu[0]));
        if (std::binary_search(wanted.begin(), wanted.end(), step)) {
            p.profiles.zeta.push_back(zeta);
            p.profiles.theta.emplace_back(s.theta.begin(), s.theta.end());
            p.profiles.phi.emplace_back(s.phi.begin(), s.phi.end());
            if (!s.nu.empty()) p.profiles.nu.emplace_back(s.nu.begin(), s.nu.end());
        }
    };
    p.snapshots = mixed ? mixed_state_propagate(b, g, opt) : propagate(b, g, opt);
    p.profiles.omega0 = p.snapshots.omega0;
    p.solvability_max = monitor.max_abs();
    p.solvability_zeta = monitor.where_zeta();
    p.solvability_w = monitor.where_w();
    return p;
}

inline double population_deviation(const ReducedField& f) {
    double worst = 0.0;
    if (!f.has_nu()) return worst;
    for (std::size_t s = 0; s < f.n_snapshots(); ++s)
        for (std::size_t i = 0; i < f.n_w(); ++i) {
            const AtomState a = state_from_mixing({f.theta[s][i], f.phi[s][i], f.nu[s][i]}, f.mu(s, i));
            worst = std::max(worst, std::abs(std::norm(a[1]) + std::norm(a[2]) + std::norm(a[3]) - 1.0));
        }
    return worst;
}

inline ReducedField select_snapshots(const ReducedField& f, const std::vector<double>& zetas, double scale) {
    ReducedField out;
    out.beta = f.beta;
    out.dw = f.dw;
    out.omega0 = f.omega0;
    std::vector<double> zs = zetas;
    std::sort(zs.begin(), zs.end());
    zs.erase(std::unique(zs.begin(), zs.end(), [&](double a, double b) { return same_zeta(a, b, scale); }), zs.end());
    for (double z : zs)
        for (std::size_t s = 0; s < f.n_snapshots(); ++s)
            if (same_zeta(f.zeta[s], z, scale)) {
                out.zeta.push_back(f.zeta[s]);
                out.theta.push_back(f.theta[s]);
                out.phi.push_back(f.phi[s]);
                if (f.has_nu()) out.nu.push_back(f.nu[s]);
                break;
            }
    return out;
}

inline json reduced_invariants(const ReducedProducts& p, double identity) {
    return {{"solvability_residual_max", p.solvability_max},
            {"solvability_residual_at", {{"zeta", p.solvability_zeta}, {"w", p.solvability_w}}},
            {"nu_at_origin_max", p.nu_origin_max},
            {"field_share_identity_max", identity},
            {"population_deviation_max", population_deviation(p.profiles)}};
}

inline json oracle_invariants(const OracleRun& run, const ReducedField& angles) {
    const auto& r = run.report;
    json j{{"exchange_residual", r.exchange_residual},
           {"max_dzeta_power", r.max_dzeta_power},
           {"max_dtau_excited", r.max_dtau_excited},
           {"norm_drift_max", r.max_norm_drift},
           {"excited_population_max", r.max_excited},
           {"theta_rate_max", r.max_theta_rate},
           {"phi_rate_max", r.max_phi_rate}};
    try {
        j["solvability_residual_max"] = solvability_residual(angles).max_abs;
    } catch (const DomainError&) {
        // Last slice off the snapshot lattice: drop it.
        ReducedField u = angles;
        u.zeta.pop_back();
        u.theta.pop_back();
        u.phi.pop_back();
        u.nu.pop_back();
        j["solvability_residual_max"] = solvability_residual(u).max_abs;
    }
    return j;
}

inline json pulses_json(const std::vector<PulseReport>& ps) {
    json a = json::array();
    for (const auto& p : ps) a.push_back(to_json(p));
    return a;
}

inline void add_profiles(RunOutcome& out, const std::string& name, const ReducedField& f, std::size_t stride,
                         double& identity) {
    std::string csv = std::string(profile_header) + '\n';
    identity = std::max(identity, format_profiles(csv, f, stride));
    out.files.push_back({name, std::move(csv)});
}

inline json units_report(const MediumSpec& m) {
    const MediumParams p{m.d, m.k, m.n};
    const double G = p.G();
    const double intensity_cgs = m.intensity * 1e4;  // mW/cm^2 -> erg s^-1 cm^-2
    const double omega = rabi_from_intensity(intensity_cgs, p);
    const double vg_slow = group_velocity(omega, G, p.c, PulseFamily::slow);
    const double vg_mixed = group_velocity(omega, G, p.c, PulseFamily::mixed);
    return {{"G_per_s_cm", G},
            {"intensity_erg_s_cm2", intensity_cgs},
            {"omega_per_s", omega},
            {"omega2_over_G_cm_per_s", omega * omega / G},
            {"slow_group_velocity_cm_per_s", vg_slow},
            {"slow_group_velocity_over_c", vg_slow / p.c},
            {"mixed_group_velocity_cm_per_s", vg_mixed},
            {"length_cm", m.length},
            {"slow_delay_s", delay(m.length, vg_slow, p.c)},
            {"fast_delay_s", delay(m.length, group_velocity(omega, G, p.c, PulseFamily::fast), p.c)},
            {"mixed_delay_s", delay(m.length, vg_mixed, p.c)}};
}

inline void execute(const Scenario& sc, RunOutcome& out) {
    json& rep = out.report;
    double identity = 0.0;
    const double scale = std::max(1.0, sc.grid.zeta_max);
    const double merge = 0.5 * sc.w0;

    if (sc.mode == Mode::units) {
        rep["units"] = units_report(sc.medium);
        return;
    }

    rep["grid"] = {{"n_w", sc.grid.n_w()}, {"n_zeta_steps", sc.grid.n_zeta_steps()}};

    if (sc.mode == Mode::reduced || sc.mode == Mode::mixed) {
        const ReducedProducts p = run_reduced(sc, sc.mode == Mode::mixed);
        add_profiles(out, "profiles.csv", p.profiles, sc.output.stride, identity);
        rep["invariants"] = reduced_invariants(p, identity);
        if (sc.mode == Mode::mixed) rep["invariants"].erase("population_deviation_max");
        if (sc.output.classify && sc.mode == Mode::reduced)
            rep["pulses"] = pulses_json(analyse_pulses(p.profiles, sc.output.window_threshold, merge, sc.output.fit));
        return;
    }

    const OracleGrid og = sc.oracle_grid();
    rep["grid"]["oracle"] = {{"n_tau", og.n_tau()}, {"n_zeta_steps", og.n_zeta_steps()}};
    const OracleRun orun = propagate_full(sc.boundary(), og);
    const ReducedField oangles = oracle_angles(orun);
    const ReducedField oprof = select_snapshots(oangles, sc.output.profiles, scale);

    if (sc.mode == Mode::oracle) {
        add_profiles(out, "profiles.csv", oprof, sc.output.stride, identity);
        rep["invariants"] = oracle_invariants(orun, oangles);
        rep["invariants"]["field_share_identity_max"] = identity;
        if (sc.output.classify)
            rep["pulses"] = pulses_json(analyse_pulses(oprof, sc.output.window_threshold, merge, sc.output.fit));
        return;
    }

    // compare
    const ReducedProducts p = run_reduced(sc, false);
    add_profiles(out, "profiles_reduced.csv", p.profiles, sc.output.stride, identity);
    add_profiles(out, "profiles_oracle.csv", oprof, sc.output.stride, identity);
    json inv;
    inv["reduced"] = reduced_invariants(p, identity);
    inv["oracle"] = oracle_invariants(orun, oangles);
    rep["invariants"] = inv;
    if (sc.output.classify)
        rep["pulses"] = {
            {"reduced", pulses_json(analyse_pulses(p.profiles, sc.output.window_threshold, merge, sc.output.fit))},
            {"oracle", pulses_json(analyse_pulses(oprof, sc.output.window_threshold, merge, sc.output.fit))}};

    const Comparison c = compare_to_reduced(orun, p.snapshots);
    const bool pass = c.max_abs() <= sc.compare_threshold;
    auto err = [](const AngleError& e) {
        return json{{"max_abs", e.max_abs}, {"rms", e.rms}, {"at", {{"zeta", e.where_zeta}, {"w", e.where_w}}}};
    };
    rep["compare"] = {{"theta", err(c.theta)},
                      {"phi", err(c.phi)},
                      {"max_abs", c.max_abs()},
                      {"threshold", sc.compare_threshold},
                      {"pass", pass},
                      {"behaviour",
                       {{"reduced", {{"theta", to_json(assess(p.snapshots, Angle::theta))},
                                     {"phi", to_json(assess(p.snapshots, Angle::phi))}}},
                        {"oracle", {{"theta", to_json(assess(oangles, Angle::theta))},
                                    {"phi", to_json(assess(oangles, Angle::phi))}}}}}};
    std::string csv = "zeta,w,theta_error,phi_error\n";
    for (std::size_t s = 0; s < c.zeta.size(); ++s)
        for (std::size_t k = 0; k < c.theta_error[s].size(); k += std::max<std::size_t>(1, sc.output.stride))
            csv += sci(c.zeta[s]) + ',' + sci(oangles.w(k)) + ',' + sci(c.theta_error[s][k]) + ',' +
                   sci(c.phi_error[s][k]) + '\n';
    out.files.push_back({"compare.csv", std::move(csv)});
    if (!pass) out.exit_code = exit_threshold;
}

}  // namespace detail

/// Run one validated scenario.  Solver failures are reported in the outcome
/// (status, error, exit code) rather than thrown.
inline RunOutcome run(const Scenario& sc) {
    const auto t0 = std::chrono::steady_clock::now();
    RunOutcome out;
    json& rep = out.report;
    rep["scenario"] = scenario_echo(sc);
    rep["warnings"] = sc.warnings;
    try {
        detail::execute(sc, out);
        rep["status"] = out.exit_code == exit_threshold ? "threshold_failed" : "ok";
    } catch (const SingularityError& e) {
        out.files.clear();
        out.exit_code = exit_singularity;
        rep["status"] = "singularity";
        rep["error"] = {{"message", e.what()}, {"zeta", detail::num(e.zeta())}, {"w", detail::num(e.w())}};
    } catch (const ConfigError& e) {
        out.files.clear();
        out.exit_code = exit_validation;
        rep["status"] = "invalid";
        rep["error"] = {{"message", e.what()}};
    } catch (const std::exception& e) {
        out.files.clear();
        out.exit_code = exit_failure;
        rep["status"] = "error";
        rep["error"] = {{"message", e.what()}};
    }
    json manifest = json::array();
    for (const auto& f : out.files) manifest.push_back(f.name);
    manifest.push_back("report.json");
    rep["files"] = manifest;
    out.files.push_back({"report.json", rep.dump(2) + '\n'});
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

inline void write_files(const std::filesystem::path& dir, const std::vector<OutputFile>& files) {
    std::filesystem::create_directories(dir);
    for (const auto& f : files) {
        std::ofstream os(dir / f.name, std::ios::binary);
        os << f.content;
        if (!os) throw std::runtime_error("cannot write " + (dir / f.name).string());
    }
}

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

struct SweepCell {
    std::vector<std::pair<std::string, double>> params;  ///< sorted by key
    RunOutcome outcome;
};

struct SweepResult {
    std::vector<SweepCell> cells;  ///< sorted by parameter tuple
    json summary;
    std::vector<OutputFile> files;  ///< sweep.csv, sweep.json
};

namespace detail {

inline double parse_value(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used == v.size() && std::isfinite(x)) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("sweep value '" + v + "' for " + key + " is not a finite number");
}

inline json cell_metrics(const json& rep) {
    json m;
    m["status"] = rep.value("status", "error");
    auto pick = [&](const char* name, const json& from, const char* key) {
        if (from.is_object() && from.contains(key)) m[name] = from[key];
    };
    if (rep.contains("invariants")) {
        const json& inv = rep["invariants"];
        const json& red = inv.contains("reduced") ? inv["reduced"] : inv;
        const json& orc = inv.contains("oracle") ? inv["oracle"] : inv;
        pick("solvability_residual_max", red, "solvability_residual_max");
        pick("excited_population_max", orc, "excited_population_max");
        pick("exchange_residual", orc, "exchange_residual");
        pick("norm_drift_max", orc, "norm_drift_max");
    }
    if (rep.contains("compare")) m["compare_max_abs"] = rep["compare"]["max_abs"];
    return m;
}

}  // namespace detail

/// Every combination of the axes' values, run on `workers` threads.  Cells
/// that fail (including invalid combinations) are recorded, not fatal.
inline SweepResult sweep(const std::string& text, std::vector<SweepAxis> axes, unsigned workers) {
    for (auto& a : axes) {
        a.key = canonical_key(a.key);
        const auto& allowed = sweepable_keys();
        if (std::find(allowed.begin(), allowed.end(), a.key) == allowed.end())
            throw ConfigError("sweep key '" + a.key + "': only beta, w0, grid steps and oracle steps may be varied");
        if (a.values.empty()) throw ConfigError("sweep key '" + a.key + "' has no values");
        for (const auto& v : a.values) detail::parse_value(a.key, v);
    }
    std::sort(axes.begin(), axes.end(), [](const auto& x, const auto& y) { return x.key < y.key; });
    for (std::size_t i = 1; i < axes.size(); ++i)
        if (axes[i].key == axes[i - 1].key) throw ConfigError("sweep key '" + axes[i].key + "' given twice");

    struct Job {
        std::vector<Override> overrides;
        std::vector<std::pair<std::string, double>> params;
    };
    std::vector<Job> jobs(1);
    for (const auto& a : axes) {
        std::vector<Job> next;
        for (const auto& j : jobs)
            for (const auto& v : a.values) {
                Job k = j;
                k.overrides.push_back({a.key, v});
                k.params.emplace_back(a.key, detail::parse_value(a.key, v));
                next.push_back(std::move(k));
            }
        jobs = std::move(next);
    }
    std::sort(jobs.begin(), jobs.end(), [](const Job& x, const Job& y) {
        for (std::size_t i = 0; i < x.params.size(); ++i)
            if (x.params[i].second != y.params[i].second) return x.params[i].second < y.params[i].second;
        return false;
    });
    jobs.erase(std::unique(jobs.begin(), jobs.end(),
                           [](const Job& x, const Job& y) {
                               for (std::size_t i = 0; i < x.params.size(); ++i)
                                   if (x.params[i].second != y.params[i].second) return false;
                               return true;
                           }),
               jobs.end());

    SweepResult res;
    res.cells.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            SweepCell& c = res.cells[i];
            c.params = jobs[i].params;
            try {
                c.outcome = run(parse_scenario(text, jobs[i].overrides));
            } catch (const ConfigError& e) {
                RunOutcome o;
                o.exit_code = exit_validation;
                o.report["status"] = "invalid";
                o.report["error"] = {{"message", e.what()}};
                o.report["files"] = json::array({"report.json"});
                o.files.push_back({"report.json", o.report.dump(2) + '\n'});
                c.outcome = std::move(o);
            }
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    json cells = json::array();
    std::string csv;
    for (const auto& a : axes) csv += a.key + ',';
    csv += "cell,status,exit_code,solvability_residual_max,excited_population_max,exchange_residual,compare_max_abs\n";
    for (std::size_t i = 0; i < res.cells.size(); ++i) {
        const auto& c = res.cells[i];
        char dir[32];
        std::snprintf(dir, sizeof dir, "cell_%03zu", i);
        json params;
        for (const auto& [k, v] : c.params) params[k] = v;
        json m = detail::cell_metrics(c.outcome.report);
        cells.push_back({{"cell", dir}, {"params", params}, {"exit_code", c.outcome.exit_code}, {"metrics", m}});
        for (const auto& [k, v] : c.params) csv += detail::sci(v) + ',';
        csv += std::string(dir) + ',' + m["status"].get<std::string>() + ',' + std::to_string(c.outcome.exit_code);
        for (const char* k : {"solvability_residual_max", "excited_population_max", "exchange_residual", "compare_max_abs"})
            csv += ',' + (m.contains(k) && m[k].is_number() ? detail::sci(m[k].get<double>()) : std::string());
        csv += '\n';
    }
    res.summary = {{"cells", cells}};
    res.files.push_back({"sweep.csv", std::move(csv)});
    res.files.push_back({"sweep.json", res.summary.dump(2) + '\n'});
    return res;
}

}  // namespace tripod
