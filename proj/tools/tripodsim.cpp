// tripodsim: scenario-driven front end for the tripod propagation library.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tripod/tripod.hpp"

namespace fs = std::filesystem;
using namespace tripod;

namespace {

struct Globals {
    std::string out = "out";
    bool quiet = false;
    long long seed = 0;  // reserved: every algorithm here is deterministic
};

void say(const Globals& g, const std::string& s) {
    if (!g.quiet) std::cout << s << '\n';
}

std::string fmt(double x) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", x);
    return b;
}

void summarize(const Globals& g, const RunOutcome& o, const fs::path& dir) {
    if (g.quiet) return;
    const json& r = o.report;
    std::cout << "status: " << r.value("status", "?") << "  (" << fmt(o.seconds) << " s)\n";
    if (r.contains("error")) std::cout << "error: " << r["error"]["message"].get<std::string>() << '\n';
    for (const auto& w : r["warnings"]) std::cout << "warning: " << w.get<std::string>() << '\n';
    if (r.contains("compare")) {
        const json& c = r["compare"];
        std::cout << "compare: max |reduced - oracle| = " << fmt(c["max_abs"].get<double>()) << " rad (threshold "
                  << fmt(c["threshold"].get<double>()) << ")\n";
    }
    if (r.contains("units")) std::cout << r["units"].dump(2) << '\n';
    std::cout << "wrote " << dir.string() << '\n';
}

int run_scenario(const Globals& g, const std::string& file, std::optional<Mode> forced) {
    const Scenario sc = load_scenario(file, {}, forced);
    const RunOutcome o = run(sc);
    const fs::path dir = fs::path(g.out) / sc.name;
    write_files(dir, o.files);
    summarize(g, o, dir);
    return o.exit_code;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adiabatic pulse propagation in a tripod medium"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_flag("--quiet", g.quiet, "Suppress console output");
    app.add_option("--seed", g.seed, "Accepted for interface stability; unused");

    std::string scenario_file;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario file");
    run_cmd->add_option("scenario", scenario_file, "Scenario file")->required();

    auto* cmp_cmd = app.add_subcommand("compare", "Run a scenario with both the reduced solver and the oracle");
    cmp_cmd->add_option("scenario", scenario_file, "Scenario file")->required();

    std::string profile_file, family = "slow", window;
    double beta = 0.0;
    std::optional<double> fit_zeta;
    auto* fit_cmd = app.add_subcommand("fit", "Fit family constants to one slice of a profile table");
    fit_cmd->add_option("profile", profile_file, "Profile table written by run")->required();
    fit_cmd->add_option("--family", family, "slow|fast")->check(CLI::IsMember({"slow", "fast"}))->capture_default_str();
    fit_cmd->add_option("--beta", beta, "Mixing offset beta of the run that produced the table")->required();
    fit_cmd->add_option("--zeta", fit_zeta, "Slice to fit (default: last)");
    fit_cmd->add_option("--window", window, "w range lo,hi");

    double d = 0, k = 0, n = 0, intensity = 0, length = 0;
    auto* units_cmd = app.add_subcommand("units", "Laboratory units: coupling, Rabi frequency, group velocity, delay");
    units_cmd->add_option("--d", d, "Dipole moment, esu cm")->required();
    units_cmd->add_option("--k", k, "Wave number, 1/cm")->required();
    units_cmd->add_option("--n", n, "Number density, 1/cm^3")->required();
    units_cmd->add_option("--intensity", intensity, "Intensity, mW/cm^2")->required();
    units_cmd->add_option("--length", length, "Medium length, cm")->required();

    std::vector<std::string> sets;
    unsigned workers = 1;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario over a parameter grid");
    sweep_cmd->add_option("scenario", scenario_file, "Scenario file")->required();
    sweep_cmd->add_option("--set", sets, "key=v1,v2,... (repeatable)")->required();
    sweep_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_validation;
    }

    try {
        if (*run_cmd) return run_scenario(g, scenario_file, std::nullopt);
        if (*cmp_cmd) return run_scenario(g, scenario_file, Mode::compare);

        if (*units_cmd) {
            MediumSpec m{d, k, n, intensity, length};
            if (!(d > 0 && k > 0 && n > 0 && intensity > 0 && length >= 0))
                throw ConfigError("units: d, k, n, intensity must be positive and length non-negative");
            const json r = detail::units_report(m);
            write_files(g.out, {{"units.json", r.dump(2) + '\n'}});
            say(g, r.dump(2));
            return exit_ok;
        }

        if (*fit_cmd) {
            double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
            if (!window.empty()) {
                const auto parts = split(window, ',');
                if (parts.size() != 2) throw ConfigError("--window expects lo,hi");
                try {
                    lo = std::stod(parts[0]);
                    hi = std::stod(parts[1]);
                } catch (const std::exception&) {
                    throw ConfigError("--window expects two numbers");
                }
            }
            const ProfileSlice s = read_profile_slice(read_text_file(profile_file), fit_zeta, lo, hi);
            PulseWindow w{s.theta, s.phi, {}};
            for (double nu : s.nu) w.mu.push_back(superposition_angle(beta, nu));
            json r;
            r["zeta"] = s.zeta;
            r["w_lo"] = s.w.front();
            r["w_hi"] = s.w.back();
            try {
                const FitResult f = fit_constants(w, family == "slow" ? Family::slow : Family::fast);
                r["family"] = to_string(f.family);
                r["label"] = to_string(f.classification.label);
                r["slow_invariant_spread"] = detail::num(f.classification.slow_invariant_spread);
                r["fast_invariant_spread"] = detail::num(f.classification.fast_invariant_spread);
                r["c_amp"] = f.c_amp;
                r["c_shift"] = f.c_shift;
                r["rms"] = f.rms;
                write_files(g.out, {{"fit.json", r.dump(2) + '\n'}});
                say(g, r.dump(2));
                return exit_ok;
            } catch (const FitRefused& e) {
                r["refused"] = e.what();
                r["label"] = to_string(e.classification().label);
                r["slow_invariant_spread"] = detail::num(e.classification().slow_invariant_spread);
                r["fast_invariant_spread"] = detail::num(e.classification().fast_invariant_spread);
                write_files(g.out, {{"fit.json", r.dump(2) + '\n'}});
                std::cerr << r.dump(2) << '\n';
                return exit_validation;
            }
        }

        if (*sweep_cmd) {
            std::vector<SweepAxis> axes;
            for (const auto& s : sets) {
                const auto eq = s.find('=');
                if (eq == std::string::npos) throw ConfigError("--set expects key=v1,v2,...");
                axes.push_back({s.substr(0, eq), split(s.substr(eq + 1), ',')});
            }
            const std::string text = read_text_file(scenario_file);
            const Scenario base = parse_scenario(text);
            const SweepResult res = sweep(text, axes, workers);
            const fs::path dir = fs::path(g.out) / base.name / "sweep";
            for (std::size_t i = 0; i < res.cells.size(); ++i) {
                char cell[32];
                std::snprintf(cell, sizeof cell, "cell_%03zu", i);
                write_files(dir / cell, res.cells[i].outcome.files);
            }
            write_files(dir, res.files);
            if (!g.quiet) {
                std::cout << res.files.front().content;
                std::cout << "wrote " << dir.string() << '\n';
            }
            return exit_ok;
        }
    } catch (const ConfigError& e) {
        std::cerr << "invalid input:\n";
        for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
        return exit_validation;
    } catch (const SingularityError& e) {
        std::cerr << "singularity: " << e.what() << '\n';
        return exit_singularity;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return exit_validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_failure;
}
