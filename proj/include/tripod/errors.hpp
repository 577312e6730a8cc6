#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tripod {

/// Invalid numeric input to a library operation (negative intensity, NaN, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// |cos phi| fell below the floor where the reduced equations blow up.
class SingularityError : public std::runtime_error {
public:
    SingularityError(const std::string& what, double zeta, double w)
        : std::runtime_error(what), zeta_(zeta), w_(w) {}

    double zeta() const noexcept { return zeta_; }
    double w() const noexcept { return w_; }

private:
    double zeta_;
    double w_;
};

/// Configuration problems. Carries every violation found, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

    explicit ConfigError(const std::string& violation)
        : ConfigError(std::vector<std::string>{violation}) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (const auto& s : v) {
            if (!out.empty()) out += "; ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

}  // namespace tripod
