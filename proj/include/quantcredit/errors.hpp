#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace quantcredit {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inputs that are individually valid but inconsistent with each other
/// (misaligned grids, wrong lengths).
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InsufficientSamples : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by the filter when every unnormalized weight vanishes.
class TotalMassZero : public std::runtime_error {
public:
    TotalMassZero(std::size_t step, const std::string& what)
        : std::runtime_error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Invalid configuration or scenario. Carries every violation found, not
/// only the first; each entry names a line number or a field path.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
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

}  // namespace quantcredit
