#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace adacast {

/// Calibration file failed to parse or violated a profile invariant.
class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Threshold pair violates 0 <= thr_minus <= thr_plus <= 1.
class ThresholdError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Cascade configuration is structurally invalid (depth, targets, fallback).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario description is inconsistent with the deployed cascade.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The fallback alone cannot satisfy the node constraints. Raised at
/// scheduling time only; the runtime safety check never throws.
class ConstraintUnsatisfiableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No candidate cascade satisfies the accuracy/memory/latency filters.
/// Carries one reason code per violated check of the fallback-only config.
class InfeasibleTaskError : public std::runtime_error {
public:
    InfeasibleTaskError(const std::string& what, std::vector<std::string> reasons)
        : std::runtime_error(what), reasons_(std::move(reasons)) {}

    const std::vector<std::string>& reasons() const noexcept { return reasons_; }

private:
    std::vector<std::string> reasons_;
};

/// Input file or CLI argument problem (exit code 3 in the CLI).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace adacast
