#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace fv {

inline constexpr const char* version = "1.0.0";

using Complex = std::complex<double>;

/// Unit system: hbar = 1 throughout; mass and speed of light are configurable.
struct PhysicalSystem {
    double mass = 1.0;
    double c = 137.036;

    double mc2() const { return mass * c * c; }
};

// Error hierarchy. Every failure carries enough context to identify the
// offending input without a debugger.

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct SingularityError : Error {
    double pivot_magnitude = 0.0;
    long depth_index = -1;
    SingularityError(const std::string& msg, double pivot, long depth = -1)
        : Error(msg), pivot_magnitude(pivot), depth_index(depth) {}
};

struct ConvergenceError : Error {
    using Error::Error;
};

struct AccuracyError : Error {
    using Error::Error;
};

struct ResourceError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    int line = 0;
    ConfigError(const std::string& msg, int line_no = 0) : Error(msg), line(line_no) {}
};

}  // namespace fv
