#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qso {

// Base class for everything this library throws. CLI maps subclasses to exit codes.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed graphs, non-positive weights, row sums off, ...
struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// A requested enumeration would exceed a configured size cap.
struct CapExceeded : Error {
    CapExceeded(std::size_t required_, std::size_t cap_, const std::string& what_of)
        : Error(what_of + " would need " + std::to_string(required_) +
                " entries, cap is " + std::to_string(cap_)),
          required(required_),
          cap(cap_) {}
    std::size_t required;
    std::size_t cap;
};

struct DimensionMismatch : Error {
    DimensionMismatch(std::size_t expected, std::size_t got)
        : Error("dimension mismatch: expected " + std::to_string(expected) + ", got " +
                std::to_string(got)) {}
};

// volterra_canonical on an operator that is not Volterra.
struct NotVolterra : Error {
    explicit NotVolterra(const std::string& msg) : Error(msg) {}
};

// Tournament construction with tied (zero) off-diagonal coefficients.
struct DegenerateCoefficients : Error {
    explicit DegenerateCoefficients(std::vector<std::pair<std::size_t, std::size_t>> tied_)
        : Error(describe(tied_)), tied(std::move(tied_)) {}
    std::vector<std::pair<std::size_t, std::size_t>> tied;

  private:
    static std::string describe(const std::vector<std::pair<std::size_t, std::size_t>>& t) {
        std::string s = "tournament undefined: zero skew coefficient for pairs";
        for (const auto& [k, i] : t)
            s += " (" + std::to_string(k + 1) + "," + std::to_string(i + 1) + ")";
        return s;
    }
};

// Simplex left beyond tolerated drift/negativity during iteration. CLI exit 3.
struct NumericalIntegrityError : Error {
    explicit NumericalIntegrityError(const std::string& msg) : Error(msg) {}
};

// classify_limit on a trajectory shorter than twice the detection window.
struct TooShort : Error {
    TooShort(std::size_t steps, std::size_t needed)
        : Error("trajectory too short to classify: " + std::to_string(steps) + " steps, need " +
                std::to_string(needed)) {}
};

// reconstruct() received marginals whose linear system has no solution
// (cannot happen for marginals of an actual simplex point; defensive).
struct InconsistentMarginals : Error {
    explicit InconsistentMarginals(const std::string& msg) : Error(msg) {}
};

}  // namespace qso
