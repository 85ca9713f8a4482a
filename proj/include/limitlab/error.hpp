#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace limitlab {

/// Base for every error raised by the library. `code()` is a stable
/// machine-readable tag used by the CLI's error JSON.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Bad input: malformed parameters, unknown names, dimension mismatch.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// The numerics refused: singular points, ill-conditioning, unconverged estimates.
class NumericError : public Error {
public:
    using Error::Error;
};

enum class DomainFault { outside_bounds, excluded_point, non_finite_image };

inline const char* to_string(DomainFault f) {
    switch (f) {
        case DomainFault::outside_bounds: return "outside-bounds";
        case DomainFault::excluded_point: return "excluded-point";
        case DomainFault::non_finite_image: return "non-finite-image";
    }
    return "unknown";
}

class DomainError : public NumericError {
public:
    DomainError(DomainFault fault, std::vector<double> at, const std::string& where)
        : NumericError("domain_error", where + ": " + to_string(fault)),
          fault_(fault), at_(std::move(at)) {}
    DomainFault fault() const noexcept { return fault_; }
    /// The offending input point.
    const std::vector<double>& at() const noexcept { return at_; }

private:
    DomainFault fault_;
    std::vector<double> at_;
};

}  // namespace limitlab
