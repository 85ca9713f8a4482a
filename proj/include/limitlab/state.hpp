#pragma once

#include <cmath>
#include <initializer_list>
#include <span>
#include <vector>

#include "limitlab/error.hpp"

namespace limitlab {

/// A point of the state space. Coordinates are finite by construction.
class StatePoint {
public:
    StatePoint() = default;
    StatePoint(std::initializer_list<double> coords) : coords_(coords) { validate(); }
    explicit StatePoint(std::vector<double> coords) : coords_(std::move(coords)) { validate(); }
    explicit StatePoint(std::span<const double> coords) : coords_(coords.begin(), coords.end()) {
        validate();
    }

    std::size_t dim() const noexcept { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    std::span<const double> coords() const noexcept { return coords_; }
    const std::vector<double>& vec() const noexcept { return coords_; }

    friend bool operator==(const StatePoint&, const StatePoint&) = default;

private:
    void validate() const {
        if (coords_.empty()) throw ValidationError("bad_point", "state point must have dim >= 1");
        for (double c : coords_)
            if (!std::isfinite(c)) throw ValidationError("bad_point", "state point has a non-finite coordinate");
    }

    std::vector<double> coords_;
};

using Cloud = std::vector<StatePoint>;

inline double norm2(std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

inline double norm_inf(std::span<const double> x) {
    double m = 0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double distance(const StatePoint& a, const StatePoint& b) {
    return distance(a.coords(), b.coords());
}

inline bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace limitlab
