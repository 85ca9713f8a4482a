#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "limitlab/error.hpp"
#include "limitlab/format.hpp"
#include "limitlab/state.hpp"

namespace limitlab {

enum class DomainKind { interval, box, annulus, punctured_box, full_space };

inline const char* to_string(DomainKind k) {
    switch (k) {
        case DomainKind::interval: return "interval";
        case DomainKind::box: return "box";
        case DomainKind::annulus: return "annulus";
        case DomainKind::punctured_box: return "punctured-box";
        case DomainKind::full_space: return "full-space";
    }
    return "unknown";
}

/// A described subset of R^n: per-axis closed bounds (infinite bounds mean
/// "not given") minus small balls around excluded points. For an annulus the
/// single bound pair holds the inner and outer radius about the origin.
class DomainRegion {
public:
    using Bounds = std::pair<double, double>;
    static constexpr double inf = std::numeric_limits<double>::infinity();

    static DomainRegion full_space(std::size_t dim) {
        return DomainRegion(DomainKind::full_space, dim, std::vector<Bounds>(dim, {-inf, inf}));
    }
    static DomainRegion interval(double lo, double hi) {
        return DomainRegion(DomainKind::interval, 1, {{lo, hi}});
    }
    static DomainRegion box(std::vector<Bounds> bounds) {
        std::size_t dim = bounds.size();
        return DomainRegion(DomainKind::box, dim, std::move(bounds));
    }
    static DomainRegion annulus(std::size_t dim, double r_inner, double r_outer) {
        return DomainRegion(DomainKind::annulus, dim, {{r_inner, r_outer}});
    }
    static DomainRegion punctured_box(std::vector<Bounds> bounds, std::vector<StatePoint> holes,
                                      double eps) {
        std::size_t dim = bounds.size();
        DomainRegion d(DomainKind::punctured_box, dim, std::move(bounds));
        for (auto& h : holes) d = d.excluding(h, eps);
        return d;
    }

    /// Copy with one more excluded point.
    DomainRegion excluding(const StatePoint& p, double eps) const {
        if (p.dim() != dim_) throw ValidationError("dim_mismatch", "excluded point dimension mismatch");
        if (!(eps >= 0)) throw ValidationError("bad_domain", "exclusion radius must be non-negative");
        DomainRegion d = *this;
        d.excluded_.push_back(p);
        d.eps_ = eps;
        return d;
    }

    DomainKind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return dim_; }
    const std::vector<Bounds>& bounds() const noexcept { return bounds_; }
    const std::vector<StatePoint>& excluded() const noexcept { return excluded_; }
    double exclusion_radius() const noexcept { return eps_; }

    bool within_bounds(std::span<const double> x) const {
        if (x.size() != dim_) return false;
        if (kind_ == DomainKind::annulus) {
            double r = norm2(x);
            return r >= bounds_[0].first && r <= bounds_[0].second;
        }
        for (std::size_t i = 0; i < dim_; ++i)
            if (!(x[i] >= bounds_[i].first && x[i] <= bounds_[i].second)) return false;
        return true;
    }

    bool near_excluded(std::span<const double> x) const {
        for (const auto& p : excluded_)
            if (distance(x, p.coords()) <= eps_) return true;
        return false;
    }

    bool contains(std::span<const double> x) const { return within_bounds(x) && !near_excluded(x); }
    bool contains(const StatePoint& x) const { return contains(x.coords()); }

    /// The axis-aligned box used for gridding and sampling. Infinite for
    /// unbounded axes.
    std::vector<Bounds> bounding_box() const {
        if (kind_ == DomainKind::annulus)
            return std::vector<Bounds>(dim_, {-bounds_[0].second, bounds_[0].second});
        return bounds_;
    }

    /// Display form, e.g. "[-1, 1]" or "[0, 1]x[0, 1] \ {(0, 0)}".
    std::string describe() const {
        std::string s;
        if (kind_ == DomainKind::full_space) {
            s = dim_ == 1 ? "R" : "R^" + std::to_string(dim_);
        } else if (kind_ == DomainKind::annulus) {
            s = "{" + format_real(bounds_[0].first) + " <= |x| <= " + format_real(bounds_[0].second) + "}";
        } else {
            for (std::size_t i = 0; i < dim_; ++i) {
                if (i) s += "x";
                s += "[" + format_real(bounds_[i].first) + ", " + format_real(bounds_[i].second) + "]";
            }
        }
        if (!excluded_.empty()) {
            s += " \\ {";
            for (std::size_t i = 0; i < excluded_.size(); ++i) {
                if (i) s += ", ";
                s += format_point(excluded_[i].coords());
            }
            s += "}";
        }
        return s;
    }

private:
    DomainRegion(DomainKind kind, std::size_t dim, std::vector<Bounds> bounds)
        : kind_(kind), dim_(dim), bounds_(std::move(bounds)) {
        if (dim_ == 0) throw ValidationError("bad_domain", "domain dimension must be >= 1");
        for (auto [lo, hi] : bounds_) {
            if (std::isnan(lo) || std::isnan(hi) || !(lo < hi))
                throw ValidationError("bad_domain", "domain bounds need lower < upper");
        }
        if (kind_ == DomainKind::annulus && !(bounds_[0].first >= 0))
            throw ValidationError("bad_domain", "annulus radii must be non-negative");
    }

    DomainKind kind_;
    std::size_t dim_;
    std::vector<Bounds> bounds_;
    std::vector<StatePoint> excluded_;
    double eps_ = 0;
};

}  // namespace limitlab
