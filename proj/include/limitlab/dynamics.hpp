#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "limitlab/config.hpp"
#include "limitlab/domain.hpp"
#include "limitlab/error.hpp"
#include "limitlab/format.hpp"
#include "limitlab/state.hpp"

namespace limitlab {

/// Writes the image of `x` into `y` (same dimension). May produce
/// non-finite values at singularities; callers check.
using Evaluator = std::function<void(std::span<const double> x, std::span<double> y)>;

enum class Direction { forward, backward };
enum class Termination { completed, left_domain, singular, diverged };

inline const char* to_string(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::completed: return "completed";
        case Termination::left_domain: return "left-domain";
        case Termination::singular: return "singular";
        case Termination::diverged: return "diverged";
    }
    return "unknown";
}

/// x_{k+1} = f(x_k) on a described domain, optionally with f^{-1}.
/// Immutable after construction; copies share the evaluators.
class DiscreteMap {
public:
    DiscreteMap(std::string name, std::size_t dim, Evaluator forward, std::optional<Evaluator> inverse,
                DomainRegion domain)
        : name_(std::move(name)), dim_(dim),
          forward_(std::make_shared<const Evaluator>(std::move(forward))),
          domain_(std::move(domain)) {
        if (dim_ == 0) throw ValidationError("bad_map", "map dimension must be >= 1");
        if (domain_.dim() != dim_) throw ValidationError("dim_mismatch", "map and domain dimensions differ");
        if (inverse) inverse_ = std::make_shared<const Evaluator>(std::move(*inverse));
    }

    const std::string& name() const noexcept { return name_; }
    std::size_t dim() const noexcept { return dim_; }
    const DomainRegion& domain() const noexcept { return domain_; }
    bool has_inverse() const noexcept { return static_cast<bool>(inverse_); }

    /// Forward image of an in-domain point.
    StatePoint evaluate(const StatePoint& x) const { return apply(*forward_, x); }

    /// Inverse image of an in-domain point. Throws NoInverse when absent.
    StatePoint evaluate_inverse(const StatePoint& x) const {
        if (!inverse_) throw no_inverse();
        return apply(*inverse_, x);
    }

    const Evaluator& forward_evaluator() const noexcept { return *forward_; }
    const Evaluator& evaluator(Direction d) const {
        if (d == Direction::forward) return *forward_;
        if (!inverse_) throw no_inverse();
        return *inverse_;
    }

    /// The time-reversed system on the same domain.
    DiscreteMap reversed() const {
        if (!inverse_) throw no_inverse();
        DiscreteMap r = *this;
        std::swap(r.forward_, r.inverse_);
        r.name_ = name_ + "^-1";
        return r;
    }

    /// The same map considered on another domain.
    DiscreteMap restricted(DomainRegion domain) const {
        if (domain.dim() != dim_) throw ValidationError("dim_mismatch", "restriction changes dimension");
        DiscreteMap r = *this;
        r.domain_ = std::move(domain);
        return r;
    }

    DiscreteMap renamed(std::string name) const {
        DiscreteMap r = *this;
        r.name_ = std::move(name);
        return r;
    }

    ValidationError no_inverse() const {
        return ValidationError("no_inverse", "map '" + name_ + "' has no inverse");
    }

private:
    StatePoint apply(const Evaluator& e, const StatePoint& x) const {
        if (x.dim() != dim_) throw ValidationError("dim_mismatch", "point dimension does not match map '" + name_ + "'");
        if (!domain_.within_bounds(x.coords()))
            throw DomainError(DomainFault::outside_bounds, x.vec(), name_);
        if (domain_.near_excluded(x.coords()))
            throw DomainError(DomainFault::excluded_point, x.vec(), name_);
        std::vector<double> y(dim_);
        e(x.coords(), y);
        if (!all_finite(y)) throw DomainError(DomainFault::non_finite_image, x.vec(), name_);
        return StatePoint(std::move(y));
    }

    std::string name_;
    std::size_t dim_;
    std::shared_ptr<const Evaluator> forward_;
    std::shared_ptr<const Evaluator> inverse_;
    DomainRegion domain_;
};

/// Allocation-free stepper shared by trajectories, limit-set estimation
/// and basin labeling. `step()` advances `current()` by one application.
class Walker {
public:
    Walker(const DiscreteMap& map, Direction dir, std::span<const double> x0, double r_div)
        : domain_(&map.domain()), eval_(&map.evaluator(dir)), r_div_(r_div),
          cur_(x0.begin(), x0.end()), next_(x0.size()) {}

    /// Returns completed when the step was taken, otherwise why it could not be.
    Termination step() {
        if (norm_inf(cur_) > r_div_) return Termination::diverged;
        if (!domain_->within_bounds(cur_)) return Termination::left_domain;
        if (domain_->near_excluded(cur_)) return Termination::singular;
        (*eval_)(cur_, next_);
        if (!all_finite(next_)) return Termination::singular;
        cur_.swap(next_);
        return Termination::completed;
    }

    /// Take up to n steps; returns the first non-completed status or completed.
    Termination advance(std::size_t n) {
        for (std::size_t i = 0; i < n; ++i)
            if (auto t = step(); t != Termination::completed) return t;
        return Termination::completed;
    }

    std::span<const double> current() const noexcept { return cur_; }

private:
    const DomainRegion* domain_;
    const Evaluator* eval_;
    double r_div_;
    std::vector<double> cur_, next_;
};

struct Trajectory {
    std::vector<StatePoint> points;
    Direction direction = Direction::forward;
    Termination termination = Termination::completed;
    std::size_t steps_taken = 0;

    const StatePoint& last() const { return points.back(); }
};

namespace detail {

inline Trajectory walk(const DiscreteMap& map, const StatePoint& x0, std::size_t k, Direction dir,
                       double r_div) {
    if (x0.dim() != map.dim()) throw ValidationError("dim_mismatch", "initial point dimension does not match map");
    Trajectory t;
    t.direction = dir;
    t.points.reserve(k + 1);
    t.points.push_back(x0);
    Walker w(map, dir, x0.coords(), r_div);
    for (std::size_t i = 0; i < k; ++i) {
        Termination s = w.step();
        if (s != Termination::completed) {
            t.termination = s;
            return t;
        }
        t.points.emplace_back(w.current());
        ++t.steps_taken;
    }
    return t;
}

}  // namespace detail

/// x_0, f(x_0), ..., f^k(x_0), stopping early (recorded, not thrown) when
/// the current point leaves the domain, sits on a singularity, has a
/// non-finite image, or has a coordinate beyond the divergence guard.
inline Trajectory iterate(const DiscreteMap& map, const StatePoint& x0, std::size_t k,
                          double r_div = Tolerances{}.r_div) {
    return detail::walk(map, x0, k, Direction::forward, r_div);
}

/// As `iterate`, using the inverse evaluator.
inline Trajectory iterate_back(const DiscreteMap& map, const StatePoint& x0, std::size_t k,
                               double r_div = Tolerances{}.r_div) {
    if (!map.has_inverse()) throw map.no_inverse();
    return detail::walk(map, x0, k, Direction::backward, r_div);
}

struct OrbitTail {
    std::vector<StatePoint> points;
    Termination termination = Termination::completed;
};

/// f^burn(x0), ..., f^{burn+n-1}(x0), or a shorter prefix when the orbit stops.
inline OrbitTail orbit_tail(const DiscreteMap& map, const StatePoint& x0, std::size_t burn, std::size_t n,
                            double r_div = Tolerances{}.r_div, Direction dir = Direction::forward) {
    if (x0.dim() != map.dim()) throw ValidationError("dim_mismatch", "initial point dimension does not match map");
    if (n == 0) throw ValidationError("bad_argument", "orbit_tail needs n >= 1");
    OrbitTail out;
    Walker w(map, dir, x0.coords(), r_div);
    if (auto s = w.advance(burn); s != Termination::completed) {
        out.termination = s;
        return out;
    }
    out.points.reserve(n);
    out.points.emplace_back(w.current());
    for (std::size_t i = 1; i < n; ++i) {
        if (auto s = w.step(); s != Termination::completed) {
            out.termination = s;
            return out;
        }
        out.points.emplace_back(w.current());
    }
    return out;
}

/// CSV with header `k,x1,...,xd` and a trailing `# termination=<cause>` line.
/// Backward trajectories are indexed 0, -1, -2, ...
inline void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
    std::size_t d = t.points.empty() ? 0 : t.points.front().dim();
    os << "k";
    for (std::size_t i = 1; i <= d; ++i) os << ",x" << i;
    os << "\n";
    for (std::size_t k = 0; k < t.points.size(); ++k) {
        long long idx = t.direction == Direction::forward ? static_cast<long long>(k) : -static_cast<long long>(k);
        os << idx;
        for (double c : t.points[k].coords()) os << "," << format_csv(c);
        os << "\n";
    }
    os << "# termination=" << to_string(t.termination) << "\n";
}

}  // namespace limitlab
