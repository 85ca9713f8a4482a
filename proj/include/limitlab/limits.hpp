#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "limitlab/config.hpp"
#include "limitlab/dynamics.hpp"
#include "limitlab/hausdorff.hpp"
#include "limitlab/parallel.hpp"

namespace limitlab {

enum class LimitSource { omega, alpha };
enum class EstimateStatus { converged, unsettled, escaped, singular };
enum class ShapeKind { fixed_point, periodic_orbit, curve, unknown };

inline const char* to_string(LimitSource s) { return s == LimitSource::omega ? "omega" : "alpha"; }

inline const char* to_string(EstimateStatus s) {
    switch (s) {
        case EstimateStatus::converged: return "converged";
        case EstimateStatus::unsettled: return "unsettled";
        case EstimateStatus::escaped: return "escaped";
        case EstimateStatus::singular: return "singular";
    }
    return "unknown";
}

struct Shape {
    ShapeKind kind = ShapeKind::unknown;
    std::size_t period = 0;  ///< only for periodic_orbit

    std::string describe() const {
        switch (kind) {
            case ShapeKind::fixed_point: return "fixed-point";
            case ShapeKind::periodic_orbit: return "periodic-orbit(" + std::to_string(period) + ")";
            case ShapeKind::curve: return "curve";
            case ShapeKind::unknown: return "unknown";
        }
        return "unknown";
    }
};

/// Finite point-cloud approximation of omega(seed) or alpha(seed).
///
/// Convergence compares consecutive tail windows. The settle tolerance is
/// `max(tol_settle, 2 * spacing)` where spacing is the window_resolution of
/// the earlier window. Fixed points and periodic orbits count
/// as exactly sampled (spacing zero), so `tol_settle` applies as is; for a
/// dense curve the windows can never agree more closely than their
/// own sampling gaps. `settle_tolerance` records the value actually used.
struct LimitSetEstimate {
    Cloud points;
    LimitSource source = LimitSource::omega;
    StatePoint seed;
    double diameter = 0.0;
    Shape shape;
    bool converged = false;
    EstimateStatus status = EstimateStatus::unsettled;
    Termination termination = Termination::completed;
    double settle_distance = 0.0;
    double settle_tolerance = 0.0;
    double resolution = 0.0;  ///< nearest-neighbour spacing of `points`, 0 for finite shapes
    bool precompact = false;  ///< witnessing trajectory stayed within r_bound and inside the domain
    std::size_t steps = 0;
};

namespace detail {

inline Shape guess_shape(const Cloud& w, const Tolerances& cfg, double diam) {
    if (diam < cfg.tol_fp) return {ShapeKind::fixed_point, 0};
    std::size_t pmax = std::min(cfg.max_period, w.size() > 1 ? w.size() - 1 : 0);
    for (std::size_t p = 1; p <= pmax; ++p) {
        bool ok = true;
        for (std::size_t i = 0; i + p < w.size() && ok; ++i) ok = distance(w[i], w[i + p]) < cfg.tol_fp;
        if (ok) return {ShapeKind::periodic_orbit, p};
    }
    if (w.size() >= 16 && diam > 0) {
        // A curve sampled by n points has mean spacing ~ length / n, an area ~ diam / sqrt(n).
        double mean_nn = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < w.size(); ++j)
                if (i != j) best = std::min(best, distance(w[i], w[j]));
            mean_nn += best;
        }
        mean_nn /= static_cast<double>(w.size());
        if (mean_nn * static_cast<double>(w.size()) <= 4.0 * diam) return {ShapeKind::curve, 0};
    }
    return {ShapeKind::unknown, 0};
}

/// Collapse a settled window to its essential points: the latest point for
/// a fixed point, the latest period for a periodic orbit. Both are actual
/// orbit points, so they lie in the domain.
inline Cloud representative(const Cloud& w, const Shape& s) {
    if (s.kind == ShapeKind::fixed_point) return {w.back()};
    if (s.kind == ShapeKind::periodic_orbit) return Cloud(w.end() - static_cast<std::ptrdiff_t>(s.period), w.end());
    return w;
}

inline bool finite_shape(const Shape& s) {
    return s.kind == ShapeKind::fixed_point || s.kind == ShapeKind::periodic_orbit;
}

/// Sampling resolution of a window: zero when it is a fixed point or a
/// periodic orbit, whose points are the set itself.
inline double sampling_gap(const Cloud& w, const Tolerances& cfg) {
    return finite_shape(guess_shape(w, cfg, diameter(w))) ? 0.0 : window_resolution(w);
}

inline EstimateStatus status_of(Termination t) {
    return t == Termination::singular ? EstimateStatus::singular : EstimateStatus::escaped;
}

inline LimitSetEstimate estimate(const DiscreteMap& map, const StatePoint& x0, const Tolerances& cfg,
                                 Direction dir, LimitSource source) {
    if (x0.dim() != map.dim()) throw ValidationError("dim_mismatch", "seed dimension does not match map");
    if (!map.domain().contains(x0))
        throw DomainError(map.domain().within_bounds(x0.coords()) ? DomainFault::excluded_point
                                                                  : DomainFault::outside_bounds,
                          x0.vec(), map.name());
    if (cfg.tail < 2) throw ValidationError("bad_config", "tail window needs at least 2 points");

    LimitSetEstimate est;
    est.source = source;
    est.seed = x0;
    Walker w(map, dir, x0.coords(), cfg.r_div);
    double max_norm = norm2(x0.coords());

    auto fail = [&](Termination t) {
        est.termination = t;
        est.status = status_of(t);
        return est;
    };
    auto step = [&]() {
        Termination t = w.step();
        if (t == Termination::completed) {
            ++est.steps;
            max_norm = std::max(max_norm, norm2(w.current()));
        }
        return t;
    };
    auto window = [&](Cloud& out) {
        out.clear();
        out.reserve(cfg.tail);
        for (std::size_t i = 0; i < cfg.tail; ++i) {
            if (auto t = step(); t != Termination::completed) return t;
            out.emplace_back(w.current());
        }
        return Termination::completed;
    };

    for (std::size_t i = 0; i < cfg.burn; ++i)
        if (auto t = step(); t != Termination::completed) return fail(t);

    Cloud prev, cur;
    if (auto t = window(prev); t != Termination::completed) return fail(t);
    for (std::size_t k = 0; k < std::max<std::size_t>(cfg.max_windows, 1); ++k) {
        if (auto t = window(cur); t != Termination::completed) return fail(t);
        est.settle_distance = hausdorff(prev, cur);
        est.settle_tolerance = std::max(cfg.tol_settle, 2.0 * sampling_gap(prev, cfg));
        if (est.settle_distance < est.settle_tolerance) {
            est.converged = true;
            est.status = EstimateStatus::converged;
            break;
        }
        prev.swap(cur);
    }
    if (!est.converged) cur.swap(prev);  // report the latest window

    double diam = diameter(cur);
    est.shape = guess_shape(cur, cfg, diam);
    est.points = est.converged ? representative(cur, est.shape) : cur;
    est.diameter = est.points.size() == cur.size() ? diam : diameter(est.points);
    est.resolution = finite_shape(est.shape) ? 0.0 : window_resolution(est.points);
    est.precompact = est.converged && max_norm <= cfg.r_bound;
    return est;
}

}  // namespace detail

/// Tail-window estimate of the omega-limit set of x0.
inline LimitSetEstimate estimate_omega(const DiscreteMap& map, const StatePoint& x0, const Tolerances& cfg = {}) {
    return detail::estimate(map, x0, cfg, Direction::forward, LimitSource::omega);
}

/// The omega-limit set of the time-reversed system.
inline LimitSetEstimate estimate_alpha(const DiscreteMap& map, const StatePoint& x0, const Tolerances& cfg = {}) {
    if (!map.has_inverse()) throw map.no_inverse();
    return detail::estimate(map, x0, cfg, Direction::backward, LimitSource::alpha);
}

enum class Boundedness { bounded, unbounded, undetermined };

inline const char* to_string(Boundedness b) {
    switch (b) {
        case Boundedness::bounded: return "bounded";
        case Boundedness::unbounded: return "unbounded";
        case Boundedness::undetermined: return "undetermined";
    }
    return "unknown";
}

struct BoundednessVerdict {
    Boundedness verdict = Boundedness::undetermined;
    double escape_radius = 0.0;
    std::size_t steps_used = 0;
    double max_norm = 0.0;
};

/// bounded: the orbit stays within r_bound for the whole horizon.
/// unbounded: it crosses escape_radius, never comes back inside, and its norm
/// is nondecreasing over the final quarter of the probe.
inline BoundednessVerdict classify_boundedness(const DiscreteMap& map, const StatePoint& x0,
                                               const Tolerances& cfg = {}) {
    Trajectory t = iterate(map, x0, cfg.horizon, cfg.r_div);
    BoundednessVerdict v;
    v.escape_radius = cfg.escape_radius;
    v.steps_used = t.steps_taken;
    std::vector<double> norms;
    norms.reserve(t.points.size());
    for (const auto& p : t.points) norms.push_back(norm2(p.coords()));
    v.max_norm = *std::max_element(norms.begin(), norms.end());

    if (t.termination == Termination::left_domain || t.termination == Termination::singular) return v;
    if (t.termination == Termination::completed && v.max_norm <= cfg.r_bound) {
        v.verdict = Boundedness::bounded;
        return v;
    }
    auto first_out = std::find_if(norms.begin(), norms.end(), [&](double n) { return n > cfg.escape_radius; });
    if (first_out == norms.end()) return v;
    bool stays_out = std::all_of(first_out, norms.end(), [&](double n) { return n > cfg.escape_radius; });
    std::size_t q = norms.size() - norms.size() / 4;
    bool monotone = true;
    for (std::size_t i = std::max<std::size_t>(q, 1); i < norms.size(); ++i) monotone = monotone && norms[i] >= norms[i - 1];
    if (stays_out && monotone) v.verdict = Boundedness::unbounded;
    return v;
}

/// One deduplicated limit set of the family W u A.
struct CatalogMember {
    std::string label;
    Cloud points;  ///< union of the member clouds
    double diameter = 0.0;
    Shape shape;
    LimitSource source = LimitSource::omega;
    bool precompact = false;  ///< some witnessing trajectory was precompact
    double resolution = 0.0;
    std::vector<StatePoint> seeds;
};

struct LimitSetCatalog {
    std::vector<CatalogMember> members;

    std::size_t size() const noexcept { return members.size(); }
    const CatalogMember& operator[](std::size_t i) const { return members[i]; }

    std::optional<std::size_t> find(const std::string& label) const {
        for (std::size_t i = 0; i < members.size(); ++i)
            if (members[i].label == label) return i;
        return std::nullopt;
    }
};

/// Tolerance for deciding two clouds describe the same set: never tighter
/// than the coarser sampling of the two.
inline double match_tolerance(double tol_cluster, double res_a, double res_b) {
    return std::max(tol_cluster, 2.0 * std::max(res_a, res_b));
}

/// Greedy Hausdorff clustering in input order. Labels are W<i> / A<i> by
/// first-seen estimate.
inline LimitSetCatalog cluster_limit_sets(const std::vector<LimitSetEstimate>& estimates, double tol_cluster) {
    LimitSetCatalog cat;
    for (const auto& e : estimates) {
        if (!e.converged)
            throw ValidationError("unconverged_estimate",
                                  "cannot cluster an unconverged estimate (seed " + format_point(e.seed.coords()) + ")");
        CatalogMember* hit = nullptr;
        for (auto& m : cat.members) {
            if (m.points.front().dim() != e.points.front().dim()) continue;
            if (hausdorff(m.points, e.points) < match_tolerance(tol_cluster, m.resolution, e.resolution)) {
                hit = &m;
                break;
            }
        }
        if (hit) {
            if (hausdorff(hit->points, e.points) > 0.0) {
                hit->points.insert(hit->points.end(), e.points.begin(), e.points.end());
                hit->diameter = diameter(hit->points);
                hit->resolution = std::max(hit->resolution, e.resolution);
            }
            hit->precompact = hit->precompact || e.precompact;
            hit->seeds.push_back(e.seed);
            continue;
        }
        CatalogMember m;
        m.label = std::string(e.source == LimitSource::omega ? "W" : "A") + std::to_string(cat.members.size());
        m.points = e.points;
        m.diameter = e.diameter;
        m.shape = e.shape;
        m.source = e.source;
        m.precompact = e.precompact;
        m.resolution = e.resolution;
        m.seeds.push_back(e.seed);
        cat.members.push_back(std::move(m));
    }
    return cat;
}

struct CatalogBuild {
    LimitSetCatalog catalog;
    std::vector<LimitSetEstimate> estimates;  ///< one per seed, in seed order
    std::size_t unconverged = 0;
};

/// Estimate every seed (in parallel) and cluster the converged estimates.
inline CatalogBuild build_catalog(const DiscreteMap& map, const std::vector<StatePoint>& seeds,
                                  const Tolerances& cfg = {}, LimitSource source = LimitSource::omega,
                                  unsigned threads = 1) {
    CatalogBuild b;
    b.estimates.resize(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t i) {
        b.estimates[i] = source == LimitSource::omega ? estimate_omega(map, seeds[i], cfg)
                                                      : estimate_alpha(map, seeds[i], cfg);
    });
    std::vector<LimitSetEstimate> ok;
    for (const auto& e : b.estimates) {
        if (e.converged) ok.push_back(e);
        else ++b.unconverged;
    }
    b.catalog = cluster_limit_sets(ok, cfg.tol_cluster);
    return b;
}

}  // namespace limitlab
