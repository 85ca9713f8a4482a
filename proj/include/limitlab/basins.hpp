#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "limitlab/limits.hpp"

namespace limitlab {

/// Vertex-centred grid: `resolution[a]` nodes per axis spanning the closed
/// bounds, endpoints included (a single node sits at the midpoint).
struct GridSpec {
    std::vector<DomainRegion::Bounds> bounds;
    std::vector<std::size_t> resolution;

    std::size_t dim() const noexcept { return bounds.size(); }

    std::size_t cells() const {
        std::size_t n = 1;
        for (auto r : resolution) n *= r;
        return n;
    }

    double coordinate(std::size_t axis, std::size_t i) const {
        auto [lo, hi] = bounds[axis];
        std::size_t n = resolution[axis];
        if (n == 1) return 0.5 * (lo + hi);
        if (i + 1 == n) return hi;
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }

    double spacing(std::size_t axis) const {
        auto [lo, hi] = bounds[axis];
        return resolution[axis] > 1 ? (hi - lo) / static_cast<double>(resolution[axis] - 1) : hi - lo;
    }

    /// Axis indices of a flat cell index; axis 0 varies slowest.
    std::vector<std::size_t> unflatten(std::size_t flat) const {
        std::vector<std::size_t> idx(dim());
        for (std::size_t a = dim(); a-- > 0;) {
            idx[a] = flat % resolution[a];
            flat /= resolution[a];
        }
        return idx;
    }

    std::size_t flatten(const std::vector<std::size_t>& idx) const {
        std::size_t flat = 0;
        for (std::size_t a = 0; a < dim(); ++a) flat = flat * resolution[a] + idx[a];
        return flat;
    }

    StatePoint center(std::size_t flat) const {
        auto idx = unflatten(flat);
        std::vector<double> x(dim());
        for (std::size_t a = 0; a < dim(); ++a) x[a] = coordinate(a, idx[a]);
        return StatePoint(std::move(x));
    }

    void validate() const {
        if (bounds.empty() || bounds.size() != resolution.size())
            throw ValidationError("bad_grid", "grid needs one resolution per axis");
        for (std::size_t a = 0; a < dim(); ++a) {
            if (!std::isfinite(bounds[a].first) || !std::isfinite(bounds[a].second) || !(bounds[a].first < bounds[a].second))
                throw ValidationError("bad_grid", "grid bounds must be finite with lower < upper");
            if (resolution[a] == 0) throw ValidationError("bad_grid", "grid resolution must be >= 1");
        }
    }
};

/// Cell label codes; non-negative values index the catalog.
namespace cell {
inline constexpr int undetermined = -1;
inline constexpr int singular = -2;
inline constexpr int escaped = -3;
}  // namespace cell

struct BasinMap {
    GridSpec grid;
    std::vector<int> labels;  ///< one per cell, flat order
    std::vector<std::string> member_labels;
    Tolerances params;

    std::string label_name(int code) const {
        if (code >= 0) return member_labels.at(static_cast<std::size_t>(code));
        if (code == cell::singular) return "singular";
        if (code == cell::escaped) return "escaped";
        return "undetermined";
    }
};

/// Label of the set the orbit of x settles on: the catalog member whose
/// cloud contains the whole settled tail within the match tolerance.
inline int classify_point(const DiscreteMap& map, const StatePoint& x, const LimitSetCatalog& catalog,
                          const Tolerances& cfg) {
    const auto& dom = map.domain();
    if (dom.near_excluded(x.coords())) return cell::singular;
    if (!dom.within_bounds(x.coords())) return cell::escaped;
    Walker w(map, Direction::forward, x.coords(), cfg.r_div);
    auto code_of = [](Termination t) { return t == Termination::singular ? cell::singular : cell::escaped; };
    if (auto t = w.advance(cfg.burn); t != Termination::completed) return code_of(t);

    std::size_t n = std::max<std::size_t>(cfg.basin_tail, 1);
    Cloud tail;
    tail.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (auto t = w.step(); t != Termination::completed) return code_of(t);
        tail.emplace_back(w.current());
    }
    int best = cell::undetermined;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < catalog.size(); ++m) {
        const auto& mem = catalog[m];
        if (mem.points.front().dim() != x.dim()) continue;
        double tol = match_tolerance(cfg.tol_cluster, mem.resolution, 0.0);
        double d = 0;
        for (const auto& p : tail) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& q : mem.points) {
                nearest = std::min(nearest, distance(p, q));
                if (nearest < tol) break;
            }
            d = std::max(d, nearest);
            if (d >= tol) break;
        }
        if (d < tol && d < best_d) {
            best_d = d;
            best = static_cast<int>(m);
        }
    }
    return best;
}

/// Label every grid node by where its orbit settles.
inline BasinMap compute_basins(const DiscreteMap& map, const GridSpec& grid, const LimitSetCatalog& catalog,
                               const Tolerances& cfg = {}, unsigned threads = 1) {
    grid.validate();
    if (grid.dim() != map.dim()) throw ValidationError("dim_mismatch", "grid and map dimensions differ");
    if (catalog.size() == 0) throw ValidationError("empty_catalog", "basin mapping needs a nonempty catalog");
    BasinMap b;
    b.grid = grid;
    b.params = cfg;
    for (const auto& m : catalog.members) b.member_labels.push_back(m.label);
    b.labels.assign(grid.cells(), cell::undetermined);
    parallel_for(grid.cells(), threads,
                 [&](std::size_t i) { b.labels[i] = classify_point(map, grid.center(i), catalog, cfg); });
    return b;
}

/// Numeric evidence that a domain of attraction is not closed: x_j -> limit
/// with every x_j attracted to `sequence_label` but the limit is not.
struct Witness {
    StatePoint sequence_seed;  ///< x_1, the farthest element of the sequence
    StatePoint limit_point;
    std::string sequence_label;
    std::string limit_label;
    std::size_t depth = 0;
};

namespace detail {

inline std::optional<Witness> probe_sequence(const DiscreteMap& map, const LimitSetCatalog& catalog,
                                             const Tolerances& cfg, const StatePoint& limit,
                                             const std::vector<double>& offset, int limit_code,
                                             const BasinMap& basins) {
    int seq_code = cell::undetermined;
    std::optional<StatePoint> first;
    for (std::size_t j = 1; j <= cfg.witness_depth; ++j) {
        double s = std::ldexp(1.0, -static_cast<int>(j));
        std::vector<double> x(limit.dim());
        for (std::size_t a = 0; a < x.size(); ++a) x[a] = limit[a] + offset[a] * s;
        StatePoint xj(std::move(x));
        if (xj == limit) break;
        int c = classify_point(map, xj, catalog, cfg);
        if (c < 0) return std::nullopt;
        if (j == 1) {
            seq_code = c;
            first = xj;
        } else if (c != seq_code) {
            return std::nullopt;
        }
    }
    if (!first || seq_code == limit_code) return std::nullopt;
    return Witness{*first, limit, basins.label_name(seq_code), basins.label_name(limit_code), cfg.witness_depth};
}

}  // namespace detail

/// Search shrinking sequences x_j = c + (n - c) / 2^j from grid nodes c
/// toward neighbours n with a different catalog label, and toward catalog
/// points of fixed points / periodic orbits lying in the grid. An empty
/// result means no witness was found, not that the basins are closed.
inline std::vector<Witness> basin_closedness_witness(const DiscreteMap& map, const BasinMap& basins,
                                                     const LimitSetCatalog& catalog, const Tolerances& cfg = {}) {
    const auto& g = basins.grid;
    std::vector<Witness> out;
    std::vector<StatePoint> seen;
    auto record = [&](std::optional<Witness> w) {
        if (!w) return;
        for (const auto& s : seen)
            if (s == w->limit_point) return;
        seen.push_back(w->limit_point);
        out.push_back(std::move(*w));
    };

    for (std::size_t flat = 0; flat < g.cells(); ++flat) {
        int here = basins.labels[flat];
        auto idx = g.unflatten(flat);
        for (std::size_t a = 0; a < g.dim(); ++a) {
            for (int dir : {-1, 1}) {
                if ((dir < 0 && idx[a] == 0) || (dir > 0 && idx[a] + 1 >= g.resolution[a])) continue;
                auto nidx = idx;
                nidx[a] = dir < 0 ? idx[a] - 1 : idx[a] + 1;
                int there = basins.labels[g.flatten(nidx)];
                if (there < 0 || there == here) continue;
                StatePoint c = g.center(flat), n = g.center(g.flatten(nidx));
                std::vector<double> off(g.dim());
                for (std::size_t k = 0; k < g.dim(); ++k) off[k] = n[k] - c[k];
                record(detail::probe_sequence(map, catalog, cfg, c, off, here, basins));
            }
        }
    }

    for (std::size_t m = 0; m < catalog.size(); ++m) {
        const auto& mem = catalog[m];
        if (mem.shape.kind != ShapeKind::fixed_point && mem.shape.kind != ShapeKind::periodic_orbit) continue;
        for (const auto& p : mem.points) {
            if (p.dim() != g.dim()) continue;
            bool inside = true;
            for (std::size_t a = 0; a < g.dim(); ++a) inside = inside && p[a] >= g.bounds[a].first && p[a] <= g.bounds[a].second;
            if (!inside || !map.domain().contains(p)) continue;
            int here = classify_point(map, p, catalog, cfg);
            for (std::size_t a = 0; a < g.dim(); ++a) {
                for (int dir : {-1, 1}) {
                    std::vector<double> off(g.dim(), 0.0);
                    off[a] = dir * g.spacing(a);
                    record(detail::probe_sequence(map, catalog, cfg, p, off, here, basins));
                }
            }
        }
    }
    return out;
}

/// CSV `i[,j,...],label`, one row per node in flat order.
inline void write_basins_csv(std::ostream& os, const BasinMap& b) {
    static const char* axes[] = {"i", "j", "k", "l"};
    for (std::size_t a = 0; a < b.grid.dim(); ++a) os << (a < 4 ? axes[a] : ("i" + std::to_string(a)).c_str()) << ",";
    os << "label\n";
    for (std::size_t flat = 0; flat < b.labels.size(); ++flat) {
        for (auto i : b.grid.unflatten(flat)) os << i << ",";
        os << b.label_name(b.labels[flat]) << "\n";
    }
}

}  // namespace limitlab
