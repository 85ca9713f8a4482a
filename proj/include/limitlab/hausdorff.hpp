#pragma once

#include <algorithm>
#include <limits>

#include "limitlab/state.hpp"

namespace limitlab {

/// sup_{a in A} inf_{b in B} |a - b|. Brute force with the usual early exit:
/// the inner scan for `a` stops once it is already below the running maximum.
inline double directed_hausdorff(const Cloud& a, const Cloud& b) {
    if (a.empty()) return 0.0;
    if (b.empty()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (const auto& p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : b) {
            double d = distance(p, q);
            if (d < best) {
                best = d;
                if (best <= worst) break;
            }
        }
        worst = std::max(worst, best);
    }
    return worst;
}

/// Symmetric Hausdorff distance; infinite when exactly one side is empty.
inline double hausdorff(const Cloud& a, const Cloud& b) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

inline double distance_to_cloud(const StatePoint& p, const Cloud& c) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : c) best = std::min(best, distance(p, q));
    return best;
}

/// Max pairwise distance.
inline double diameter(const Cloud& c) {
    double d = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) d = std::max(d, distance(c[i], c[j]));
    return d;
}

/// Largest nearest-neighbour distance inside the cloud.
inline double nn_spacing(const Cloud& c) {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (i == j) continue;
            double d = distance(c[i], c[j]);
            if (d < best) {
                best = d;
                if (best <= worst) break;
            }
        }
        if (best != std::numeric_limits<double>::infinity()) worst = std::max(worst, best);
    }
    return worst;
}

/// Sampling resolution of an orbit window approximating a continuum: the
/// larger of nn_spacing and the Hausdorff distance between its even- and
/// odd-indexed points. Nearest neighbours alone miss the long gaps of a
/// rotation orbit, where near-coincident points cluster.
inline double window_resolution(const Cloud& c) {
    if (c.size() < 4) return nn_spacing(c);
    Cloud even, odd;
    for (std::size_t i = 0; i < c.size(); ++i) (i % 2 ? odd : even).push_back(c[i]);
    return std::max(nn_spacing(c), hausdorff(even, odd));
}

}  // namespace limitlab
