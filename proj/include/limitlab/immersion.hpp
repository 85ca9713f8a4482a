#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "limitlab/hausdorff.hpp"
#include "limitlab/limits.hpp"

namespace limitlab {

/// Candidate F: X -> Z for the relation F o f = g o F.
class ImmersionMap {
public:
    ImmersionMap(std::string name, std::size_t dim_in, std::size_t dim_out, Evaluator eval, DomainRegion domain)
        : name_(std::move(name)), dim_in_(dim_in), dim_out_(dim_out),
          eval_(std::make_shared<const Evaluator>(std::move(eval))), domain_(std::move(domain)) {
        if (dim_in_ == 0 || dim_out_ == 0) throw ValidationError("bad_map", "immersion dimensions must be >= 1");
        if (domain_.dim() != dim_in_) throw ValidationError("dim_mismatch", "immersion domain dimension mismatch");
    }

    const std::string& name() const noexcept { return name_; }
    std::size_t dim_in() const noexcept { return dim_in_; }
    std::size_t dim_out() const noexcept { return dim_out_; }
    const DomainRegion& domain() const noexcept { return domain_; }

    /// F(x); DomainError outside the domain or for a non-finite value.
    StatePoint operator()(const StatePoint& x) const {
        if (x.dim() != dim_in_) throw ValidationError("dim_mismatch", "point dimension does not match immersion '" + name_ + "'");
        if (!domain_.within_bounds(x.coords())) throw DomainError(DomainFault::outside_bounds, x.vec(), name_);
        if (domain_.near_excluded(x.coords())) throw DomainError(DomainFault::excluded_point, x.vec(), name_);
        std::vector<double> y(dim_out_);
        (*eval_)(x.coords(), y);
        if (!all_finite(y)) throw DomainError(DomainFault::non_finite_image, x.vec(), name_);
        return StatePoint(std::move(y));
    }

    Cloud image(const Cloud& c) const {
        Cloud out;
        out.reserve(c.size());
        for (const auto& p : c) out.push_back((*this)(p));
        return out;
    }

    ImmersionMap restricted(DomainRegion d) const {
        ImmersionMap r = *this;
        if (d.dim() != dim_in_) throw ValidationError("dim_mismatch", "restriction changes dimension");
        r.domain_ = std::move(d);
        return r;
    }

private:
    std::string name_;
    std::size_t dim_in_, dim_out_;
    std::shared_ptr<const Evaluator> eval_;
    DomainRegion domain_;
};

struct ConjugacyReport {
    double max_residual = 0.0;
    double mean_residual = 0.0;
    std::optional<StatePoint> worst_point;
    std::size_t samples_used = 0;
    std::size_t samples_excluded = 0;
};

/// Residual ||F(f(x)) - g(F(x))|| over the samples. Samples where any of the
/// compositions is undefined are skipped and counted.
inline ConjugacyReport conjugacy_residual(const ImmersionMap& F, const DiscreteMap& f, const DiscreteMap& g,
                                          const std::vector<StatePoint>& samples) {
    if (F.dim_in() != f.dim() || F.dim_out() != g.dim())
        throw ValidationError("dim_mismatch", "F must map the state space of f into that of g");
    ConjugacyReport r;
    double sum = 0.0;
    for (const auto& x : samples) {
        double res;
        try {
            StatePoint lhs = F(f.evaluate(x));
            StatePoint rhs = g.evaluate(F(x));
            res = distance(lhs, rhs);
        } catch (const DomainError&) {
            ++r.samples_excluded;
            continue;
        }
        ++r.samples_used;
        sum += res;
        if (!r.worst_point || res > r.max_residual) {
            r.max_residual = res;
            r.worst_point = x;
        }
    }
    if (r.samples_used) r.mean_residual = sum / static_cast<double>(r.samples_used);
    return r;
}

struct PushforwardResult {
    double hausdorff_omega = 0.0;
    double one_sided_omega = 0.0;  ///< sup over F(omega_X) of the distance to omega_Z
    bool precompact = false;       ///< the source trajectory was precompact
    std::optional<double> hausdorff_alpha;
    std::optional<double> one_sided_alpha;
};

namespace detail {

inline std::pair<double, double> compare_lifted(const ImmersionMap& F, const LimitSetEstimate& src,
                                                const LimitSetEstimate& lifted) {
    Cloud img = F.image(src.points);
    return {hausdorff(img, lifted.points), directed_hausdorff(img, lifted.points)};
}

}  // namespace detail

/// Compare F(omega_X(xi)) with omega_Z(F(xi)), both estimated with the same
/// burn-in and windows. The alpha variant is filled in when f and g are both
/// invertible and both backward estimates converge.
inline PushforwardResult pushforward_check(const ImmersionMap& F, const DiscreteMap& f, const DiscreteMap& g,
                                           const StatePoint& xi, const Tolerances& cfg = {}) {
    LimitSetEstimate wx = estimate_omega(f, xi, cfg);
    LimitSetEstimate wz = estimate_omega(g, F(xi), cfg);
    if (!wx.converged || !wz.converged)
        throw NumericError("unconverged", "omega estimate did not converge (" + std::string(to_string(wx.status)) +
                                              ", lifted " + to_string(wz.status) + ")");
    PushforwardResult r;
    std::tie(r.hausdorff_omega, r.one_sided_omega) = detail::compare_lifted(F, wx, wz);
    r.precompact = wx.precompact;
    if (f.has_inverse() && g.has_inverse()) {
        try {
            LimitSetEstimate ax = estimate_alpha(f, xi, cfg);
            LimitSetEstimate az = estimate_alpha(g, F(xi), cfg);
            if (ax.converged && az.converged) {
                auto [h, one] = detail::compare_lifted(F, ax, az);
                r.hausdorff_alpha = h;
                r.one_sided_alpha = one;
            }
        } catch (const DomainError&) {
        }
    }
    return r;
}

/// Alpha-only variant; throws when either backward estimate fails.
inline PushforwardResult pushforward_check_alpha(const ImmersionMap& F, const DiscreteMap& f, const DiscreteMap& g,
                                                 const StatePoint& xi, const Tolerances& cfg = {}) {
    LimitSetEstimate ax = estimate_alpha(f, xi, cfg);
    LimitSetEstimate az = estimate_alpha(g, F(xi), cfg);
    if (!ax.converged || !az.converged)
        throw NumericError("unconverged", "alpha estimate did not converge");
    PushforwardResult r;
    auto [h, one] = detail::compare_lifted(F, ax, az);
    r.hausdorff_alpha = h;
    r.one_sided_alpha = one;
    r.hausdorff_omega = std::numeric_limits<double>::quiet_NaN();
    r.one_sided_omega = std::numeric_limits<double>::quiet_NaN();
    r.precompact = ax.precompact;
    return r;
}

struct CollapseReport {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> distances;  ///< Hausdorff between F(S_i) and F(S_j)
    std::optional<std::string> maximal_member;
    std::optional<double> collapse_ratio;  ///< undefined with fewer than two members
    double image_diameter = 0.0;
};

/// Images of the catalog members under F. A member point outside the
/// domain of F raises DomainError: F cannot be an immersion there.
inline CollapseReport collapse_report(const ImmersionMap& F, const LimitSetCatalog& catalog,
                                      const std::vector<StatePoint>& domain_samples, double tol_cluster) {
    CollapseReport r;
    std::vector<Cloud> images;
    for (const auto& m : catalog.members) {
        r.labels.push_back(m.label);
        images.push_back(F.image(m.points));
    }
    const std::size_t k = images.size();
    r.distances.assign(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) r.distances[i][j] = r.distances[j][i] = hausdorff(images[i], images[j]);

    for (std::size_t i = 0; i < k && !r.maximal_member; ++i) {
        bool contains_all = true;
        for (std::size_t j = 0; j < k && contains_all; ++j)
            contains_all = i == j || directed_hausdorff(images[j], images[i]) < tol_cluster;
        if (contains_all) r.maximal_member = r.labels[i];
    }

    Cloud sample_images;
    sample_images.reserve(domain_samples.size());
    for (const auto& x : domain_samples) {
        try {
            sample_images.push_back(F(x));
        } catch (const DomainError&) {
        }
    }
    r.image_diameter = diameter(sample_images);
    if (k >= 2) {
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) dmin = std::min(dmin, r.distances[i][j]);
        r.collapse_ratio = r.image_diameter > 0 ? dmin / r.image_diameter : std::numeric_limits<double>::infinity();
    }
    return r;
}

struct Collision {
    StatePoint a, b;
    double input_distance = 0.0, image_distance = 0.0;
};

struct InjectivityReport {
    std::vector<Collision> collisions;  ///< capped at `max_recorded`
    std::size_t collision_count = 0;
    double min_separation_ratio = std::numeric_limits<double>::infinity();
    std::size_t pairs = 0;
};

/// All-pairs scan: a collision is a pair more than delta_sep apart whose
/// images are closer than delta_img. Absence of collisions is evidence, not proof.
inline InjectivityReport injectivity_probe(const ImmersionMap& F, const std::vector<StatePoint>& samples,
                                           double delta_sep, double delta_img, std::size_t max_recorded = 1000) {
    Cloud img = F.image(samples);
    InjectivityReport r;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            double dx = distance(samples[i], samples[j]);
            if (dx == 0.0) continue;
            double dz = distance(img[i], img[j]);
            ++r.pairs;
            r.min_separation_ratio = std::min(r.min_separation_ratio, dz / dx);
            if (dx > delta_sep && dz < delta_img) {
                ++r.collision_count;
                if (r.collisions.size() < max_recorded) r.collisions.push_back({samples[i], samples[j], dx, dz});
            }
        }
    }
    return r;
}

struct ConsistencyResult {
    bool consistent = true;
    bool vacuous = false;
    std::optional<double> distance;
    std::string detail;
};

/// For a system whose forward and reversed dynamics both have closed basins,
/// an orbit's omega- and alpha-limit sets coincide. Reports whether g at z0
/// is consistent with that; vacuously so when either direction escapes.
inline ConsistencyResult omega_alpha_consistency(const DiscreteMap& g, const StatePoint& z0, const Tolerances& cfg = {}) {
    if (!g.has_inverse()) throw g.no_inverse();
    LimitSetEstimate w = estimate_omega(g, z0, cfg);
    LimitSetEstimate a = estimate_alpha(g, z0, cfg);
    ConsistencyResult r;
    auto escaped = [](const LimitSetEstimate& e) { return e.status == EstimateStatus::escaped; };
    if (escaped(w) || escaped(a)) {
        r.vacuous = true;
        r.detail = std::string("omega ") + to_string(w.status) + ", alpha " + to_string(a.status) +
                   ": an orbit direction escapes, nothing to compare";
        return r;
    }
    if (!w.converged || !a.converged)
        throw NumericError("unconverged", std::string("omega ") + to_string(w.status) + ", alpha " +
                                              to_string(a.status) + ": neither converged nor escaped");
    r.distance = hausdorff(w.points, a.points);
    double tol = match_tolerance(cfg.tol_cluster, w.resolution, a.resolution);
    r.consistent = *r.distance < tol;
    r.detail = r.consistent ? "omega and alpha limit sets coincide"
                            : "omega and alpha limit sets differ: g cannot have closed basins in both time directions here";
    return r;
}

}  // namespace limitlab
