#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "limitlab/dictionary.hpp"
#include "limitlab/linear.hpp"
#include "limitlab/parallel.hpp"

namespace limitlab {

/// z_{k+1} = K z_k with z = Psi(x).
struct LearnedLift {
    Dictionary dictionary;
    Eigen::MatrixXd K;
    DomainRegion training_domain;
    double ridge = 0.0;

    /// F_Psi restricted to `domain` (the training domain when omitted).
    ImmersionMap as_immersion(std::optional<DomainRegion> domain = std::nullopt) const {
        return dictionary.as_immersion(domain ? *domain : training_domain, "psi");
    }
    DiscreteMap target_map() const { return make_linear_map("learned", K); }
};

struct FitReport {
    double train_residual = 0.0;  ///< RMS of ||Psi(f(x)) - K Psi(x)||
    double gram_condition = 1.0;
    std::size_t samples = 0;
    bool orthogonal = false;  ///< solved by QR of the stacked matrix
};

struct SamplePair {
    StatePoint x, fx;
};

inline constexpr double gram_switch_condition = 1e8;
inline constexpr double gram_singular_condition = 1e14;

/// Ridge regression min sum ||Psi(f(x)) - K Psi(x)||^2 + ridge ||K||_F^2.
inline std::pair<LearnedLift, FitReport> fit_lift(const std::vector<SamplePair>& pairs, const Dictionary& dict,
                                                  double ridge, DomainRegion training_domain) {
    if (!(ridge >= 0) || !std::isfinite(ridge)) throw ValidationError("bad_ridge", "ridge must be finite and >= 0");
    const auto m = static_cast<Eigen::Index>(dict.dim_out());
    const auto n = static_cast<Eigen::Index>(pairs.size());
    if (n < m)
        throw ValidationError("too_few_samples", std::to_string(n) + " samples for " + std::to_string(m) + " basis functions");
    Eigen::MatrixXd X(n, m), Y(n, m);
    std::vector<double> buf(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& p = pairs[static_cast<std::size_t>(i)];
        if (p.x.dim() != dict.dim_in() || p.fx.dim() != dict.dim_in())
            throw ValidationError("dim_mismatch", "sample dimension does not match the dictionary");
        dict.evaluate(p.x.coords(), buf);
        if (!all_finite(buf)) throw ValidationError("non_finite_features", "Psi is not finite at " + format_point(p.x.coords()));
        X.row(i) = Eigen::Map<const Eigen::RowVectorXd>(buf.data(), m);
        dict.evaluate(p.fx.coords(), buf);
        if (!all_finite(buf)) throw ValidationError("non_finite_features", "Psi is not finite at " + format_point(p.fx.coords()));
        Y.row(i) = Eigen::Map<const Eigen::RowVectorXd>(buf.data(), m);
    }

    FitReport rep;
    rep.samples = pairs.size();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
    const auto& s = svd.singularValues();
    double smax = s(0), smin = s(s.size() - 1);
    double cond = smin > 0 ? (smax / smin) * (smax / smin) : std::numeric_limits<double>::infinity();
    rep.gram_condition = std::max(1.0, cond);
    if (ridge == 0.0 && rep.gram_condition > gram_singular_condition)
        throw NumericError("singular_gram", "Gram matrix condition " + format_real(rep.gram_condition) + " with ridge 0");

    Eigen::MatrixXd Kt;
    if (rep.gram_condition > gram_switch_condition) {
        rep.orthogonal = true;
        Eigen::MatrixXd A(n + m, m), B(n + m, m);
        A << X, std::sqrt(ridge) * Eigen::MatrixXd::Identity(m, m);
        B << Y, Eigen::MatrixXd::Zero(m, m);
        Kt = A.colPivHouseholderQr().solve(B);
    } else {
        Eigen::MatrixXd G = X.transpose() * X;
        G.diagonal().array() += ridge;
        Kt = G.ldlt().solve(X.transpose() * Y);
    }
    if (!Kt.allFinite()) throw NumericError("singular_gram", "regression produced non-finite coefficients");

    rep.train_residual = std::sqrt((Y - X * Kt).rowwise().squaredNorm().mean());
    return {LearnedLift{dict, Kt.transpose(), std::move(training_domain), ridge}, rep};
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ (index + 1) * 0xD1B54A32D192ED03ull);
}

inline double unit_uniform(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

inline std::vector<DomainRegion::Bounds> finite_box(const DomainRegion& d) {
    auto b = d.bounding_box();
    for (const auto& [lo, hi] : b)
        if (!std::isfinite(lo) || !std::isfinite(hi))
            throw ValidationError("unbounded_domain", "sampling needs a bounded domain, got " + d.describe());
    return b;
}

/// Tensor grid with about `count` nodes; `offset` 0 puts nodes on the
/// bounds, 0.5 puts them at cell midpoints.
inline std::vector<StatePoint> grid_points(const DomainRegion& d, std::size_t count, double offset) {
    auto box = finite_box(d);
    const std::size_t dim = box.size();
    auto per = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(count), 1.0 / static_cast<double>(dim))));
    per = std::max<std::size_t>(per, 2);
    std::size_t total = 1;
    for (std::size_t a = 0; a < dim; ++a) total *= per;
    std::vector<StatePoint> out;
    std::vector<double> x(dim);
    for (std::size_t k = 0; k < total; ++k) {
        std::size_t r = k;
        for (std::size_t a = dim; a-- > 0;) {
            std::size_t i = r % per;
            r /= per;
            auto [lo, hi] = box[a];
            double t = offset == 0.0 ? static_cast<double>(i) / static_cast<double>(per - 1)
                                     : (static_cast<double>(i) + offset) / static_cast<double>(per);
            x[a] = i + 1 == per && offset == 0.0 ? hi : lo + t * (hi - lo);
        }
        if (d.contains(x)) out.emplace_back(x);
    }
    return out;
}

inline std::vector<StatePoint> random_points(const DomainRegion& d, std::size_t count, std::mt19937_64& g) {
    auto box = finite_box(d);
    std::vector<StatePoint> out;
    std::vector<double> x(box.size());
    for (std::size_t tries = 0; out.size() < count && tries < 64 * count; ++tries) {
        for (std::size_t a = 0; a < box.size(); ++a) x[a] = box[a].first + unit_uniform(g) * (box[a].second - box[a].first);
        if (d.contains(x)) out.emplace_back(x);
    }
    return out;
}

}  // namespace detail

/// Grid plus seeded uniform-random points of `domain`.
inline std::vector<StatePoint> training_points(const DomainRegion& domain, std::size_t grid, std::size_t random,
                                               std::uint64_t seed) {
    auto pts = detail::grid_points(domain, grid, 0.0);
    std::mt19937_64 g(seed);
    auto rnd = detail::random_points(domain, random, g);
    pts.insert(pts.end(), rnd.begin(), rnd.end());
    return pts;
}

/// Pairs (x, f(x)) for the points where f and Psi are defined and finite.
inline std::vector<SamplePair> sample_pairs(const DiscreteMap& f, const Dictionary& dict,
                                            const std::vector<StatePoint>& points) {
    std::vector<SamplePair> out;
    std::vector<double> buf(dict.dim_out());
    auto finite_psi = [&](const StatePoint& p) {
        dict.evaluate(p.coords(), buf);
        return all_finite(buf);
    };
    for (const auto& x : points) {
        try {
            StatePoint fx = f.evaluate(x);
            if (finite_psi(x) && finite_psi(fx)) out.push_back({x, std::move(fx)});
        } catch (const DomainError&) {
        }
    }
    return out;
}

struct TradeoffRow {
    std::string dict_kind;
    std::size_t dict_order = 0;
    std::size_t dict_size = 0;
    double ridge = 0.0;
    double residual_heldout = std::numeric_limits<double>::quiet_NaN();
    double train_residual = std::numeric_limits<double>::quiet_NaN();
    double gram_condition = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> collapse_ratio;
    double min_sep_ratio = std::numeric_limits<double>::quiet_NaN();
    std::size_t collisions = 0;
    std::optional<std::string> error;
};

struct TradeoffReport {
    std::string system;
    std::string domain;
    std::uint64_t seed = 0;
    std::size_t catalog_size = 0;
    std::vector<TradeoffRow> rows;
};

struct SweepOptions {
    Tolerances cfg{};
    std::uint64_t seed = 42;
    unsigned threads = 1;
};

/// Fits one lift per (dictionary, ridge) and measures how far it is from an
/// exact conjugacy and how close it comes to merging distinct limit sets.
inline TradeoffReport obstruction_sweep(const DiscreteMap& f, const DomainRegion& domain,
                                        const std::vector<DictionarySpec>& family, const std::vector<double>& ridges,
                                        const LimitSetCatalog& catalog, const SweepOptions& opt = {}) {
    const Tolerances& cfg = opt.cfg;
    if (domain.dim() != f.dim()) throw ValidationError("dim_mismatch", "sweep domain dimension mismatch");
    if (family.empty() || ridges.empty()) throw ValidationError("empty_sweep", "need at least one dictionary and one ridge");
    for (double r : ridges)
        if (!(r >= 0) || !std::isfinite(r)) throw ValidationError("bad_ridge", "ridge must be finite and >= 0");
    if (catalog.size() == 0) throw ValidationError("empty_catalog", "sweep needs at least one limit set");
    if (catalog.size() > cfg.max_catalog)
        throw NumericError("uncountable_catalog", "clustering produced " + std::to_string(catalog.size()) +
                                                      " limit sets (guard " + std::to_string(cfg.max_catalog) +
                                                      "); the family looks like a continuum");

    std::vector<Dictionary> dicts;
    for (const auto& s : family) {
        if (s.dim_in != f.dim()) throw ValidationError("dim_mismatch", "dictionary input dimension mismatch");
        dicts.push_back(build_dictionary(s));
    }
    struct Config {
        std::size_t dict;
        double ridge;
    };
    std::vector<Config> configs;
    for (std::size_t d = 0; d < dicts.size(); ++d)
        for (double r : ridges) configs.push_back({d, r});
    std::stable_sort(configs.begin(), configs.end(), [&](const Config& a, const Config& b) {
        if (dicts[a.dict].dim_out() != dicts[b.dict].dim_out()) return dicts[a.dict].dim_out() < dicts[b.dict].dim_out();
        return a.ridge < b.ridge;
    });

    const auto heldout = detail::grid_points(domain, cfg.heldout, 0.5);
    const auto probes = detail::grid_points(domain, cfg.probe_samples, 0.0);

    TradeoffReport rep;
    rep.system = f.name();
    rep.domain = domain.describe();
    rep.seed = opt.seed;
    rep.catalog_size = catalog.size();
    rep.rows.resize(configs.size());
    parallel_for(configs.size(), opt.threads, [&](std::size_t i) {
        const Dictionary& dict = dicts[configs[i].dict];
        TradeoffRow& row = rep.rows[i];
        row.dict_kind = to_string(dict.kind());
        row.dict_order = dict.order();
        row.dict_size = dict.dim_out();
        row.ridge = configs[i].ridge;
        try {
            auto pts = training_points(domain, cfg.train_grid, cfg.train_random, detail::stream_seed(opt.seed, i));
            auto [lift, fit] = fit_lift(sample_pairs(f, dict, pts), dict, row.ridge, domain);
            row.train_residual = fit.train_residual;
            row.gram_condition = fit.gram_condition;
            ImmersionMap psi = lift.as_immersion(f.domain());
            row.residual_heldout = conjugacy_residual(psi, f, lift.target_map(), heldout).max_residual;
            row.collapse_ratio = collapse_report(psi, catalog, heldout, cfg.tol_cluster).collapse_ratio;
            auto inj = injectivity_probe(psi, probes, cfg.delta_sep, cfg.delta_img, 0);
            row.min_sep_ratio = inj.min_separation_ratio;
            row.collisions = inj.collision_count;
        } catch (const Error& e) {
            row.error = std::string(e.code()) + ": " + e.what();
        }
    });
    return rep;
}

}  // namespace limitlab
