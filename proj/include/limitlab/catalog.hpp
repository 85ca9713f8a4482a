#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "limitlab/immersion.hpp"
#include "limitlab/linear.hpp"

namespace limitlab {

struct ParamSpec {
    std::string name;
    double default_value = 0.0;
    std::string constraint;
    std::string help;
};

struct SystemInfo {
    std::string name;
    std::vector<ParamSpec> params;
    std::string summary;
};

struct KnownLimitSet {
    std::string description;
    Cloud points;
    LimitSource source = LimitSource::omega;
};

using Params = std::map<std::string, double>;

struct CatalogEntry {
    std::string name;
    Params params;
    DiscreteMap system;
    std::string formula;
    std::optional<ImmersionMap> exact_immersion;
    std::string immersion_formula;
    std::optional<DiscreteMap> lifted_target;
    std::string target_formula;
    std::vector<KnownLimitSet> known_limit_sets;
    DomainRegion valid_domain;
    /// Bounded part of the valid domain used when sampling is needed.
    DomainRegion sample_domain;
    /// Seeds whose omega-limit sets reproduce the known omega-limit sets.
    std::vector<StatePoint> seeds;
    std::string notes;

    bool inverse_available() const { return system.has_inverse(); }
};

namespace detail {

inline StatePoint pt(double x) { return StatePoint({x}); }
inline StatePoint pt(double x, double y) { return StatePoint({x, y}); }

inline Cloud unit_circle(std::size_t n = 720) {
    Cloud c;
    for (std::size_t i = 0; i < n; ++i) {
        double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        c.push_back(pt(std::cos(t), std::sin(t)));
    }
    return c;
}

/// -(3x - 1)/(x - 3): fixed points -1 (attracting) and 1 (repelling).
inline void mobius_fwd(std::span<const double> x, std::span<double> y) { y[0] = -(3.0 * x[0] - 1.0) / (x[0] - 3.0); }
inline void mobius_inv(std::span<const double> x, std::span<double> y) { y[0] = (3.0 * x[0] + 1.0) / (x[0] + 3.0); }

inline DiscreteMap mobius_map(double eps) {
    return DiscreteMap("mobius", 1, mobius_fwd, Evaluator(mobius_inv), DomainRegion::full_space(1).excluding(pt(3.0), eps));
}

inline DiscreteMap halving_map(std::size_t n) {
    return make_linear_map("z/2", 0.5 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
}

inline double param(const Params& p, const std::string& key, double def) {
    auto it = p.find(key);
    return it == p.end() ? def : it->second;
}

inline ValidationError invalid_param(const std::string& what) { return ValidationError("invalid_param", what); }

}  // namespace detail

inline std::vector<SystemInfo> list_systems() {
    return {
        {"mobius", {}, "x -> -(3x-1)/(x-3); limit sets {-1}, {1}; exact lift z = (x+1)/(x-1) onto z/2"},
        {"mobius-inverse", {}, "x -> (3x+1)/(x+3); the time reversal of mobius; lift z = (x-1)/(x+1) onto z/2"},
        {"cot-map", {}, "x -> 2 arccot(cot(x/2)/sqrt 2) on [0, pi]; y = cos x immerses it into mobius on [-1, 1]"},
        {"rotation-scaling",
         {{"theta", 1.0, "0 < theta < 2*pi", "rotation angle in radians"}},
         "x -> 2/(|x|+1) R(theta) x on R^2; limit sets {0} and the unit circle; 3-d linear lift off the origin"},
        {"negation", {}, "x -> -x on [-1, 1]; a continuum of period-2 orbits, no immersion claims"},
        {"scalar-linear", {{"a", 0.5, "finite", "multiplier"}}, "x -> a x on R"},
        {"jordan",
         {{"lambda", 1.0, "finite", "eigenvalue"}, {"m", 2.0, "integer 1..16", "block size"}},
         "x -> J x with J the m x m Jordan block of lambda"},
    };
}

/// A fully populated catalog entry. Throws ValidationError with code
/// unknown_system or invalid_param.
inline CatalogEntry get_system(const std::string& name, const Params& params = {}, const Tolerances& cfg = {}) {
    auto systems = list_systems();
    auto info = std::find_if(systems.begin(), systems.end(), [&](const SystemInfo& s) { return s.name == name; });
    if (info == systems.end()) throw ValidationError("unknown_system", "unknown system '" + name + "'");
    Params resolved;
    for (const auto& p : info->params) resolved[p.name] = p.default_value;
    for (const auto& [k, v] : params) {
        if (!resolved.count(k)) throw detail::invalid_param("system '" + name + "' has no parameter '" + k + "'");
        if (!std::isfinite(v)) throw detail::invalid_param("parameter '" + k + "' must be finite");
        resolved[k] = v;
    }
    const double eps = cfg.eps_excl;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    using detail::pt;

    if (name == "mobius") {
        auto f = detail::mobius_map(eps);
        auto valid = DomainRegion::interval(-DomainRegion::inf, 1.0).excluding(pt(1.0), eps);
        ImmersionMap F("(x+1)/(x-1)", 1, 1, [](std::span<const double> x, std::span<double> z) { z[0] = (x[0] + 1.0) / (x[0] - 1.0); },
                       valid);
        return CatalogEntry{name, resolved, f, "-(3x-1)/(x-3)", F, "(x+1)/(x-1)", detail::halving_map(1), "z/2",
                            {{"{-1}", {pt(-1.0)}, LimitSource::omega},
                             {"{1}", {pt(1.0)}, LimitSource::omega},
                             {"{-1}", {pt(-1.0)}, LimitSource::alpha},
                             {"{1}", {pt(1.0)}, LimitSource::alpha}},
                            valid, DomainRegion::interval(-5.0, 0.9), {pt(0.0), pt(1.0)},
                            "Moebius map with the pole at 3 excluded. (-inf, 1) holds only {-1}; F is undefined at 1."};
    }
    if (name == "mobius-inverse") {
        DiscreteMap f("mobius-inverse", 1, detail::mobius_inv, Evaluator(detail::mobius_fwd),
                      DomainRegion::full_space(1).excluding(pt(-3.0), eps));
        auto valid = DomainRegion::interval(-1.0, DomainRegion::inf).excluding(pt(-1.0), eps);
        ImmersionMap F("(x-1)/(x+1)", 1, 1, [](std::span<const double> x, std::span<double> z) { z[0] = (x[0] - 1.0) / (x[0] + 1.0); },
                       valid);
        return CatalogEntry{name, resolved, f, "(3x+1)/(x+3)", F, "(x-1)/(x+1)", detail::halving_map(1), "z/2",
                            {{"{1}", {pt(1.0)}, LimitSource::omega},
                             {"{-1}", {pt(-1.0)}, LimitSource::omega},
                             {"{-1}", {pt(-1.0)}, LimitSource::alpha},
                             {"{1}", {pt(1.0)}, LimitSource::alpha}},
                            valid, DomainRegion::interval(-0.9, 5.0), {pt(0.0), pt(-1.0)},
                            "Inverse of mobius. Its omega-limit sets are the alpha-limit sets of mobius; (-1, inf) holds only {1}."};
    }
    if (name == "cot-map") {
        // 2 arccot(c/sqrt2) with c = cot(x/2), on the (0, pi) arccot branch,
        // written with atan2 so that it extends to the fixed points 0 and pi.
        Evaluator fwd = [](std::span<const double> x, std::span<double> y) {
            y[0] = 2.0 * std::atan2(std::numbers::sqrt2 * std::sin(x[0] / 2.0), std::cos(x[0] / 2.0));
        };
        Evaluator inv = [](std::span<const double> x, std::span<double> y) {
            y[0] = 2.0 * std::atan2(std::sin(x[0] / 2.0), std::numbers::sqrt2 * std::cos(x[0] / 2.0));
        };
        auto dom = DomainRegion::interval(0.0, std::numbers::pi);
        DiscreteMap f("cot-map", 1, fwd, inv, dom);
        ImmersionMap F("cos x", 1, 1, [](std::span<const double> x, std::span<double> y) { y[0] = std::cos(x[0]); }, dom);
        auto g = detail::mobius_map(eps).restricted(DomainRegion::interval(-1.0, 1.0));
        return CatalogEntry{name, resolved, f, "2 arccot(cot(x/2)/sqrt(2))", F, "cos x", g, "-(3y-1)/(y-3) on [-1, 1]",
                            {{"{0}", {pt(0.0)}, LimitSource::omega},
                             {"{pi}", {pt(std::numbers::pi)}, LimitSource::omega},
                             {"{0}", {pt(0.0)}, LimitSource::alpha},
                             {"{pi}", {pt(std::numbers::pi)}, LimitSource::alpha}},
                            dom, dom, {pt(0.0), pt(std::numbers::pi / 2.0)},
                            "One-to-one immersion into a nonlinear target whose basin of {-1} is [-1, 1), not closed."};
    }
    if (name == "rotation-scaling") {
        const double theta = resolved["theta"];
        if (!(theta > 0.0 && theta < 2.0 * std::numbers::pi)) throw detail::invalid_param("theta must lie in (0, 2*pi)");
        const double c = std::cos(theta), s = std::sin(theta);
        Evaluator fwd = [c, s](std::span<const double> x, std::span<double> y) {
            double k = 2.0 / (std::hypot(x[0], x[1]) + 1.0);
            y[0] = k * (c * x[0] + s * x[1]);
            y[1] = k * (-s * x[0] + c * x[1]);
        };
        // |y| = 2r/(r+1) < 2, so r = |y|/(2 - |y|) and x = R^T y / (2 - |y|).
        Evaluator inv = [c, s, nan](std::span<const double> y, std::span<double> x) {
            double d = 2.0 - std::hypot(y[0], y[1]);
            if (!(d > 0.0)) {
                x[0] = x[1] = nan;
                return;
            }
            x[0] = (c * y[0] - s * y[1]) / d;
            x[1] = (s * y[0] + c * y[1]) / d;
        };
        DiscreteMap f("rotation-scaling", 2, fwd, inv, DomainRegion::full_space(2));
        auto valid = DomainRegion::full_space(2).excluding(pt(0.0, 0.0), eps);
        ImmersionMap F("(x1/|x|, x2/|x|, (|x|-1)/|x|)", 2, 3,
                       [](std::span<const double> x, std::span<double> z) {
                           double r = std::hypot(x[0], x[1]);
                           z[0] = x[0] / r;
                           z[1] = x[1] / r;
                           z[2] = (r - 1.0) / r;
                       },
                       valid);
        Eigen::Matrix3d A;
        A << c, s, 0, -s, c, 0, 0, 0, 0.5;
        auto sample = DomainRegion::box({{-2.0, 2.0}, {-2.0, 2.0}}).excluding(pt(0.0, 0.0), 1e-3);
        return CatalogEntry{name, resolved, f, "2/(|x|+1) R(theta) x", F, "(x1/|x|, x2/|x|, (|x|-1)/|x|)",
                            make_linear_map("rotation-scaling-lift", A), "diag(R(theta), 1/2)",
                            {{"{0}", {pt(0.0, 0.0)}, LimitSource::omega},
                             {"unit circle", detail::unit_circle(), LimitSource::omega}},
                            valid, sample, {pt(2.0, 0.0), pt(0.5, 0.0), pt(0.0, 0.0)},
                            "Rotation by theta then radial scaling r -> 2r/(r+1). Off the origin the lift is linear; on R^2 "
                            "the basin of the circle is not closed."};
    }
    if (name == "negation") {
        auto dom = DomainRegion::interval(-1.0, 1.0);
        Evaluator neg = [](std::span<const double> x, std::span<double> y) { y[0] = -x[0]; };
        DiscreteMap f("negation", 1, neg, neg, dom);
        return CatalogEntry{name, resolved, f, "-x", std::nullopt, "", std::nullopt, "",
                            {{"{0}", {pt(0.0)}, LimitSource::omega},
                             {"{x, -x} for each 0 < x <= 1", {pt(-0.5), pt(0.5)}, LimitSource::omega}},
                            dom, dom, {pt(0.0), pt(0.5)},
                            "Linear with uncountably many limit sets; outside the countable regime."};
    }
    if (name == "scalar-linear") {
        const double a = resolved["a"];
        auto f = make_linear_map("scalar-linear", Eigen::MatrixXd::Constant(1, 1, a));
        std::vector<KnownLimitSet> known;
        if (std::abs(a) < 1.0) known.push_back({"{0}", {pt(0.0)}, LimitSource::omega});
        if (std::abs(a) > 1.0) known.push_back({"{0}", {pt(0.0)}, LimitSource::alpha});
        return CatalogEntry{name, resolved, f, "a x", std::nullopt, "", std::nullopt, "", known,
                            DomainRegion::full_space(1), DomainRegion::interval(-1.0, 1.0), {pt(1.0)}, "Scalar linear map."};
    }
    // jordan
    const double lambda = resolved["lambda"];
    const double mm = resolved["m"];
    if (!(mm >= 1 && mm <= 16 && mm == std::floor(mm))) throw detail::invalid_param("m must be an integer in 1..16");
    const auto m = static_cast<Eigen::Index>(mm);
    Eigen::MatrixXd J = lambda * Eigen::MatrixXd::Identity(m, m);
    for (Eigen::Index i = 0; i + 1 < m; ++i) J(i, i + 1) = 1.0;
    std::vector<KnownLimitSet> known;
    if (std::abs(lambda) < 1.0) known.push_back({"{0}", {StatePoint(std::vector<double>(static_cast<std::size_t>(m), 0.0))}, LimitSource::omega});
    std::vector<std::pair<double, double>> box(static_cast<std::size_t>(m), {-1.0, 1.0});
    return CatalogEntry{name, resolved, make_linear_map("jordan", J), "J_m(lambda) x", std::nullopt, "", std::nullopt, "", known,
                        DomainRegion::full_space(static_cast<std::size_t>(m)), DomainRegion::box(box),
                        {StatePoint(std::vector<double>(static_cast<std::size_t>(m), 1.0))}, "Single Jordan block."};
}

/// The exact immersion of a catalog system with its valid domain attached.
inline ImmersionMap exact_immersion(const std::string& name, const Params& params = {}) {
    auto e = get_system(name, params);
    if (!e.exact_immersion) throw ValidationError("no_exact_immersion", "system '" + name + "' has no exact immersion");
    return *e.exact_immersion;
}

}  // namespace limitlab
