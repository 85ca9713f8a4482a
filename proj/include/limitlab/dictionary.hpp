#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "limitlab/format.hpp"
#include "limitlab/immersion.hpp"

namespace limitlab {

enum class DictionaryKind { monomial, fourier, rational_pole, custom };

inline const char* to_string(DictionaryKind k) {
    switch (k) {
        case DictionaryKind::monomial: return "monomial";
        case DictionaryKind::fourier: return "fourier";
        case DictionaryKind::rational_pole: return "rational-pole";
        case DictionaryKind::custom: return "custom";
    }
    return "unknown";
}

struct Feature {
    std::string name;
    std::function<double(std::span<const double>)> fn;
};

/// What to build. `order` is the max total degree (monomial), the max
/// frequency (fourier) or the highest power of (x + pole) / (x - pole).
struct DictionarySpec {
    DictionaryKind kind = DictionaryKind::monomial;
    std::size_t dim_in = 1;
    std::size_t order = 1;
    double pole = 1.0;
    bool include_constant = false;
    std::vector<Feature> custom;
};

inline constexpr std::size_t max_dictionary_order = 32;

/// An ordered list of scalar observables psi_1..psi_m on R^dim_in.
class Dictionary {
public:
    Dictionary(DictionarySpec spec, std::vector<Feature> features)
        : spec_(std::move(spec)), features_(std::move(features)) {}

    DictionaryKind kind() const noexcept { return spec_.kind; }
    std::size_t dim_in() const noexcept { return spec_.dim_in; }
    std::size_t dim_out() const noexcept { return features_.size(); }
    std::size_t order() const noexcept { return spec_.order; }
    bool include_constant() const noexcept { return spec_.include_constant; }
    const DictionarySpec& spec() const noexcept { return spec_; }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& f : features_) out.push_back(f.name);
        return out;
    }

    void evaluate(std::span<const double> x, std::span<double> out) const {
        for (std::size_t i = 0; i < features_.size(); ++i) out[i] = features_[i].fn(x);
    }

    std::vector<double> operator()(std::span<const double> x) const {
        std::vector<double> out(features_.size());
        evaluate(x, out);
        return out;
    }

    /// Psi as a candidate immersion on `domain`.
    ImmersionMap as_immersion(const DomainRegion& domain, std::string name = "psi") const {
        auto feats = features_;
        return ImmersionMap(std::move(name), dim_in(), dim_out(),
                            [feats](std::span<const double> x, std::span<double> y) {
                                for (std::size_t i = 0; i < feats.size(); ++i) y[i] = feats[i].fn(x);
                            },
                            domain);
    }

private:
    DictionarySpec spec_;
    std::vector<Feature> features_;
};

namespace detail {

inline std::string axis_name(std::size_t dim_in, std::size_t axis) {
    return dim_in == 1 ? "x" : "x" + std::to_string(axis + 1);
}

/// Exponent vectors of total degree `deg`, lexicographically descending
/// (x1^2, x1 x2, x2^2 for two variables).
inline void exponents(std::size_t dim, std::size_t deg, std::vector<std::size_t>& cur,
                      std::vector<std::vector<std::size_t>>& out) {
    if (cur.size() + 1 == dim) {
        cur.push_back(deg);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (std::size_t e = deg + 1; e-- > 0;) {
        cur.push_back(e);
        exponents(dim, deg - e, cur, out);
        cur.pop_back();
    }
}

}  // namespace detail

/// Deterministic basis: optional constant first, then monomials by total
/// degree then lexicographic, Fourier pairs cos(jx), sin(jx) by ascending j,
/// or powers of the Moebius-type observable (x + pole) / (x - pole).
inline Dictionary build_dictionary(DictionarySpec spec) {
    if (spec.dim_in == 0) throw ValidationError("bad_dictionary", "dictionary input dimension must be >= 1");
    if (spec.kind != DictionaryKind::custom && spec.order > max_dictionary_order)
        throw ValidationError("bad_dictionary", "dictionary order above " + std::to_string(max_dictionary_order));
    std::vector<Feature> feats;
    if (spec.include_constant) feats.push_back({"1", [](std::span<const double>) { return 1.0; }});
    const std::size_t d = spec.dim_in;
    switch (spec.kind) {
        case DictionaryKind::monomial: {
            for (std::size_t deg = 1; deg <= spec.order; ++deg) {
                std::vector<std::vector<std::size_t>> exps;
                std::vector<std::size_t> cur;
                detail::exponents(d, deg, cur, exps);
                for (const auto& e : exps) {
                    std::string name;
                    for (std::size_t a = 0; a < d; ++a) {
                        if (e[a] == 0) continue;
                        if (!name.empty()) name += "*";
                        name += detail::axis_name(d, a);
                        if (e[a] > 1) name += "^" + std::to_string(e[a]);
                    }
                    feats.push_back({name, [e](std::span<const double> x) {
                                         double v = 1.0;
                                         for (std::size_t a = 0; a < e.size(); ++a)
                                             for (std::size_t p = 0; p < e[a]; ++p) v *= x[a];
                                         return v;
                                     }});
                }
            }
            break;
        }
        case DictionaryKind::fourier: {
            for (std::size_t j = 1; j <= spec.order; ++j) {
                for (std::size_t a = 0; a < d; ++a) {
                    std::string arg = (j == 1 ? "" : std::to_string(j)) + detail::axis_name(d, a);
                    double w = static_cast<double>(j);
                    feats.push_back({"cos(" + arg + ")", [w, a](std::span<const double> x) { return std::cos(w * x[a]); }});
                    feats.push_back({"sin(" + arg + ")", [w, a](std::span<const double> x) { return std::sin(w * x[a]); }});
                }
            }
            break;
        }
        case DictionaryKind::rational_pole: {
            if (d != 1) throw ValidationError("bad_dictionary", "rational-pole dictionaries are one-dimensional");
            if (spec.pole == 0.0 || !std::isfinite(spec.pole))
                throw ValidationError("bad_dictionary", "pole must be finite and nonzero");
            double p = spec.pole;
            std::string base = "(x+" + format_real(p) + ")/(x-" + format_real(p) + ")";
            for (std::size_t i = 1; i <= spec.order; ++i) {
                feats.push_back({i == 1 ? base : "(" + base + ")^" + std::to_string(i), [p, i](std::span<const double> x) {
                                     return std::pow((x[0] + p) / (x[0] - p), static_cast<double>(i));
                                 }});
            }
            break;
        }
        case DictionaryKind::custom: {
            for (auto& f : spec.custom) feats.push_back(f);
            break;
        }
    }
    if (feats.empty()) throw ValidationError("bad_dictionary", "dictionary has no basis functions");
    spec.custom.clear();
    return Dictionary(std::move(spec), std::move(feats));
}

}  // namespace limitlab
