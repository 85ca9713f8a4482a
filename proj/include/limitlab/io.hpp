#pragma once

#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <string>
#include <string_view>

#include "limitlab/basins.hpp"
#include "limitlab/catalog.hpp"
#include "limitlab/lift.hpp"

namespace limitlab {

using Json = nlohmann::ordered_json;

inline constexpr const char* schema_version = "1";

namespace io {

/// Non-finite values serialize as null.
inline Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline Json point(std::span<const double> x) {
    Json a = Json::array();
    for (double v : x) a.push_back(num(v));
    return a;
}
inline Json point(const StatePoint& p) { return point(p.coords()); }

inline Json cloud(const Cloud& c) {
    Json a = Json::array();
    for (const auto& p : c) a.push_back(point(p));
    return a;
}

/// Column-major flattening with its shape.
inline Json matrix(const Eigen::MatrixXd& m) {
    Json data = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) data.push_back(num(m(i, j)));
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"order", "column-major"}, {"data", std::move(data)}};
}

inline Json header(const char* kind) { return Json{{"schema", std::string("limitlab/") + kind + "/" + schema_version}}; }

inline Json tolerances(const Tolerances& t) {
    Json o = Json::object();
    for (const auto& e : Tolerances::entries()) o[e.name] = t.value(e.name);
    return o;
}

inline Json params(const Params& p) {
    Json o = Json::object();
    for (const auto& [k, v] : p) o[k] = v;
    return o;
}

inline Json estimate(const LimitSetEstimate& e) {
    return Json{{"source", to_string(e.source)},
                {"seed", point(e.seed)},
                {"status", to_string(e.status)},
                {"termination", to_string(e.termination)},
                {"converged", e.converged},
                {"shape", e.shape.describe()},
                {"diameter", num(e.diameter)},
                {"settle_distance", num(e.settle_distance)},
                {"settle_tolerance", num(e.settle_tolerance)},
                {"precompact", e.precompact},
                {"steps", e.steps},
                {"points", cloud(e.points)}};
}

inline Json catalog(const LimitSetCatalog& c) {
    Json members = Json::array();
    for (const auto& m : c.members) {
        members.push_back(Json{{"label", m.label},
                               {"source", to_string(m.source)},
                               {"shape", m.shape.describe()},
                               {"diameter", num(m.diameter)},
                               {"precompact", m.precompact},
                               {"resolution", num(m.resolution)},
                               {"seeds", cloud(m.seeds)},
                               {"points", cloud(m.points)}});
    }
    return members;
}

inline Json conjugacy(const ConjugacyReport& r) {
    return Json{{"max_residual", num(r.max_residual)},
                {"mean_residual", num(r.mean_residual)},
                {"worst_point", r.worst_point ? point(*r.worst_point) : Json(nullptr)},
                {"samples_used", r.samples_used},
                {"samples_excluded", r.samples_excluded}};
}

inline Json collapse(const CollapseReport& r) {
    Json d = Json::array();
    for (const auto& row : r.distances) {
        Json jr = Json::array();
        for (double v : row) jr.push_back(num(v));
        d.push_back(std::move(jr));
    }
    return Json{{"labels", r.labels},
                {"distances", std::move(d)},
                {"maximal_member", r.maximal_member ? Json(*r.maximal_member) : Json(nullptr)},
                {"collapse_ratio", r.collapse_ratio ? num(*r.collapse_ratio) : Json(nullptr)},
                {"image_diameter", num(r.image_diameter)}};
}

inline Json injectivity(const InjectivityReport& r) {
    Json cs = Json::array();
    for (const auto& c : r.collisions)
        cs.push_back(Json{{"a", point(c.a)},
                          {"b", point(c.b)},
                          {"input_distance", num(c.input_distance)},
                          {"image_distance", num(c.image_distance)}});
    return Json{{"collisions", std::move(cs)},
                {"collision_count", r.collision_count},
                {"min_separation_ratio", num(r.min_separation_ratio)},
                {"pairs", r.pairs}};
}

inline Json split(const SpectralSplit& s) {
    Json clusters = Json::array();
    for (const auto& c : s.clusters)
        clusters.push_back(Json{{"lambda_re", c.lambda.real()},
                                {"lambda_im", c.lambda.imag()},
                                {"modulus", std::abs(c.lambda)},
                                {"complex_pair", c.complex_pair},
                                {"algebraic", c.algebraic},
                                {"geometric", c.geometric},
                                {"class", to_string(c.cls)},
                                {"basis", matrix(c.basis)}});
    auto d = s.dims();
    return Json{{"dims", {{"stable", d.stable}, {"unit", d.unit}, {"unstable", d.unstable}}},
                {"clusters", std::move(clusters)},
                {"stable", matrix(s.stable)},
                {"unit", matrix(s.unit)},
                {"unstable", matrix(s.unstable)}};
}

inline Json dictionary(const Dictionary& d) {
    Json j{{"kind", to_string(d.kind())},
           {"order", d.order()},
           {"dim_in", d.dim_in()},
           {"dim_out", d.dim_out()},
           {"include_constant", d.include_constant()},
           {"features", d.names()}};
    if (d.kind() == DictionaryKind::rational_pole) j["pole"] = d.spec().pole;
    return j;
}

inline Json lift(const LearnedLift& l, const FitReport& f) {
    Json eig = Json::array();
    Eigen::EigenSolver<Eigen::MatrixXd> es(l.K, false);
    if (es.info() == Eigen::Success)
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            eig.push_back(Json{{"re", num(es.eigenvalues()(i).real())}, {"im", num(es.eigenvalues()(i).imag())}});
    return Json{{"dictionary", dictionary(l.dictionary)},
                {"training_domain", l.training_domain.describe()},
                {"ridge", l.ridge},
                {"K", matrix(l.K)},
                {"eigenvalues", std::move(eig)},
                {"fit",
                 {{"train_residual", num(f.train_residual)},
                  {"gram_condition", num(f.gram_condition)},
                  {"samples", f.samples},
                  {"solver", f.orthogonal ? "qr" : "normal-equations"}}}};
}

inline Json sweep(const TradeoffReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back(Json{{"dict_kind", row.dict_kind},
                            {"dict_order", row.dict_order},
                            {"dict_size", row.dict_size},
                            {"ridge", row.ridge},
                            {"residual_heldout", num(row.residual_heldout)},
                            {"train_residual", num(row.train_residual)},
                            {"gram_condition", num(row.gram_condition)},
                            {"collapse_ratio", row.collapse_ratio ? num(*row.collapse_ratio) : Json(nullptr)},
                            {"min_sep_ratio", num(row.min_sep_ratio)},
                            {"collisions", row.collisions},
                            {"error", row.error ? Json(*row.error) : Json(nullptr)}});
    return Json{{"system", r.system},
                {"domain", r.domain},
                {"seed", r.seed},
                {"catalog_size", r.catalog_size},
                {"rows", std::move(rows)}};
}

inline Json manifest() {
    Json systems = Json::array();
    for (const auto& info : list_systems()) {
        auto e = get_system(info.name);
        Json ps = Json::array();
        for (const auto& p : info.params)
            ps.push_back(Json{{"name", p.name}, {"default", p.default_value}, {"constraint", p.constraint}, {"help", p.help}});
        Json known = Json::array();
        for (const auto& k : e.known_limit_sets)
            known.push_back(Json{{"description", k.description},
                                 {"source", to_string(k.source)},
                                 {"points", k.points.size() <= 8 ? cloud(k.points) : Json(nullptr)},
                                 {"point_count", k.points.size()}});
        systems.push_back(Json{{"name", info.name},
                               {"summary", info.summary},
                               {"params", std::move(ps)},
                               {"dim", e.system.dim()},
                               {"formula", e.formula},
                               {"domain", e.system.domain().describe()},
                               {"inverse_available", e.inverse_available()},
                               {"exact_immersion", e.exact_immersion ? Json(e.immersion_formula) : Json(nullptr)},
                               {"immersion_domain", e.exact_immersion ? Json(e.valid_domain.describe()) : Json(nullptr)},
                               {"lifted_target", e.lifted_target ? Json(e.target_formula) : Json(nullptr)},
                               {"known_limit_sets", std::move(known)},
                               {"notes", e.notes}});
    }
    Json j = header("catalog");
    j["systems"] = std::move(systems);
    return j;
}

inline void write_json(const std::string& path, const Json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("unwritable_output", "cannot write " + path);
    os << j.dump(2) << "\n";
}

inline void write_sweep_csv(std::ostream& os, const TradeoffReport& r) {
    auto cell = [](double x) { return std::isfinite(x) ? format_csv(x) : std::string(std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf")); };
    os << "dict_kind,dict_size,ridge,residual_heldout,collapse_ratio,min_sep_ratio\n";
    for (const auto& row : r.rows) {
        os << row.dict_kind << ',' << row.dict_size << ',' << format_csv(row.ridge) << ',' << cell(row.residual_heldout) << ','
           << (row.collapse_ratio ? cell(*row.collapse_ratio) : "nan") << ',' << cell(row.min_sep_ratio) << '\n';
    }
}

// ---- parsing ----

namespace parse {

struct Cursor {
    std::string_view s;
    std::size_t i = 0;

    void skip() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool eat(char c) {
        skip();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    bool at_end() {
        skip();
        return i == s.size();
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError("bad_domain", "cannot parse '" + std::string(s) + "' at offset " + std::to_string(i) + ": " + what);
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }

    double factor() {
        skip();
        bool neg = eat('-');
        if (!neg) eat('+');
        skip();
        double v;
        if (s.substr(i, 2) == "pi") {
            v = std::numbers::pi;
            i += 2;
        } else if (s.substr(i, 3) == "inf") {
            v = std::numeric_limits<double>::infinity();
            i += 3;
        } else {
            std::size_t j = i;
            while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.' || s[j] == 'e' || s[j] == 'E' ||
                                    ((s[j] == '-' || s[j] == '+') && j > i && (s[j - 1] == 'e' || s[j - 1] == 'E'))))
                ++j;
            if (j == i) fail("expected a number");
            std::string tok(s.substr(i, j - i));
            std::size_t used = 0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                fail("bad number '" + tok + "'");
            }
            if (used != tok.size()) fail("bad number '" + tok + "'");
            i = j;
        }
        return neg ? -v : v;
    }

    /// number | pi | inf, optionally combined with '*' and '/'.
    double value() {
        double v = factor();
        for (;;) {
            if (eat('*'))
                v *= factor();
            else if (eat('/'))
                v /= factor();
            else
                return v;
        }
    }
};

}  // namespace parse

/// Parses "0.5", "(1, 2)", "1,2" or "[1 2]" style points.
inline StatePoint parse_point(std::string_view text) {
    parse::Cursor c{text};
    bool paren = c.eat('(') || c.eat('[');
    std::vector<double> v;
    do {
        v.push_back(c.value());
    } while (c.eat(','));
    if (paren && !(c.eat(')') || c.eat(']'))) c.fail("unclosed point");
    if (!c.at_end()) c.fail("trailing characters");
    return StatePoint(std::move(v));
}

/// Domain strings: "R", "R^2", "[a, b]", "(a, b]", "[a, b]x[c, d]",
/// "annulus(rin, rout)" (2-d), each optionally followed by "\ {p, q}" to
/// exclude points. Numbers may use pi and inf, e.g. "[0, pi]". A round
/// bracket on a finite end of an interval excludes that endpoint.
inline DomainRegion parse_domain(std::string_view text, double eps_excl = Tolerances{}.eps_excl) {
    parse::Cursor c{text};
    c.skip();
    std::optional<DomainRegion> d;
    std::vector<StatePoint> open_ends;
    if (c.s.substr(c.i, 1) == "R") {
        ++c.i;
        std::size_t dim = 1;
        if (c.eat('^')) {
            double n = c.value();
            if (!(n >= 1 && n <= 64 && n == std::floor(n))) c.fail("bad dimension");
            dim = static_cast<std::size_t>(n);
        }
        d = DomainRegion::full_space(dim);
    } else if (c.s.substr(c.i, 7) == "annulus") {
        c.i += 7;
        c.expect('(');
        double rin = c.value();
        c.expect(',');
        double rout = c.value();
        c.expect(')');
        d = DomainRegion::annulus(2, rin, rout);
    } else {
        std::vector<DomainRegion::Bounds> bounds;
        std::vector<std::pair<bool, bool>> open;
        do {
            bool lo_open = c.eat('(');
            if (!lo_open) c.expect('[');
            double lo = c.value();
            c.expect(',');
            double hi = c.value();
            bool hi_open = c.eat(')');
            if (!hi_open) c.expect(']');
            bounds.push_back({lo, hi});
            open.push_back({lo_open && std::isfinite(lo), hi_open && std::isfinite(hi)});
        } while (c.eat('x'));
        if (bounds.empty()) c.fail("expected an interval");
        if (bounds.size() == 1) {
            d = DomainRegion::interval(bounds[0].first, bounds[0].second);
            if (open[0].first) open_ends.push_back(StatePoint({bounds[0].first}));
            if (open[0].second) open_ends.push_back(StatePoint({bounds[0].second}));
        } else {
            for (auto [a, b] : open)
                if (a || b) c.fail("open bounds are only supported in one dimension");
            d = DomainRegion::box(std::move(bounds));
        }
    }
    for (const auto& p : open_ends) d = d->excluding(p, eps_excl);
    if (c.eat('\\')) {
        c.expect('{');
        do {
            c.skip();
            if (c.eat('(')) {
                std::vector<double> v;
                do {
                    v.push_back(c.value());
                } while (c.eat(','));
                c.expect(')');
                d = d->excluding(StatePoint(std::move(v)), eps_excl);
            } else {
                d = d->excluding(StatePoint({c.value()}), eps_excl);
            }
        } while (c.eat(','));
        c.expect('}');
    }
    if (!c.at_end()) c.fail("trailing characters");
    return *d;
}

}  // namespace io
}  // namespace limitlab
