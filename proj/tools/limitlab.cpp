#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include "limitlab/limitlab.hpp"

namespace fs = std::filesystem;
using namespace limitlab;

namespace {

struct Common {
    std::string system;
    std::vector<std::string> params;
    std::string domain;
    std::uint64_t seed = 42;
    bool seed_given = false;
    std::string out = ".";
    unsigned threads = 0;
    std::vector<std::string> sets;
};

struct Run {
    Common common;
    Tolerances cfg;
    Params params;
    std::uint64_t seed = 42;
    unsigned threads = 1;
    fs::path out;
};

std::pair<std::string, double> key_value(const std::string& kv, const char* flag) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ValidationError("bad_argument", std::string(flag) + " expects name=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    std::string text = kv.substr(eq + 1);
    io::parse::Cursor c{text};
    double v;
    try {
        v = c.value();
    } catch (const ValidationError&) {
        throw ValidationError("bad_argument", std::string(flag) + " value for '" + key + "' is not a number: '" + text + "'");
    }
    if (!c.at_end()) throw ValidationError("bad_argument", std::string(flag) + " value for '" + key + "' is not a number: '" + text + "'");
    return {key, v};
}

Run resolve(const Common& c) {
    Run r;
    r.common = c;
    for (const auto& s : c.sets) {
        auto [k, v] = key_value(s, "--set");
        r.cfg.apply(k, v);
    }
    for (const auto& p : c.params) {
        auto [k, v] = key_value(p, "--param");
        r.params[k] = v;
    }
    r.seed = c.seed;
    if (!c.seed_given) {
        if (const char* env = std::getenv("LIMITLAB_SEED"); env && *env) {
            char* end = nullptr;
            errno = 0;
            unsigned long long v = std::strtoull(env, &end, 10);
            if (errno || *end || env[0] == '-') throw ValidationError("bad_seed", std::string("LIMITLAB_SEED is not a 64-bit unsigned integer: ") + env);
            r.seed = v;
        }
    }
    r.threads = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
    r.out = c.out;
    std::error_code ec;
    fs::create_directories(r.out, ec);
    if (ec) throw ValidationError("unwritable_output", "cannot create " + r.out.string() + ": " + ec.message());
    return r;
}

CatalogEntry entry_of(const Run& r) {
    if (r.common.system.empty()) throw ValidationError("missing_system", "--system is required");
    return get_system(r.common.system, r.params, r.cfg);
}

DomainRegion domain_or(const Run& r, const DomainRegion& fallback) {
    if (r.common.domain.empty()) return fallback;
    auto d = io::parse_domain(r.common.domain, r.cfg.eps_excl);
    if (d.dim() != fallback.dim()) throw ValidationError("dim_mismatch", "--domain has dimension " + std::to_string(d.dim()) +
                                                                             ", system has " + std::to_string(fallback.dim()));
    return d;
}

std::vector<StatePoint> parse_points(const std::string& text) {
    std::vector<StatePoint> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';'))
        if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(io::parse_point(item));
    return out;
}

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ValidationError("unwritable_output", "cannot write " + p.string());
    os << s;
}

void emit(const fs::path& p, const Json& j) {
    io::write_json(p.string(), j);
    std::cout << p.string() << "\n";
}

Json run_header(const char* kind, const Run&, const CatalogEntry& e) {
    Json j = io::header(kind);
    j["system"] = e.name;
    j["params"] = io::params(e.params);
    return j;
}

/// Grid seeds over the sampling domain plus the documented seeds.
std::vector<StatePoint> default_seeds(const CatalogEntry& e, const DomainRegion& d, std::size_t grid) {
    std::vector<StatePoint> seeds;
    for (const auto& s : e.seeds)
        if (d.contains(s)) seeds.push_back(s);
    if (grid) {
        for (auto& p : detail::grid_points(d, grid, 0.0)) seeds.push_back(std::move(p));
    }
    return seeds;
}

// ---- commands ----

int cmd_simulate(const Run& r, const std::string& x0s, std::size_t steps, bool backward) {
    auto e = entry_of(r);
    auto map = e.system.restricted(domain_or(r, e.system.domain()));
    StatePoint x0 = x0s.empty() ? e.seeds.front() : io::parse_point(x0s);
    auto t = backward ? iterate_back(map, x0, steps, r.cfg.r_div) : iterate(map, x0, steps, r.cfg.r_div);
    std::ostringstream os;
    write_trajectory_csv(os, t);
    auto p = r.out / "trajectory.csv";
    write_text(p, os.str());
    std::cout << p.string() << "\n";
    return 0;
}

int cmd_limits(const Run& r, const std::string& seeds_text, bool alpha, std::size_t grid) {
    auto e = entry_of(r);
    auto dom = domain_or(r, e.system.domain());
    auto map = e.system.restricted(dom);
    std::vector<StatePoint> seeds = seeds_text.empty() ? default_seeds(e, r.common.domain.empty() ? e.sample_domain : dom, grid)
                                                       : parse_points(seeds_text);
    if (seeds.empty()) throw ValidationError("no_seeds", "no seeds inside the domain");
    auto b = build_catalog(map, seeds, r.cfg, alpha ? LimitSource::alpha : LimitSource::omega, r.threads);
    Json j = run_header("catalog-run", r, e);
    j["domain"] = dom.describe();
    j["source"] = alpha ? "alpha" : "omega";
    j["tolerances"] = io::tolerances(r.cfg);
    j["members"] = io::catalog(b.catalog);
    Json est = Json::array();
    for (const auto& x : b.estimates)
        est.push_back(Json{{"seed", io::point(x.seed)},
                           {"status", to_string(x.status)},
                           {"shape", x.shape.describe()},
                           {"diameter", io::num(x.diameter)},
                           {"precompact", x.precompact}});
    j["estimates"] = std::move(est);
    j["unconverged"] = b.unconverged;
    emit(r.out / "catalog.json", j);
    return 0;
}

GridSpec grid_over(const DomainRegion& d, std::size_t res) {
    auto box = detail::finite_box(d);
    return GridSpec{box, std::vector<std::size_t>(box.size(), res)};
}

int cmd_basins(const Run& r, std::size_t res, bool witnesses) {
    auto e = entry_of(r);
    auto region = domain_or(r, e.sample_domain);
    auto grid = grid_over(region, res);
    grid.validate();
    const auto& map = e.system;
    auto seeds = default_seeds(e, map.domain(), 0);
    for (auto& p : detail::grid_points(region, 9, 0.0))
        if (map.domain().contains(p)) seeds.push_back(std::move(p));
    auto b = build_catalog(map, seeds, r.cfg, LimitSource::omega, r.threads);
    auto basins = compute_basins(map, grid, b.catalog, r.cfg, r.threads);
    std::ostringstream os;
    write_basins_csv(os, basins);
    write_text(r.out / "basins.csv", os.str());
    std::cout << (r.out / "basins.csv").string() << "\n";

    Json j = run_header("basins", r, e);
    Json bounds = Json::array();
    for (auto [lo, hi] : grid.bounds) bounds.push_back(Json::array({lo, hi}));
    j["grid"] = Json{{"bounds", bounds}, {"resolution", grid.resolution}};
    j["members"] = io::catalog(b.catalog);
    std::map<std::string, std::size_t> counts;
    for (int l : basins.labels) ++counts[basins.label_name(l)];
    Json jc = Json::object();
    for (const auto& [k, v] : counts) jc[k] = v;
    j["counts"] = jc;
    if (witnesses) {
        Json jw = Json::array();
        for (const auto& w : basin_closedness_witness(map, basins, b.catalog, r.cfg))
            jw.push_back(Json{{"sequence_seed", io::point(w.sequence_seed)},
                              {"limit_point", io::point(w.limit_point)},
                              {"sequence_label", w.sequence_label},
                              {"limit_label", w.limit_label},
                              {"depth", w.depth}});
        j["witnesses"] = jw;
    }
    emit(r.out / "basins.json", j);
    return 0;
}

DictionarySpec parse_dict(const std::string& text, std::size_t dim, bool constant, double pole) {
    auto colon = text.find(':');
    std::string kind = text.substr(0, colon);
    DictionarySpec s;
    s.dim_in = dim;
    s.include_constant = constant;
    s.pole = pole;
    if (kind == "monomial") s.kind = DictionaryKind::monomial;
    else if (kind == "fourier") s.kind = DictionaryKind::fourier;
    else if (kind == "rational-pole") s.kind = DictionaryKind::rational_pole;
    else throw ValidationError("bad_dictionary", "unknown dictionary kind '" + kind + "' (monomial, fourier, rational-pole)");
    if (colon != std::string::npos) {
        auto [k, v] = key_value("order=" + text.substr(colon + 1), "--dict");
        (void)k;
        if (!(v >= 1 && v == std::floor(v))) throw ValidationError("bad_dictionary", "dictionary order must be a positive integer");
        s.order = static_cast<std::size_t>(v);
    }
    return s;
}

/// "fourier:1..8" or a single "fourier:3".
std::vector<DictionarySpec> parse_dict_family(const std::string& text, std::size_t dim, bool constant, double pole) {
    std::vector<DictionarySpec> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_dict(item, dim, constant, pole));
            continue;
        }
        auto colon = item.find(':');
        if (colon == std::string::npos || colon > dots) throw ValidationError("bad_dictionary", "bad dictionary range '" + item + "'");
        auto lo = parse_dict(item.substr(0, dots), dim, constant, pole).order;
        auto hi = parse_dict(item.substr(0, colon + 1) + item.substr(dots + 2), dim, constant, pole).order;
        for (auto o = lo; o <= hi; ++o) out.push_back(parse_dict(item.substr(0, colon + 1) + std::to_string(o), dim, constant, pole));
    }
    if (out.empty()) throw ValidationError("bad_dictionary", "no dictionaries given");
    return out;
}

std::vector<double> parse_reals(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(key_value("x=" + item, "--ridges").second);
    return out;
}

std::pair<LearnedLift, Json> read_lift(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw ValidationError("missing_artifact", "cannot read lift file " + p.string());
    Json j;
    try {
        j = Json::parse(is);
        const auto& d = j.at("dictionary");
        DictionarySpec s;
        std::string kind = d.at("kind");
        s = parse_dict(kind + ":" + std::to_string(d.at("order").get<std::size_t>()), d.at("dim_in"), d.at("include_constant"),
                       d.value("pole", 1.0));
        const auto& k = j.at("K");
        Eigen::Index n = k.at("rows"), m = k.at("cols");
        Eigen::MatrixXd K(n, m);
        for (Eigen::Index c = 0; c < m; ++c)
            for (Eigen::Index rr = 0; rr < n; ++rr) K(rr, c) = k.at("data").at(static_cast<std::size_t>(c * n + rr)).get<double>();
        auto dict = build_dictionary(s);
        if (static_cast<Eigen::Index>(dict.dim_out()) != n || n != m) throw ValidationError("bad_lift", "K does not match the dictionary");
        return {LearnedLift{dict, K, io::parse_domain(j.at("training_domain").get<std::string>()), j.at("ridge")}, j};
    } catch (const Json::exception& ex) {
        throw ValidationError("bad_lift", std::string("malformed lift file: ") + ex.what());
    }
}

int cmd_verify(const Run& r, const std::string& which, const std::string& lift_path, std::size_t samples) {
    auto e = entry_of(r);
    const DiscreteMap& f = e.system;
    std::optional<ImmersionMap> F;
    std::optional<DiscreteMap> g;
    DomainRegion region = e.sample_domain;
    if (which == "exact") {
        if (!e.exact_immersion) throw ValidationError("no_exact_immersion", "system '" + e.name + "' has no exact immersion");
        F = *e.exact_immersion;
        g = *e.lifted_target;
    } else if (which == "learned") {
        if (lift_path.empty()) throw ValidationError("missing_argument", "--immersion learned needs --lift <file>");
        auto [lift, raw] = read_lift(lift_path);
        if (lift.dictionary.dim_in() != f.dim()) throw ValidationError("dim_mismatch", "lift does not match the system dimension");
        F = lift.as_immersion(f.domain());
        g = lift.target_map();
        region = lift.training_domain;
    } else {
        throw ValidationError("bad_argument", "--immersion must be exact or learned");
    }
    if (!r.common.domain.empty()) {
        region = domain_or(r, region);
        F = F->restricted(region);
    }
    auto pts = detail::grid_points(region, samples, 0.0);
    for (const auto& x : pts) {
        try {
            (*F)(x);
        } catch (const DomainError& err) {
            throw NumericError("immersion_undefined", "immersion_undefined_at=" + format_point(err.at()));
        }
    }
    auto conj = conjugacy_residual(*F, f, *g, pts);
    auto seeds = default_seeds(e, region, 9);
    auto cat = build_catalog(f, seeds, r.cfg, LimitSource::omega, r.threads).catalog;
    auto probes = detail::grid_points(region, std::min(samples, r.cfg.probe_samples), 0.0);

    Json j = run_header("verify", r, e);
    j["immersion"] = which == "exact" ? e.immersion_formula : lift_path;
    j["domain"] = region.describe();
    j["conjugacy"] = io::conjugacy(conj);
    j["collapse"] = io::collapse(collapse_report(*F, cat, pts, r.cfg.tol_cluster));
    j["injectivity"] = io::injectivity(injectivity_probe(*F, probes, r.cfg.delta_sep, r.cfg.delta_img));
    emit(r.out / "verify.json", j);
    return 0;
}

int cmd_learn(const Run& r, const std::string& dict_text, bool constant, double pole, double ridge) {
    auto e = entry_of(r);
    auto region = domain_or(r, e.sample_domain);
    auto dict = build_dictionary(parse_dict(dict_text, e.system.dim(), constant, pole));
    auto pts = training_points(region, r.cfg.train_grid, r.cfg.train_random, r.seed);
    auto [lift, fit] = fit_lift(sample_pairs(e.system, dict, pts), dict, ridge, region);
    Json j = run_header("lift", r, e);
    j["seed"] = r.seed;
    j.update(io::lift(lift, fit));
    emit(r.out / "lift.json", j);
    return 0;
}

int cmd_sweep(const Run& r, const std::string& dicts, const std::string& ridges, bool constant, double pole,
              std::size_t catalog_seeds) {
    auto e = entry_of(r);
    auto region = domain_or(r, e.sample_domain);
    auto family = parse_dict_family(dicts, e.system.dim(), constant, pole);
    auto seeds = default_seeds(e, region, catalog_seeds);
    auto cat = build_catalog(e.system, seeds, r.cfg, LimitSource::omega, r.threads).catalog;
    auto rep = obstruction_sweep(e.system, region, family, parse_reals(ridges), cat, SweepOptions{r.cfg, r.seed, r.threads});
    std::ostringstream os;
    io::write_sweep_csv(os, rep);
    write_text(r.out / "sweep.csv", os.str());
    std::cout << (r.out / "sweep.csv").string() << "\n";
    Json j = run_header("sweep", r, e);
    j.update(io::sweep(rep));
    emit(r.out / "sweep.json", j);
    return 0;
}

int cmd_spectrum(const Run& r, const std::string& x0s) {
    auto e = entry_of(r);
    if (e.name != "scalar-linear" && e.name != "jordan")
        throw ValidationError("not_linear", "spectrum needs a linear system (scalar-linear, jordan)");
    Eigen::MatrixXd A(e.system.dim(), e.system.dim());
    for (std::size_t c = 0; c < e.system.dim(); ++c) {
        std::vector<double> u(e.system.dim(), 0.0);
        u[c] = 1.0;
        auto col = e.system.evaluate(StatePoint(u));
        for (std::size_t i = 0; i < col.dim(); ++i) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = col[i];
    }
    LinearSystem sys(A);
    Json j = run_header("spectrum", r, e);
    j["matrix"] = io::matrix(A);
    j.update(io::split(spectral_split(sys, r.cfg.tol_eig, r.cfg.tol_rank)));
    StatePoint x0 = x0s.empty() ? e.seeds.front() : io::parse_point(x0s);
    auto gc = classify_growth(sys, x0, r.cfg);
    j["growth"] = Json{{"x0", io::point(x0)},
                       {"verdict", to_string(gc.verdict)},
                       {"alpha", io::num(gc.alpha)},
                       {"degree", gc.degree},
                       {"c_empirical", io::num(gc.c_empirical)}};
    emit(r.out / "spectrum.json", j);
    return 0;
}

int cmd_catalog(const Run& r) {
    emit(r.out / "catalog_manifest.json", io::manifest());
    return 0;
}

// ---- demo ----

struct Check {
    std::string example, name;
    double value, threshold;
    bool passed;
    std::string detail;
};

Json check_json(const Check& c) {
    return Json{{"example", c.example},
                {"check", c.name},
                {"value", io::num(c.value)},
                {"threshold", io::num(c.threshold)},
                {"passed", c.passed},
                {"detail", c.detail}};
}

int cmd_demo(const Run& r) {
    std::vector<Check> checks;
    auto below = [&](std::string ex, std::string name, double v, double thr, std::string detail = "") {
        checks.push_back({std::move(ex), std::move(name), v, thr, std::isfinite(v) && v < thr, std::move(detail)});
    };
    auto flag = [&](std::string ex, std::string name, bool ok, std::string detail) {
        checks.push_back({std::move(ex), std::move(name), ok ? 1.0 : 0.0, 1.0, ok, std::move(detail)});
    };
    const Tolerances& cfg = r.cfg;

    // Moebius map and its lift onto z/2.
    auto mob = get_system("mobius", {}, cfg);
    {
        auto pts = detail::grid_points(DomainRegion::interval(-5.0, 0.5), 1000, 0.0);
        below("mobius", "conjugacy_max_residual", conjugacy_residual(*mob.exact_immersion, mob.system, *mob.lifted_target, pts).max_residual, 1e-12);
        auto t = iterate(mob.system, StatePoint({0.0}), 40, cfg.r_div);
        double err = 0.0;
        for (std::size_t k = 0; k < t.points.size(); ++k) {
            double p = std::ldexp(1.0, static_cast<int>(k));
            err = std::max(err, std::abs(t.points[k][0] + (p - 1.0) / (p + 1.0)));
        }
        below("mobius", "closed_form_error", err, 1e-12);
        std::ostringstream os;
        write_trajectory_csv(os, t);
        write_text(r.out / "mobius_trajectory.csv", os.str());

        auto b = build_catalog(mob.system, mob.seeds, cfg, LimitSource::omega, r.threads);
        flag("mobius", "two_limit_sets", b.catalog.size() == 2, std::to_string(b.catalog.size()) + " members");
        GridSpec grid{{{-2.0, 2.0}}, {401}};
        auto basins = compute_basins(mob.system, grid, b.catalog, cfg, r.threads);
        std::ostringstream bs;
        write_basins_csv(bs, basins);
        write_text(r.out / "mobius_basins.csv", bs.str());
        std::size_t at_one = 300, wrong = 0;
        int one = -1, minus_one = -1;
        for (std::size_t m = 0; m < b.catalog.size(); ++m) {
            if (distance_to_cloud(StatePoint({1.0}), b.catalog[m].points) < cfg.tol_cluster) one = static_cast<int>(m);
            if (distance_to_cloud(StatePoint({-1.0}), b.catalog[m].points) < cfg.tol_cluster) minus_one = static_cast<int>(m);
        }
        for (std::size_t i = 0; i < basins.labels.size(); ++i) {
            int l = basins.labels[i];
            if (i == at_one ? l != one : (l != minus_one && l != cell::singular)) ++wrong;
        }
        flag("mobius", "basins_401", wrong == 0 && one >= 0 && minus_one >= 0, std::to_string(wrong) + " mislabeled nodes");
    }

    // The inverse Moebius map.
    {
        auto inv = get_system("mobius-inverse", {}, cfg);
        auto pts = detail::grid_points(DomainRegion::interval(-0.5, 10.0), 1000, 0.0);
        below("mobius-inverse", "conjugacy_max_residual", conjugacy_residual(*inv.exact_immersion, inv.system, *inv.lifted_target, pts).max_residual, 1e-12);
        auto on = mob.system.restricted(DomainRegion::interval(-1.0, DomainRegion::inf).excluding(StatePoint({-1.0}), cfg.eps_excl));
        auto a = estimate_alpha(on, StatePoint({0.0}), cfg);
        double d = a.converged ? hausdorff(a.points, Cloud{StatePoint({1.0})}) : std::numeric_limits<double>::infinity();
        below("mobius-inverse", "alpha_limit_distance_to_1", d, 1e-6);
    }

    // Cot map and its immersion into the Moebius map.
    {
        auto cot = get_system("cot-map", {}, cfg);
        auto pts = detail::grid_points(DomainRegion::interval(0.05, std::numbers::pi - 0.05), 1000, 0.0);
        below("cot-map", "conjugacy_max_residual", conjugacy_residual(*cot.exact_immersion, cot.system, *cot.lifted_target, pts).max_residual, 1e-9);
        const auto& target = *cot.lifted_target;
        auto b = build_catalog(target, {StatePoint({0.0}), StatePoint({1.0})}, cfg, LimitSource::omega, r.threads);
        auto basins = compute_basins(target, GridSpec{{{-1.0, 1.0}}, {201}}, b.catalog, cfg, r.threads);
        auto w = basin_closedness_witness(target, basins, b.catalog, cfg);
        std::string detail = w.empty() ? "none" : "x_j -> " + format_point(w.front().limit_point.coords()) + ", " +
                                                        w.front().sequence_label + " vs " + w.front().limit_label;
        flag("cot-map", "target_basin_not_closed", !w.empty(), detail);
        std::ostringstream sw;
        std::vector<DictionarySpec> fam;
        for (std::size_t o = 1; o <= 4; ++o) fam.push_back(DictionarySpec{DictionaryKind::fourier, 1, o, 1.0, true, {}});
        auto cotcat = build_catalog(cot.system, cot.seeds, cfg, LimitSource::omega, r.threads).catalog;
        auto rep = obstruction_sweep(cot.system, cot.valid_domain, fam, {1e-8}, cotcat, SweepOptions{cfg, r.seed, r.threads});
        io::write_sweep_csv(sw, rep);
        write_text(r.out / "cot_sweep.csv", sw.str());
    }

    // Rotation-scaling.
    {
        auto rs = get_system("rotation-scaling", {}, cfg);
        std::vector<StatePoint> pts;
        const std::size_t nr = 100, nt = 100;
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t k = 0; k < nt; ++k) {
                double rad = 0.1 * std::pow(100.0, static_cast<double>(i) / static_cast<double>(nr - 1));
                double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(nt);
                pts.push_back(StatePoint({rad * std::cos(th), rad * std::sin(th)}));
            }
        below("rotation-scaling", "conjugacy_max_residual", conjugacy_residual(*rs.exact_immersion, rs.system, *rs.lifted_target, pts).max_residual, 1e-9);
        Tolerances long_tail = cfg;
        long_tail.tail = 10000;
        auto est = estimate_omega(rs.system, StatePoint({2.0, 0.0}), long_tail);
        below("rotation-scaling", "omega_distance_to_circle", hausdorff(est.points, rs.known_limit_sets[1].points), 1e-2);
        auto probes = detail::grid_points(rs.sample_domain, cfg.probe_samples, 0.0);
        auto inj = injectivity_probe(*rs.exact_immersion, probes, cfg.delta_sep, cfg.delta_img);
        flag("rotation-scaling", "no_collisions", inj.collision_count == 0, std::to_string(inj.collision_count) + " collisions");
        auto cat = build_catalog(rs.system, rs.seeds, cfg, LimitSource::omega, r.threads).catalog;
        std::string detail = "no failure";
        bool raised = false;
        try {
            collapse_report(*rs.exact_immersion, cat, probes, cfg.tol_cluster);
        } catch (const DomainError& err) {
            raised = true;
            detail = std::string(to_string(err.fault())) + " at " + format_point(err.at());
        }
        flag("rotation-scaling", "collapse_undefined_at_origin", raised, detail);
        int idx = 0;
        for (auto x0 : {StatePoint({2.0, 0.0}), StatePoint({0.05, 0.0}), StatePoint({-1.5, 1.5}), StatePoint({0.0, -0.3})}) {
            std::ostringstream os;
            write_trajectory_csv(os, iterate(rs.system, x0, 60, cfg.r_div));
            write_text(r.out / ("rotation_trajectory_" + std::to_string(idx++) + ".csv"), os.str());
        }
    }

    bool all = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
    Json j = io::header("summary");
    j["seed"] = r.seed;
    Json jc = Json::array();
    for (const auto& c : checks) jc.push_back(check_json(c));
    j["checks"] = std::move(jc);
    j["all_passed"] = all;
    emit(r.out / "summary.json", j);
    return all ? 0 : 3;
}

// ---- render ----

struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> comments;
};

Csv read_csv(const fs::path& p) {
    std::ifstream is(p);
    if (!is) throw ValidationError("missing_artifact", "cannot read " + p.string());
    Csv c;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            c.comments.push_back(line);
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (c.header.empty()) c.header = std::move(cells);
        else c.rows.push_back(std::move(cells));
    }
    return c;
}

void render_basins(const fs::path& in, const fs::path& out, std::ostream& text) {
    auto c = read_csv(in);
    std::size_t dim = c.header.size() - 1;
    if (dim < 1 || dim > 2) throw ValidationError("bad_artifact", "basin raster needs a 1-d or 2-d grid");
    std::size_t ni = 0, nj = 1;
    std::map<std::string, std::size_t> ids;
    for (const auto& row : c.rows) {
        ni = std::max<std::size_t>(ni, std::stoul(row[0]) + 1);
        if (dim == 2) nj = std::max<std::size_t>(nj, std::stoul(row[1]) + 1);
        ids.emplace(row[dim], 0);
    }
    std::size_t k = 0;
    for (auto& [name, id] : ids) id = k++;
    static const int palette[][3] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40}, {148, 103, 189},
                                     {140, 86, 75},  {227, 119, 194}, {127, 127, 127}, {188, 189, 34}, {23, 190, 207}};
    std::vector<std::size_t> raster(ni * nj, 0);
    for (const auto& row : c.rows) {
        std::size_t i = std::stoul(row[0]), j = dim == 2 ? std::stoul(row[1]) : 0;
        raster[j * ni + i] = ids[row[dim]];
    }
    std::ostringstream ppm;
    ppm << "P3\n" << ni << " " << nj << "\n255\n";
    for (std::size_t j = nj; j-- > 0;) {
        for (std::size_t i = 0; i < ni; ++i) {
            const int* col = palette[raster[j * ni + i] % 10];
            ppm << col[0] << " " << col[1] << " " << col[2] << (i + 1 == ni ? "\n" : " ");
        }
    }
    write_text(out / (in.stem().string() + ".ppm"), ppm.str());
    std::ostringstream dat;
    for (const auto& row : c.rows) {
        for (std::size_t a = 0; a < dim; ++a) dat << row[a] << " ";
        dat << ids[row[dim]] << "\n";
    }
    write_text(out / (in.stem().string() + ".dat"), dat.str());
    text << in.filename().string() << ": " << ni << (dim == 2 ? "x" + std::to_string(nj) : "") << " nodes\n";
    std::map<std::string, std::size_t> counts;
    for (const auto& row : c.rows) ++counts[row[dim]];
    for (const auto& [name, n] : counts) text << "  " << name << "  " << n << "  (color " << ids[name] % 10 << ")\n";
}

void render_trajectory(const fs::path& in, const fs::path& out, std::ostream& text) {
    auto c = read_csv(in);
    std::ostringstream dat;
    for (const auto& row : c.rows) {
        for (std::size_t a = 1; a < row.size(); ++a) dat << row[a] << (a + 1 == row.size() ? "\n" : " ");
    }
    write_text(out / (in.stem().string() + ".dat"), dat.str());
    text << in.filename().string() << ": " << c.rows.size() << " points";
    if (!c.comments.empty()) text << ", " << c.comments.back().substr(2);
    text << "\n";
    if (!c.rows.empty()) {
        text << "  first";
        for (std::size_t a = 1; a < c.rows.front().size(); ++a) text << " " << c.rows.front()[a];
        text << "\n  last ";
        for (std::size_t a = 1; a < c.rows.back().size(); ++a) text << " " << c.rows.back()[a];
        text << "\n";
    }
}

void render_sweep(const fs::path& in, const fs::path& out, std::ostream& text) {
    auto c = read_csv(in);
    std::ostringstream dat;
    dat << "# residual_heldout collapse_ratio dict_size ridge\n";
    text << in.filename().string() << ":\n";
    text << "  kind           size  ridge       residual      collapse      min_sep\n";
    for (const auto& row : c.rows) {
        if (row.size() < 6) throw ValidationError("bad_artifact", "sweep CSV row has too few columns");
        dat << row[3] << " " << row[4] << " " << row[1] << " " << row[2] << "\n";
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-14s %4s  %-10s  %-12.6g  %-12.6g  %-12.6g\n", row[0].c_str(), row[1].c_str(), row[2].c_str(),
                      std::strtod(row[3].c_str(), nullptr), std::strtod(row[4].c_str(), nullptr), std::strtod(row[5].c_str(), nullptr));
        text << buf;
    }
    write_text(out / (in.stem().string() + ".dat"), dat.str());
}

int cmd_render(const Run& r, const std::vector<std::string>& inputs, const std::string& in_dir) {
    std::vector<fs::path> files;
    for (const auto& s : inputs) {
        if (!fs::exists(s)) throw ValidationError("missing_artifact", "artifact not found: " + s);
        files.emplace_back(s);
    }
    if (!in_dir.empty()) {
        if (!fs::is_directory(in_dir)) throw ValidationError("missing_artifact", "not a directory: " + in_dir);
        std::vector<fs::path> found;
        for (const auto& de : fs::directory_iterator(in_dir))
            if (de.path().extension() == ".csv") found.push_back(de.path());
        std::sort(found.begin(), found.end());
        files.insert(files.end(), found.begin(), found.end());
    }
    if (files.empty()) throw ValidationError("missing_artifact", "no artifacts to render");
    std::ostringstream text;
    for (const auto& f : files) {
        auto c = read_csv(f);
        if (c.header.empty()) throw ValidationError("bad_artifact", "empty CSV " + f.string());
        if (c.header.back() == "label") render_basins(f, r.out, text);
        else if (c.header.front() == "k") render_trajectory(f, r.out, text);
        else if (c.header.front() == "dict_kind") render_sweep(f, r.out, text);
        else throw ValidationError("bad_artifact", "unrecognized CSV " + f.string());
    }
    write_text(r.out / "report.txt", text.str());
    std::cout << text.str();
    return 0;
}

void error_out(const Error& e, int code) {
    Json j{{"error", e.code()}, {"message", e.what()}, {"exit_code", code}};
    if (auto* d = dynamic_cast<const DomainError*>(&e)) {
        j["fault"] = to_string(d->fault());
        j["at"] = io::point(d->at());
    }
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"limitlab: limit sets, basins and immersions of discrete-time maps"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "limitlab 1.0.0");

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--system", common.system, "catalog system name");
        sub->add_option("--param", common.params, "system parameter name=value (repeatable)");
        sub->add_option("--domain", common.domain, "domain, e.g. \"[-1,1]\" or \"[-2,2]x[-2,2]\"");
        sub->add_option("--seed", common.seed, "64-bit RNG seed (default 42, or LIMITLAB_SEED)")->each([&](const std::string&) { common.seed_given = true; });
        sub->add_option("--out", common.out, "output directory")->capture_default_str();
        sub->add_option("--threads", common.threads, "worker threads (0 = all cores)");
        sub->add_option("--set", common.sets, "tolerance override name=value (repeatable)");
    };

    std::string x0;
    std::size_t steps = 100, grid = 101, samples = 1000, catalog_seeds = 129, seed_grid = 9;
    bool backward = false, alpha = false, witnesses = false, constant = false;
    std::string seeds, immersion = "exact", lift_path, dict = "monomial:3", dicts = "fourier:1..8", ridges = "0,1e-8,1e-4";
    std::string in_dir;
    std::vector<std::string> inputs;
    double pole = 1.0, ridge = 0.0;

    auto* sim = app.add_subcommand("simulate", "iterate a system and write trajectory.csv");
    add_common(sim);
    sim->add_option("--x0", x0, "initial point, e.g. \"(2,0)\"");
    sim->add_option("--steps", steps, "number of steps")->capture_default_str();
    sim->add_flag("--backward", backward, "iterate the inverse map");

    auto* lim = app.add_subcommand("limits", "estimate and cluster limit sets into catalog.json");
    add_common(lim);
    lim->add_option("--seeds", seeds, "seed points separated by ';'");
    lim->add_option("--seed-grid", seed_grid, "grid seeds added over the sampling domain")->capture_default_str();
    lim->add_flag("--alpha", alpha, "alpha-limit sets instead of omega-limit sets");

    auto* bas = app.add_subcommand("basins", "label grid nodes by limit set into basins.csv");
    add_common(bas);
    bas->add_option("--grid", grid, "nodes per axis")->capture_default_str();
    bas->add_flag("--witnesses", witnesses, "search for non-closed basins");

    auto* ver = app.add_subcommand("verify", "check an immersion and write verify.json");
    add_common(ver);
    ver->add_option("--immersion", immersion, "exact or learned")->capture_default_str();
    ver->add_option("--lift", lift_path, "lift.json for --immersion learned");
    ver->add_option("--samples", samples, "sample count")->capture_default_str();

    auto* lrn = app.add_subcommand("learn", "fit a dictionary lift and write lift.json");
    add_common(lrn);
    lrn->add_option("--dict", dict, "kind:order with kind monomial, fourier or rational-pole")->capture_default_str();
    lrn->add_flag("--constant", constant, "prepend the constant feature");
    lrn->add_option("--pole", pole, "pole of the rational-pole dictionary")->capture_default_str();
    lrn->add_option("--ridge", ridge, "ridge penalty")->capture_default_str();

    auto* swp = app.add_subcommand("sweep", "dictionary and ridge sweep into sweep.csv and sweep.json");
    add_common(swp);
    swp->add_option("--dicts", dicts, "comma list of kind:order or kind:lo..hi")->capture_default_str();
    swp->add_option("--ridges", ridges, "comma list of ridge values")->capture_default_str();
    swp->add_flag("--constant", constant, "prepend the constant feature");
    swp->add_option("--pole", pole, "pole of rational-pole dictionaries")->capture_default_str();
    swp->add_option("--catalog-seeds", catalog_seeds, "grid seeds used to build the limit-set catalog")->capture_default_str();

    auto* spe = app.add_subcommand("spectrum", "spectral split and growth class of a linear system");
    add_common(spe);
    spe->add_option("--x0", x0, "initial condition for the growth class");

    auto* demo = app.add_subcommand("demo", "run the four worked examples and write summary.json");
    add_common(demo);

    auto* ren = app.add_subcommand("render", "turn CSV artifacts into text tables and plot data");
    add_common(ren);
    ren->add_option("--in", in_dir, "directory of artifacts");
    ren->add_option("files", inputs, "artifact files");

    auto* cat = app.add_subcommand("catalog", "write the system manifest");
    add_common(cat);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        Json j{{"error", "bad_arguments"}, {"message", e.what()}, {"exit_code", 2}};
        std::cerr << j.dump() << "\n";
        return 2;
    }

    try {
        Run r = resolve(common);
        if (*sim) return cmd_simulate(r, x0, steps, backward);
        if (*lim) return cmd_limits(r, seeds, alpha, seed_grid);
        if (*bas) return cmd_basins(r, grid, witnesses);
        if (*ver) return cmd_verify(r, immersion, lift_path, samples);
        if (*lrn) return cmd_learn(r, dict, constant, pole, ridge);
        if (*swp) return cmd_sweep(r, dicts, ridges, constant, pole, catalog_seeds);
        if (*spe) return cmd_spectrum(r, x0);
        if (*demo) return cmd_demo(r);
        if (*ren) return cmd_render(r, inputs, in_dir);
        if (*cat) return cmd_catalog(r);
    } catch (const ValidationError& e) {
        error_out(e, 2);
        return 2;
    } catch (const NumericError& e) {
        error_out(e, 3);
        return 3;
    } catch (const std::exception& e) {
        Json j{{"error", "internal"}, {"message", e.what()}, {"exit_code", 1}};
        std::cerr << j.dump() << "\n";
        return 1;
    }
    return 2;
}
