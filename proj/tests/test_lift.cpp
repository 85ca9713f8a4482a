#include <gtest/gtest.h>

#include <complex>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>

#include "limitlab/catalog.hpp"
#include "limitlab/lift.hpp"
#include "test_util.hpp"

using namespace limitlab;

namespace {

DictionarySpec spec(DictionaryKind k, std::size_t order, bool constant, std::size_t dim_in = 1) {
    DictionarySpec s;
    s.kind = k;
    s.order = order;
    s.include_constant = constant;
    s.dim_in = dim_in;
    return s;
}

std::vector<std::complex<double>> sorted_eigs(const Eigen::MatrixXd& k) {
    Eigen::VectorXcd ev = k.eigenvalues();
    std::vector<std::complex<double>> v(ev.data(), ev.data() + ev.size());
    std::sort(v.begin(), v.end(), [](auto a, auto b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
    return v;
}

std::pair<LearnedLift, FitReport> fit_on(const DiscreteMap& f, const Dictionary& d, const DomainRegion& dom, double ridge,
                                         std::uint64_t seed = 1) {
    return fit_lift(sample_pairs(f, d, training_points(dom, 512, 512, seed)), d, ridge, dom);
}

Dictionary rotation_scaling_lift_dictionary() {
    DictionarySpec s;
    s.kind = DictionaryKind::custom;
    s.dim_in = 2;
    s.custom = {{"x1/r", [](std::span<const double> x) { return x[0] / std::hypot(x[0], x[1]); }},
                {"x2/r", [](std::span<const double> x) { return x[1] / std::hypot(x[0], x[1]); }},
                {"(r-1)/r", [](std::span<const double> x) {
                     double r = std::hypot(x[0], x[1]);
                     return (r - 1.0) / r;
                 }}};
    return build_dictionary(s);
}

DomainRegion mobius_control_domain() { return DomainRegion::interval(-0.9, 0.5); }

}  // namespace

TEST(Dictionary, MonomialWithConstant) {
    auto d = build_dictionary(spec(DictionaryKind::monomial, 2, true));
    EXPECT_EQ(d.names(), (std::vector<std::string>{"1", "x", "x^2"}));
    EXPECT_EQ(d.dim_out(), 3u);
    EXPECT_EQ(d(std::vector<double>{3.0}), (std::vector<double>{1.0, 3.0, 9.0}));
}

TEST(Dictionary, FourierOrdering) {
    auto d = build_dictionary(spec(DictionaryKind::fourier, 2, false));
    EXPECT_EQ(d.names(), (std::vector<std::string>{"cos(x)", "sin(x)", "cos(2x)", "sin(2x)"}));
    auto v = d(std::vector<double>{0.5});
    EXPECT_EQ(v[2], std::cos(1.0));
    EXPECT_EQ(v[3], std::sin(1.0));
}

TEST(Dictionary, RationalPoleContainsExactLift) {
    auto d = build_dictionary(spec(DictionaryKind::rational_pole, 2, false));
    ASSERT_EQ(d.dim_out(), 2u);
    EXPECT_EQ(d(std::vector<double>{0.0})[0], -1.0);
    EXPECT_EQ(d(std::vector<double>{3.0})[0], 2.0);
    EXPECT_EQ(d(std::vector<double>{3.0})[1], 4.0);
}

TEST(Dictionary, MultivariateMonomialsByDegree) {
    auto d = build_dictionary(spec(DictionaryKind::monomial, 2, true, 2));
    EXPECT_EQ(d.names(), (std::vector<std::string>{"1", "x1", "x2", "x1^2", "x1*x2", "x2^2"}));
}

TEST(Dictionary, Rejections) {
    EXPECT_THROW(build_dictionary(spec(DictionaryKind::monomial, 33, false)), ValidationError);
    EXPECT_THROW(build_dictionary(spec(DictionaryKind::fourier, 33, true)), ValidationError);
    EXPECT_THROW(build_dictionary(spec(DictionaryKind::monomial, 0, false)), ValidationError);
    EXPECT_THROW(build_dictionary(spec(DictionaryKind::rational_pole, 2, false, 2)), ValidationError);
    auto zero_pole = spec(DictionaryKind::rational_pole, 1, false);
    zero_pole.pole = 0.0;
    EXPECT_THROW(build_dictionary(zero_pole), ValidationError);
    EXPECT_NO_THROW(build_dictionary(spec(DictionaryKind::fourier, 32, true)));
}

TEST(Dictionary, ImmersionViewUsesDomain) {
    auto d = build_dictionary(spec(DictionaryKind::rational_pole, 1, true));
    auto F = d.as_immersion(DomainRegion::interval(-1.0, 0.5));
    EXPECT_EQ(F.dim_out(), 2u);
    EXPECT_THROW(F(StatePoint({1.0})), DomainError);
}

TEST(FitLift, MobiusExactLift) {
    auto f = get_system("mobius").system;
    auto d = build_dictionary(spec(DictionaryKind::rational_pole, 1, true));
    auto dom = DomainRegion::interval(-0.5, 0.5);
    auto [lift, fit] = fit_on(f, d, dom, 0.0);
    EXPECT_LT(fit.train_residual, 1e-12);
    EXPECT_GE(fit.gram_condition, 1.0);
    auto ev = sorted_eigs(lift.K);
    EXPECT_NEAR(ev[0].real(), 0.5, 1e-9);
    EXPECT_NEAR(ev[1].real(), 1.0, 1e-9);
    EXPECT_NEAR(std::abs(ev[0].imag()) + std::abs(ev[1].imag()), 0.0, 1e-9);
}

TEST(FitLift, IdentityMapGivesIdentityK) {
    DiscreteMap id("identity", 1, [](std::span<const double> x, std::span<double> y) { y[0] = x[0]; }, std::nullopt,
                   DomainRegion::full_space(1));
    for (auto s : {spec(DictionaryKind::monomial, 3, true), spec(DictionaryKind::fourier, 2, false)}) {
        auto d = build_dictionary(s);
        auto [lift, fit] = fit_on(id, d, DomainRegion::interval(-1.0, 1.0), 0.0);
        EXPECT_TRUE(lift.K.isApprox(Eigen::MatrixXd::Identity(lift.K.rows(), lift.K.cols()), 1e-9)) << lift.K;
    }
}

TEST(FitLift, CotCosineAloneIsNotLinear) {
    auto f = get_system("cot-map").system;
    auto d = build_dictionary(spec(DictionaryKind::fourier, 1, false));
    auto [lift, fit] = fit_on(f, d, DomainRegion::interval(0.1, std::numbers::pi - 0.1), 1e-8);
    EXPECT_GT(fit.train_residual, 1e-3);
}

TEST(FitLift, Errors) {
    auto f = get_system("mobius").system;
    auto d = build_dictionary(spec(DictionaryKind::monomial, 3, true));
    auto pairs = sample_pairs(f, d, training_points(DomainRegion::interval(-0.5, 0.5), 3, 0, 1));
    EXPECT_THROW(fit_lift(pairs, d, 0.0, DomainRegion::interval(-0.5, 0.5)), ValidationError);
    auto more = sample_pairs(f, d, training_points(DomainRegion::interval(-0.5, 0.5), 64, 0, 1));
    EXPECT_THROW(fit_lift(more, d, -1.0, DomainRegion::interval(-0.5, 0.5)), ValidationError);
    EXPECT_THROW(fit_lift({{StatePoint({1.0}), StatePoint({1.0})}, {StatePoint({0.0}), StatePoint({-1.0 / 3.0})}},
                          build_dictionary(spec(DictionaryKind::rational_pole, 1, false)), 0.0, DomainRegion::full_space(1)),
                 ValidationError);
}

TEST(FitLift, SingularGramWithoutRidge) {
    std::vector<SamplePair> same(10, SamplePair{StatePoint({0.3}), StatePoint({0.3})});
    auto d = build_dictionary(spec(DictionaryKind::monomial, 2, true));
    try {
        fit_lift(same, d, 0.0, DomainRegion::full_space(1));
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_EQ(e.code(), "singular_gram");
    }
    auto [lift, fit] = fit_lift(same, d, 1e-6, DomainRegion::full_space(1));
    EXPECT_TRUE(lift.K.allFinite());
    EXPECT_TRUE(fit.orthogonal);
}

TEST(FitLift, RidgeMonotonicity) {
    auto f = get_system("cot-map").system;
    for (std::size_t order : {1u, 3u, 6u}) {
        auto d = build_dictionary(spec(DictionaryKind::fourier, order, true));
        auto pairs = sample_pairs(f, d, training_points(f.domain(), 512, 512, 7));
        double prev = 0.0;
        for (double r : {0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0, 100.0}) {
            double res = fit_lift(pairs, d, r, f.domain()).second.train_residual;
            EXPECT_GE(res, prev * (1.0 - 1e-12)) << "order " << order << " ridge " << r;
            prev = res;
        }
    }
}

TEST(FitLift, RecoversMobiusSpectrum) {
    auto e = get_system("mobius");
    auto d = build_dictionary(spec(DictionaryKind::rational_pole, 1, false));
    auto dom = DomainRegion::interval(-5.0, 0.5);
    auto [lift, fit] = fit_on(e.system, d, dom, 0.0);
    EXPECT_LT(fit.train_residual, 1e-9);
    EXPECT_NEAR(lift.K(0, 0), 0.5, 1e-6);
    auto held = conjugacy_residual(lift.as_immersion(), e.system, lift.target_map(),
                                   test::uniform_samples(dom, 1000, 99));
    EXPECT_LE(held.max_residual, 10.0 * fit.train_residual + 1e-14);
}

TEST(FitLift, RecoversRotationScalingSpectrum) {
    auto e = get_system("rotation-scaling");
    auto d = rotation_scaling_lift_dictionary();
    auto [lift, fit] = fit_on(e.system, d, e.sample_domain, 0.0);
    EXPECT_LT(fit.train_residual, 1e-9);
    auto learned = sorted_eigs(lift.K);
    Eigen::MatrixXd target(3, 3);
    target << std::cos(1.0), std::sin(1.0), 0, -std::sin(1.0), std::cos(1.0), 0, 0, 0, 0.5;
    auto want = sorted_eigs(target);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(std::abs(learned[i] - want[i]), 1e-6);
    auto held = conjugacy_residual(lift.as_immersion(), e.system, lift.target_map(),
                                   test::uniform_samples(e.sample_domain, 1000, 99));
    EXPECT_LE(held.max_residual, 10.0 * fit.train_residual + 1e-14);
}

TEST(FitLift, Deterministic) {
    auto f = get_system("cot-map").system;
    auto d = build_dictionary(spec(DictionaryKind::fourier, 4, true));
    auto a = fit_on(f, d, f.domain(), 1e-8, 5).first.K;
    auto b = fit_on(f, d, f.domain(), 1e-8, 5).first.K;
    EXPECT_EQ(a, b);
    EXPECT_NE(a, fit_on(f, d, f.domain(), 1e-8, 6).first.K);
}

TEST(TrainingPoints, GridAndRandom) {
    auto pts = training_points(DomainRegion::interval(0.0, 1.0), 11, 5, 3);
    ASSERT_EQ(pts.size(), 16u);
    EXPECT_EQ(pts[0][0], 0.0);
    EXPECT_EQ(pts[10][0], 1.0);
    for (const auto& p : pts) EXPECT_TRUE(p[0] >= 0.0 && p[0] <= 1.0);
    EXPECT_EQ(training_points(DomainRegion::interval(0.0, 1.0), 11, 5, 3), pts);
    EXPECT_THROW(training_points(DomainRegion::full_space(1), 4, 4, 1), ValidationError);
}

class CotSweep : public ::testing::Test {
protected:
    static std::vector<DictionarySpec> family() {
        std::vector<DictionarySpec> fam;
        for (std::size_t k = 1; k <= 8; ++k) fam.push_back(spec(DictionaryKind::fourier, k, true));
        return fam;
    }
    static TradeoffReport run(const Tolerances& cfg, unsigned threads = 2) {
        auto e = get_system("cot-map");
        auto cat = build_catalog(e.system, {StatePoint({0.0}), StatePoint({std::numbers::pi})}).catalog;
        return obstruction_sweep(e.system, e.valid_domain, family(), {0.0, 1e-8, 1e-4}, cat, SweepOptions{cfg, 42, threads});
    }
};

TEST_F(CotSweep, SmallResidualImpliesCollapse) {
    auto rep = run({});
    ASSERT_EQ(rep.rows.size(), 24u);
    EXPECT_EQ(rep.catalog_size, 2u);
    for (const auto& r : rep.rows) {
        EXPECT_FALSE(r.error) << *r.error;
        ASSERT_TRUE(r.collapse_ratio);
        if (r.residual_heldout < 1e-6) {
            EXPECT_LT(*r.collapse_ratio, 0.05) << "size " << r.dict_size;
        }
    }
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const auto &a = rep.rows[i - 1], &b = rep.rows[i];
        EXPECT_TRUE(a.dict_size < b.dict_size || (a.dict_size == b.dict_size && a.ridge < b.ridge));
    }
}

TEST_F(CotSweep, ThreadCountDoesNotMatter) {
    Tolerances cfg;
    cfg.heldout = 200;
    cfg.probe_samples = 100;
    auto a = run(cfg, 1), b = run(cfg, 6);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].residual_heldout, b.rows[i].residual_heldout);
        EXPECT_EQ(a.rows[i].collapse_ratio, b.rows[i].collapse_ratio);
        EXPECT_EQ(a.rows[i].min_sep_ratio, b.rows[i].min_sep_ratio);
    }
}

TEST_F(CotSweep, MatchesNumpyOracleOnGrid) {
    std::ifstream in(LIMITLAB_FIXTURES "/cot_sweep_grid.json");
    ASSERT_TRUE(in);
    auto fixture = nlohmann::json::parse(in);
    Tolerances cfg;
    cfg.train_random = 0;
    auto rep = run(cfg);
    ASSERT_EQ(rep.rows.size(), fixture.size());
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& want = fixture[i];
        const auto& got = rep.rows[i];
        EXPECT_EQ(got.dict_order, want["size"].get<std::size_t>());
        EXPECT_EQ(got.ridge, want["ridge"].get<double>());
        EXPECT_NEAR(got.residual_heldout, want["residual"].get<double>(), 1e-8) << "row " << i;
        EXPECT_NEAR(*got.collapse_ratio, want["collapse"].get<double>(), 1e-12) << "row " << i;
    }
}

TEST(Sweep, MobiusControlHasExactRow) {
    auto e = get_system("mobius");
    auto dom = mobius_control_domain();
    auto cat = build_catalog(e.system, test::uniform_samples(dom, 9, 4)).catalog;
    ASSERT_EQ(cat.size(), 1u);
    std::vector<DictionarySpec> fam{spec(DictionaryKind::rational_pole, 1, true), spec(DictionaryKind::rational_pole, 2, true)};
    auto rep = obstruction_sweep(e.system, dom, fam, {0.0, 1e-8}, cat);
    bool exact = false;
    for (const auto& r : rep.rows) {
        EXPECT_FALSE(r.error) << *r.error;
        EXPECT_FALSE(r.collapse_ratio);
        if (r.residual_heldout < 1e-9 && r.collisions == 0) exact = true;
    }
    EXPECT_TRUE(exact);
}

TEST(Sweep, NegationRefuses) {
    auto e = get_system("negation");
    std::vector<StatePoint> seeds;
    for (int i = 0; i <= 128; ++i) seeds.push_back(StatePoint({-1.0 + i / 64.0}));
    auto cat = build_catalog(e.system, seeds).catalog;
    try {
        obstruction_sweep(e.system, e.valid_domain, {spec(DictionaryKind::monomial, 2, true)}, {0.0}, cat);
        FAIL() << "sweep accepted " << cat.size() << " members";
    } catch (const NumericError& err) {
        EXPECT_EQ(err.code(), "uncountable_catalog");
    }
}

TEST(Sweep, RowErrorsAreRecorded) {
    auto e = get_system("mobius");
    auto cat = build_catalog(e.system, {StatePoint({0.0})}).catalog;
    // degree 32 monomials are numerically dependent on this interval
    auto rep = obstruction_sweep(e.system, mobius_control_domain(),
                                 {spec(DictionaryKind::monomial, 32, true), spec(DictionaryKind::monomial, 2, true)}, {0.0}, cat);
    ASSERT_EQ(rep.rows.size(), 2u);
    std::size_t errors = 0;
    for (const auto& r : rep.rows) errors += r.error.has_value();
    EXPECT_EQ(errors, 1u);
}

TEST(Sweep, Preconditions) {
    auto e = get_system("mobius");
    auto fam = std::vector<DictionarySpec>{spec(DictionaryKind::monomial, 2, true)};
    EXPECT_THROW(obstruction_sweep(e.system, mobius_control_domain(), fam, {0.0}, {}), ValidationError);
    auto cat = build_catalog(e.system, {StatePoint({0.0})}).catalog;
    EXPECT_THROW(obstruction_sweep(e.system, mobius_control_domain(), fam, {}, cat), ValidationError);
    EXPECT_THROW(obstruction_sweep(e.system, mobius_control_domain(), fam, {-1.0}, cat), ValidationError);
}
