#include <gtest/gtest.h>

#include <random>

#include "limitlab/basins.hpp"
#include "limitlab/linear.hpp"
#include "test_util.hpp"

using namespace limitlab;

namespace {

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

Eigen::MatrixXd explicit_jordan(double lambda, std::size_t m) {
    const auto n = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd j = lambda * Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) j(i, i + 1) = 1.0;
    return j;
}

GrowthVerdict oracle_verdict(int code) {
    return code == 0 ? GrowthVerdict::vanishes : code == 1 ? GrowthVerdict::bounded_nonvanishing : GrowthVerdict::unbounded;
}

}  // namespace

TEST(SpectralSplit, Examples) {
    using D = SpectralSplit::Dims;
    EXPECT_EQ(spectral_split(LinearSystem(mat({{0.5, 0, 0}, {0, 1, 0}, {0, 0, 2}}))).dims(), (D{1, 1, 1}));
    EXPECT_EQ(spectral_split(LinearSystem(mat({{1, 1}, {0, 1}}))).dims(), (D{0, 0, 2}));
    EXPECT_EQ(spectral_split(LinearSystem(test::rotation(1.0))).dims(), (D{0, 2, 0}));
}

TEST(SpectralSplit, ComplexPairIsRealified) {
    auto s = spectral_split(LinearSystem(0.5 * test::rotation(0.7)));
    ASSERT_EQ(s.clusters.size(), 1u);
    EXPECT_TRUE(s.clusters[0].complex_pair);
    EXPECT_GE(s.clusters[0].lambda.imag(), 0.0);
    EXPECT_EQ(s.clusters[0].basis.cols(), 2);
    EXPECT_EQ(s.stable.cols(), 2);
}

TEST(SpectralSplit, SubspacesAreInvariantAndSpan) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        Eigen::MatrixXd a = test::random_family_matrix(rng);
        auto s = spectral_split(LinearSystem(a));
        auto d = s.dims();
        EXPECT_EQ(d.stable + d.unit + d.unstable, 4u);
        for (const Eigen::MatrixXd* b : {&s.stable, &s.unit, &s.unstable}) {
            if (b->cols() == 0) continue;
            Eigen::MatrixXd proj = *b * b->completeOrthogonalDecomposition().solve(a * *b);
            EXPECT_LT((proj - a * *b).norm(), 1e-8 * a.norm());
        }
    }
}

TEST(SpectralSplit, JordanCatalogBlock) {
    EXPECT_EQ(spectral_split(LinearSystem(explicit_jordan(1.0, 3))).dims(), (SpectralSplit::Dims{0, 0, 3}));
    EXPECT_EQ(spectral_split(LinearSystem(explicit_jordan(0.9, 4))).dims(), (SpectralSplit::Dims{4, 0, 0}));
    EXPECT_EQ(spectral_split(LinearSystem(Eigen::MatrixXd::Identity(3, 3))).dims(), (SpectralSplit::Dims{0, 3, 0}));
}

TEST(JordanPower, Examples) {
    EXPECT_EQ(jordan_block_power(1.0, 2, 5), mat({{1, 5}, {0, 1}}));
    EXPECT_TRUE(jordan_block_power(0.5, 2, 3).isApprox(mat({{0.125, 0.75}, {0, 0.125}}), 1e-15));
    EXPECT_EQ(jordan_block_power(2.0, 1, 10), mat({{1024}}));
    EXPECT_EQ(jordan_block_power(3.0, 3, 0), Eigen::MatrixXd::Identity(3, 3));
    EXPECT_THROW(jordan_block_power(1.0, 0, 1), ValidationError);
}

TEST(JordanPower, MatchesRepeatedMultiplication) {
    for (double lambda : {0.5, 1.0, 2.0}) {
        for (std::size_t m = 1; m <= 4; ++m) {
            Eigen::MatrixXd j = explicit_jordan(lambda, m);
            Eigen::MatrixXd p = Eigen::MatrixXd::Identity(j.rows(), j.cols());
            for (std::size_t k = 0; k <= 50; ++k) {
                Eigen::MatrixXd c = jordan_block_power(lambda, m, k);
                for (Eigen::Index r = 0; r < p.rows(); ++r)
                    for (Eigen::Index s = 0; s < p.cols(); ++s)
                        EXPECT_LE(std::abs(c(r, s) - p(r, s)), 1e-9 * std::max(std::abs(p(r, s)), 1e-300))
                            << "lambda " << lambda << " m " << m << " k " << k;
                p = j * p;
            }
        }
    }
}

TEST(ClassifyGrowth, Examples) {
    LinearSystem shear(mat({{1, 1}, {0, 1}}));
    auto g = classify_growth(shear, StatePoint({0.0, 1.0}));
    EXPECT_EQ(g.verdict, GrowthVerdict::unbounded);
    EXPECT_EQ(g.alpha, 1.0);
    EXPECT_EQ(g.degree, 1u);
    EXPECT_GT(g.c_empirical, 0.0);
    EXPECT_EQ(classify_growth(shear, StatePoint({1.0, 0.0})).verdict, GrowthVerdict::bounded_nonvanishing);
    LinearSystem half(mat({{0.5, 0}, {0, 0.5}}));
    EXPECT_EQ(classify_growth(half, StatePoint({3.0, -1.0})).verdict, GrowthVerdict::vanishes);
}

TEST(ClassifyGrowth, GeometricRate) {
    auto g = classify_growth(LinearSystem(mat({{2, 0}, {0, 0.5}})), StatePoint({1.0, 1.0}));
    EXPECT_EQ(g.verdict, GrowthVerdict::unbounded);
    EXPECT_NEAR(g.alpha, 2.0, 1e-12);
    EXPECT_EQ(g.degree, 0u);
    auto j = classify_growth(LinearSystem(explicit_jordan(1.0, 3)), StatePoint({0.0, 0.0, 1.0}));
    EXPECT_EQ(j.degree, 2u);
}

TEST(ClassifyGrowth, AgreesWithIterationOracle) {
    std::mt19937_64 rng(20240601);
    std::size_t determined = 0, agreed = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd a = test::random_family_matrix(rng);
        Eigen::VectorXd xi = Eigen::Map<Eigen::VectorXd>(test::random_vector(rng, 4).data(), 4);
        int oracle = test::growth_oracle(a, xi);
        if (oracle < 0) continue;
        ++determined;
        auto v = classify_growth(LinearSystem(a), StatePoint(std::vector<double>(xi.data(), xi.data() + 4))).verdict;
        if (v == oracle_verdict(oracle)) ++agreed;
        else ADD_FAILURE() << "trial " << trial << ": " << to_string(v) << " vs oracle " << oracle;
    }
    EXPECT_EQ(agreed, determined);
    EXPECT_GT(determined, 90u);
}

TEST(OmegaNonempty, Examples) {
    EXPECT_TRUE(omega_nonempty_linear(LinearSystem(test::rotation(1.0)), StatePoint({1.0, 0.0})));
    EXPECT_FALSE(omega_nonempty_linear(LinearSystem(mat({{2}})), StatePoint({1.0})));
    EXPECT_FALSE(omega_nonempty_linear(LinearSystem(mat({{1, 1}, {0, 1}})), StatePoint({0.0, 1.0})));
    EXPECT_THROW(omega_nonempty_linear(LinearSystem(mat({{2}})), StatePoint({1.0, 2.0})), ValidationError);
}

TEST(OmegaNonempty, MatchesSimulatedBoundedness) {
    std::mt19937_64 rng(20240601);
    std::size_t determined = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::MatrixXd a = test::random_family_matrix(rng);
        auto xi = test::random_vector(rng, 4);
        auto bound = classify_boundedness(make_linear_map("A", a), StatePoint(xi));
        if (bound.verdict == Boundedness::undetermined) continue;
        ++determined;
        EXPECT_EQ(omega_nonempty_linear(LinearSystem(a), StatePoint(xi)), bound.verdict == Boundedness::bounded)
            << "trial " << trial;
    }
    EXPECT_GT(determined, 90u);
}

TEST(BasinWitness, LinearSystemsHaveNone) {
    for (const auto& a : {mat({{0.5, 0}, {0, 0.8}}), test::rotation(1.0), mat({{0.9, 0.3}, {0, 0.9}})}) {
        auto f = make_linear_map("A", a);
        GridSpec coarse{{{-1.0, 1.0}, {-1.0, 1.0}}, {101, 101}};
        auto cat = build_catalog(f, {StatePoint({0.0, 0.0}), StatePoint({1.0, 0.0}), StatePoint({0.5, 0.5})}).catalog;
        if (cat.size() > 1) continue;  // the rotation has a continuum of circles: covered by the contraction cases
        auto b = compute_basins(f, coarse, cat, {}, 4);
        EXPECT_TRUE(basin_closedness_witness(f, b, cat).empty());
    }
}

TEST(StabilityBound, Examples) {
    auto one = stability_bound(LinearSystem(mat({{0.5}})), Eigen::MatrixXd::Identity(1, 1));
    EXPECT_EQ(one.m, 1.0);
    auto rot = stability_bound(LinearSystem(test::rotation(1.0)), Eigen::MatrixXd::Identity(2, 2));
    EXPECT_NEAR(rot.m, 1.0, 1e-12);

    Eigen::MatrixXd a = mat({{0.5, 10}, {0, 0.5}});
    auto s = stability_bound(LinearSystem(a), Eigen::MatrixXd::Identity(2, 2));
    double oracle = 0.0;
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(2, 2);
    for (int k = 0; k < 200; ++k, p = a * p) oracle = std::max(oracle, Eigen::JacobiSVD<Eigen::MatrixXd>(p).singularValues()(0));
    EXPECT_GT(s.m, 10.0);
    EXPECT_NEAR(s.m, oracle, 1e-12 * oracle);
}

TEST(StabilityBound, Errors) {
    EXPECT_THROW(stability_bound(LinearSystem(mat({{2}})), Eigen::MatrixXd::Identity(1, 1)), NumericError);
    EXPECT_THROW(stability_bound(LinearSystem(mat({{1, 1}, {0, 1}})), Eigen::MatrixXd::Identity(2, 2)), NumericError);
    Eigen::MatrixXd e2(2, 1);
    e2 << 0, 1;
    EXPECT_THROW(stability_bound(LinearSystem(mat({{0.5, 1}, {0, 0.5}})), e2), ValidationError);
}
