#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "limitlab/catalog.hpp"
#include "limitlab/dynamics.hpp"

using namespace limitlab;

namespace {

DiscreteMap identity_map(std::size_t dim) {
    return DiscreteMap("identity", dim, [](std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); },
                       Evaluator([](std::span<const double> x, std::span<double> y) { std::copy(x.begin(), x.end(), y.begin()); }),
                       DomainRegion::full_space(dim));
}

const DiscreteMap& mobius() {
    static const DiscreteMap m = get_system("mobius").system;
    return m;
}

}  // namespace

TEST(StatePoint, RejectsNonFiniteAndEmpty) {
    EXPECT_THROW(StatePoint({std::nan("")}), ValidationError);
    EXPECT_THROW(StatePoint({1.0, INFINITY}), ValidationError);
    EXPECT_THROW(StatePoint(std::vector<double>{}), ValidationError);
    StatePoint p({1.0, 2.0});
    EXPECT_EQ(p.dim(), 2u);
    EXPECT_DOUBLE_EQ(distance(p, StatePoint({4.0, 6.0})), 5.0);
}

TEST(DomainRegion, MembershipUsesExclusionRadius) {
    auto d = DomainRegion::interval(-1.0, 1.0).excluding(StatePoint({0.0}), 1e-3);
    EXPECT_TRUE(d.contains(StatePoint({1.0})));
    EXPECT_TRUE(d.contains(StatePoint({0.0011})));
    EXPECT_FALSE(d.contains(StatePoint({0.001})));
    EXPECT_FALSE(d.contains(StatePoint({1.0000001})));
    auto a = DomainRegion::annulus(2, 0.1, 10.0);
    EXPECT_TRUE(a.contains(StatePoint({0.0, 0.1})));
    EXPECT_FALSE(a.contains(StatePoint({0.05, 0.0})));
    EXPECT_THROW(DomainRegion::interval(1.0, 1.0), ValidationError);
    EXPECT_THROW(DomainRegion::box({{0.0, 1.0}, {2.0, -2.0}}), ValidationError);
}

TEST(Evaluate, MobiusExamples) {
    EXPECT_NEAR(mobius().evaluate(StatePoint({0.0}))[0], -1.0 / 3.0, 1e-16);
    EXPECT_EQ(mobius().evaluate(StatePoint({1.0}))[0], 1.0);
    try {
        mobius().evaluate(StatePoint({3.0}));
        FAIL() << "pole accepted";
    } catch (const DomainError& e) {
        EXPECT_EQ(e.fault(), DomainFault::excluded_point);
        EXPECT_EQ(e.at(), std::vector<double>{3.0});
    }
}

TEST(Evaluate, NonFiniteImageIsDomainError) {
    DiscreteMap blow("blow", 1, [](std::span<const double> x, std::span<double> y) { y[0] = 1.0 / x[0]; }, std::nullopt,
                     DomainRegion::full_space(1));
    try {
        blow.evaluate(StatePoint({0.0}));
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_EQ(e.fault(), DomainFault::non_finite_image);
    }
}

TEST(Iterate, MobiusClosedForm) {
    auto t = iterate(mobius(), StatePoint({0.0}), 10);
    ASSERT_EQ(t.points.size(), 11u);
    EXPECT_EQ(t.termination, Termination::completed);
    EXPECT_NEAR(t.last()[0], -1023.0 / 1025.0, 1e-15);
    EXPECT_NEAR(t.last()[0], -0.9980488, 1e-7);
}

TEST(Iterate, IdentityRepeats) {
    StatePoint x0({0.25, -3.5});
    auto t = iterate(identity_map(2), x0, 5);
    ASSERT_EQ(t.points.size(), 6u);
    for (const auto& p : t.points) EXPECT_EQ(p, x0);
}

TEST(Iterate, StopsAtPole) {
    auto t = iterate(mobius(), StatePoint({5.0 / 3.0}), 2);
    EXPECT_EQ(t.termination, Termination::singular);
    EXPECT_EQ(t.steps_taken, 1u);
    EXPECT_LT(t.steps_taken, 2u);
}

TEST(Iterate, LeavesDomain) {
    auto f = mobius().restricted(DomainRegion::interval(-0.9, 0.5));
    auto t = iterate(f, StatePoint({0.0}), 10);
    EXPECT_EQ(t.termination, Termination::left_domain);
    EXPECT_LT(t.steps_taken, 10u);
}

TEST(Iterate, DivergedExceedsGuard) {
    auto f = get_system("scalar-linear", {{"a", 10.0}}).system;
    auto t = iterate(f, StatePoint({1.0}), 100, 1e12);
    EXPECT_EQ(t.termination, Termination::diverged);
    EXPECT_GT(norm_inf(t.last().coords()), 1e12);
}

TEST(IterateBack, MobiusInverseStep) {
    auto t = iterate_back(mobius(), StatePoint({-1.0 / 3.0}), 1);
    ASSERT_EQ(t.points.size(), 2u);
    EXPECT_EQ(t.direction, Direction::backward);
    EXPECT_NEAR(t.points[1][0], 0.0, 1e-16);
}

TEST(IterateBack, RotationScalingKeepsUnitCircle) {
    auto f = get_system("rotation-scaling", {{"theta", 1.0}}).system;
    auto t = iterate_back(f, StatePoint({1.0, 0.0}), 4);
    ASSERT_EQ(t.points.size(), 5u);
    for (const auto& p : t.points) EXPECT_NEAR(norm2(p.coords()), 1.0, 1e-14);
}

TEST(IterateBack, CotMapFixedPoint) {
    auto f = get_system("cot-map").system;
    auto t = iterate_back(f, StatePoint({std::numbers::pi}), 3);
    for (const auto& p : t.points) EXPECT_NEAR(p[0], std::numbers::pi, 1e-15);
}

TEST(IterateBack, NoInverse) {
    DiscreteMap f("sq", 1, [](std::span<const double> x, std::span<double> y) { y[0] = x[0] * x[0]; }, std::nullopt,
                  DomainRegion::full_space(1));
    try {
        iterate_back(f, StatePoint({0.5}), 2);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.code(), "no_inverse");
    }
}

TEST(OrbitTail, MobiusNearMinusOne) {
    auto tail = orbit_tail(mobius(), StatePoint({0.0}), 40, 5);
    ASSERT_EQ(tail.points.size(), 5u);
    for (const auto& p : tail.points) EXPECT_LT(std::abs(p[0] + 1.0), 2e-12);
}

TEST(OrbitTail, Identity) {
    StatePoint x0({7.0});
    auto tail = orbit_tail(identity_map(1), x0, 100, 3);
    EXPECT_EQ(tail.points, (Cloud{x0, x0, x0}));
}

TEST(OrbitTail, RotationScalingApproachesCircle) {
    auto f = get_system("rotation-scaling", {{"theta", 1.0}}).system;
    auto tail = orbit_tail(f, StatePoint({2.0, 0.0}), 200, 50);
    ASSERT_EQ(tail.points.size(), 50u);
    for (const auto& p : tail.points) EXPECT_LT(std::abs(norm2(p.coords()) - 1.0), 1e-10);
}

TEST(Trajectory, ConsecutivePointsAreImages) {
    auto f = get_system("rotation-scaling").system;
    auto t = iterate(f, StatePoint({0.3, -1.7}), 50);
    for (std::size_t k = 0; k + 1 < t.points.size(); ++k) EXPECT_EQ(f.evaluate(t.points[k]), t.points[k + 1]);
}

TEST(Trajectory, DeterministicAndSemigroup) {
    auto f = get_system("rotation-scaling").system;
    StatePoint x0({1.3, 0.4});
    auto a = iterate(f, x0, 70), b = iterate(f, x0, 70);
    EXPECT_EQ(a.points, b.points);
    for (std::size_t s : {0u, 1u, 17u, 40u}) {
        auto first = iterate(f, x0, s);
        auto second = iterate(f, first.last(), 70 - s);
        EXPECT_EQ(second.last(), a.last()) << "split at " << s;
    }
}

TEST(Trajectory, CsvExport) {
    std::ostringstream os;
    write_trajectory_csv(os, iterate(mobius(), StatePoint({5.0 / 3.0}), 3));
    std::string s = os.str();
    EXPECT_EQ(s.substr(0, 5), "k,x1\n");
    EXPECT_NE(s.find("# termination=singular"), std::string::npos);

    std::ostringstream bs;
    write_trajectory_csv(bs, iterate_back(get_system("rotation-scaling").system, StatePoint({1.0, 0.0}), 2));
    EXPECT_EQ(bs.str().substr(0, 8), "k,x1,x2\n");
    EXPECT_NE(bs.str().find("\n-2,"), std::string::npos);
    EXPECT_NE(bs.str().find("# termination=completed"), std::string::npos);
}

TEST(InverseConsistency, CatalogMapsWithInverse) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const auto& info : list_systems()) {
        auto e = get_system(info.name);
        if (!e.system.has_inverse()) continue;
        const auto box = e.sample_domain.bounding_box();
        std::size_t checked = 0;
        double worst = 0.0;
        while (checked < 1000) {
            std::vector<double> x(box.size());
            for (std::size_t a = 0; a < x.size(); ++a) x[a] = box[a].first + u(rng) * (box[a].second - box[a].first);
            StatePoint p(x);
            if (!e.sample_domain.contains(p)) continue;
            StatePoint back;
            try {
                back = e.system.evaluate(e.system.evaluate_inverse(p));
            } catch (const DomainError&) {
                continue;
            }
            ++checked;
            worst = std::max(worst, distance(back, p) / (1.0 + norm2(p.coords())));
        }
        EXPECT_LT(worst, 1e-9) << info.name;
    }
}
