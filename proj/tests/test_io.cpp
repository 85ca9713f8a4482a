#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include "limitlab/io.hpp"

using namespace limitlab;

TEST(ParsePoint, Forms) {
    EXPECT_EQ(io::parse_point("0.5"), StatePoint({0.5}));
    EXPECT_EQ(io::parse_point("(1, 2)"), StatePoint({1.0, 2.0}));
    EXPECT_EQ(io::parse_point("[1,-2.5e-1]"), StatePoint({1.0, -0.25}));
    EXPECT_EQ(io::parse_point("pi/2"), StatePoint({std::numbers::pi / 2}));
    EXPECT_EQ(io::parse_point("-2*pi"), StatePoint({-2.0 * std::numbers::pi}));
    for (const char* bad : {"", "(1,2", "1,,2", "abc", "1 2", "inf"}) {
        EXPECT_THROW(io::parse_point(bad), Error) << bad;
    }
}

TEST(ParseDomain, Intervals) {
    auto d = io::parse_domain("[0, pi]");
    EXPECT_EQ(d.dim(), 1u);
    EXPECT_TRUE(d.contains(StatePoint({std::numbers::pi})));
    EXPECT_FALSE(d.contains(StatePoint({-1e-12})));

    auto half = io::parse_domain("(-1, inf)");
    EXPECT_FALSE(half.contains(StatePoint({-1.0})));
    EXPECT_TRUE(half.contains(StatePoint({-0.999})));
    EXPECT_TRUE(half.contains(StatePoint({1e9})));

    auto holed = io::parse_domain("R \\ {3}");
    EXPECT_FALSE(holed.contains(StatePoint({3.0})));
    EXPECT_TRUE(holed.contains(StatePoint({2.9})));
}

TEST(ParseDomain, MultiDimensional) {
    auto box = io::parse_domain("[-2,2]x[-1,1] \\ {(0, 0)}");
    EXPECT_EQ(box.dim(), 2u);
    EXPECT_FALSE(box.contains(StatePoint({0.0, 0.0})));
    EXPECT_TRUE(box.contains(StatePoint({1.5, -1.0})));
    EXPECT_FALSE(box.contains(StatePoint({0.0, 1.5})));

    auto ring = io::parse_domain("annulus(0.1, 10)");
    EXPECT_TRUE(ring.contains(StatePoint({0.0, 5.0})));
    EXPECT_FALSE(ring.contains(StatePoint({0.0, 0.05})));

    EXPECT_EQ(io::parse_domain("R^3").dim(), 3u);
}

TEST(ParseDomain, Rejections) {
    for (const char* bad : {"[1, 0]", "[0, 1", "R^0", "R^1.5", "(0,1)x[0,1]", "annulus(1)", "[0,1] junk", "{0,1}"}) {
        try {
            io::parse_domain(bad);
            ADD_FAILURE() << "accepted " << bad;
        } catch (const ValidationError&) {
        }
    }
}

TEST(ParseDomain, DescribeRoundTrips) {
    for (const char* text : {"[-5, 0.9]", "[0, 3.141592653589793]", "[-2, 2]x[-2, 2] \\ {(0, 0)}", "R^2", "R \\ {3}"}) {
        auto d = io::parse_domain(text);
        EXPECT_EQ(io::parse_domain(d.describe()).describe(), d.describe()) << text;
    }
}

TEST(Json, NonFiniteBecomesNull) {
    EXPECT_TRUE(io::num(std::nan("")).is_null());
    EXPECT_TRUE(io::num(INFINITY).is_null());
    EXPECT_EQ(io::num(0.1).get<double>(), 0.1);
}

TEST(Json, MatrixIsColumnMajor) {
    Eigen::MatrixXd m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    auto j = io::matrix(m);
    EXPECT_EQ(j["rows"], 2);
    EXPECT_EQ(j["cols"], 3);
    EXPECT_EQ(j["order"], "column-major");
    EXPECT_EQ(j["data"], Json::parse("[1.0, 4.0, 2.0, 5.0, 3.0, 6.0]"));
}

TEST(Json, ReportFieldNames) {
    ConjugacyReport c;
    c.max_residual = 0.5;
    c.worst_point = StatePoint({1.0});
    auto cj = io::conjugacy(c);
    EXPECT_EQ(cj["max_residual"], 0.5);
    EXPECT_EQ(cj["worst_point"], Json::parse("[1.0]"));

    CollapseReport r;
    r.labels = {"W0", "W1"};
    r.distances = {{0, 2}, {2, 0}};
    r.collapse_ratio = 1.0;
    auto rj = io::collapse(r);
    EXPECT_TRUE(rj["maximal_member"].is_null());
    EXPECT_EQ(rj["collapse_ratio"], 1.0);

    InjectivityReport inj;
    inj.collisions.push_back({StatePoint({-0.5}), StatePoint({0.5}), 1.0, 0.0});
    inj.collision_count = 1;
    auto ij = io::injectivity(inj);
    ASSERT_EQ(ij["collisions"].size(), 1u);
    EXPECT_EQ(ij["collisions"][0]["a"], Json::parse("[-0.5]"));
}

TEST(Json, ShortestRoundTripNumbers) {
    Json j = {{"x", 0.1}, {"y", 1.0 / 3.0}};
    EXPECT_EQ(j.dump(), "{\"x\":0.1,\"y\":0.3333333333333333}");
    EXPECT_EQ(Json::parse(j.dump())["y"].get<double>(), 1.0 / 3.0);
}

TEST(Json, ManifestListsEverySystem) {
    auto m = io::manifest();
    EXPECT_EQ(m["schema"], "limitlab/catalog/1");
    ASSERT_EQ(m["systems"].size(), list_systems().size());
    for (const auto& s : m["systems"]) {
        EXPECT_TRUE(s.contains("name"));
        EXPECT_TRUE(s.contains("known_limit_sets"));
        EXPECT_TRUE(s["dim"].get<int>() >= 1);
    }
    EXPECT_EQ(m["systems"][0]["name"], "mobius");
    EXPECT_EQ(m["systems"][0]["exact_immersion"], "(x+1)/(x-1)");
}

TEST(Csv, SweepColumns) {
    TradeoffReport rep;
    TradeoffRow row;
    row.dict_kind = "fourier";
    row.dict_size = 3;
    row.ridge = 1e-8;
    row.residual_heldout = 0.25;
    row.min_sep_ratio = 0.5;
    rep.rows.push_back(row);
    std::ostringstream os;
    io::write_sweep_csv(os, rep);
    EXPECT_EQ(os.str(), "dict_kind,dict_size,ridge,residual_heldout,collapse_ratio,min_sep_ratio\n"
                        "fourier,3,1e-08,0.25,nan,0.5\n");
}
