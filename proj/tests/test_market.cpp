#include <cmath>
#include <random>
#include <string>

#include "doctest.h"

#include "fixtures.hpp"
#include "pwl/market.hpp"

using namespace pwl;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected pwl::Error");
    return ErrorCode::IoError;
}

// s1..s4 reproducing three-branch slopes (s_L, s_M, s_R)
MarketParams g3_params(double zl, double zr, double sl, double sm, double sr) {
    const double s1 = sm - 1.0;
    return realize_slopes(s1, s1, sr - sm, sl - sm, zl, zr);
}

}  // namespace

TEST_CASE("derive_slopes") {
    MarketParams p;
    p.c1b = 0.5;
    p.f1b = 0.3;
    const auto s = derive_slopes(p);
    CHECK(s.s1 == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(s.s_mplus == doctest::Approx(1.2).epsilon(1e-15));

    MarketParams same;
    same.a = 0.7;
    same.c1b = same.f1b = 0.4;
    same.c1d = same.f1d = 0.2;
    same.c2b = same.f2b = 1.1;
    same.c2d = same.f2d = 0.9;
    const auto one = derive_slopes(same);
    CHECK(one.s1 == 0.0);
    CHECK(one.s4 == 0.0);
    CHECK(one.s_left == 1.0);
    CHECK(one.s_mminus == 1.0);
    CHECK(one.s_mplus == 1.0);
    CHECK(one.s_right == 1.0);
}

TEST_CASE("inverting the quasiperiodic reference slopes") {
    const auto p = g3_params(0.5, 0.5, 0.8, -2.82, 0.4);
    const auto s = derive_slopes(p);
    CHECK(s.s1 == doctest::Approx(-3.82).epsilon(1e-14));
    CHECK(s.s3 == doctest::Approx(3.22).epsilon(1e-14));
    CHECK(s.s4 == doctest::Approx(3.62).epsilon(1e-14));
    const auto map = build_g3(p);
    const auto direct = fixtures::fig7();
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(map.branch(i).slope == doctest::Approx(direct.branch(i).slope).epsilon(1e-14));
    }
}

TEST_CASE("validation") {
    MarketParams p;
    p.a = 0.0;
    CHECK(code_of([&] { validate(p); }) == ErrorCode::InvalidParams);
    p.a = 1.0;
    p.c2d = -0.1;
    CHECK(code_of([&] { validate(p); }) == ErrorCode::InvalidParams);
    p.c2d = 0.0;
    p.z_left = 0.0;
    CHECK(code_of([&] { derive_slopes(p); }) == ErrorCode::InvalidParams);
    p.z_left = 1.0;
    p.fundamentalist.b2d = -1.0;
    CHECK(code_of([&] { validate(p); }) == ErrorCode::InvalidParams);
}

TEST_CASE("four-branch map with the coexistence slopes") {
    // s_L = 1 + s2 + s4, so s_L = -1.3 with s2 = 0.2 needs s4 = -2.5
    const auto p = realize_slopes(-2.0, 0.2, 1.9, -2.5, 1.0, 2.0);
    const auto map = build_g4(p);
    REQUIRE(map.size() == 4);
    CHECK(map.branch(0).slope == doctest::Approx(-1.3).epsilon(1e-15));
    CHECK(map.branch(1).slope == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(map.branch(2).slope == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(map.branch(3).slope == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(map.breakpoints()[0] == -1.0);
    CHECK(map.breakpoints()[1] == 0.0);
    CHECK(map.breakpoints()[2] == 2.0);
    CHECK(map.branch_index(-1.0) == 0);
    CHECK(map.branch_index(0.0) == 2);
    CHECK(map.branch_index(2.0) == 3);
    CHECK(homogeneity_check(map).admissible());

    // the s4 = -1.5 reading gives a different outer slope
    CHECK(build_g4(realize_slopes(-2.0, 0.2, 1.9, -1.5, 1.0, 2.0)).branch(0).slope == doctest::Approx(-0.3));
}

TEST_CASE("zero slope set is the identity") {
    const auto map = build_g4(realize_slopes(0.0, 0.0, 0.0, 0.0, 1.0, 1.0));
    for (const auto& b : map.branches()) {
        CHECK(b.slope == 1.0);
        CHECK(b.offset == 0.0);
    }
}

TEST_CASE("intercepts") {
    auto p = realize_slopes(-2.0, 0.2, 1.9, -2.5, 1.0, 2.0);
    p.chartist = {0.3, 0.2, 0.5, 0.1};
    p.fundamentalist = p.chartist;
    const auto offsets = regime_offsets(p);
    for (double o : offsets) CHECK(o == 0.0);
    const auto map = build_g4(p);
    for (const auto& b : map.branches()) CHECK(b.offset == 0.0);
    CHECK(demand_route_discrepancy(p) <= 1e-12);

    p.fundamentalist.a1b = 0.31;
    CHECK(code_of([&] { build_g4(p); }) == ErrorCode::OffsetsWouldArise);
    auto q = g3_params(0.5, 0.5, 0.8, -2.82, 0.4);
    q.chartist.b2d = 0.2;
    CHECK(code_of([&] { build_g3(q); }) == ErrorCode::OffsetsWouldArise);
    CHECK(regime_offsets(p)[2] != 0.0);
    // the reduced map with offsets still agrees with the trader-level step
    CHECK(demand_route_discrepancy(p) <= 1e-12);
}

TEST_CASE("demand components sum to the market maker step") {
    auto p = g3_params(0.6, 1.0, -0.9, -1.3, 0.5);
    p.fundamental = 2.0;
    p.a = 1.0;
    const double prices[] = {0.5, 1.5, 2.0, 2.3, 3.1, 4.0};
    for (double price : prices) {
        const double sum = chartist1_demand(p, price) + chartist2_demand(p, price) +
                           fundamentalist1_demand(p, price) + fundamentalist2_demand(p, price);
        CHECK(market_maker_step(p, price) == doctest::Approx(price + sum).epsilon(1e-15));
        const double x = price - p.fundamental;
        CHECK(market_maker_step(p, price) - p.fundamental == doctest::Approx(build_g3(p)(x)).epsilon(1e-13));
    }
    // type-2 traders stay out of the band
    CHECK(chartist2_demand(p, 2.5) == 0.0);
    CHECK(fundamentalist2_demand(p, 1.5) == 0.0);
}

TEST_CASE("three-branch construction") {
    const auto fig1a = build_g3(g3_params(0.6, 1.0, -0.9, -1.3, 0.5));
    CHECK(fig1a.breakpoints()[0] == -0.6);
    CHECK(fig1a.breakpoints()[1] == 1.0);
    CHECK(fig1a.branch(0).slope == doctest::Approx(-0.9).epsilon(1e-15));
    CHECK(fig1a.branch(1).slope == doctest::Approx(-1.3).epsilon(1e-15));

    const auto fig8 = build_g3(g3_params(0.4, 1.0, -1.3, -1.1, 0.6993006993));
    CHECK(fig8.branch(2).slope == doctest::Approx(0.6993006993).epsilon(1e-14));

    const auto flat = build_g3(realize_slopes(-0.5, -0.5, 0.0, 0.0, 1.0, 1.0));
    CHECK(flat.branch(0).slope == flat.branch(1).slope);
    CHECK(flat.branch(1).slope == flat.branch(2).slope);

    CHECK(code_of([] { build_g3(realize_slopes(-0.5, -0.4, 0.0, 0.0, 1.0, 1.0)); }) == ErrorCode::S2MismatchesS1);
}

TEST_CASE("three-branch map is the four-branch map with merged middles") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        const double s1 = u(rng);
        const auto p = realize_slopes(s1, s1, u(rng), u(rng), 0.5 + 0.1 * i, 1.0);
        const auto g3 = build_g3(p);
        const auto g4 = build_g4(p);
        CHECK(g4.branch(1).slope == g4.branch(2).slope);
        CHECK(g3.branch(0).slope == g4.branch(0).slope);
        CHECK(g3.branch(1).slope == g4.branch(1).slope);
        CHECK(g3.branch(2).slope == g4.branch(3).slope);
        CHECK(g3.breakpoints()[0] == g4.breakpoints()[0]);
        CHECK(g3.breakpoints()[1] == g4.breakpoints()[2]);
        for (double x = -4.0; x <= 4.0; x += 0.01) CHECK(g3(x) == g4(x));
    }
}

TEST_CASE("slope identities invert exactly") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const auto p = realize_slopes(u(rng), u(rng), u(rng), u(rng), 1.0, 1.0);
        const auto s = derive_slopes(p);
        const auto map = build_g4(p);
        const double sl = map.branch(0).slope, smm = map.branch(1).slope;
        const double smp = map.branch(2).slope, sr = map.branch(3).slope;
        CHECK(smp - 1.0 == doctest::Approx(s.s1).epsilon(1e-14));
        CHECK(smm - 1.0 == doctest::Approx(s.s2).epsilon(1e-14));
        CHECK(sr - smp == doctest::Approx(s.s3).epsilon(1e-13));
        CHECK(sl - smm == doctest::Approx(s.s4).epsilon(1e-13));
    }
}

TEST_CASE("offset on the right branch") {
    const auto p = g3_params(0.5, 0.5, 0.8, -2.82, 0.4);
    const auto map = build_g3_offset(p, 0.01);
    CHECK(map.branch(2).offset == 0.01);
    CHECK(map.branch(0).offset == 0.0);
    CHECK(homogeneity_check(map).kind == HomogeneityKind::HasOffsets);
    CHECK(build_g3_offset(p, 0.0) == build_g3(p));
    CHECK(build_g3_offset(p, -0.01).branch(2).offset == -0.01);
}

TEST_CASE("price series") {
    const auto a = price_series(fixtures::fig7(-1.5), 0.3, 200, 4.6);
    REQUIRE(a.size() == 201);
    double lo = 1e300, hi = -1e300;
    for (const auto& pt : a) {
        lo = std::min(lo, pt.x);
        hi = std::max(hi, pt.x);
        CHECK(pt.price == pt.x + 4.6);
    }
    CHECK(lo < 0.0);
    CHECK(hi > 0.0);
    CHECK(std::max(-lo, hi) < 5.0);

    for (const auto& pt : price_series(fixtures::fig7(), 0.0, 20, 4.6)) {
        CHECK(pt.price == 4.6);
        CHECK(pt.regime == "fundamental");
    }

    // Rising steps outnumber falling ones over 200 iterations, yet the orbit
    // spends more of them below the fundamental.
    const auto b = price_series(fixtures::fig7(), 0.3, 200);
    std::size_t above = 0, below = 0, rises = 0, falls = 0;
    for (std::size_t t = 0; t < b.size(); ++t) {
        if (b[t].x > 0.0) ++above;
        if (b[t].x < 0.0) ++below;
        CHECK(b[t].regime == (b[t].x > 0.0 ? "bull" : "bear"));
        if (t > 0) (b[t].price > b[t - 1].price ? rises : falls) += 1;
    }
    CHECK(rises == 111);
    CHECK(falls == 89);
    CHECK(above == 90);
    CHECK(below == 111);

    CHECK(code_of([] { price_series(fixtures::fig4(), 0.25, 100000); }) == ErrorCode::Diverged);
}

TEST_CASE("price series matches the orbit exactly") {
    const auto map = fixtures::fig7();
    const auto series = price_series(map, 0.3, 500, 1.25);
    const auto orbit = iterate(map, 0.3, 500);
    REQUIRE(series.size() == orbit.states.size());
    for (std::size_t t = 0; t < series.size(); ++t) {
        CHECK(series[t].t == t);
        CHECK(series[t].x == orbit.states[t]);
        CHECK(series[t].price - 1.25 == doctest::Approx(orbit.states[t]).epsilon(1e-15));
    }
}

TEST_CASE("price series CSV") {
    const auto csv = price_series_csv(price_series(fixtures::fig8(), 1.4, 2));
    CHECK(csv.rfind("t,x_t,P_t,regime\n0,1.3999999999999999,1.3999999999999999,bull\n", 0) == 0);
}

TEST_CASE("market parameter JSON") {
    auto p = g3_params(0.5, 0.5, 0.8, -2.82, 0.4);
    p.fundamental = 3.0;
    p.chartist = {0.1, 0.2, 0.3, 0.4};
    p.fundamentalist = p.chartist;
    const auto doc = market_params_to_json(p);
    CHECK(doc.contains("c^{1,b}"));
    CHECK(doc.at("chartist").contains("a^{1,b}"));
    const auto back = market_params_from_json(nlohmann::json::parse(doc.dump()));
    CHECK(build_g3(back) == build_g3(p));
    CHECK(back.fundamental == 3.0);
    CHECK(back.chartist == p.chartist);

    const auto defaults = market_params_from_json(nlohmann::json::parse(R"({"c^{1,b}": 0.5, "f^{1,b}": 0.3})"));
    CHECK(defaults.fundamental == 0.0);
    CHECK(derive_slopes(defaults).s_mplus == doctest::Approx(1.2));
}
