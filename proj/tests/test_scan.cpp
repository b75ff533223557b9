#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

#include "fixtures.hpp"
#include "pwl/scan.hpp"

using namespace pwl;
using nlohmann::json;

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

json fig7_template() {
    return json::parse(R"({"family": "g3", "Z_L": 0.5, "Z_R": 0.5, "s_L": 0.8, "s_M": -2.82, "s_R": 0.4})");
}

SweepSpec small_2d() {
    json doc;
    doc["map"] = fig7_template();
    doc["sweep"] = json::parse(R"([{"param": "mu_R", "min": -0.1, "max": 0.1, "count": 6},
                                   {"param": "s_M", "min": -3.0, "max": -0.1, "count": 5}])");
    doc["samples"] = 2000;
    return sweep_spec_from_json(doc);
}

}  // namespace

TEST_CASE("map templates") {
    const auto g3 = map_template_from_json(fig7_template());
    CHECK(g3.instantiate() == fixtures::fig7());
    CHECK(g3.instantiate({{"s_M", -1.5}}) == fixtures::fig7(-1.5));
    CHECK(g3.instantiate({{"mu_R", 0.01}}) == fixtures::perturbed(0.01));
    CHECK(g3.default_x0() == 0.25);
    CHECK(g3.has_slot("mu_R"));
    CHECK(!g3.has_slot("s_M+"));

    const auto g4 = map_template_from_json(
        json::parse(R"({"family": "g4", "Z_L": 1, "Z_R": 2, "s_L": -1.3, "s_M-": 1.2, "s_M+": -1, "s_R": 0.9})"));
    CHECK(g4.instantiate() == fixtures::fig9a());
    CHECK(g4.default_x0() == 1.0);

    const auto generic = map_template_from_json(
        json::parse(R"({"breakpoints": [-0.4, 1], "slopes": [-1.3, -1.1, 0.5], "closures": ["left", "right"],
              "values": {"slopes[2]": 0.6993006993}})"));
    CHECK(generic.family == "map");
    CHECK(generic.instantiate() == fixtures::fig8());
    CHECK(generic.instantiate({{"breakpoints[0]", -0.5}}).breakpoints()[0] == -0.5);
    CHECK(generic.default_x0() == 0.5);
    CHECK(!generic.has_slot("slopes[3]"));

    CHECK(code_of([] { map_template_from_json(json::parse(R"({"family": "g5"})")); }) == ErrorCode::ParseError);
    CHECK(code_of([] { map_template_from_json(json::parse(R"({"family": "g3", "s_X": 1})")); }) ==
          ErrorCode::ParseError);
}

TEST_CASE("sweep specs") {
    json doc;
    doc["map"] = fig7_template();
    doc["sweep"] = {{"param", "s_M"}, {"min", -3.5}, {"max", -0.5}, {"count", 3}};
    const auto spec = sweep_spec_from_json(doc);
    REQUIRE(spec.axes.size() == 1);
    const auto values = spec.axes[0].values();
    REQUIRE(values.size() == 3);
    CHECK(values[0] == doctest::Approx(-3.0));
    CHECK(values[2] == doctest::Approx(-1.0));
    CHECK(spec.transient == 1000);
    CHECK(spec.record == 400);
    CHECK(spec.seed_policy == SeedPolicy::Fixed);

    auto bad = doc;
    bad["sweep"]["max"] = -3.5;
    CHECK(code_of([&] { sweep_spec_from_json(bad); }) == ErrorCode::InvalidArgument);
    bad = doc;
    bad["sweep"]["count"] = 0;
    CHECK(code_of([&] { sweep_spec_from_json(bad); }) == ErrorCode::InvalidArgument);
    bad = doc;
    bad["sweep"]["param"] = "s_Q";
    CHECK(code_of([&] { sweep_spec_from_json(bad); }) == ErrorCode::InvalidArgument);
    bad = doc;
    bad["seed_policy"] = "random";
    CHECK(code_of([&] { sweep_spec_from_json(bad); }) == ErrorCode::ParseError);
    bad = doc;
    bad.erase("sweep");
    CHECK(code_of([&] { sweep_spec_from_json(bad); }) == ErrorCode::ParseError);
}

TEST_CASE("1D sweep over contracting slopes collapses to the origin") {
    json doc;
    doc["map"] = json::parse(R"({"family": "g3", "Z_L": 1, "Z_R": 1, "s_L": 0.5, "s_M": 0.5, "s_R": 0.5})");
    doc["sweep"] = {{"param", "s_M"}, {"min", -0.9}, {"max", 0.9}, {"count", 20}};
    const auto cells = bif1d(sweep_spec_from_json(doc));
    REQUIRE(cells.size() == 20);
    for (const auto& c : cells) {
        REQUIRE(c.points.size() == 400);
        for (double x : c.points) CHECK(std::abs(x) < 1e-30);
    }
}

TEST_CASE("1D sweep cell at the quasiperiodic parameters lies on the attractor") {
    json doc;
    doc["map"] = fig7_template();
    // one cell centred on s_M = -2.82
    doc["sweep"] = {{"param", "s_M"}, {"min", -2.83}, {"max", -2.81}, {"count", 1}};
    doc["record"] = 2000;
    const auto cells = bif1d(sweep_spec_from_json(doc));
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].param == doctest::Approx(-2.82).epsilon(1e-14));

    Budget budget;
    budget.samples = 200000;
    const auto report = classify_attractor(fixtures::fig7(), 0.25, budget);
    std::size_t outside = 0;
    for (double x : cells[0].points) {
        bool inside = false;
        for (const auto& iv : report.cover) inside = inside || (x >= iv.lo - 1e-9 && x <= iv.hi + 1e-9);
        outside += inside ? 0 : 1;
    }
    CHECK(outside <= 2);
}

TEST_CASE("1D sweep records diverged cells as empty") {
    json doc;
    doc["map"] = fig7_template();
    doc["sweep"] = {{"param", "s_R"}, {"min", 0.0}, {"max", 4.0}, {"count", 4}};
    const auto cells = bif1d(sweep_spec_from_json(doc));
    CHECK(!cells.front().points.empty());
    CHECK(cells.back().points.empty());
    const auto csv = bif1d_csv(cells);
    CHECK(csv.rfind("param,x\n", 0) == 0);
}

TEST_CASE("continuation seeding") {
    json doc;
    doc["map"] = fig7_template();
    doc["sweep"] = {{"param", "s_M"}, {"min", -3.0}, {"max", -2.0}, {"count", 8}};
    doc["seed_policy"] = "continuation";
    const auto spec = sweep_spec_from_json(doc);
    CHECK(spec.seed_policy == SeedPolicy::Continuation);
    CHECK(bif1d_csv(bif1d(spec, 1)) == bif1d_csv(bif1d(spec, 4)));
}

TEST_CASE("2D sweep") {
    const auto spec = small_2d();
    const auto cells = bif2d(spec);
    REQUIRE(cells.size() == 30);
    // p2 varies fastest
    CHECK(cells[0].p1 == cells[4].p1);
    CHECK(cells[0].p2 != cells[1].p2);
    for (const auto& c : cells) {
        if (c.verdict != Verdict::AttractingCycle && c.verdict != Verdict::NonhyperbolicCycleSegments) {
            CHECK(c.period == 0);
        }
    }
    const auto csv = bif2d_csv(cells);
    CHECK(csv.rfind("p1,p2,verdict,period,lyapunov\n", 0) == 0);
    CHECK(bif2d_csv(bif2d(spec, 1)) == bif2d_csv(bif2d(spec, 3)));
}

TEST_CASE("2D sweep never finds chaos without offsets") {
    json doc;
    doc["map"] = fig7_template();
    doc["sweep"] = json::parse(R"([{"param": "mu_R", "min": -0.001, "max": 0.001, "count": 1},
                                   {"param": "s_M", "min": -3.0, "max": -0.1, "count": 40}])");
    const auto cells = bif2d(sweep_spec_from_json(doc));
    for (const auto& c : cells) {
        CHECK(c.p1 == 0.0);
        CHECK(c.verdict != Verdict::Chaotic);
    }
}

TEST_CASE("the attracting 19-cycle cell") {
    json doc;
    doc["map"] = fig7_template();
    doc["sweep"] = json::parse(R"([{"param": "mu_R", "min": 0.009, "max": 0.011, "count": 1},
                                   {"param": "s_M", "min": -2.83, "max": -2.81, "count": 1}])");
    const auto cells = bif2d(sweep_spec_from_json(doc));
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].verdict == Verdict::AttractingCycle);
    CHECK(cells[0].period == 19);
}

TEST_CASE("colour codes") {
    CHECK(colour_code(Verdict::AttractingCycle, 19) == 19);
    CHECK(colour_code(Verdict::NonhyperbolicCycleSegments, 3) == 3);
    CHECK(colour_code(Verdict::Divergent, 0) == kCodeDivergent);
    CHECK(colour_code(Verdict::FixedPointO, 0) == kCodeFixedPointO);
    CHECK(colour_code(Verdict::QuasiperiodicIntervals, 0) == kCodeQuasiperiodic);
    CHECK(colour_code(Verdict::Chaotic, 0) == kCodeChaotic);
}

TEST_CASE("raster output") {
    const auto dir = std::filesystem::temp_directory_path();
    json doc;
    doc["map"] = fig7_template();
    doc["sweep"] = {{"param", "s_M"}, {"min", -3.0}, {"max", -2.0}, {"count", 16}};
    const auto cells = bif1d(sweep_spec_from_json(doc));
    const auto gray = bif1d_image(cells, ImageSpec{32, 24, std::nullopt, std::nullopt});
    CHECK(gray.channels == 1);
    CHECK(gray.pixels.size() == 32u * 24u);
    const auto pgm = dir / "pwldyn_test.pgm";
    gray.write(pgm);
    std::ifstream in(pgm, std::ios::binary);
    std::string magic;
    std::size_t w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    CHECK(magic == "P5");
    CHECK(w == 32);
    CHECK(h == 24);
    CHECK(maxval == 255);
    CHECK(std::filesystem::file_size(pgm) > 32u * 24u);

    const auto colour = bif2d_image(bif2d(small_2d()), 6, 5);
    CHECK(colour.channels == 3);
    CHECK(colour.width == 6);
    CHECK(colour.height == 5);
    CHECK(colour.pixels.size() == 90);
    const auto ppm = dir / "pwldyn_test.ppm";
    colour.write(ppm);
    std::ifstream in2(ppm, std::ios::binary);
    in2 >> magic;
    CHECK(magic == "P6");
    std::filesystem::remove(pgm);
    std::filesystem::remove(ppm);
}

TEST_CASE("format_double is shortest round-trip") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.82) == "-2.82");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
    CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
}
