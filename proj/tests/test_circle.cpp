#include <cmath>
#include <string>

#include "doctest.h"

#include "fixtures.hpp"
#include "pwl/circle.hpp"

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

double total_length(const std::vector<Interval>& ivs) {
    double sum = 0.0;
    for (const auto& iv : ivs) sum += iv.length();
    return sum;
}

bool covered(const Interval& inner, const std::vector<Interval>& outer) {
    for (const auto& o : outer) {
        if (inner.lo >= o.lo && inner.hi <= o.hi) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("Lorenz trichotomy") {
    const auto gap = classify_lorenz(make_lorenz_map(0.5, 0.5, 1.0, 0.0));
    CHECK(gap.kind == LorenzKind::Gap);
    CHECK(gap.left_commutator == 0.5);
    CHECK(gap.right_commutator == 1.0);
    REQUIRE(gap.region.has_value());
    CHECK(gap.region->lo == 0.5);
    CHECK(gap.region->hi == 1.0);

    const auto circle = classify_lorenz(make_lorenz_map(0.5, 1.25, 1.0, -0.5));
    CHECK(circle.kind == LorenzKind::Circle);
    CHECK(circle.left_commutator == 0.75);
    CHECK(circle.right_commutator == 0.75);
    CHECK(!circle.region.has_value());

    const auto overlap = classify_lorenz(make_lorenz_map(1.5, 1.5, 0.5, -0.5));
    CHECK(overlap.kind == LorenzKind::Overlap);
    CHECK(overlap.left_commutator == 0.25);
    CHECK(overlap.right_commutator == -0.25);

    CHECK(code_of([] { make_lorenz_map(-0.5, 1.0, 1.0, 0.0); }) == ErrorCode::InvalidLorenzMap);
    CHECK(code_of([] { make_lorenz_map(0.5, 1.0, 0.0, 1.0); }) == ErrorCode::InvalidLorenzMap);
}

TEST_CASE("trichotomy is total and flips with the commutator order") {
    for (double aL = 0.25; aL < 2.0; aL += 0.25) {
        for (double aR = 0.25; aR < 2.0; aR += 0.25) {
            const auto f = make_lorenz_map(aL, aR, 0.7, -0.4);
            const auto c = classify_lorenz(f);
            const double d = c.difference();
            CHECK((d < 0.0) == (c.kind == LorenzKind::Gap));
            CHECK((d > 0.0) == (c.kind == LorenzKind::Overlap));
            CHECK((d == 0.0) == (c.kind == LorenzKind::Circle));
        }
    }
    // A tolerance admits perturbed circle maps
    CHECK(classify_lorenz(make_lorenz_map(0.5, 1.25, 1.0, -0.5 + 1e-13), 1e-12).kind == LorenzKind::Circle);
}

TEST_CASE("circle reduction, positive slopes") {
    const auto c = circle_reduction(fixtures::two_branch(2.0, 0.5, 1.0));
    CHECK(c.tag == ReductionCase::PositiveSlopes);
    CHECK(c.domain.lo == 0.5);
    CHECK(c.domain.hi == 2.0);
    CHECK(c.discontinuity == 1.0);
    CHECK(c.right(c.left(1.0)) == 1.0);
    CHECK(c.left(c.right(1.0)) == 1.0);
    CHECK(!c.mirrored);
}

TEST_CASE("circle reduction, mixed signs") {
    const auto c = circle_reduction(fixtures::two_branch(-1.5, 0.5, 1.0));
    CHECK(c.tag == ReductionCase::MixedSigns);
    CHECK(c.domain.lo == doctest::Approx(0.5));
    CHECK(c.domain.hi == doctest::Approx(2.25));
}

TEST_CASE("circle reduction, negative slopes") {
    const auto c = circle_reduction(fixtures::two_branch(-1.5, -0.4, 1.0));
    CHECK(c.tag == ReductionCase::NegativeSlopes);
    CHECK(c.domain.lo == doctest::Approx(0.6));
    CHECK(c.domain.hi == doctest::Approx(2.25));
}

TEST_CASE("circle reduction with the discontinuity left of the origin") {
    const auto c = circle_reduction(fixtures::two_branch(0.5, 2.0, -1.0));
    CHECK(c.mirrored);
    CHECK(c.domain.length() == doctest::Approx(1.5));
    const auto rho = rotation_number(c, 1000);
    REQUIRE(rho.rational.has_value());
    CHECK(*rho.rational == Fraction{1, 2});
}

TEST_CASE("circle reduction refuses non-reducible maps") {
    CHECK(code_of([] { circle_reduction(fixtures::two_branch(0.5, 0.5, 1.0)); }) == ErrorCode::NotReducible);
    CHECK(code_of([] { circle_reduction(fixtures::two_branch(2.0, 1.5, 1.0)); }) == ErrorCode::NotReducible);
    CHECK(code_of([] { circle_reduction(fixtures::fig7()); }) == ErrorCode::NotReducible);
}

TEST_CASE("rotation numbers") {
    const auto half = rotation_number(circle_reduction(fixtures::two_branch(2.0, 0.5, 1.0)), 0.75, 1000);
    REQUIRE(half.rational.has_value());
    CHECK(*half.rational == Fraction{1, 2});
    CHECK(half.error <= 2.0 / 1000);

    const auto third = rotation_number(circle_reduction(fixtures::two_branch(2.0, 0.7071067812, 1.0)), 1.5, 3000);
    REQUIRE(third.rational.has_value());
    CHECK(*third.rational == Fraction{1, 3});

    const auto c = circle_reduction(fixtures::two_branch(2.0, 0.4, 1.0));
    const double expected = std::log(1.0 / 0.4) / std::log(2.0 / 0.4);
    RotationOptions capped;
    capped.denominator_cap = 100;
    const auto irr = rotation_number(c, 100000, capped);
    CHECK(std::abs(irr.value - expected) <= 10.0 / 100000);
    CHECK(!irr.rational.has_value());
    CHECK(irr.bound == 2.0 / 100000);

    CHECK(code_of([&] { rotation_number(c, 50); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("rotation number estimates converge and do not depend on the seed") {
    const auto c = circle_reduction(fixtures::two_branch(2.0, 0.4, 1.0));
    const std::size_t ns[] = {100, 1000, 10000, 100000};
    for (std::size_t n : ns) {
        for (std::size_t m : ns) {
            const double a = rotation_number(c, n).value;
            const double b = rotation_number(c, m).value;
            CHECK(std::abs(a - b) <= 1.0 / n + 1.0 / m);
        }
    }
    const double seeds[] = {0.41, 0.9, 1.3, 1.99};
    for (double x0 : seeds) {
        CHECK(std::abs(rotation_number(c, x0, 1000).value - rotation_number(c, 1000).value) <= 2.0 / 1000);
    }
}

TEST_CASE("rotation number rejects maps off the circle case") {
    CircleMap c = circle_reduction(fixtures::two_branch(2.0, 0.5, 1.0));
    c.right.offset += 0.01;
    CHECK(code_of([&] { rotation_number(c, 1000); }) == ErrorCode::NotCircle);
}

TEST_CASE("rational guesses") {
    CHECK(rational_guess(0.3334, 1000, 1e-3) == Fraction{1, 3});
    CHECK(rational_guess(0.5, 1000, 0.0) == Fraction{1, 2});
    CHECK(!rational_guess(0.569323, 100, 1e-5).has_value());
}

TEST_CASE("two-piece return map as a circle map") {
    const auto map = fixtures::two_branch(2.0, 0.5, 1.0);
    const auto rm = first_return_map(map, make_interval(0.5, 2.0));
    const auto c = circle_map_from_return_map(rm);
    CHECK(c.tag == ReductionCase::FromReturnMap);
    CHECK(classify_lorenz(c.as_lorenz()).kind == LorenzKind::Circle);
    const auto f = lorenz_from_return_map(rm);
    CHECK(f.a_left == 2.0);
    CHECK(f.a_right == 0.5);
}

TEST_CASE("Lyapunov exponent on a quasiperiodic orbit") {
    const auto est = lyapunov_exponent(fixtures::fig7(), 0.3, 1000000);
    CHECK(std::abs(est.value) <= est.bounded_orbit_limit());
    REQUIRE(est.direct.has_value());
    CHECK(std::abs(est.value - *est.direct) * est.n <= 1e-9);
    CHECK(est.min_abs_state > 0.0);
}

TEST_CASE("Lyapunov exponent of a contraction") {
    const auto est = lyapunov_exponent(g3_map(1.0, 1.0, 0.5, 0.5, 0.5), 0.7, 500);
    CHECK(est.value == doctest::Approx(std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("Lyapunov exponent of the perturbed map is positive") {
    const auto est = lyapunov_exponent(fixtures::perturbed(-0.01), 0.3, 100000);
    CHECK(est.value > 0.0);
    CHECK(!est.direct.has_value());
}

TEST_CASE("Lyapunov exponent errors") {
    CHECK(code_of([] { lyapunov_exponent(fixtures::fig7(), 0.0, 100); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { lyapunov_exponent(fixtures::fig4(), 0.25, 100000); }) == ErrorCode::Diverged);
    CHECK(code_of([] { lyapunov_exponent(g3_map(1.0, 1.0, 0.5, 0.5, 0.5, -0.5), 1.0, 10); }) ==
          ErrorCode::HitOrigin);
}

TEST_CASE("gap attractor at depth 0") {
    const auto f = make_lorenz_map(0.5, 0.5, 1.0, -1.0);
    const auto ivs = gap_attractor(f, 0);
    REQUIRE(ivs.size() == 2);
    CHECK(ivs[0].lo == -1.0);
    CHECK(ivs[0].hi == -0.5);
    CHECK(ivs[1].lo == 0.5);
    CHECK(ivs[1].hi == 1.0);
    CHECK(code_of([] { gap_attractor(make_lorenz_map(1.5, 1.5, 0.5, -0.5), 3); }) == ErrorCode::NotGap);
}

TEST_CASE("gap attractor approximations nest") {
    const auto f = make_lorenz_map(0.5, 0.5, 1.0, 0.0);
    const double initial = f.absorbing_interval().length();
    auto previous = gap_attractor(f, 0);
    CHECK(total_length(previous) <= initial);
    for (std::size_t d = 1; d <= 10; ++d) {
        const auto next = gap_attractor(f, d);
        CHECK(total_length(next) <= total_length(previous) + 1e-15);
        for (const auto& iv : next) CHECK(covered(iv, previous));
        previous = next;
    }
    CHECK(total_length(previous) < 0.5 * initial);
}

TEST_CASE("gap attractor clusters around the attracting cycle") {
    // period-2 cycle at -2/3 and 2/3
    const auto f = make_lorenz_map(0.5, 0.5, 1.0, -1.0);
    const auto ivs = gap_attractor(f, 30);
    REQUIRE(!ivs.empty());
    for (const auto& iv : ivs) {
        const double d = std::min(std::abs(iv.midpoint() - 2.0 / 3.0), std::abs(iv.midpoint() + 2.0 / 3.0));
        CHECK(d < 1e-3);
    }
    CHECK(total_length(ivs) < 1e-3);
}

TEST_CASE("circle record line") {
    const auto f = make_lorenz_map(0.5, 1.25, 1.0, -0.5);
    const auto line = circle_record(classify_lorenz(f), std::nullopt, std::nullopt);
    CHECK(line == "kind=Circle left_commutator=0.75 right_commutator=0.75 rho=- pq=- lambda=- n=0");

    const auto c = circle_reduction(fixtures::two_branch(2.0, 0.5, 1.0));
    const auto rho = rotation_number(c, 0.75, 1000);
    const auto with_rho = circle_record(std::nullopt, rho, std::nullopt);
    CHECK(with_rho.find("rho=0.5 pq=1/2") != std::string::npos);
}
