#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pwl/core.hpp"
#include "pwl/symbolic.hpp"

namespace pwl {

/// f(x) = a_L x + mu_L for x < 0, a_R x + mu_R for x > 0, with a_L, a_R > 0
/// and mu_R < mu_L. The absorbing interval is [mu_R, mu_L].
struct LorenzMap {
    double a_left = 1.0;
    double a_right = 1.0;
    double mu_left = 1.0;
    double mu_right = 0.0;

    double left(double x) const noexcept { return a_left * x + mu_left; }
    double right(double x) const noexcept { return a_right * x + mu_right; }
    /// x == 0 is sent to the right branch
    double operator()(double x) const noexcept { return x < 0.0 ? left(x) : right(x); }
    Interval absorbing_interval() const noexcept { return {mu_right, mu_left, true, true}; }
};

/// Throws InvalidLorenzMap unless slopes are positive and mu_R < mu_L.
LorenzMap make_lorenz_map(double a_left, double a_right, double mu_left, double mu_right);

enum class LorenzKind { Gap, Circle, Overlap };
std::string_view to_string(LorenzKind kind) noexcept;

struct LorenzClassification {
    LorenzKind kind = LorenzKind::Circle;
    double left_commutator = 0.0;   // f_R(f_L(0))
    double right_commutator = 0.0;  // f_L(f_R(0))
    /// gap J for Gap, overlap region for Overlap, empty for Circle
    std::optional<Interval> region;

    double difference() const noexcept { return left_commutator - right_commutator; }
};

/// Circle when |f_R(f_L(0)) - f_L(f_R(0))| <= tolerance (exact by default).
LorenzClassification classify_lorenz(const LorenzMap& f, double tolerance = 0.0);

/// Two-piece return map as a Lorenz map, with its discontinuity moved to 0.
/// Throws NotLorenz unless there are exactly two pieces with positive slopes.
LorenzMap lorenz_from_return_map(const ReturnMap& return_map);

enum class ReductionCase { PositiveSlopes, MixedSigns, NegativeSlopes, FromReturnMap };
std::string_view to_string(ReductionCase tag) noexcept;

/// Two increasing branches on an interval split at one discontinuity; the
/// left branch carries the orbit onto the upper end of the interval.
struct CircleMap {
    Interval domain;
    double discontinuity = 0.0;
    ComposedBranch left;
    ComposedBranch right;
    ReductionCase tag = ReductionCase::FromReturnMap;
    /// true when the source map had h < 0 and was mirrored through x -> -x
    bool mirrored = false;

    double operator()(double x) const noexcept { return x < discontinuity ? left(x) : right(x); }
    LorenzMap as_lorenz() const noexcept;
};

/// Reduction of a two-branch homogeneous map x' = s_L x (x < h), s_R x (x > h)
/// to a circle map on its absorbing interval. Throws NotReducible when the
/// slope conditions of all three sign cases fail.
CircleMap circle_reduction(const PwlMap& map);

/// Two-piece first-return map viewed as a circle map.
CircleMap circle_map_from_return_map(const ReturnMap& return_map);

struct Fraction {
    long long p = 0;
    long long q = 1;
    double value() const noexcept { return static_cast<double>(p) / static_cast<double>(q); }
    friend bool operator==(const Fraction&, const Fraction&) = default;
};

/// Smallest-denominator continued-fraction convergent of x with q <= cap and
/// |x - p/q| <= window; nullopt if none qualifies.
std::optional<Fraction> rational_guess(double x, long long denominator_cap, double window);

struct RotationEstimate {
    double value = 0.0;
    std::size_t n = 0;
    std::optional<Fraction> rational;
    double error = 0.0;  // |value - p/q| when rational is present
    double bound = 0.0;  // 2/n
};

struct RotationOptions {
    long long denominator_cap = 1000;
    double circle_tolerance = 1e-12;  // relative
};

/// Fraction of left-branch applications along n steps from x0. Throws
/// NotCircle if the commutators disagree beyond tolerance.
RotationEstimate rotation_number(const CircleMap& circle, double x0, std::size_t n,
                                 const RotationOptions& options = {});
RotationEstimate rotation_number(const CircleMap& circle, std::size_t n,
                                 const RotationOptions& options = {});

struct LyapunovEstimate {
    double value = 0.0;  // (1/n) sum log|slope|
    std::size_t n = 0;
    double min_abs_state = 0.0;
    double max_abs_state = 0.0;
    /// (1/n) log|x_n / x_0|, reported for homogeneous maps
    std::optional<double> direct;

    /// log(M/m)/n, the largest |lambda| a bounded homogeneous orbit allows
    double bounded_orbit_limit() const noexcept;
};

/// Throws Diverged, HitOrigin or InvalidArgument (x0 == 0).
LyapunovEstimate lyapunov_exponent(const PwlMap& map, double x0, std::size_t n);

/// I minus the first depth+1 forward images of the gap J. Throws NotGap.
std::vector<Interval> gap_attractor(const LorenzMap& f, std::size_t depth);

/// Single-line record: kind, commutators, rho, p/q, lambda, n.
std::string circle_record(const std::optional<LorenzClassification>& lorenz,
                          const std::optional<RotationEstimate>& rotation,
                          const std::optional<LyapunovEstimate>& lyapunov);

}  // namespace pwl
