#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pwl/error.hpp"

namespace pwl {

/// One affine piece x' = slope * x + offset.
struct Branch {
    double slope = 1.0;
    double offset = 0.0;
    std::string label;

    double operator()(double x) const noexcept { return slope * x + offset; }
    bool homogeneous() const noexcept { return offset == 0.0; }

    friend bool operator==(const Branch&, const Branch&) = default;
};

/// Which of the two adjacent branches owns the breakpoint value itself.
enum class Side { Left, Right };

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_closed = true;
    bool hi_closed = true;

    double length() const noexcept { return hi - lo; }
    double midpoint() const noexcept { return 0.5 * (lo + hi); }
    bool contains(double x) const noexcept {
        return (x > lo || (lo_closed && x == lo)) && (x < hi || (hi_closed && x == hi));
    }
    bool contains_interior(double x) const noexcept { return x > lo && x < hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Throws InvalidArgument unless lo < hi.
Interval make_interval(double lo, double hi, bool lo_closed = true, bool hi_closed = true);

/// A piecewise-linear map on the real line with finitely many breakpoints.
/// Immutable once built; branch i covers the partition between breakpoint
/// i-1 and breakpoint i.
class PwlMap {
public:
    PwlMap(std::vector<double> breakpoints, std::vector<Branch> branches,
           std::vector<Side> closures);

    std::span<const double> breakpoints() const noexcept { return breakpoints_; }
    std::span<const Branch> branches() const noexcept { return branches_; }
    std::span<const Side> closures() const noexcept { return closures_; }
    std::size_t size() const noexcept { return branches_.size(); }
    const Branch& branch(std::size_t i) const { return branches_.at(i); }

    /// Index of the branch owning x; breakpoint values resolve via closures.
    std::size_t branch_index(double x) const noexcept;
    /// Finds a branch by label; nullopt when no branch carries it.
    std::optional<std::size_t> find_label(std::string_view label) const noexcept;

    /// Partition of branch i as an interval with infinite outer ends.
    Interval partition(std::size_t i) const;

    double operator()(double x) const noexcept { return branches_[branch_index(x)](x); }

    bool homogeneous() const noexcept;
    double max_abs_slope() const noexcept;

    friend bool operator==(const PwlMap&, const PwlMap&) = default;

private:
    std::vector<double> breakpoints_;
    std::vector<Branch> branches_;
    std::vector<Side> closures_;
};

/// Validating constructor: NonMonotoneBreakpoints, BranchCountMismatch,
/// ClosureCountMismatch, DuplicateLabel, NonFiniteParameter.
PwlMap build_map(std::vector<double> breakpoints, std::vector<Branch> branches,
                 std::vector<Side> closures);

/// Convenience for maps given as parallel slope/offset/label arrays.
PwlMap build_map(std::vector<double> breakpoints, std::span<const double> slopes,
                 std::span<const double> offsets, std::vector<std::string> labels,
                 std::vector<Side> closures);

/// Throws NonFiniteInput for non-finite x.
double evaluate(const PwlMap& map, double x);

enum class Termination { BudgetExhausted, Diverged, ConvergedToFixedPoint };

struct OrbitOptions {
    double divergence_threshold = 1e8;
    double origin_tolerance = 1e-12;
};

struct Orbit {
    std::vector<double> states;
    std::vector<std::size_t> word;  // branch index applied at each step
    Termination terminated = Termination::BudgetExhausted;
};

/// Iterates at most n steps. Stops on |x| > divergence_threshold, or once the
/// state sits on a fixed point of its owning branch (exactly, or within
/// origin_tolerance of the origin under a contracting linear branch).
/// Throws NonFiniteState if an update overflows.
Orbit iterate(const PwlMap& map, double x0, std::size_t n, const OrbitOptions& options = {});

/// Plain n-step trajectory x_1..x_n with no early termination.
std::vector<double> trajectory(const PwlMap& map, double x0, std::size_t n);

enum class HomogeneityKind { Definition1Admissible, HasOffsets, NoDiscontinuity };

struct HomogeneityReport {
    HomogeneityKind kind = HomogeneityKind::Definition1Admissible;
    std::vector<std::size_t> offending;  // branches with nonzero offset

    bool admissible() const noexcept { return kind == HomogeneityKind::Definition1Admissible; }
};

/// Admissible iff every offset is exactly zero and some breakpoint is nonzero.
HomogeneityReport homogeneity_check(const PwlMap& map);

enum class FixedPointKind { Unique, LineOfFixedPoints, NoFixedPoint };

struct BranchFixedPoint {
    std::size_t branch = 0;
    std::string label;
    FixedPointKind kind = FixedPointKind::Unique;
    double value = 0.0;
    bool actual = false;
    bool hyperbolic = true;
};

std::vector<BranchFixedPoint> branch_fixed_points(const PwlMap& map);

}  // namespace pwl
