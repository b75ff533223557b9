#include "pwl/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace pwl {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonMonotoneBreakpoints: return "NonMonotoneBreakpoints";
        case ErrorCode::BranchCountMismatch: return "BranchCountMismatch";
        case ErrorCode::ClosureCountMismatch: return "ClosureCountMismatch";
        case ErrorCode::DuplicateLabel: return "DuplicateLabel";
        case ErrorCode::NonFiniteParameter: return "NonFiniteParameter";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::NonFiniteState: return "NonFiniteState";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Diverged: return "Diverged";
        case ErrorCode::UnknownSymbol: return "UnknownSymbol";
        case ErrorCode::NoReturn: return "NoReturn";
        case ErrorCode::DivergedFromInterval: return "DivergedFromInterval";
        case ErrorCode::PieceLimitExceeded: return "PieceLimitExceeded";
        case ErrorCode::InvalidLorenzMap: return "InvalidLorenzMap";
        case ErrorCode::NotLorenz: return "NotLorenz";
        case ErrorCode::NotReducible: return "NotReducible";
        case ErrorCode::NotCircle: return "NotCircle";
        case ErrorCode::NotGap: return "NotGap";
        case ErrorCode::HitOrigin: return "HitOrigin";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::OffsetsWouldArise: return "OffsetsWouldArise";
        case ErrorCode::S2MismatchesS1: return "S2MismatchesS1";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Interval make_interval(double lo, double hi, bool lo_closed, bool hi_closed) {
    if (!(lo < hi)) {
        throw Error(ErrorCode::InvalidArgument, "interval requires lo < hi");
    }
    return Interval{lo, hi, lo_closed, hi_closed};
}

PwlMap::PwlMap(std::vector<double> breakpoints, std::vector<Branch> branches,
               std::vector<Side> closures)
    : breakpoints_(std::move(breakpoints)),
      branches_(std::move(branches)),
      closures_(std::move(closures)) {
    if (branches_.size() != breakpoints_.size() + 1) {
        throw Error(ErrorCode::BranchCountMismatch,
                    std::to_string(branches_.size()) + " branches for " +
                        std::to_string(breakpoints_.size()) + " breakpoints");
    }
    if (closures_.size() != breakpoints_.size()) {
        throw Error(ErrorCode::ClosureCountMismatch,
                    std::to_string(closures_.size()) + " closures for " +
                        std::to_string(breakpoints_.size()) + " breakpoints");
    }
    for (double b : breakpoints_) {
        if (!std::isfinite(b)) throw Error(ErrorCode::NonFiniteParameter, "breakpoint");
    }
    for (const auto& br : branches_) {
        if (!std::isfinite(br.slope) || !std::isfinite(br.offset)) {
            throw Error(ErrorCode::NonFiniteParameter, "branch '" + br.label + "'");
        }
    }
    for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
        if (!(breakpoints_[i - 1] < breakpoints_[i])) {
            throw Error(ErrorCode::NonMonotoneBreakpoints,
                        "breakpoint " + std::to_string(i) + " does not exceed its predecessor");
        }
    }
    std::set<std::string> seen;
    for (auto& br : branches_) {
        if (br.label.empty()) br.label = std::to_string(&br - branches_.data());
        if (!seen.insert(br.label).second) {
            throw Error(ErrorCode::DuplicateLabel, br.label);
        }
    }
}

std::size_t PwlMap::branch_index(double x) const noexcept {
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
    auto i = static_cast<std::size_t>(it - breakpoints_.begin());
    if (it != breakpoints_.end() && *it == x && closures_[i] == Side::Right) return i + 1;
    return i;
}

std::optional<std::size_t> PwlMap::find_label(std::string_view label) const noexcept {
    for (std::size_t i = 0; i < branches_.size(); ++i) {
        if (branches_[i].label == label) return i;
    }
    return std::nullopt;
}

Interval PwlMap::partition(std::size_t i) const {
    if (i >= branches_.size()) throw Error(ErrorCode::InvalidArgument, "branch index");
    constexpr double inf = std::numeric_limits<double>::infinity();
    Interval iv{-inf, inf, false, false};
    if (i > 0) {
        iv.lo = breakpoints_[i - 1];
        iv.lo_closed = closures_[i - 1] == Side::Right;
    }
    if (i < breakpoints_.size()) {
        iv.hi = breakpoints_[i];
        iv.hi_closed = closures_[i] == Side::Left;
    }
    return iv;
}

bool PwlMap::homogeneous() const noexcept {
    return std::all_of(branches_.begin(), branches_.end(),
                       [](const Branch& b) { return b.homogeneous(); });
}

double PwlMap::max_abs_slope() const noexcept {
    double m = 0.0;
    for (const auto& b : branches_) m = std::max(m, std::abs(b.slope));
    return m;
}

PwlMap build_map(std::vector<double> breakpoints, std::vector<Branch> branches,
                 std::vector<Side> closures) {
    return PwlMap(std::move(breakpoints), std::move(branches), std::move(closures));
}

PwlMap build_map(std::vector<double> breakpoints, std::span<const double> slopes,
                 std::span<const double> offsets, std::vector<std::string> labels,
                 std::vector<Side> closures) {
    if (slopes.size() != offsets.size() || slopes.size() != labels.size()) {
        throw Error(ErrorCode::BranchCountMismatch, "slopes, offsets and labels differ in length");
    }
    std::vector<Branch> branches;
    branches.reserve(slopes.size());
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        branches.push_back({slopes[i], offsets[i], std::move(labels[i])});
    }
    return PwlMap(std::move(breakpoints), std::move(branches), std::move(closures));
}

double evaluate(const PwlMap& map, double x) {
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteInput, "evaluate");
    return map(x);
}

Orbit iterate(const PwlMap& map, double x0, std::size_t n, const OrbitOptions& options) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "iterate needs n >= 1");
    if (!(options.divergence_threshold > 0.0) || !(options.origin_tolerance > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "thresholds must be positive");
    }
    if (!std::isfinite(x0)) throw Error(ErrorCode::NonFiniteInput, "x0");

    Orbit orbit;
    orbit.states.reserve(n + 1);
    orbit.word.reserve(n);
    orbit.states.push_back(x0);
    double x = x0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = map.branch_index(x);
        const Branch& br = map.branch(i);
        const double next = br(x);
        if (!std::isfinite(next)) {
            throw Error(ErrorCode::NonFiniteState, "step " + std::to_string(k + 1));
        }
        orbit.word.push_back(i);
        orbit.states.push_back(next);
        if (std::abs(next) > options.divergence_threshold) {
            orbit.terminated = Termination::Diverged;
            return orbit;
        }
        x = next;
        const Branch& owner = map.branch(map.branch_index(x));
        if (owner(x) == x ||
            (owner.homogeneous() && std::abs(x) < options.origin_tolerance &&
             std::abs(owner.slope) < 1.0)) {
            orbit.terminated = Termination::ConvergedToFixedPoint;
            return orbit;
        }
    }
    orbit.terminated = Termination::BudgetExhausted;
    return orbit;
}

std::vector<double> trajectory(const PwlMap& map, double x0, std::size_t n) {
    if (!std::isfinite(x0)) throw Error(ErrorCode::NonFiniteInput, "x0");
    std::vector<double> xs;
    xs.reserve(n);
    double x = x0;
    for (std::size_t k = 0; k < n; ++k) {
        x = map(x);
        if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteState, "step " + std::to_string(k + 1));
        xs.push_back(x);
    }
    return xs;
}

HomogeneityReport homogeneity_check(const PwlMap& map) {
    HomogeneityReport report;
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (!map.branch(i).homogeneous()) report.offending.push_back(i);
    }
    if (!report.offending.empty()) {
        report.kind = HomogeneityKind::HasOffsets;
        return report;
    }
    const auto bps = map.breakpoints();
    const bool discontinuous_away_from_origin =
        std::any_of(bps.begin(), bps.end(), [](double b) { return b != 0.0; });
    report.kind = discontinuous_away_from_origin ? HomogeneityKind::Definition1Admissible
                                                 : HomogeneityKind::NoDiscontinuity;
    return report;
}

std::vector<BranchFixedPoint> branch_fixed_points(const PwlMap& map) {
    std::vector<BranchFixedPoint> out;
    out.reserve(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        const Branch& br = map.branch(i);
        BranchFixedPoint fp;
        fp.branch = i;
        fp.label = br.label;
        fp.hyperbolic = std::abs(br.slope) != 1.0;
        if (br.slope == 1.0) {
            fp.kind = br.offset == 0.0 ? FixedPointKind::LineOfFixedPoints
                                       : FixedPointKind::NoFixedPoint;
            // every point of the partition is fixed when the line is the identity
            fp.actual = fp.kind == FixedPointKind::LineOfFixedPoints;
        } else {
            fp.value = br.offset / (1.0 - br.slope);
            fp.actual = map.branch_index(fp.value) == i;
        }
        out.push_back(std::move(fp));
    }
    return out;
}

}  // namespace pwl
