#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pwl/core.hpp"

namespace pwl {

/// Symbolic itinerary: indices of the branches visited, in order.
struct Word {
    std::vector<std::size_t> symbols;

    std::size_t size() const noexcept { return symbols.size(); }
    bool empty() const noexcept { return symbols.empty(); }
    friend bool operator==(const Word&, const Word&) = default;
    friend auto operator<=>(const Word&, const Word&) = default;
};

/// Concatenated branch labels, e.g. "RRMLM".
std::string format_word(const PwlMap& map, const Word& word);

/// Parses label strings with optional grouping and powers, e.g.
/// "R^2ML^2(MRML^5)^3M". Labels are matched longest-first. Throws
/// UnknownSymbol or ParseError.
Word parse_word(const PwlMap& map, std::string_view text);

/// Labels visited over `length` steps from x0. Throws Diverged if the orbit
/// leaves the default divergence threshold.
Word itinerary(const PwlMap& map, double x0, std::size_t length);

/// Single affine map obtained by following a word.
struct ComposedBranch {
    Word word;
    double slope = 1.0;
    double offset = 0.0;

    double operator()(double x) const noexcept { return slope * x + offset; }
};

/// slope is the product of branch slopes taken in word order; offset is the
/// affine fold. Throws UnknownSymbol for indices outside the map.
ComposedBranch compose_word(const PwlMap& map, const Word& word);

enum class BoundaryKind {
    Discontinuity,    // orbit of the boundary lands on a breakpoint of the map
    IntervalEndpoint  // orbit of the boundary lands on an endpoint of the interval
};

struct ReturnPiece {
    Interval domain;
    ComposedBranch branch;
};

/// First-return map induced on an interval.
struct ReturnMap {
    Interval interval;
    std::vector<ReturnPiece> pieces;
    /// boundaries[i] separates pieces[i] and pieces[i+1].
    std::vector<double> boundaries;
    std::vector<BoundaryKind> boundary_kinds;

    /// Piece owning x (x inside the interval); pieces are half-open to the right.
    std::size_t piece_index(double x) const noexcept;
    double operator()(double x) const noexcept;
};

struct ReturnOptions {
    std::size_t max_word_length = 10000;
    std::size_t max_pieces = 100000;
    double divergence_threshold = 1e8;
};

/// Exact construction by backward mapping of breakpoints: each sub-interval
/// is pushed forward as one affine image and split at affine preimages of
/// breakpoints (and of the interval endpoints) until every part is back in
/// the interval. Throws NoReturn, DivergedFromInterval or PieceLimitExceeded.
ReturnMap first_return_map(const PwlMap& map, const Interval& interval,
                           const ReturnOptions& options = {});

/// Brute-force first return of a single point: word and landing state.
/// nullopt if no return within max_steps.
struct PointReturn {
    Word word;
    double value = 0.0;
};
std::optional<PointReturn> brute_force_return(const PwlMap& map, const Interval& interval,
                                              double x, std::size_t max_steps);

struct OracleReport {
    std::size_t samples = 0;
    std::size_t word_mismatches = 0;
    std::size_t no_returns = 0;
    double max_relative_error = 0.0;

    bool clean(double tolerance) const noexcept {
        return word_mismatches == 0 && no_returns == 0 && max_relative_error <= tolerance;
    }
};

/// Compares composed branches against brute-force iteration on random
/// interior points of each piece. Disagreements are counted, never thrown.
OracleReport return_oracle_check(const PwlMap& map, const ReturnMap& return_map,
                                 std::size_t samples_per_piece, std::uint64_t seed = 1);

/// Forward images of both one-sided limit values at every breakpoint.
struct CriticalImage {
    double value = 0.0;
    std::size_t breakpoint = 0;
    Side side = Side::Left;
    std::size_t step = 0;  // 0 is the one-sided limit itself
};
std::vector<CriticalImage> critical_images(const PwlMap& map, std::size_t steps);

struct ReturnSearchOptions {
    std::size_t critical_steps = 400;
    std::size_t candidates_per_end = 12;
    double match_tolerance = 1e-12;  // relative, on endpoint images
    ReturnOptions return_options{2000, 64, 1e8};
};

/// Looks for an interval near `approximate` whose ends are critical images
/// and whose first-return map is a two-piece Lorenz-type map, i.e. the two
/// one-sided images of its inner discontinuity are the interval endpoints.
std::optional<ReturnMap> search_return_interval(const PwlMap& map, const Interval& approximate,
                                                double window,
                                                const ReturnSearchOptions& options = {});

/// Text dump: one line per piece, "lo hi word slope offset", doubles written
/// with 17 significant digits.
std::string serialize_return_map(const PwlMap& map, const ReturnMap& return_map);

}  // namespace pwl
