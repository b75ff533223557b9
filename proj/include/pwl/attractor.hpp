#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pwl/circle.hpp"
#include "pwl/core.hpp"
#include "pwl/symbolic.hpp"

namespace pwl {

enum class CycleKind {
    NonhyperbolicSegment,  // |product - 1| <= tol: an interval of periodic points
    HyperbolicWouldBe      // any periodic point must sit at 0
};
std::string_view to_string(CycleKind kind) noexcept;

struct CycleFinding {
    Word word;  // canonical rotation
    double slope_product = 0.0;
    CycleKind kind = CycleKind::HyperbolicWouldBe;
    /// points whose itinerary repeats `word`; set for NonhyperbolicSegment
    std::optional<Interval> representative;
    /// one segment per rotation of the word, in cycle order starting at representative
    std::vector<Interval> segments;

    std::size_t period() const noexcept { return word.size(); }
};

struct CycleSearchOptions {
    std::size_t seeds_per_partition = 24;
    std::size_t transient = 1000;
    std::size_t steps = 4000;
    std::size_t max_candidates = 200000;
    bool include_hyperbolic = false;
};

/// Words of length <= max_period observed along orbits seeded in every
/// partition, kept when |slope product - 1| <= tol and realizable by an
/// interval of points.
std::vector<CycleFinding> detect_nonhyperbolic_cycles(const PwlMap& map, std::size_t max_period,
                                                      double tol = 1e-9,
                                                      const CycleSearchOptions& options = {});

/// Rotation of the word that is lexicographically largest in branch order.
Word canonical_rotation(const Word& word);

/// Interval of x whose orbit follows `word` once, or nullopt if empty.
std::optional<Interval> word_domain(const PwlMap& map, const Word& word);

enum class Verdict {
    FixedPointO,
    NonhyperbolicCycleSegments,
    AttractingCycle,  // hyperbolic cycle, only reachable with offsets
    QuasiperiodicIntervals,
    Chaotic,
    Divergent
};
std::string_view to_string(Verdict verdict) noexcept;

struct Budget {
    std::size_t transient = 1000;
    std::size_t samples = 10000;
    std::size_t max_period = 64;
    double divergence_threshold = 1e8;
    double period_tolerance = 1e-10;   // relative
    double product_tolerance = 1e-9;
    double chaos_threshold = 1e-3;     // lambda above this counts as positive
    double cover_merge_fraction = 1e-3;
};

struct AttractorReport {
    Verdict verdict = Verdict::Divergent;
    std::size_t period = 0;  // 0 unless a cycle verdict
    Word cycle_word;
    double slope_product = 0.0;
    /// mean log|slope| over the sample window; NaN when undefined
    double lyapunov = 0.0;
    /// (1/n) log|x_end / x_start| over the window, homogeneous maps only
    std::optional<double> lyapunov_direct;
    std::optional<RotationEstimate> rotation;
    double min_abs_state = 0.0;
    double max_abs_state = 0.0;
    std::size_t samples = 0;
    std::vector<Interval> cover;
    std::vector<std::size_t> cover_visits;  // sample points in each cover interval

    bool bounded() const noexcept { return verdict != Verdict::Divergent; }
    /// log(M/m)/n over the sample window
    double bounded_orbit_limit() const noexcept;
};

AttractorReport classify_attractor(const PwlMap& map, double x0, const Budget& budget = {});

/// Sorted orbit points merged into intervals when gaps are <= fraction * span.
std::vector<Interval> visited_cover(std::vector<double> points, double fraction,
                                    std::vector<std::size_t>* visits = nullptr);

/// First-return map on one cover interval of a bounded report, trying the
/// most visited intervals first. nullopt when none of `attempts` builds.
std::optional<ReturnMap> auto_return_map(const PwlMap& map, const AttractorReport& report,
                                         std::size_t attempts = 4, const ReturnOptions& options = {});

struct BasinSample {
    double x0 = 0.0;
    AttractorReport report;
};

struct BasinRun {
    Verdict verdict = Verdict::Divergent;
    std::size_t period = 0;
    double lo = 0.0;  // first seed of the run
    double hi = 0.0;  // last seed of the run
    std::size_t count = 0;
};

struct BasinTable {
    std::vector<BasinSample> samples;  // in grid order
    std::vector<BasinRun> runs;        // adjacent equal verdicts merged
};

BasinTable basin_probe(const PwlMap& map, const std::vector<double>& grid, const Budget& budget = {},
                       unsigned threads = 0);

/// n points with spacing (hi - lo)/n, at cell centres, so neither end is sampled.
std::vector<double> cell_centres(double lo, double hi, std::size_t n);

struct SensitivityReport {
    double delta = 0.0;
    std::optional<std::size_t> first_separation_step;
    std::optional<std::size_t> reapproach_step;
    double max_separation = 0.0;
    double reapproach_threshold = 0.0;

    bool weakly_sensitive() const noexcept { return first_separation_step && reapproach_step; }
};

/// Lockstep orbits of x0 and x0 + spacing. Throws Diverged.
SensitivityReport sensitivity_probe(const PwlMap& map, double x0, double spacing, double delta,
                                    std::size_t steps);

/// CSV with columns seed,verdict,period,lambda,rho,intervals; intervals as lo:hi;lo:hi
std::string basin_csv(const BasinTable& table);
std::string report_csv_row(double seed, const AttractorReport& report);
inline constexpr const char* kReportCsvHeader = "seed,verdict,period,lambda,rho,intervals";

}  // namespace pwl
