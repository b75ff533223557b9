#include "pwl/attractor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "pwl/parallel.hpp"

namespace pwl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt12(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

bool primitive(const Word& w) {
    const std::size_t p = w.size();
    for (std::size_t d = 1; d < p; ++d) {
        if (p % d != 0) continue;
        bool repeats = true;
        for (std::size_t i = d; i < p && repeats; ++i) repeats = w.symbols[i] == w.symbols[i - d];
        if (repeats) return false;
    }
    return true;
}

// Preimage of `part` under x -> c x + d, intersected into [lo, hi] with closure flags.
void intersect_preimage(const Interval& part, double c, double d, Interval& acc, bool& empty) {
    Interval pre;
    if (c == 0.0) {
        if (!part.contains(d)) empty = true;
        return;
    }
    const double a = (part.lo - d) / c;
    const double b = (part.hi - d) / c;
    if (c > 0.0) {
        pre = {a, b, part.lo_closed, part.hi_closed};
    } else {
        pre = {b, a, part.hi_closed, part.lo_closed};
    }
    if (pre.lo > acc.lo || (pre.lo == acc.lo && !pre.lo_closed)) {
        acc.lo = pre.lo;
        acc.lo_closed = pre.lo_closed;
    }
    if (pre.hi < acc.hi || (pre.hi == acc.hi && !pre.hi_closed)) {
        acc.hi = pre.hi;
        acc.hi_closed = pre.hi_closed;
    }
    if (!(acc.lo < acc.hi)) empty = true;
}

// Lorenz absorbing interval or breakpoint hull, used to seed unbounded partitions.
double seed_extent(const PwlMap& map) {
    double e = 1.0;
    for (double b : map.breakpoints()) e = std::max(e, std::abs(b));
    for (const auto& br : map.branches()) e = std::max(e, std::abs(br.offset));
    return 2.0 * e;
}

std::vector<double> partition_seeds(const PwlMap& map, std::size_t per_partition) {
    const double extent = seed_extent(map);
    std::vector<double> seeds;
    for (std::size_t i = 0; i < map.size(); ++i) {
        Interval p = map.partition(i);
        if (!std::isfinite(p.lo)) p.lo = std::isfinite(p.hi) ? p.hi - extent : -extent;
        if (!std::isfinite(p.hi)) p.hi = p.lo + extent;
        for (double x : cell_centres(p.lo, p.hi, per_partition)) seeds.push_back(x);
    }
    return seeds;
}

// Smallest p whose last p states repeat one period earlier within tol.
std::size_t tail_period(const std::vector<double>& xs, std::size_t max_period, double tol) {
    const std::size_t n = xs.size();
    for (std::size_t p = 1; p <= max_period && 2 * p < n; ++p) {
        bool ok = true;
        for (std::size_t k = 0; k < p && ok; ++k) {
            const double a = xs[n - 1 - k];
            const double b = xs[n - 1 - k - p];
            ok = a == b || close_rel(a, b, tol);
        }
        if (ok) return p;
    }
    return 0;
}

// True when x sits in an outer partition whose branch pushes it monotonically
// outward for ever.
bool escapes_outward(const PwlMap& map, double x) {
    const std::size_t i = map.branch_index(x);
    const Branch& b = map.branch(i);
    const bool left = i == 0;
    const bool right = i + 1 == map.size();
    if (!left && !right) return false;
    if (b.slope == 1.0) return (left && b.offset < 0.0) || (right && b.offset > 0.0);
    if (!(b.slope > 1.0)) return false;
    const double p = b.offset / (1.0 - b.slope);
    return (left && x < p) || (right && x > p);
}

}  // namespace

std::string_view to_string(CycleKind kind) noexcept {
    switch (kind) {
        case CycleKind::NonhyperbolicSegment: return "NonhyperbolicSegment";
        case CycleKind::HyperbolicWouldBe: return "HyperbolicWouldBe";
    }
    return "?";
}

std::string_view to_string(Verdict verdict) noexcept {
    switch (verdict) {
        case Verdict::FixedPointO: return "FixedPointO";
        case Verdict::NonhyperbolicCycleSegments: return "NonhyperbolicCycleSegments";
        case Verdict::AttractingCycle: return "AttractingCycle";
        case Verdict::QuasiperiodicIntervals: return "QuasiperiodicIntervals";
        case Verdict::Chaotic: return "Chaotic";
        case Verdict::Divergent: return "Divergent";
    }
    return "?";
}

Word canonical_rotation(const Word& word) {
    Word best = word;
    Word rot = word;
    for (std::size_t i = 1; i < word.size(); ++i) {
        std::rotate(rot.symbols.begin(), rot.symbols.begin() + 1, rot.symbols.end());
        if (rot > best) best = rot;
    }
    return best;
}

std::optional<Interval> word_domain(const PwlMap& map, const Word& word) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Interval acc{-inf, inf, false, false};
    bool empty = false;
    double c = 1.0;
    double d = 0.0;
    for (std::size_t s : word.symbols) {
        if (s >= map.size()) throw Error(ErrorCode::UnknownSymbol, std::to_string(s));
        intersect_preimage(map.partition(s), c, d, acc, empty);
        if (empty) return std::nullopt;
        const Branch& b = map.branch(s);
        c = b.slope * c;
        d = b.slope * d + b.offset;
    }
    return acc;
}

std::vector<CycleFinding> detect_nonhyperbolic_cycles(const PwlMap& map, std::size_t max_period, double tol,
                                                      const CycleSearchOptions& options) {
    if (max_period == 0) return {};
    const double threshold = OrbitOptions{}.divergence_threshold;

    std::vector<double> log_slope(map.size());
    std::vector<int> negative(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        const double s = map.branch(i).slope;
        log_slope[i] = s == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::abs(s));
        negative[i] = s < 0.0 ? 1 : 0;
    }

    std::set<Word> candidates;
    for (double seed : partition_seeds(map, options.seeds_per_partition)) {
        double x = seed;
        bool bounded = true;
        for (std::size_t k = 0; k < options.transient && bounded; ++k) {
            x = map(x);
            bounded = std::isfinite(x) && std::abs(x) <= threshold && x != 0.0;
        }
        if (!bounded) continue;
        std::vector<std::size_t> sym;
        sym.reserve(options.steps);
        for (std::size_t k = 0; k < options.steps; ++k) {
            const std::size_t i = map.branch_index(x);
            sym.push_back(i);
            x = map.branch(i)(x);
            if (!std::isfinite(x) || std::abs(x) > threshold || x == 0.0) break;
        }
        // prefix sums give each window's |product| and sign without composing it
        std::vector<double> L(sym.size() + 1, 0.0);
        std::vector<int> N(sym.size() + 1, 0);
        for (std::size_t t = 0; t < sym.size(); ++t) {
            L[t + 1] = L[t] + log_slope[sym[t]];
            N[t + 1] = N[t] + negative[sym[t]];
        }
        for (std::size_t p = 1; p <= max_period; ++p) {
            for (std::size_t t = 0; t + p <= sym.size(); ++t) {
                if (!options.include_hyperbolic) {
                    if ((N[t + p] - N[t]) % 2 != 0) continue;
                    if (std::abs(L[t + p] - L[t]) > 1e-6) continue;
                }
                if (candidates.size() >= options.max_candidates) break;
                Word w;
                w.symbols.assign(sym.begin() + static_cast<std::ptrdiff_t>(t),
                                 sym.begin() + static_cast<std::ptrdiff_t>(t + p));
                if (!primitive(w)) continue;
                candidates.insert(canonical_rotation(w));
            }
        }
    }

    std::vector<CycleFinding> out;
    for (const Word& w : candidates) {
        const ComposedBranch composed = compose_word(map, w);
        CycleFinding f;
        f.word = w;
        f.slope_product = composed.slope;
        const bool unit = std::abs(composed.slope - 1.0) <= tol;
        f.kind = unit ? CycleKind::NonhyperbolicSegment : CycleKind::HyperbolicWouldBe;
        if (unit) {
            const auto dom = word_domain(map, w);
            if (!dom || !std::isfinite(dom->lo) || !std::isfinite(dom->hi)) continue;
            const double mid = dom->midpoint();
            if (!close_rel(composed(mid), mid, 1e-10)) continue;
            f.representative = *dom;
            double c = 1.0;
            double d = 0.0;
            for (std::size_t s : w.symbols) {
                double a = c * dom->lo + d;
                double b = c * dom->hi + d;
                if (a > b) std::swap(a, b);
                f.segments.push_back({a, b, true, true});
                const Branch& br = map.branch(s);
                c = br.slope * c;
                d = br.slope * d + br.offset;
            }
        } else if (!options.include_hyperbolic) {
            continue;
        }
        out.push_back(std::move(f));
    }
    std::sort(out.begin(), out.end(), [](const CycleFinding& a, const CycleFinding& b) {
        return a.word.size() != b.word.size() ? a.word.size() < b.word.size() : a.word < b.word;
    });
    return out;
}

double AttractorReport::bounded_orbit_limit() const noexcept {
    if (samples == 0 || !(min_abs_state > 0.0)) return std::numeric_limits<double>::infinity();
    return std::log(max_abs_state / min_abs_state) / static_cast<double>(samples);
}

std::vector<Interval> visited_cover(std::vector<double> points, double fraction,
                                    std::vector<std::size_t>* visits) {
    std::vector<Interval> out;
    if (visits) visits->clear();
    if (points.empty()) return out;
    std::sort(points.begin(), points.end());
    const double gap = fraction * (points.back() - points.front());
    Interval cur{points.front(), points.front(), true, true};
    std::size_t count = 1;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i] - cur.hi <= gap) {
            cur.hi = points[i];
            ++count;
        } else {
            out.push_back(cur);
            if (visits) visits->push_back(count);
            cur = {points[i], points[i], true, true};
            count = 1;
        }
    }
    out.push_back(cur);
    if (visits) visits->push_back(count);
    return out;
}

AttractorReport classify_attractor(const PwlMap& map, double x0, const Budget& budget) {
    AttractorReport rep;
    rep.lyapunov = kNaN;
    const double thr = budget.divergence_threshold;
    auto escaped = [thr](double x) { return !std::isfinite(x) || std::abs(x) > thr; };
    const bool origin_fixed = map.branch(map.branch_index(0.0)).homogeneous();

    double x = x0;
    if (escaped(x)) return rep;
    if (x == 0.0 && origin_fixed) {
        rep.verdict = Verdict::FixedPointO;
        return rep;
    }
    for (std::size_t k = 0; k < budget.transient; ++k) {
        x = map(x);
        if (escaped(x)) return rep;
        if (x == 0.0 && origin_fixed) {
            rep.verdict = Verdict::FixedPointO;
            return rep;
        }
    }

    const std::size_t S = std::max<std::size_t>(budget.samples, 2 * budget.max_period + 2);
    std::vector<double> xs;
    std::vector<std::size_t> sym;
    xs.reserve(S + 1);
    sym.reserve(S);
    xs.push_back(x);
    double log_sum = 0.0;
    for (std::size_t k = 0; k < S; ++k) {
        const std::size_t i = map.branch_index(x);
        const Branch& b = map.branch(i);
        log_sum += std::log(std::abs(b.slope));
        x = b(x);
        if (escaped(x)) return rep;
        sym.push_back(i);
        xs.push_back(x);
        if (x == 0.0 && origin_fixed) {
            rep.verdict = Verdict::FixedPointO;
            return rep;
        }
    }

    rep.samples = S;
    rep.lyapunov = log_sum / static_cast<double>(S);
    rep.min_abs_state = std::numeric_limits<double>::infinity();
    for (double v : xs) {
        rep.min_abs_state = std::min(rep.min_abs_state, std::abs(v));
        rep.max_abs_state = std::max(rep.max_abs_state, std::abs(v));
    }
    const bool homogeneous = map.homogeneous();
    if (homogeneous) rep.lyapunov_direct = std::log(std::abs(xs.back() / xs.front())) / static_cast<double>(S);

    // geometric collapse onto O, or slow escape, shows up as a large ratio between halves
    double h1 = 0.0;
    double h2 = 0.0;
    for (std::size_t k = 0; k <= S; ++k) {
        double& h = k <= S / 2 ? h1 : h2;
        h = std::max(h, std::abs(xs[k]));
    }
    if (origin_fixed && h2 <= 1e-3 * h1) {
        rep.verdict = Verdict::FixedPointO;
        return rep;
    }
    if (h2 >= 1e3 * h1 || escapes_outward(map, xs.back())) {
        rep.verdict = Verdict::Divergent;
        return rep;
    }

    auto cycle_verdict = [&](std::size_t p) {
        Word w;
        w.symbols.assign(sym.end() - static_cast<std::ptrdiff_t>(p), sym.end());
        rep.cycle_word = canonical_rotation(w);
        rep.slope_product = compose_word(map, w).slope;
        rep.period = p;
        rep.verdict = std::abs(rep.slope_product - 1.0) <= budget.product_tolerance
                          ? Verdict::NonhyperbolicCycleSegments
                          : Verdict::AttractingCycle;
        return rep;
    };

    if (const std::size_t p = tail_period(xs, budget.max_period, budget.period_tolerance); p != 0) {
        return cycle_verdict(p);
    }
    if (!homogeneous && rep.lyapunov > budget.chaos_threshold) {
        rep.verdict = Verdict::Chaotic;
        rep.cover = visited_cover(xs, budget.cover_merge_fraction, &rep.cover_visits);
        return rep;
    }
    if (!homogeneous && rep.lyapunov < -budget.chaos_threshold) {
        // contracting but not yet settled to 1e-10: accept a looser match
        if (const std::size_t p = tail_period(xs, budget.max_period, 1e-6); p != 0) return cycle_verdict(p);
    }

    rep.verdict = Verdict::QuasiperiodicIntervals;
    rep.cover = visited_cover(xs, budget.cover_merge_fraction, &rep.cover_visits);
    if (map.size() == 2 && homogeneous) {
        try {
            const CircleMap circle = circle_reduction(map);
            rep.rotation = rotation_number(circle, S);
        } catch (const Error&) {
        }
    }
    return rep;
}

std::optional<ReturnMap> auto_return_map(const PwlMap& map, const AttractorReport& report, std::size_t attempts,
                                         const ReturnOptions& options) {
    if (report.cover.empty()) return std::nullopt;
    const double span = report.cover.back().hi - report.cover.front().lo;
    // a short sample resolves slow orbits into many thin pieces; coarser
    // regroupings of the cover give wider intervals with shorter returns
    for (double fraction : {0.0, 1e-2, 5e-2}) {
        std::vector<Interval> groups;
        std::vector<std::size_t> visits;
        for (std::size_t i = 0; i < report.cover.size(); ++i) {
            const Interval& c = report.cover[i];
            if (!groups.empty() && c.lo - groups.back().hi <= fraction * span) {
                groups.back().hi = c.hi;
                visits.back() += report.cover_visits[i];
            } else {
                groups.push_back(c);
                visits.push_back(report.cover_visits[i]);
            }
        }
        std::vector<std::size_t> order;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            if (groups[i].length() > 0.0) order.push_back(i);
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return visits[a] > visits[b]; });
        if (order.size() > attempts) order.resize(attempts);
        for (std::size_t i : order) {
            try {
                return first_return_map(map, groups[i], options);
            } catch (const Error&) {
            }
        }
    }
    return std::nullopt;
}

std::vector<double> cell_centres(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    const double h = (hi - lo) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (static_cast<double>(i) + 0.5) * h;
    return v;
}

BasinTable basin_probe(const PwlMap& map, const std::vector<double>& grid, const Budget& budget, unsigned threads) {
    BasinTable table;
    table.samples.resize(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        table.samples[i] = {grid[i], classify_attractor(map, grid[i], budget)};
    });
    for (const auto& s : table.samples) {
        const Verdict v = s.report.verdict;
        const std::size_t p = s.report.period;
        if (!table.runs.empty() && table.runs.back().verdict == v && table.runs.back().period == p) {
            table.runs.back().hi = s.x0;
            ++table.runs.back().count;
        } else {
            table.runs.push_back({v, p, s.x0, s.x0, 1});
        }
    }
    return table;
}

SensitivityReport sensitivity_probe(const PwlMap& map, double x0, double spacing, double delta, std::size_t steps) {
    if (!(spacing > 0.0) || !(delta > spacing)) {
        throw Error(ErrorCode::InvalidArgument, "sensitivity_probe needs 0 < spacing < delta");
    }
    const double thr = OrbitOptions{}.divergence_threshold;
    SensitivityReport rep;
    rep.delta = delta;
    rep.reapproach_threshold = 10.0 * spacing * map.max_abs_slope();
    double x = x0;
    double y = x0 + spacing;
    for (std::size_t k = 1; k <= steps; ++k) {
        x = map(x);
        y = map(y);
        if (!std::isfinite(x) || !std::isfinite(y) || std::abs(x) > thr || std::abs(y) > thr) {
            throw Error(ErrorCode::Diverged, "orbit left the divergence threshold at step " + std::to_string(k));
        }
        const double sep = std::abs(x - y);
        rep.max_separation = std::max(rep.max_separation, sep);
        if (!rep.first_separation_step) {
            if (sep > delta) rep.first_separation_step = k;
        } else if (!rep.reapproach_step && sep < rep.reapproach_threshold) {
            rep.reapproach_step = k;
        }
    }
    return rep;
}

std::string report_csv_row(double seed, const AttractorReport& r) {
    std::ostringstream out;
    out << fmt12(seed) << ',' << to_string(r.verdict) << ',' << r.period << ',';
    if (!std::isnan(r.lyapunov)) out << fmt12(r.lyapunov);
    out << ',';
    if (r.rotation) out << fmt12(r.rotation->value);
    out << ',';
    for (std::size_t i = 0; i < r.cover.size(); ++i) {
        if (i) out << ';';
        out << fmt12(r.cover[i].lo) << ':' << fmt12(r.cover[i].hi);
    }
    return out.str();
}

std::string basin_csv(const BasinTable& table) {
    std::string out = kReportCsvHeader;
    out += '\n';
    for (const auto& s : table.samples) {
        out += report_csv_row(s.x0, s.report);
        out += '\n';
    }
    return out;
}

}  // namespace pwl
