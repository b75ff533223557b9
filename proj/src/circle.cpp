#include "pwl/circle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace pwl {

namespace {

std::string fmt12(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::vector<Interval> merge_open(std::vector<Interval> v) {
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    for (const auto& iv : v) {
        if (!out.empty() && iv.lo <= out.back().hi) {
            out.back().hi = std::max(out.back().hi, iv.hi);
        } else {
            out.push_back(iv);
        }
    }
    return out;
}

ComposedBranch homogeneous_branch(double slope, std::vector<std::size_t> word) {
    ComposedBranch c;
    c.word.symbols = std::move(word);
    c.slope = slope;
    return c;
}

}  // namespace

LorenzMap make_lorenz_map(double a_left, double a_right, double mu_left, double mu_right) {
    if (!(a_left > 0.0) || !(a_right > 0.0)) {
        throw Error(ErrorCode::InvalidLorenzMap, "Lorenz slopes must be positive");
    }
    if (!(mu_right < mu_left)) throw Error(ErrorCode::InvalidLorenzMap, "requires mu_R < mu_L");
    if (!std::isfinite(mu_left) || !std::isfinite(mu_right) || !std::isfinite(a_left) || !std::isfinite(a_right)) {
        throw Error(ErrorCode::NonFiniteParameter, "Lorenz map");
    }
    return {a_left, a_right, mu_left, mu_right};
}

std::string_view to_string(LorenzKind kind) noexcept {
    switch (kind) {
        case LorenzKind::Gap: return "Gap";
        case LorenzKind::Circle: return "Circle";
        case LorenzKind::Overlap: return "Overlap";
    }
    return "?";
}

std::string_view to_string(ReductionCase tag) noexcept {
    switch (tag) {
        case ReductionCase::PositiveSlopes: return "i1";
        case ReductionCase::MixedSigns: return "i2";
        case ReductionCase::NegativeSlopes: return "i3";
        case ReductionCase::FromReturnMap: return "return-map";
    }
    return "?";
}

LorenzClassification classify_lorenz(const LorenzMap& f, double tolerance) {
    LorenzClassification c;
    c.left_commutator = f.right(f.left(0.0));
    c.right_commutator = f.left(f.right(0.0));
    const double d = c.difference();
    if (std::abs(d) <= tolerance) {
        c.kind = LorenzKind::Circle;
    } else if (d < 0.0) {
        c.kind = LorenzKind::Gap;
        c.region = Interval{c.left_commutator, c.right_commutator, false, false};
    } else {
        c.kind = LorenzKind::Overlap;
        c.region = Interval{c.right_commutator, c.left_commutator, true, true};
    }
    return c;
}

LorenzMap CircleMap::as_lorenz() const noexcept {
    const double c = discontinuity;
    return {left.slope, right.slope, left(c) - c, right(c) - c};
}

CircleMap circle_map_from_return_map(const ReturnMap& return_map) {
    if (return_map.pieces.size() != 2) {
        throw Error(ErrorCode::NotLorenz,
                    "return map has " + std::to_string(return_map.pieces.size()) + " pieces, need 2");
    }
    const auto& l = return_map.pieces[0].branch;
    const auto& r = return_map.pieces[1].branch;
    if (!(l.slope > 0.0) || !(r.slope > 0.0)) throw Error(ErrorCode::NotLorenz, "return branches are not increasing");
    CircleMap cm;
    cm.domain = return_map.interval;
    cm.discontinuity = return_map.boundaries.front();
    cm.left = l;
    cm.right = r;
    cm.tag = ReductionCase::FromReturnMap;
    return cm;
}

LorenzMap lorenz_from_return_map(const ReturnMap& return_map) {
    const LorenzMap f = circle_map_from_return_map(return_map).as_lorenz();
    return make_lorenz_map(f.a_left, f.a_right, f.mu_left, f.mu_right);
}

CircleMap circle_reduction(const PwlMap& map) {
    if (map.size() != 2) throw Error(ErrorCode::NotReducible, "need exactly two branches");
    if (!map.homogeneous()) throw Error(ErrorCode::NotReducible, "branches carry offsets");
    double h = map.breakpoints()[0];
    if (h == 0.0) throw Error(ErrorCode::NotReducible, "discontinuity at the fixed point");
    double sl = map.branch(0).slope;
    double sr = map.branch(1).slope;
    const bool mirrored = h < 0.0;
    if (mirrored) {
        // x -> -x swaps the branches and moves the discontinuity to -h > 0
        std::swap(sl, sr);
        h = -h;
    }
    if (sl == 0.0 || sr == 0.0) throw Error(ErrorCode::NotReducible, "zero slope: only the fixed point O is bounded");
    if (std::abs(sl) == 1.0 || std::abs(sr) == 1.0) {
        throw Error(ErrorCode::NotReducible, "unit slope: nonhyperbolic fixed points or 2-cycles only");
    }
    // branch indices of the mirrored frame map back through i -> 1 - i
    const std::size_t L = mirrored ? 1 : 0;
    const std::size_t R = mirrored ? 0 : 1;

    CircleMap cm;
    cm.discontinuity = h;
    if (sl > 0.0 && sr > 0.0) {
        if (!(sl > 1.0 && 1.0 > sr)) throw Error(ErrorCode::NotReducible, "positive slopes need s_L > 1 > s_R");
        cm.tag = ReductionCase::PositiveSlopes;
        cm.domain = Interval{sr * h, sl * h, true, true};
        cm.left = homogeneous_branch(sl, {L});
        cm.right = homogeneous_branch(sr, {R});
    } else if (sl < 0.0 && sr > 0.0) {
        if (!(sl * sl > 1.0 && 1.0 > sr)) throw Error(ErrorCode::NotReducible, "mixed signs need s_L^2 > 1 > s_R");
        cm.tag = ReductionCase::MixedSigns;
        cm.domain = Interval{sr * h, sl * sl * h, true, true};
        cm.left = homogeneous_branch(sl * sl, {L, L});
        cm.right = homogeneous_branch(sr, {R});
    } else if (sl < 0.0 && sr < 0.0) {
        if (!(sl * sl > 1.0 && 1.0 > sl * sr)) {
            throw Error(ErrorCode::NotReducible, "negative slopes need s_L^2 > 1 > s_L s_R");
        }
        cm.tag = ReductionCase::NegativeSlopes;
        cm.domain = Interval{sl * sr * h, sl * sl * h, true, true};
        cm.left = homogeneous_branch(sl * sl, {L, L});
        cm.right = homogeneous_branch(sr * sl, {R, L});
    } else {
        throw Error(ErrorCode::NotReducible, "s_L > 0 > s_R: orbits settle on O or diverge");
    }

    const double rl = cm.right(cm.left(h));
    const double lr = cm.left(cm.right(h));
    if (std::abs(rl - lr) > 1e-12 * std::max(std::abs(rl), std::abs(lr))) {
        throw Error(ErrorCode::NotReducible, "commutation identity failed");
    }

    if (mirrored) {
        // conjugate back: G(x) = -F(-x) swaps roles of the two branches
        CircleMap back;
        back.tag = cm.tag;
        back.mirrored = true;
        back.domain = Interval{-cm.domain.hi, -cm.domain.lo, true, true};
        back.discontinuity = -cm.discontinuity;
        back.left = cm.right;
        back.right = cm.left;
        return back;
    }
    return cm;
}

std::optional<Fraction> rational_guess(double x, long long denominator_cap, double window) {
    if (!std::isfinite(x) || denominator_cap < 1) return std::nullopt;
    long double y = x;
    long long p_prev = 1, q_prev = 0;
    long long p = static_cast<long long>(std::floor(y));
    long long q = 1;
    long double frac = y - std::floor(y);
    while (true) {
        if (q > denominator_cap) return std::nullopt;
        if (std::abs(static_cast<long double>(x) - static_cast<long double>(p) / q) <= window) return Fraction{p, q};
        if (frac == 0.0L) return std::nullopt;
        y = 1.0L / frac;
        const long long a = static_cast<long long>(std::floor(y));
        frac = y - std::floor(y);
        const long long p_next = a * p + p_prev;
        const long long q_next = a * q + q_prev;
        if (q_next < 0 || p_next < 0) return std::nullopt;
        p_prev = p;
        q_prev = q;
        p = p_next;
        q = q_next;
    }
}

RotationEstimate rotation_number(const CircleMap& circle, double x0, std::size_t n, const RotationOptions& options) {
    if (n < 100) throw Error(ErrorCode::InvalidArgument, "rotation_number needs n >= 100");
    const LorenzMap f = circle.as_lorenz();
    const double scale = std::max({std::abs(f.mu_left), std::abs(f.mu_right), std::abs(circle.discontinuity)});
    const auto cls = classify_lorenz(f, options.circle_tolerance * scale);
    if (cls.kind != LorenzKind::Circle) {
        throw Error(ErrorCode::NotCircle, std::string(to_string(cls.kind)) + " map, commutator difference " +
                                              fmt12(cls.difference()));
    }
    std::size_t lefts = 0;
    double x = x0;
    for (std::size_t k = 0; k < n; ++k) {
        if (x < circle.discontinuity) {
            ++lefts;
            x = circle.left(x);
        } else {
            x = circle.right(x);
        }
    }
    RotationEstimate est;
    est.n = n;
    est.value = static_cast<double>(lefts) / static_cast<double>(n);
    est.bound = 2.0 / static_cast<double>(n);
    est.rational = rational_guess(est.value, options.denominator_cap, est.bound);
    if (est.rational) est.error = std::abs(est.value - est.rational->value());
    return est;
}

RotationEstimate rotation_number(const CircleMap& circle, std::size_t n, const RotationOptions& options) {
    return rotation_number(circle, circle.domain.midpoint(), n, options);
}

double LyapunovEstimate::bounded_orbit_limit() const noexcept {
    if (n == 0 || !(min_abs_state > 0.0)) return std::numeric_limits<double>::infinity();
    return std::log(max_abs_state / min_abs_state) / static_cast<double>(n);
}

LyapunovEstimate lyapunov_exponent(const PwlMap& map, double x0, std::size_t n) {
    if (x0 == 0.0) throw Error(ErrorCode::InvalidArgument, "lyapunov_exponent needs x0 != 0");
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "lyapunov_exponent needs n >= 1");
    const double threshold = OrbitOptions{}.divergence_threshold;
    // Neumaier summation keeps the identity with log|x_n/x_0| tight over long orbits
    double sum = 0.0;
    double comp = 0.0;
    double x = x0;
    LyapunovEstimate est;
    est.n = n;
    est.min_abs_state = est.max_abs_state = std::abs(x0);
    for (std::size_t k = 0; k < n; ++k) {
        const Branch& b = map.branch(map.branch_index(x));
        const double term = std::log(std::abs(b.slope));
        const double t = sum + term;
        comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
        x = b(x);
        if (!std::isfinite(x) || std::abs(x) > threshold) {
            throw Error(ErrorCode::Diverged, "orbit diverged at step " + std::to_string(k + 1));
        }
        if (x == 0.0) throw Error(ErrorCode::HitOrigin, "state reached 0 at step " + std::to_string(k + 1));
        est.min_abs_state = std::min(est.min_abs_state, std::abs(x));
        est.max_abs_state = std::max(est.max_abs_state, std::abs(x));
    }
    est.value = (sum + comp) / static_cast<double>(n);
    if (map.homogeneous()) est.direct = std::log(std::abs(x / x0)) / static_cast<double>(n);
    return est;
}

std::vector<Interval> gap_attractor(const LorenzMap& f, std::size_t depth) {
    const auto cls = classify_lorenz(f);
    if (cls.kind != LorenzKind::Gap) throw Error(ErrorCode::NotGap, std::string(to_string(cls.kind)) + " map");
    const Interval I = f.absorbing_interval();

    std::vector<Interval> removed;
    std::vector<Interval> frontier{*cls.region};
    for (std::size_t k = 0; k <= depth; ++k) {
        removed.insert(removed.end(), frontier.begin(), frontier.end());
        if (k == depth) break;
        std::vector<Interval> next;
        for (const auto& g : frontier) {
            if (g.hi <= 0.0) {
                next.push_back({f.left(g.lo), f.left(g.hi), false, false});
            } else if (g.lo >= 0.0) {
                next.push_back({f.right(g.lo), f.right(g.hi), false, false});
            } else {
                next.push_back({f.left(g.lo), f.mu_left, false, false});
                next.push_back({f.mu_right, f.right(g.hi), false, false});
            }
        }
        frontier = std::move(next);
    }
    removed = merge_open(std::move(removed));

    std::vector<Interval> out;
    double cursor = I.lo;
    for (const auto& g : removed) {
        if (g.hi <= cursor) continue;
        if (g.lo > cursor) out.push_back({cursor, std::min(g.lo, I.hi), true, true});
        cursor = std::max(cursor, g.hi);
        if (cursor >= I.hi) break;
    }
    if (cursor < I.hi) out.push_back({cursor, I.hi, true, true});
    return out;
}

std::string circle_record(const std::optional<LorenzClassification>& lorenz,
                          const std::optional<RotationEstimate>& rotation,
                          const std::optional<LyapunovEstimate>& lyapunov) {
    std::ostringstream out;
    out << "kind=" << (lorenz ? std::string(to_string(lorenz->kind)) : std::string("-"));
    out << " left_commutator=" << (lorenz ? fmt12(lorenz->left_commutator) : "-");
    out << " right_commutator=" << (lorenz ? fmt12(lorenz->right_commutator) : "-");
    out << " rho=" << (rotation ? fmt12(rotation->value) : "-");
    out << " pq=";
    if (rotation && rotation->rational) {
        out << rotation->rational->p << '/' << rotation->rational->q;
    } else {
        out << '-';
    }
    out << " lambda=" << (lyapunov ? fmt12(lyapunov->value) : "-");
    std::size_t n = rotation ? rotation->n : (lyapunov ? lyapunov->n : 0);
    out << " n=" << n;
    return out.str();
}

}  // namespace pwl
