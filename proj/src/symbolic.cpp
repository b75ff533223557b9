#include "pwl/symbolic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace pwl {

namespace {

std::string shortest(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void skip_separators(std::string_view text, std::size_t& pos) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == ',' || text[pos] == '\t')) ++pos;
}

std::size_t parse_power(std::string_view text, std::size_t& pos) {
    skip_separators(text, pos);
    if (pos >= text.size() || text[pos] != '^') return 1;
    ++pos;
    std::size_t value = 0;
    auto res = std::from_chars(text.data() + pos, text.data() + text.size(), value);
    if (res.ec != std::errc{} || value == 0) {
        throw Error(ErrorCode::ParseError, "expected a positive power at offset " + std::to_string(pos));
    }
    pos = static_cast<std::size_t>(res.ptr - text.data());
    return value;
}

std::vector<std::size_t> parse_sequence(const PwlMap& map, std::string_view text, std::size_t& pos,
                                        int depth) {
    std::vector<std::size_t> out;
    while (true) {
        skip_separators(text, pos);
        if (pos >= text.size()) break;
        if (text[pos] == ')') {
            if (depth == 0) throw Error(ErrorCode::ParseError, "unbalanced ')'");
            break;
        }
        std::vector<std::size_t> atom;
        if (text[pos] == '(') {
            ++pos;
            atom = parse_sequence(map, text, pos, depth + 1);
            if (pos >= text.size() || text[pos] != ')') throw Error(ErrorCode::ParseError, "missing ')'");
            ++pos;
        } else {
            std::size_t best_len = 0;
            std::size_t best = 0;
            for (std::size_t i = 0; i < map.size(); ++i) {
                const auto& label = map.branch(i).label;
                if (label.size() > best_len && text.substr(pos, label.size()) == label) {
                    best_len = label.size();
                    best = i;
                }
            }
            if (best_len == 0) {
                throw Error(ErrorCode::UnknownSymbol, "no branch label at \"" + std::string(text.substr(pos)) + "\"");
            }
            pos += best_len;
            atom.push_back(best);
        }
        const std::size_t power = parse_power(text, pos);
        for (std::size_t k = 0; k < power; ++k) out.insert(out.end(), atom.begin(), atom.end());
    }
    return out;
}

struct WorkItem {
    double lo;
    double hi;
    ComposedBranch branch;
};

ComposedBranch extend(const ComposedBranch& c, const Branch& b, std::size_t index) {
    ComposedBranch out;
    out.word = c.word;
    out.word.symbols.push_back(index);
    out.slope = b.slope * c.slope;
    out.offset = b.slope * c.offset + b.offset;
    return out;
}

}  // namespace

std::string format_word(const PwlMap& map, const Word& word) {
    std::string out;
    for (std::size_t s : word.symbols) out += map.branch(s).label;
    return out;
}

Word parse_word(const PwlMap& map, std::string_view text) {
    std::size_t pos = 0;
    Word w{parse_sequence(map, text, pos, 0)};
    if (pos != text.size()) throw Error(ErrorCode::ParseError, "trailing input in word");
    if (w.empty()) throw Error(ErrorCode::ParseError, "empty word");
    return w;
}

Word itinerary(const PwlMap& map, double x0, std::size_t length) {
    if (length == 0) throw Error(ErrorCode::InvalidArgument, "itinerary length must be >= 1");
    Word w;
    w.symbols.reserve(length);
    double x = x0;
    for (std::size_t k = 0; k < length; ++k) {
        const std::size_t i = map.branch_index(x);
        w.symbols.push_back(i);
        x = map.branch(i)(x);
        if (!std::isfinite(x) || std::abs(x) > OrbitOptions{}.divergence_threshold) {
            throw Error(ErrorCode::Diverged, "itinerary left the bounded region at step " + std::to_string(k + 1));
        }
    }
    return w;
}

ComposedBranch compose_word(const PwlMap& map, const Word& word) {
    if (word.empty()) throw Error(ErrorCode::InvalidArgument, "empty word");
    ComposedBranch c;
    c.word = word;
    for (std::size_t s : word.symbols) {
        if (s >= map.size()) throw Error(ErrorCode::UnknownSymbol, "symbol index " + std::to_string(s));
        const Branch& b = map.branch(s);
        c.slope = b.slope * c.slope;
        c.offset = b.slope * c.offset + b.offset;
    }
    return c;
}

std::size_t ReturnMap::piece_index(double x) const noexcept {
    auto it = std::upper_bound(boundaries.begin(), boundaries.end(), x);
    return static_cast<std::size_t>(it - boundaries.begin());
}

double ReturnMap::operator()(double x) const noexcept {
    return pieces[piece_index(x)].branch(x);
}

ReturnMap first_return_map(const PwlMap& map, const Interval& interval, const ReturnOptions& options) {
    if (!(interval.lo < interval.hi)) throw Error(ErrorCode::InvalidArgument, "return interval has no length");
    const double a = interval.lo;
    const double b = interval.hi;
    const auto bps = map.breakpoints();

    std::vector<WorkItem> stack;
    stack.push_back({a, b, ComposedBranch{}});
    std::vector<WorkItem> done;
    std::map<double, BoundaryKind> split_kind;

    auto image = [](const WorkItem& w) {
        const double y1 = w.branch(w.lo);
        const double y2 = w.branch(w.hi);
        return std::pair{std::min(y1, y2), std::max(y1, y2)};
    };
    auto try_split = [&](const WorkItem& w, double target, BoundaryKind kind) {
        if (w.branch.slope == 0.0) return false;
        const double p = (target - w.branch.offset) / w.branch.slope;
        if (!(p > w.lo && p < w.hi)) return false;
        stack.push_back({p, w.hi, w.branch});
        stack.push_back({w.lo, p, w.branch});
        split_kind.emplace(p, kind);
        return true;
    };

    while (!stack.empty()) {
        if (stack.size() + done.size() > options.max_pieces) {
            throw Error(ErrorCode::PieceLimitExceeded, "more than " + std::to_string(options.max_pieces) + " pieces");
        }
        WorkItem w = std::move(stack.back());
        stack.pop_back();
        if (w.branch.word.size() >= options.max_word_length) {
            throw Error(ErrorCode::NoReturn, "no return within " + std::to_string(options.max_word_length) +
                                                 " steps from " + shortest(0.5 * (w.lo + w.hi)));
        }
        auto [lo, hi] = image(w);
        if (std::max(std::abs(lo), std::abs(hi)) > options.divergence_threshold || !std::isfinite(lo) ||
            !std::isfinite(hi)) {
            throw Error(ErrorCode::DivergedFromInterval, "orbit from " + shortest(0.5 * (w.lo + w.hi)));
        }

        // next branch must be constant on the image
        auto it = std::upper_bound(bps.begin(), bps.end(), lo);
        if (it != bps.end() && *it < hi && try_split(w, *it, BoundaryKind::Discontinuity)) continue;

        const std::size_t index = lo < hi ? map.branch_index(0.5 * (lo + hi)) : map.branch_index(lo);
        WorkItem next{w.lo, w.hi, extend(w.branch, map.branch(index), index)};
        auto [nlo, nhi] = image(next);
        if (nlo >= a && nhi <= b) {
            done.push_back(std::move(next));
            continue;
        }
        if (nhi <= a || nlo >= b) {
            stack.push_back(std::move(next));
            continue;
        }
        const double end = (nlo < a && a < nhi) ? a : b;
        if (try_split(next, end, BoundaryKind::IntervalEndpoint)) {
            // both halves restart from the pre-step branch
            const WorkItem right = stack.back();
            stack.pop_back();
            const WorkItem left = stack.back();
            stack.pop_back();
            stack.push_back({right.lo, right.hi, w.branch});
            stack.push_back({left.lo, left.hi, w.branch});
            continue;
        }
        const double mid = next.branch(0.5 * (next.lo + next.hi));
        if (mid >= a && mid <= b) {
            done.push_back(std::move(next));
        } else {
            stack.push_back(std::move(next));
        }
    }

    std::sort(done.begin(), done.end(), [](const WorkItem& x, const WorkItem& y) { return x.lo < y.lo; });
    ReturnMap rm;
    rm.interval = interval;
    for (auto& w : done) {
        if (!rm.pieces.empty() && rm.pieces.back().branch.word == w.branch.word) {
            rm.pieces.back().domain.hi = w.hi;
            continue;
        }
        if (!rm.pieces.empty()) {
            rm.boundaries.push_back(w.lo);
            auto k = split_kind.find(w.lo);
            rm.boundary_kinds.push_back(k == split_kind.end() ? BoundaryKind::Discontinuity : k->second);
        }
        rm.pieces.push_back({Interval{w.lo, w.hi, true, false}, std::move(w.branch)});
    }
    if (!rm.pieces.empty()) {
        rm.pieces.front().domain.lo_closed = interval.lo_closed;
        rm.pieces.back().domain.hi_closed = interval.hi_closed;
    }
    return rm;
}

std::optional<PointReturn> brute_force_return(const PwlMap& map, const Interval& interval, double x,
                                              std::size_t max_steps) {
    PointReturn r;
    double y = x;
    for (std::size_t k = 0; k < max_steps; ++k) {
        const std::size_t i = map.branch_index(y);
        r.word.symbols.push_back(i);
        y = map.branch(i)(y);
        if (!std::isfinite(y) || std::abs(y) > OrbitOptions{}.divergence_threshold) return std::nullopt;
        if (interval.contains(y)) {
            r.value = y;
            return r;
        }
    }
    return std::nullopt;
}

OracleReport return_oracle_check(const PwlMap& map, const ReturnMap& return_map, std::size_t samples_per_piece,
                                 std::uint64_t seed) {
    OracleReport report;
    std::mt19937_64 rng(seed);
    for (const auto& piece : return_map.pieces) {
        std::uniform_real_distribution<double> dist(piece.domain.lo, piece.domain.hi);
        const std::size_t budget = std::max<std::size_t>(4 * piece.branch.word.size(), 64);
        for (std::size_t s = 0; s < samples_per_piece; ++s) {
            double x = dist(rng);
            if (x <= piece.domain.lo) x = piece.domain.midpoint();
            ++report.samples;
            const auto brute = brute_force_return(map, return_map.interval, x, budget);
            if (!brute) {
                ++report.no_returns;
                continue;
            }
            if (brute->word != piece.branch.word) {
                ++report.word_mismatches;
                continue;
            }
            const double composed = piece.branch(x);
            const double denom = std::max(std::abs(brute->value), std::numeric_limits<double>::min());
            report.max_relative_error = std::max(report.max_relative_error, std::abs(composed - brute->value) / denom);
        }
    }
    return report;
}

std::vector<CriticalImage> critical_images(const PwlMap& map, std::size_t steps) {
    std::vector<CriticalImage> out;
    const auto bps = map.breakpoints();
    for (std::size_t k = 0; k < bps.size(); ++k) {
        for (Side side : {Side::Left, Side::Right}) {
            const Branch& br = map.branch(side == Side::Left ? k : k + 1);
            double x = br(bps[k]);
            for (std::size_t s = 0; s <= steps; ++s) {
                if (!std::isfinite(x) || std::abs(x) > OrbitOptions{}.divergence_threshold) break;
                out.push_back({x, k, side, s});
                x = map(x);
            }
        }
    }
    return out;
}

std::optional<ReturnMap> search_return_interval(const PwlMap& map, const Interval& approximate, double window,
                                                const ReturnSearchOptions& options) {
    const auto images = critical_images(map, options.critical_steps);
    auto candidates = [&](double target) {
        std::vector<double> c;
        for (const auto& im : images) {
            if (std::abs(im.value - target) <= window) c.push_back(im.value);
        }
        std::sort(c.begin(), c.end(), [&](double u, double v) { return std::abs(u - target) < std::abs(v - target); });
        c.erase(std::unique(c.begin(), c.end()), c.end());
        if (c.size() > options.candidates_per_end) c.resize(options.candidates_per_end);
        return c;
    };
    const auto los = candidates(approximate.lo);
    const auto his = candidates(approximate.hi);

    std::vector<std::pair<double, double>> pairs;
    for (double lo : los) {
        for (double hi : his) {
            if (lo < hi) pairs.emplace_back(lo, hi);
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& p, const auto& q) {
        return std::abs(p.first - approximate.lo) + std::abs(p.second - approximate.hi) <
               std::abs(q.first - approximate.lo) + std::abs(q.second - approximate.hi);
    });

    for (const auto& [lo, hi] : pairs) {
        ReturnMap rm;
        try {
            rm = first_return_map(map, Interval{lo, hi, true, true}, options.return_options);
        } catch (const Error&) {
            continue;
        }
        if (rm.pieces.size() != 2) continue;
        const double c = rm.boundaries.front();
        const double ya = rm.pieces[0].branch(c);
        const double yb = rm.pieces[1].branch(c);
        const double scale = std::max(std::abs(lo), std::abs(hi));
        const double tol = options.match_tolerance * scale;
        if (std::abs(std::max(ya, yb) - hi) <= tol && std::abs(std::min(ya, yb) - lo) <= tol) return rm;
    }
    return std::nullopt;
}

std::string serialize_return_map(const PwlMap& map, const ReturnMap& return_map) {
    std::ostringstream out;
    out.precision(17);
    for (const auto& piece : return_map.pieces) {
        out << piece.domain.lo << ' ' << piece.domain.hi << ' ' << format_word(map, piece.branch.word) << ' '
            << piece.branch.slope << ' ' << piece.branch.offset << '\n';
    }
    return out.str();
}

}  // namespace pwl
