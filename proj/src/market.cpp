#include "pwl/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pwl/map_io.hpp"

namespace pwl {

namespace {

constexpr double kRouteTolerance = 1e-12;

void require_nonnegative(double v, const char* name) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidParams, std::string(name) + " is not finite");
    if (v < 0.0) throw Error(ErrorCode::InvalidParams, std::string(name) + " is negative");
}

bool intercepts_cancel(const MarketParams& p) { return p.chartist == p.fundamentalist; }

void check_routes(const MarketParams& params) {
    const double d = demand_route_discrepancy(params);
    if (!(d <= kRouteTolerance)) {
        throw std::logic_error("reduced map disagrees with trader demands by " + std::to_string(d));
    }
}

}  // namespace

void validate(const MarketParams& p) {
    if (!std::isfinite(p.a) || !(p.a > 0.0)) throw Error(ErrorCode::InvalidParams, "a must be positive");
    if (!std::isfinite(p.z_left) || !(p.z_left > 0.0)) throw Error(ErrorCode::InvalidParams, "Z_L must be positive");
    if (!std::isfinite(p.z_right) || !(p.z_right > 0.0)) throw Error(ErrorCode::InvalidParams, "Z_R must be positive");
    if (!std::isfinite(p.fundamental)) throw Error(ErrorCode::InvalidParams, "F is not finite");
    for (const Intercepts* i : {&p.chartist, &p.fundamentalist}) {
        require_nonnegative(i->a1b, "a^{1,b}");
        require_nonnegative(i->b1d, "b^{1,d}");
        require_nonnegative(i->a2b, "a^{2,b}");
        require_nonnegative(i->b2d, "b^{2,d}");
    }
    require_nonnegative(p.c1b, "c^{1,b}");
    require_nonnegative(p.c1d, "c^{1,d}");
    require_nonnegative(p.c2b, "c^{2,b}");
    require_nonnegative(p.c2d, "c^{2,d}");
    require_nonnegative(p.f1b, "f^{1,b}");
    require_nonnegative(p.f1d, "f^{1,d}");
    require_nonnegative(p.f2b, "f^{2,b}");
    require_nonnegative(p.f2d, "f^{2,d}");
}

double chartist1_demand(const MarketParams& m, double p) {
    const double x = p - m.fundamental;
    return x >= 0.0 ? m.chartist.a1b + m.c1b * x : -m.chartist.b1d + m.c1d * x;
}

double chartist2_demand(const MarketParams& m, double p) {
    const double x = p - m.fundamental;
    if (x >= m.z_right) return m.chartist.a2b + m.c2b * x;
    if (x <= -m.z_left) return -m.chartist.b2d + m.c2d * x;
    return 0.0;
}

double fundamentalist1_demand(const MarketParams& m, double p) {
    const double x = p - m.fundamental;
    return x >= 0.0 ? -m.fundamentalist.a1b + m.f1b * (m.fundamental - p)
                    : m.fundamentalist.b1d + m.f1d * (m.fundamental - p);
}

double fundamentalist2_demand(const MarketParams& m, double p) {
    const double x = p - m.fundamental;
    if (x >= m.z_right) return -m.fundamentalist.a2b + m.f2b * (m.fundamental - p);
    if (x <= -m.z_left) return m.fundamentalist.b2d + m.f2d * (m.fundamental - p);
    return 0.0;
}

double market_maker_step(const MarketParams& m, double p) {
    return p + m.a * (chartist1_demand(m, p) + fundamentalist1_demand(m, p) + chartist2_demand(m, p) +
                      fundamentalist2_demand(m, p));
}

SlopeSet derive_slopes(const MarketParams& p) {
    validate(p);
    SlopeSet s;
    s.s1 = p.a * (p.c1b - p.f1b);
    s.s2 = p.a * (p.c1d - p.f1d);
    s.s3 = p.a * (p.c2b - p.f2b);
    s.s4 = p.a * (p.c2d - p.f2d);
    s.s_mplus = 1.0 + s.s1;
    s.s_mminus = 1.0 + s.s2;
    s.s_right = 1.0 + s.s1 + s.s3;
    s.s_left = 1.0 + s.s2 + s.s4;
    return s;
}

MarketParams realize_slopes(double s1, double s2, double s3, double s4, double z_left, double z_right, double a) {
    MarketParams p;
    p.a = a;
    p.z_left = z_left;
    p.z_right = z_right;
    auto split = [a](double s, double& c, double& f) {
        c = s > 0.0 ? s / a : 0.0;
        f = s < 0.0 ? -s / a : 0.0;
    };
    split(s1, p.c1b, p.f1b);
    split(s2, p.c1d, p.f1d);
    split(s3, p.c2b, p.f2b);
    split(s4, p.c2d, p.f2d);
    validate(p);
    return p;
}

std::array<double, 4> regime_offsets(const MarketParams& p) {
    const Intercepts& c = p.chartist;
    const Intercepts& f = p.fundamentalist;
    const double mplus = p.a * (c.a1b - f.a1b);
    const double mminus = p.a * (f.b1d - c.b1d);
    return {mminus + p.a * (f.b2d - c.b2d), mminus, mplus, mplus + p.a * (c.a2b - f.a2b)};
}

PwlMap g4_map(double z_left, double z_right, double s_left, double s_mminus, double s_mplus, double s_right) {
    return build_map({-z_left, 0.0, z_right},
                     {Branch{s_left, 0.0, "L"}, Branch{s_mminus, 0.0, "M-"}, Branch{s_mplus, 0.0, "M+"},
                      Branch{s_right, 0.0, "R"}},
                     {Side::Left, Side::Right, Side::Right});
}

PwlMap g3_map(double z_left, double z_right, double s_left, double s_middle, double s_right, double mu_right) {
    return build_map({-z_left, z_right},
                     {Branch{s_left, 0.0, "L"}, Branch{s_middle, 0.0, "M"}, Branch{s_right, mu_right, "R"}},
                     {Side::Left, Side::Right});
}

double demand_route_discrepancy(const MarketParams& params, std::size_t samples, std::uint64_t seed) {
    validate(params);
    const SlopeSet s = derive_slopes(params);
    const auto off = regime_offsets(params);
    const PwlMap reduced = build_map({-params.z_left, 0.0, params.z_right},
                                     {Branch{s.s_left, off[0], "L"}, Branch{s.s_mminus, off[1], "M-"},
                                      Branch{s.s_mplus, off[2], "M+"}, Branch{s.s_right, off[3], "R"}},
                                     {Side::Left, Side::Right, Side::Right});
    const double range = 3.0 * std::max(params.z_left, params.z_right);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-range, range);
    double worst = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        // thresholds and the origin are drawn explicitly once each so closures are exercised
        const double x = i < 3 ? std::array<double, 3>{-params.z_left, 0.0, params.z_right}[i] : u(rng);
        const double via_traders = market_maker_step(params, x + params.fundamental) - params.fundamental;
        const double via_map = reduced(x);
        worst = std::max(worst, std::abs(via_traders - via_map) /
                                    std::max({1.0, std::abs(via_map), std::abs(params.fundamental)}));
    }
    return worst;
}

PwlMap build_g4(const MarketParams& params) {
    validate(params);
    if (!intercepts_cancel(params)) {
        throw Error(ErrorCode::OffsetsWouldArise,
                    "chartist and fundamentalist intercepts differ; build the affine map with build_map and "
                    "regime_offsets");
    }
    check_routes(params);
    const SlopeSet s = derive_slopes(params);
    return g4_map(params.z_left, params.z_right, s.s_left, s.s_mminus, s.s_mplus, s.s_right);
}

PwlMap build_g3(const MarketParams& params) {
    validate(params);
    const SlopeSet s = derive_slopes(params);
    if (std::abs(s.s2 - s.s1) > 1e-12 * std::max(1.0, std::abs(s.s1))) {
        throw Error(ErrorCode::S2MismatchesS1, "s2 = " + std::to_string(s.s2) + ", s1 = " + std::to_string(s.s1));
    }
    if (!intercepts_cancel(params)) {
        throw Error(ErrorCode::OffsetsWouldArise, "chartist and fundamentalist intercepts differ");
    }
    check_routes(params);
    return g3_map(params.z_left, params.z_right, 1.0 + s.s1 + s.s4, s.s_mplus, s.s_right);
}

PwlMap build_g3_offset(const MarketParams& params, double mu_right) {
    if (!std::isfinite(mu_right)) throw Error(ErrorCode::NonFiniteParameter, "mu_R");
    const PwlMap base = build_g3(params);
    return g3_map(params.z_left, params.z_right, base.branch(0).slope, base.branch(1).slope, base.branch(2).slope,
                  mu_right);
}

std::vector<PricePoint> price_series(const PwlMap& map, double x0, std::size_t n, double fundamental) {
    if (!std::isfinite(x0)) throw Error(ErrorCode::NonFiniteInput, "x0");
    const double thr = OrbitOptions{}.divergence_threshold;
    auto regime = [](double x) -> std::string_view { return x > 0.0 ? "bull" : x < 0.0 ? "bear" : "fundamental"; };
    std::vector<PricePoint> out;
    out.reserve(n + 1);
    double x = x0;
    out.push_back({0, x, x + fundamental, regime(x)});
    for (std::size_t t = 1; t <= n; ++t) {
        x = map(x);
        if (!std::isfinite(x) || std::abs(x) > thr) {
            throw Error(ErrorCode::Diverged, "price series left the divergence threshold at t = " + std::to_string(t));
        }
        out.push_back({t, x, x + fundamental, regime(x)});
    }
    return out;
}

std::string price_series_csv(const std::vector<PricePoint>& series) {
    std::ostringstream out;
    out << "t,x_t,P_t,regime\n";
    char buf[96];
    for (const auto& p : series) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,", p.t, p.x, p.price);
        out << buf << p.regime << '\n';
    }
    return out.str();
}

namespace {

void read_intercepts(const nlohmann::json& doc, Intercepts& i) {
    i.a1b = doc.value("a^{1,b}", i.a1b);
    i.b1d = doc.value("b^{1,d}", i.b1d);
    i.a2b = doc.value("a^{2,b}", i.a2b);
    i.b2d = doc.value("b^{2,d}", i.b2d);
}

nlohmann::json write_intercepts(const Intercepts& i) {
    return {{"a^{1,b}", i.a1b}, {"b^{1,d}", i.b1d}, {"a^{2,b}", i.a2b}, {"b^{2,d}", i.b2d}};
}

}  // namespace

MarketParams market_params_from_json(const nlohmann::json& doc) {
    MarketParams p;
    try {
        if (!doc.is_object()) throw Error(ErrorCode::ParseError, "market parameters must be an object");
        p.a = doc.value("a", p.a);
        p.fundamental = doc.value("F", p.fundamental);
        p.z_left = doc.value("Z_L", p.z_left);
        p.z_right = doc.value("Z_R", p.z_right);
        p.c1b = doc.value("c^{1,b}", p.c1b);
        p.c1d = doc.value("c^{1,d}", p.c1d);
        p.c2b = doc.value("c^{2,b}", p.c2b);
        p.c2d = doc.value("c^{2,d}", p.c2d);
        p.f1b = doc.value("f^{1,b}", p.f1b);
        p.f1d = doc.value("f^{1,d}", p.f1d);
        p.f2b = doc.value("f^{2,b}", p.f2b);
        p.f2d = doc.value("f^{2,d}", p.f2d);
        if (doc.contains("chartist")) read_intercepts(doc["chartist"], p.chartist);
        if (doc.contains("fundamentalist")) read_intercepts(doc["fundamentalist"], p.fundamentalist);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    validate(p);
    return p;
}

nlohmann::json market_params_to_json(const MarketParams& p) {
    return {{"a", p.a},
            {"F", p.fundamental},
            {"Z_L", p.z_left},
            {"Z_R", p.z_right},
            {"c^{1,b}", p.c1b},
            {"c^{1,d}", p.c1d},
            {"c^{2,b}", p.c2b},
            {"c^{2,d}", p.c2d},
            {"f^{1,b}", p.f1b},
            {"f^{1,d}", p.f1d},
            {"f^{2,b}", p.f2b},
            {"f^{2,d}", p.f2d},
            {"chartist", write_intercepts(p.chartist)},
            {"fundamentalist", write_intercepts(p.fundamentalist)}};
}

MarketParams read_market_params(const std::filesystem::path& path) {
    return market_params_from_json(read_json_file(path));
}

}  // namespace pwl
