#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "pwl/core.hpp"

namespace pwl {

/// Constant order terms of one trader type: a^{i,b} in the bull regime and
/// b^{i,d} in the bear regime, for i = 1, 2.
struct Intercepts {
    double a1b = 0.0;
    double b1d = 0.0;
    double a2b = 0.0;
    double b2d = 0.0;
    friend bool operator==(const Intercepts&, const Intercepts&) = default;
};

/// Two chartist and two fundamentalist types; type 2 traders are active only
/// outside (-Z_L, Z_R). Prices are in logs.
struct MarketParams {
    double a = 1.0;  // market maker price adjustment speed
    Intercepts chartist;
    Intercepts fundamentalist;
    double c1b = 0.0, c1d = 0.0, c2b = 0.0, c2d = 0.0;
    double f1b = 0.0, f1d = 0.0, f2b = 0.0, f2d = 0.0;
    double z_left = 1.0;
    double z_right = 1.0;
    double fundamental = 0.0;  // F
};

/// Throws InvalidParams on a <= 0, Z <= 0, a negative reaction parameter or a
/// non-finite value.
void validate(const MarketParams& params);

/// Orders of each trader group at log price p.
double chartist1_demand(const MarketParams& params, double p);
double chartist2_demand(const MarketParams& params, double p);
double fundamentalist1_demand(const MarketParams& params, double p);
double fundamentalist2_demand(const MarketParams& params, double p);

/// P_{t+1} = P_t + a (DC1 + DF1 + DC2 + DF2)
double market_maker_step(const MarketParams& params, double p);

struct SlopeSet {
    double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
    double s_left = 1.0, s_mminus = 1.0, s_mplus = 1.0, s_right = 1.0;
};

SlopeSet derive_slopes(const MarketParams& params);

/// Non-negative reaction parameters at speed a realising the given composite
/// slopes, with all intercepts zero: each s_k goes to c if positive, f otherwise.
MarketParams realize_slopes(double s1, double s2, double s3, double s4, double z_left, double z_right,
                            double a = 1.0);

/// Constant terms of the reduced map in the regimes L, M-, M+, R.
std::array<double, 4> regime_offsets(const MarketParams& params);

/// Four-branch map with breakpoints (-Z_L, 0, Z_R); x = -Z_L goes to L, 0 to
/// M+, Z_R to R. Throws OffsetsWouldArise unless intercepts cancel.
PwlMap build_g4(const MarketParams& params);

/// Three-branch map for s2 = s1. Throws S2MismatchesS1 or OffsetsWouldArise.
PwlMap build_g3(const MarketParams& params);

/// build_g3 with offset mu_right on the right branch.
PwlMap build_g3_offset(const MarketParams& params, double mu_right);

/// The same maps parameterised directly by branch slopes.
PwlMap g3_map(double z_left, double z_right, double s_left, double s_middle, double s_right,
              double mu_right = 0.0);
PwlMap g4_map(double z_left, double z_right, double s_left, double s_mminus, double s_mplus, double s_right);

/// Largest |(P' - F) - G(P - F)| over random deviations in +-3 max(Z) between
/// the trader-level step and the reduced map with intercept offsets.
double demand_route_discrepancy(const MarketParams& params, std::size_t samples = 1000, std::uint64_t seed = 7);

struct PricePoint {
    std::size_t t = 0;
    double x = 0.0;
    double price = 0.0;
    std::string_view regime;  // "bull", "bear" or "fundamental"
};

/// t = 0..n with P_t = x_t + F. Throws Diverged.
std::vector<PricePoint> price_series(const PwlMap& map, double x0, std::size_t n, double fundamental = 0.0);
std::string price_series_csv(const std::vector<PricePoint>& series);

/// Keys follow the model's symbols: "a", "F", "Z_L", "Z_R", "c^{1,b}" ... "f^{2,d}",
/// and "chartist"/"fundamentalist" objects holding "a^{1,b}", "b^{1,d}",
/// "a^{2,b}", "b^{2,d}". Missing keys keep their defaults.
MarketParams market_params_from_json(const nlohmann::json& doc);
nlohmann::json market_params_to_json(const MarketParams& params);
MarketParams read_market_params(const std::filesystem::path& path);

}  // namespace pwl
