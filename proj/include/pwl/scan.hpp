#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pwl/attractor.hpp"
#include "pwl/core.hpp"

namespace pwl {

/// Map template with named parameter slots. Families:
///   "g3": Z_L, Z_R, s_L, s_M, s_R, mu_R
///   "g4": Z_L, Z_R, s_L, s_M-, s_M+, s_R
///   "map": a full map document (see map_io.hpp); slots are
///          "slopes[i]", "offsets[i]" and "breakpoints[i]"
struct MapTemplate {
    std::string family = "g3";
    std::map<std::string, double> values;
    nlohmann::json document;  // family "map" only

    PwlMap instantiate(const std::map<std::string, double>& overrides = {}) const;
    /// Default seed: Z_R / 2, or half the smallest positive breakpoint.
    double default_x0() const;
    bool has_slot(const std::string& name) const;
};

MapTemplate map_template_from_json(const nlohmann::json& doc);

struct Axis {
    std::string param;
    double min = 0.0;
    double max = 1.0;
    std::size_t count = 1;

    /// cell centres, so open ranges are respected
    std::vector<double> values() const;
};

enum class SeedPolicy { Fixed, Continuation };

struct ImageSpec {
    std::size_t width = 800;
    std::size_t height = 600;
    std::optional<double> y_min;  // 1D only; data range when absent
    std::optional<double> y_max;
};

struct SweepSpec {
    MapTemplate map;
    std::vector<Axis> axes;  // one for bif1d, two for bif2d
    std::size_t transient = 1000;
    std::size_t record = 400;    // tail points per 1D cell
    std::size_t samples = 10000; // classification window per 2D cell
    std::optional<double> x0;    // overrides the template default
    SeedPolicy seed_policy = SeedPolicy::Fixed;
    std::optional<ImageSpec> image;
};

/// Throws ParseError or InvalidArgument (degenerate range, zero count,
/// unknown parameter slot).
SweepSpec sweep_spec_from_json(const nlohmann::json& doc);

struct Bif1dCell {
    double param = 0.0;
    std::vector<double> points;  // empty when the orbit diverged
};

std::vector<Bif1dCell> bif1d(const SweepSpec& spec, unsigned threads = 0);
std::string bif1d_csv(const std::vector<Bif1dCell>& cells);

struct Bif2dCell {
    double p1 = 0.0;
    double p2 = 0.0;
    Verdict verdict = Verdict::Divergent;
    std::size_t period = 0;
    double lyapunov = 0.0;
};

/// Row-major over (p1, p2) with p2 varying fastest. Throws std::logic_error
/// if a homogeneous cell is classified Chaotic.
std::vector<Bif2dCell> bif2d(const SweepSpec& spec, unsigned threads = 0);
std::string bif2d_csv(const std::vector<Bif2dCell>& cells);

/// Colour index: period for cycle cells, reserved codes otherwise.
inline constexpr int kCodeDivergent = -1;
inline constexpr int kCodeFixedPointO = -2;
inline constexpr int kCodeQuasiperiodic = -3;
inline constexpr int kCodeChaotic = -4;
int colour_code(Verdict verdict, std::size_t period) noexcept;

/// Raster images: binary PGM for 1D scatter plots, binary PPM for 2D grids.
struct Raster {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;  // 1 or 3 channels, row-major from the top
    int channels = 1;

    void write(const std::filesystem::path& path) const;
};

Raster bif1d_image(const std::vector<Bif1dCell>& cells, const ImageSpec& image);
Raster bif2d_image(const std::vector<Bif2dCell>& cells, std::size_t n1, std::size_t n2);

/// Shortest round-trip decimal form.
std::string format_double(double x);

}  // namespace pwl
