#include "pwl/scan.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pwl/map_io.hpp"
#include "pwl/market.hpp"
#include "pwl/parallel.hpp"

namespace pwl {

namespace {

const std::vector<std::string>& family_slots(const std::string& family) {
    static const std::vector<std::string> g3{"Z_L", "Z_R", "s_L", "s_M", "s_R", "mu_R"};
    static const std::vector<std::string> g4{"Z_L", "Z_R", "s_L", "s_M-", "s_M+", "s_R"};
    if (family == "g3") return g3;
    if (family == "g4") return g4;
    throw Error(ErrorCode::ParseError, "unknown map family \"" + family + "\"");
}

// "slopes[2]" -> ("slopes", 2)
std::optional<std::pair<std::string, std::size_t>> indexed_slot(const std::string& name) {
    const auto open = name.find('[');
    if (open == std::string::npos || name.back() != ']') return std::nullopt;
    std::size_t index = 0;
    const char* first = name.data() + open + 1;
    const char* last = name.data() + name.size() - 1;
    auto [ptr, ec] = std::from_chars(first, last, index);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return std::make_pair(name.substr(0, open), index);
}

double lookup(const std::map<std::string, double>& values, const std::map<std::string, double>& overrides,
              const std::string& key, double fallback) {
    if (auto it = overrides.find(key); it != overrides.end()) return it->second;
    if (auto it = values.find(key); it != values.end()) return it->second;
    return fallback;
}

}  // namespace

std::string format_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

bool MapTemplate::has_slot(const std::string& name) const {
    if (family == "map") {
        const auto slot = indexed_slot(name);
        if (!slot) return false;
        const auto& [key, index] = *slot;
        if (key != "slopes" && key != "offsets" && key != "breakpoints") return false;
        const std::size_t n = key == "breakpoints" ? document.at("breakpoints").size()
                                                   : document.at("slopes").size();
        return index < n;
    }
    const auto& slots = family_slots(family);
    return std::find(slots.begin(), slots.end(), name) != slots.end();
}

PwlMap MapTemplate::instantiate(const std::map<std::string, double>& overrides) const {
    if (family == "g3") {
        auto v = [&](const char* k, double d) { return lookup(values, overrides, k, d); };
        return g3_map(v("Z_L", 1.0), v("Z_R", 1.0), v("s_L", 1.0), v("s_M", 1.0), v("s_R", 1.0), v("mu_R", 0.0));
    }
    if (family == "g4") {
        auto v = [&](const char* k, double d) { return lookup(values, overrides, k, d); };
        return g4_map(v("Z_L", 1.0), v("Z_R", 1.0), v("s_L", 1.0), v("s_M-", 1.0), v("s_M+", 1.0), v("s_R", 1.0));
    }
    if (family == "map") {
        nlohmann::json doc = document;
        if (!doc.contains("offsets")) doc["offsets"] = std::vector<double>(doc.at("slopes").size(), 0.0);
        for (const auto* source : {&values, &overrides}) {
            for (const auto& [name, value] : *source) {
                const auto slot = indexed_slot(name);
                if (!slot || !has_slot(name)) throw Error(ErrorCode::InvalidArgument, "unknown slot " + name);
                doc[slot->first][slot->second] = value;
            }
        }
        return map_from_json(doc);
    }
    throw Error(ErrorCode::ParseError, "unknown map family \"" + family + "\"");
}

double MapTemplate::default_x0() const {
    if (family == "g3" || family == "g4") return lookup(values, {}, "Z_R", 1.0) / 2.0;
    double best = std::numeric_limits<double>::infinity();
    const PwlMap map = instantiate();
    for (double b : map.breakpoints()) {
        if (b > 0.0) best = std::min(best, b);
    }
    return std::isfinite(best) ? best / 2.0 : 0.5;
}

MapTemplate map_template_from_json(const nlohmann::json& doc) {
    MapTemplate t;
    try {
        if (doc.contains("breakpoints")) {
            t.family = "map";
            t.document = doc;
            if (doc.contains("values")) t.values = doc["values"].get<std::map<std::string, double>>();
            t.document.erase("values");
        } else {
            t.family = doc.value("family", std::string("g3"));
            const auto& slots = family_slots(t.family);
            for (const auto& [key, value] : doc.items()) {
                if (key == "family") continue;
                if (std::find(slots.begin(), slots.end(), key) == slots.end()) {
                    throw Error(ErrorCode::ParseError, "unknown parameter \"" + key + "\" for family " + t.family);
                }
                t.values[key] = value.get<double>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    t.instantiate();
    return t;
}

std::vector<double> Axis::values() const { return cell_centres(min, max, count); }

SweepSpec sweep_spec_from_json(const nlohmann::json& doc) {
    SweepSpec spec;
    try {
        spec.map = map_template_from_json(doc.at("map"));
        const auto& axes = doc.at("sweep");
        for (const auto& a : axes.is_array() ? axes : nlohmann::json::array({axes})) {
            Axis axis;
            axis.param = a.at("param").get<std::string>();
            axis.min = a.at("min").get<double>();
            axis.max = a.at("max").get<double>();
            axis.count = a.at("count").get<std::size_t>();
            if (!(axis.min < axis.max)) throw Error(ErrorCode::InvalidArgument, "degenerate range for " + axis.param);
            if (axis.count == 0) throw Error(ErrorCode::InvalidArgument, "count must be >= 1 for " + axis.param);
            if (!spec.map.has_slot(axis.param)) {
                throw Error(ErrorCode::InvalidArgument, "map has no parameter " + axis.param);
            }
            spec.axes.push_back(axis);
        }
        spec.transient = doc.value("transient", spec.transient);
        spec.record = doc.value("record", spec.record);
        spec.samples = doc.value("samples", spec.samples);
        if (doc.contains("x0")) spec.x0 = doc["x0"].get<double>();
        const auto policy = doc.value("seed_policy", std::string("fixed"));
        if (policy == "fixed") {
            spec.seed_policy = SeedPolicy::Fixed;
        } else if (policy == "continuation") {
            spec.seed_policy = SeedPolicy::Continuation;
        } else {
            throw Error(ErrorCode::ParseError, "seed_policy must be \"fixed\" or \"continuation\"");
        }
        if (doc.contains("image")) {
            const auto& im = doc["image"];
            ImageSpec image;
            image.width = im.value("width", image.width);
            image.height = im.value("height", image.height);
            if (im.contains("y_min")) image.y_min = im["y_min"].get<double>();
            if (im.contains("y_max")) image.y_max = im["y_max"].get<double>();
            if (image.width == 0 || image.height == 0) throw Error(ErrorCode::InvalidArgument, "empty image");
            spec.image = image;
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    if (spec.axes.empty() || spec.axes.size() > 2) throw Error(ErrorCode::InvalidArgument, "need one or two axes");
    if (spec.record == 0) throw Error(ErrorCode::InvalidArgument, "record must be >= 1");
    return spec;
}

std::vector<Bif1dCell> bif1d(const SweepSpec& spec, unsigned threads) {
    if (spec.axes.size() != 1) throw Error(ErrorCode::InvalidArgument, "bif1d needs exactly one axis");
    const Axis& axis = spec.axes.front();
    const auto params = axis.values();
    const double x0 = spec.x0.value_or(spec.map.default_x0());
    const double thr = OrbitOptions{}.divergence_threshold;
    std::vector<Bif1dCell> cells(params.size());

    // returns the final state, or nullopt when the cell diverged
    auto run = [&](std::size_t i, double seed) -> std::optional<double> {
        const PwlMap map = spec.map.instantiate({{axis.param, params[i]}});
        Bif1dCell& cell = cells[i];
        cell.param = params[i];
        double x = seed;
        for (std::size_t k = 0; k < spec.transient + spec.record; ++k) {
            x = map(x);
            if (!std::isfinite(x) || std::abs(x) > thr) {
                cell.points.clear();
                return std::nullopt;
            }
            if (k >= spec.transient) cell.points.push_back(x);
        }
        return x;
    };

    if (spec.seed_policy == SeedPolicy::Continuation) {
        double seed = x0;
        for (std::size_t i = 0; i < params.size(); ++i) seed = run(i, seed).value_or(x0);
    } else {
        parallel_for(params.size(), threads, [&](std::size_t i) { run(i, x0); });
    }
    return cells;
}

std::string bif1d_csv(const std::vector<Bif1dCell>& cells) {
    std::string out = "param,x\n";
    for (const auto& c : cells) {
        const std::string p = format_double(c.param);
        for (double x : c.points) {
            out += p;
            out += ',';
            out += format_double(x);
            out += '\n';
        }
    }
    return out;
}

std::vector<Bif2dCell> bif2d(const SweepSpec& spec, unsigned threads) {
    if (spec.axes.size() != 2) throw Error(ErrorCode::InvalidArgument, "bif2d needs exactly two axes");
    const auto v1 = spec.axes[0].values();
    const auto v2 = spec.axes[1].values();
    const double x0 = spec.x0.value_or(spec.map.default_x0());
    Budget budget;
    budget.transient = spec.transient;
    budget.samples = spec.samples;
    std::vector<Bif2dCell> cells(v1.size() * v2.size());
    parallel_for(cells.size(), threads, [&](std::size_t k) {
        const std::size_t i = k / v2.size();
        const std::size_t j = k % v2.size();
        const PwlMap map = spec.map.instantiate({{spec.axes[0].param, v1[i]}, {spec.axes[1].param, v2[j]}});
        const AttractorReport r = classify_attractor(map, x0, budget);
        if (r.verdict == Verdict::Chaotic && map.homogeneous()) {
            throw std::logic_error("Chaotic verdict for a homogeneous map at cell " + std::to_string(k));
        }
        cells[k] = {v1[i], v2[j], r.verdict, r.period, r.lyapunov};
    });
    return cells;
}

std::string bif2d_csv(const std::vector<Bif2dCell>& cells) {
    std::string out = "p1,p2,verdict,period,lyapunov\n";
    for (const auto& c : cells) {
        out += format_double(c.p1);
        out += ',';
        out += format_double(c.p2);
        out += ',';
        out += to_string(c.verdict);
        out += ',';
        out += std::to_string(c.period);
        out += ',';
        if (!std::isnan(c.lyapunov)) out += format_double(c.lyapunov);
        out += '\n';
    }
    return out;
}

int colour_code(Verdict verdict, std::size_t period) noexcept {
    switch (verdict) {
        case Verdict::Divergent: return kCodeDivergent;
        case Verdict::FixedPointO: return kCodeFixedPointO;
        case Verdict::QuasiperiodicIntervals: return kCodeQuasiperiodic;
        case Verdict::Chaotic: return kCodeChaotic;
        case Verdict::NonhyperbolicCycleSegments:
        case Verdict::AttractingCycle: return static_cast<int>(period);
    }
    return kCodeDivergent;
}

void Raster::write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << (channels == 3 ? "P6" : "P5") << '\n' << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

Raster bif1d_image(const std::vector<Bif1dCell>& cells, const ImageSpec& image) {
    Raster r{image.width, image.height, std::vector<std::uint8_t>(image.width * image.height, 255), 1};
    if (cells.empty()) return r;
    double y_lo = std::numeric_limits<double>::infinity();
    double y_hi = -y_lo;
    for (const auto& c : cells) {
        for (double x : c.points) {
            y_lo = std::min(y_lo, x);
            y_hi = std::max(y_hi, x);
        }
    }
    y_lo = image.y_min.value_or(y_lo);
    y_hi = image.y_max.value_or(y_hi);
    if (!(y_lo < y_hi)) {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    const double p_lo = cells.front().param;
    const double p_hi = cells.back().param;
    for (const auto& c : cells) {
        const double u = p_hi > p_lo ? (c.param - p_lo) / (p_hi - p_lo) : 0.5;
        const auto col = static_cast<std::size_t>(std::lround(u * static_cast<double>(r.width - 1)));
        for (double x : c.points) {
            const double v = (x - y_lo) / (y_hi - y_lo);
            if (v < 0.0 || v > 1.0) continue;
            const auto row = static_cast<std::size_t>(std::lround((1.0 - v) * static_cast<double>(r.height - 1)));
            r.pixels[row * r.width + col] = 0;
        }
    }
    return r;
}

Raster bif2d_image(const std::vector<Bif2dCell>& cells, std::size_t n1, std::size_t n2) {
    if (cells.size() != n1 * n2) throw Error(ErrorCode::InvalidArgument, "cell count does not match the grid");
    // p1 runs left to right, p2 bottom to top
    Raster r{n1, n2, std::vector<std::uint8_t>(n1 * n2 * 3, 0), 3};
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            const auto& c = cells[i * n2 + j];
            std::uint8_t rgb[3] = {0, 0, 0};
            const int code = colour_code(c.verdict, c.period);
            if (code == kCodeFixedPointO) {
                rgb[0] = 255, rgb[1] = 220, rgb[2] = 0;
            } else if (code == kCodeQuasiperiodic) {
                rgb[0] = rgb[1] = rgb[2] = 150;
            } else if (code == kCodeChaotic) {
                rgb[0] = rgb[1] = rgb[2] = 255;
            } else if (code > 0) {
                // golden-angle hue walk keeps neighbouring periods apart
                const double h = std::fmod(static_cast<double>(code) * 0.618033988749895, 1.0) * 6.0;
                const double f = h - std::floor(h);
                const double q = 1.0 - f;
                double rr = 0, gg = 0, bb = 0;
                switch (static_cast<int>(h)) {
                    case 0: rr = 1, gg = f; break;
                    case 1: rr = q, gg = 1; break;
                    case 2: gg = 1, bb = f; break;
                    case 3: gg = q, bb = 1; break;
                    case 4: rr = f, bb = 1; break;
                    default: rr = 1, bb = q; break;
                }
                rgb[0] = static_cast<std::uint8_t>(40 + 200 * rr);
                rgb[1] = static_cast<std::uint8_t>(40 + 200 * gg);
                rgb[2] = static_cast<std::uint8_t>(40 + 200 * bb);
            }
            const std::size_t row = n2 - 1 - j;
            std::copy(rgb, rgb + 3, r.pixels.begin() + static_cast<std::ptrdiff_t>((row * n1 + i) * 3));
        }
    }
    return r;
}

}  // namespace pwl
