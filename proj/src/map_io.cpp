#include "pwl/map_io.hpp"

#include <fstream>
#include <sstream>

namespace pwl {

namespace {

std::vector<std::string> default_labels(std::size_t n) {
    switch (n) {
        case 1: return {"M"};
        case 2: return {"L", "R"};
        case 3: return {"L", "M", "R"};
        case 4: return {"L", "M-", "M+", "R"};
        default: break;
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("B" + std::to_string(i));
    return out;
}

Side parse_side(const nlohmann::json& v) {
    const auto s = v.get<std::string>();
    if (s == "left" || s == "L") return Side::Left;
    if (s == "right" || s == "R") return Side::Right;
    throw Error(ErrorCode::ParseError, "closure must be \"left\" or \"right\", got \"" + s + "\"");
}

}  // namespace

nlohmann::json map_to_json(const PwlMap& map) {
    nlohmann::json doc;
    doc["breakpoints"] = std::vector<double>(map.breakpoints().begin(), map.breakpoints().end());
    auto& slopes = doc["slopes"] = nlohmann::json::array();
    auto& offsets = doc["offsets"] = nlohmann::json::array();
    auto& labels = doc["labels"] = nlohmann::json::array();
    for (const auto& b : map.branches()) {
        slopes.push_back(b.slope);
        offsets.push_back(b.offset);
        labels.push_back(b.label);
    }
    auto& closures = doc["closures"] = nlohmann::json::array();
    for (Side s : map.closures()) closures.push_back(s == Side::Left ? "left" : "right");
    return doc;
}

PwlMap map_from_json(const nlohmann::json& doc) {
    try {
        auto breakpoints = doc.at("breakpoints").get<std::vector<double>>();
        auto slopes = doc.at("slopes").get<std::vector<double>>();
        std::vector<double> offsets(slopes.size(), 0.0);
        if (doc.contains("offsets")) offsets = doc["offsets"].get<std::vector<double>>();
        auto labels = doc.contains("labels") ? doc["labels"].get<std::vector<std::string>>()
                                             : default_labels(slopes.size());
        std::vector<Side> closures(breakpoints.size(), Side::Left);
        if (doc.contains("closures")) {
            closures.clear();
            for (const auto& c : doc["closures"]) closures.push_back(parse_side(c));
        }
        return build_map(std::move(breakpoints), slopes, offsets, std::move(labels),
                         std::move(closures));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    try {
        // comments are allowed so spec files can carry notes
        return nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

PwlMap read_map_file(const std::filesystem::path& path) {
    return map_from_json(read_json_file(path));
}

void write_map_file(const PwlMap& map, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << map_to_json(map).dump(2) << '\n';
}

}  // namespace pwl
