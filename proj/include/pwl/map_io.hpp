#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "pwl/core.hpp"

namespace pwl {

/// Map definition document:
///   {"breakpoints":[...], "slopes":[...], "offsets":[...],
///    "labels":[...], "closures":["left"|"right", ...]}
/// "offsets" defaults to zeros, "labels" to L/M/R-style names for up to four
/// branches, "closures" to "left" everywhere. Doubles are written in
/// shortest round-trip form so parameters survive a dump/parse cycle exactly.
nlohmann::json map_to_json(const PwlMap& map);
PwlMap map_from_json(const nlohmann::json& doc);

PwlMap read_map_file(const std::filesystem::path& path);
void write_map_file(const PwlMap& map, const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace pwl
