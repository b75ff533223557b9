#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "json.hpp"

namespace pwlmap {

struct JobContext {
    std::filesystem::path base_dir = ".";  // relative paths in the job resolve here
    std::optional<std::filesystem::path> out;    // main output; stdout when absent
    std::optional<std::filesystem::path> image;  // raster output for sweeps
    unsigned threads = 0;
    std::ostream* log = nullptr;  // progress and summaries; null for quiet
};

/// Runs one task document ("task" selects simulate, classify, return-map,
/// lorenz, rotation, lyapunov, market, series, basin, bif1d or bif2d).
/// Throws pwl::Error.
void run_job(const nlohmann::json& job, const JobContext& ctx, std::ostream& out);

}  // namespace pwlmap
