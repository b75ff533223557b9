// pwlmap: command-line front end for the pwldyn library.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "jobs.hpp"
#include "pwl/error.hpp"
#include "pwl/map_io.hpp"

#ifndef PWLMAP_SPECS_DIR
#define PWLMAP_SPECS_DIR "specs"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
    std::string map;
    std::string spec;
    std::optional<double> x0;
    std::optional<std::size_t> n;
    std::optional<std::size_t> transient;
    std::string out;
    std::string image;
    unsigned threads = 0;
    std::optional<std::uint64_t> seed;
};

struct Extra {
    std::vector<double> interval;
    std::vector<double> search;
    std::optional<double> window;
    std::vector<double> grid;
    std::optional<long long> cap;
    std::string model = "g4";
    std::optional<double> mu_r;
    bool cycles = false;
    std::string figure;
    std::string specs_dir;
};

fs::path specs_dir(const Extra& extra) {
    if (!extra.specs_dir.empty()) return extra.specs_dir;
    if (const char* env = std::getenv("PWLMAP_SPECS")) return env;
    return PWLMAP_SPECS_DIR;
}

// Job document from --spec, with flags layered on top.
json build_job(const std::string& task, const Common& c, const Extra& e, pwlmap::JobContext& ctx) {
    json job = json::object();
    if (!c.spec.empty()) {
        job = pwl::read_json_file(c.spec);
        ctx.base_dir = fs::absolute(c.spec).parent_path();
    }
    job["task"] = task;
    if (!c.map.empty()) {
        (task == "market" ? job["params"] : job["map"]) = fs::absolute(c.map).string();
    }
    if (c.x0) job["x0"] = *c.x0;
    if (c.n) job[task == "classify" || task == "bif2d" ? "samples" : "n"] = *c.n;
    if (c.transient) job["transient"] = *c.transient;
    if (c.seed) job["seed"] = *c.seed;
    if (e.interval.size() == 2) job["interval"] = e.interval;
    if (e.search.size() == 2) {
        job["search"] = {{"approx", e.search}};
        if (e.window) job["search"]["window"] = *e.window;
    }
    if (e.grid.size() == 3) {
        job["grid"] = {{"min", e.grid[0]}, {"max", e.grid[1]}, {"count", static_cast<std::size_t>(e.grid[2])}};
    }
    if (e.cap) job["denominator_cap"] = *e.cap;
    if (task == "market") {
        job["model"] = e.model;
        if (e.mu_r) job["mu_R"] = *e.mu_r;
    }
    if (e.cycles) job["cycles"] = true;
    if (!c.out.empty()) ctx.out = c.out;
    if (!c.image.empty()) ctx.image = c.image;
    ctx.threads = c.threads;
    return job;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Piecewise-linear discontinuous maps: orbits, return maps, rotation numbers, sweeps"};
    app.require_subcommand(1);
    Common common;
    Extra extra;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--map", common.map, "map document (JSON)");
        sub->add_option("--spec", common.spec, "task document (JSON); flags override its fields");
        sub->add_option("--x0", common.x0, "initial state");
        sub->add_option("--n", common.n, "iterations or sample count");
        sub->add_option("--transient", common.transient, "transient steps discarded first");
        sub->add_option("--out", common.out, "output file (default stdout)");
        sub->add_option("--threads", common.threads, "worker threads, 0 = all cores");
        sub->add_option("--seed", common.seed, "random seed for sampling checks");
    };

    struct Command {
        const char* name;
        const char* help;
    };
    const Command commands[] = {
        {"simulate", "orbit as CSV: t,x,symbol"},
        {"classify", "asymptotic verdict for one seed"},
        {"return-map", "first-return map and brute-force oracle check"},
        {"lorenz", "gap / circle / overlap classification"},
        {"rotation", "rotation number of a circle map or reducible two-branch map"},
        {"lyapunov", "Lyapunov exponent along an orbit"},
        {"market", "build the market map from trader parameters (--map params.json)"},
        {"basin", "verdicts over a grid of seeds"},
        {"bif1d", "1D bifurcation sweep, CSV param,x"},
        {"bif2d", "2D verdict sweep, CSV p1,p2,verdict,period,lyapunov"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& cmd : commands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        add_common(sub);
        subs.push_back(sub);
        const std::string name = cmd.name;
        if (name == "return-map" || name == "lorenz") {
            sub->add_option("--interval", extra.interval, "return interval lo hi")->expected(2);
            sub->add_option("--search", extra.search, "search for a return interval near lo hi")->expected(2);
            sub->add_option("--window", extra.window, "search window around the approximate ends");
        }
        if (name == "basin") sub->add_option("--grid", extra.grid, "min max count")->expected(3);
        if (name == "rotation") sub->add_option("--cap", extra.cap, "denominator cap for rational detection");
        if (name == "market") {
            sub->add_option("--model", extra.model, "g4 or g3")->check(CLI::IsMember({"g3", "g4"}));
            sub->add_option("--mu-r", extra.mu_r, "right-branch offset for g3");
        }
        if (name == "classify") sub->add_flag("--cycles", extra.cycles, "also list nonhyperbolic cycle segments");
        if (name == "bif1d" || name == "bif2d") sub->add_option("--image", common.image, "raster output (PGM/PPM)");
    }
    CLI::App* repro = app.add_subcommand("repro", "run the checked-in spec for a figure, e.g. repro fig8");
    repro->add_option("figure", extra.figure, "figure id")->required();
    repro->add_option("--specs-dir", extra.specs_dir, "directory holding <figure>.json");
    repro->add_option("--out", common.out, "output file (default stdout)");
    repro->add_option("--image", common.image, "raster output for sweep figures");
    repro->add_option("--threads", common.threads, "worker threads, 0 = all cores");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        pwlmap::JobContext ctx;
        ctx.log = &std::cerr;
        json job;
        if (repro->parsed()) {
            const fs::path path = specs_dir(extra) / (extra.figure + ".json");
            if (!fs::exists(path)) {
                std::cerr << "unknown figure '" << extra.figure << "' (no " << path.string() << ")\n";
                return 2;
            }
            common.spec = path.string();
            job = pwl::read_json_file(path);
            const std::string task = job.value("task", std::string());
            job = build_job(task, common, extra, ctx);
        } else {
            for (CLI::App* sub : subs) {
                if (sub->parsed()) job = build_job(sub->get_name(), common, extra, ctx);
            }
        }
        if (job.value("task", std::string()) != "market" && !job.contains("map")) {
            std::cerr << "--map or --spec with a \"map\" field is required\n";
            return 2;
        }
        if (job.value("task", std::string()) == "market" && !job.contains("params")) {
            std::cerr << "--map with a market parameter file is required\n";
            return 2;
        }
        pwlmap::run_job(job, ctx, std::cout);
    } catch (const pwl::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
