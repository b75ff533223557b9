#include "jobs.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "pwl/attractor.hpp"
#include "pwl/circle.hpp"
#include "pwl/map_io.hpp"
#include "pwl/market.hpp"
#include "pwl/scan.hpp"
#include "pwl/symbolic.hpp"

namespace pwlmap {

using nlohmann::json;
using pwl::Error;
using pwl::ErrorCode;
using pwl::format_double;

namespace {

json load_document(const json& value, const JobContext& ctx) {
    if (value.is_string()) return pwl::read_json_file(ctx.base_dir / value.get<std::string>());
    return value;
}

bool is_lorenz_doc(const json& doc) { return doc.is_object() && doc.contains("a_L"); }

pwl::LorenzMap lorenz_from_doc(const json& doc) {
    try {
        return pwl::make_lorenz_map(doc.at("a_L").get<double>(), doc.at("a_R").get<double>(),
                                    doc.at("mu_L").get<double>(), doc.at("mu_R").get<double>());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

pwl::PwlMap map_from_job(const json& job, const JobContext& ctx) {
    if (!job.contains("map")) throw Error(ErrorCode::InvalidArgument, "task needs a map");
    const json doc = load_document(job["map"], ctx);
    if (is_lorenz_doc(doc)) throw Error(ErrorCode::InvalidArgument, "task needs a piecewise-linear map");
    return pwl::map_template_from_json(doc).instantiate();
}

double x0_from_job(const json& job, const JobContext& ctx) {
    if (job.contains("x0")) return job["x0"].get<double>();
    return pwl::map_template_from_json(load_document(job.at("map"), ctx)).default_x0();
}

pwl::Interval interval_from(const json& v) {
    const auto ends = v.get<std::vector<double>>();
    if (ends.size() != 2) throw Error(ErrorCode::ParseError, "interval needs two numbers");
    return pwl::make_interval(ends[0], ends[1]);
}

pwl::Budget budget_from(const json& job) {
    pwl::Budget b;
    b.transient = job.value("transient", b.transient);
    b.samples = job.value("samples", b.samples);
    b.max_period = job.value("max_period", b.max_period);
    return b;
}

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : "-"; }

std::string intervals(const std::vector<pwl::Interval>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ';';
        s += format_double(v[i].lo) + ':' + format_double(v[i].hi);
    }
    return s.empty() ? "-" : s;
}

void write_report(std::ostream& out, const pwl::PwlMap& map, const pwl::AttractorReport& r) {
    out << "verdict=" << to_string(r.verdict) << '\n';
    out << "period=" << r.period << '\n';
    out << "word=" << (r.cycle_word.empty() ? "-" : pwl::format_word(map, r.cycle_word)) << '\n';
    out << "slope_product=" << (r.period ? format_double(r.slope_product) : "-") << '\n';
    out << "lyapunov=" << (std::isnan(r.lyapunov) ? "-" : format_double(r.lyapunov)) << '\n';
    out << "rho=" << (r.rotation ? format_double(r.rotation->value) : "-") << '\n';
    out << "intervals=" << intervals(r.cover) << '\n';
}

pwl::ReturnMap return_map_from_job(const json& job, const pwl::PwlMap& map, const JobContext& ctx) {
    if (job.contains("interval")) return pwl::first_return_map(map, interval_from(job["interval"]));
    if (job.contains("search")) {
        const json& s = job["search"];
        const auto approx = interval_from(s.at("approx"));
        const double window = s.value("window", 0.05 * approx.length());
        auto found = pwl::search_return_interval(map, approx, window);
        if (!found) throw Error(ErrorCode::NoReturn, "no two-piece return interval near the given one");
        return *found;
    }
    const auto report = pwl::classify_attractor(map, x0_from_job(job, ctx), budget_from(job));
    if (report.verdict != pwl::Verdict::QuasiperiodicIntervals && report.verdict != pwl::Verdict::Chaotic) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string("no interval to return to: orbit is ") + std::string(to_string(report.verdict)));
    }
    auto rm = pwl::auto_return_map(map, report);
    if (!rm) throw Error(ErrorCode::NoReturn, "no cover interval admits a first-return map");
    return *rm;
}

void task_simulate(const json& job, const JobContext& ctx, std::ostream& out) {
    const auto map = map_from_job(job, ctx);
    const double x0 = x0_from_job(job, ctx);
    const std::size_t n = job.value("n", std::size_t{100});
    out << "t,x,symbol\n";
    double x = x0;
    for (std::size_t t = 1; t <= n; ++t) {
        const std::size_t i = map.branch_index(x);
        x = map.branch(i)(x);
        if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteState, "step " + std::to_string(t));
        // symbol of the branch applied to reach x
        out << t << ',' << format_double(x) << ',' << map.branch(i).label << '\n';
    }
}

void task_classify(const json& job, const JobContext& ctx, std::ostream& out) {
    const auto map = map_from_job(job, ctx);
    const auto report = pwl::classify_attractor(map, x0_from_job(job, ctx), budget_from(job));
    write_report(out, map, report);
    if (job.value("cycles", false)) {
        const std::size_t max_period = job.value("max_period", std::size_t{20});
        for (const auto& c : pwl::detect_nonhyperbolic_cycles(map, max_period)) {
            out << "cycle word=" << pwl::format_word(map, c.word) << " period=" << c.period()
                << " product=" << format_double(c.slope_product) << " segments=" << intervals(c.segments) << '\n';
        }
    }
}

void task_return_map(const json& job, const JobContext& ctx, std::ostream& out) {
    const auto map = map_from_job(job, ctx);
    const auto rm = return_map_from_job(job, map, ctx);
    out << "interval " << format_double(rm.interval.lo) << ' ' << format_double(rm.interval.hi) << '\n';
    out << pwl::serialize_return_map(map, rm);
    const std::size_t samples = job.value("oracle_samples", std::size_t{1000});
    const auto oracle = pwl::return_oracle_check(map, rm, samples / rm.pieces.size() + 1, job.value("seed", std::uint64_t{1}));
    out << "oracle samples=" << oracle.samples << " word_mismatches=" << oracle.word_mismatches
        << " no_returns=" << oracle.no_returns << " max_relative_error=" << format_double(oracle.max_relative_error)
        << '\n';
    if (rm.pieces.size() == 2 && rm.pieces[0].branch.slope > 0.0 && rm.pieces[1].branch.slope > 0.0) {
        const auto f = pwl::circle_map_from_return_map(rm).as_lorenz();
        const double scale = std::max({std::abs(f.mu_left), std::abs(f.mu_right), std::abs(rm.boundaries[0])});
        out << pwl::circle_record(pwl::classify_lorenz(f, 1e-12 * scale), std::nullopt, std::nullopt) << '\n';
    }
}

void task_lorenz(const json& job, const JobContext& ctx, std::ostream& out) {
    const json doc = load_document(job.at("map"), ctx);
    std::optional<pwl::LorenzClassification> cls;
    if (is_lorenz_doc(doc)) {
        cls = pwl::classify_lorenz(lorenz_from_doc(doc), job.value("tolerance", 0.0));
    } else {
        const auto map = pwl::map_template_from_json(doc).instantiate();
        const auto rm = return_map_from_job(job, map, ctx);
        const auto f = pwl::lorenz_from_return_map(rm);
        const double scale = std::max({std::abs(f.mu_left), std::abs(f.mu_right), std::abs(rm.boundaries[0])});
        cls = pwl::classify_lorenz(f, job.value("tolerance", 1e-12) * scale);
    }
    std::optional<pwl::LyapunovEstimate> lyap;
    if (job.contains("lyapunov_n") && !is_lorenz_doc(doc)) {
        const auto map = pwl::map_template_from_json(doc).instantiate();
        lyap = pwl::lyapunov_exponent(map, x0_from_job(job, ctx), job["lyapunov_n"].get<std::size_t>());
    }
    out << pwl::circle_record(cls, std::nullopt, lyap) << '\n';
}

void task_rotation(const json& job, const JobContext& ctx, std::ostream& out) {
    const json doc = load_document(job.at("map"), ctx);
    pwl::CircleMap circle;
    if (is_lorenz_doc(doc)) {
        const auto f = lorenz_from_doc(doc);
        circle.domain = f.absorbing_interval();
        circle.discontinuity = 0.0;
        circle.left.slope = f.a_left;
        circle.left.offset = f.mu_left;
        circle.right.slope = f.a_right;
        circle.right.offset = f.mu_right;
    } else {
        circle = pwl::circle_reduction(pwl::map_template_from_json(doc).instantiate());
    }
    pwl::RotationOptions options;
    options.denominator_cap = job.value("denominator_cap", options.denominator_cap);
    const std::size_t n = job.value("n", std::size_t{100000});
    const double x0 = job.contains("x0") ? job["x0"].get<double>() : circle.domain.midpoint();
    const auto rho = pwl::rotation_number(circle, x0, n, options);
    const double scale = std::max(std::abs(circle.domain.lo), std::abs(circle.domain.hi));
    out << pwl::circle_record(pwl::classify_lorenz(circle.as_lorenz(), 1e-12 * scale), rho, std::nullopt) << '\n';
}

void task_lyapunov(const json& job, const JobContext& ctx, std::ostream& out) {
    const auto map = map_from_job(job, ctx);
    const auto est = pwl::lyapunov_exponent(map, x0_from_job(job, ctx), job.value("n", std::size_t{100000}));
    out << "lambda=" << format_double(est.value) << " direct=" << opt(est.direct)
        << " bound=" << format_double(est.bounded_orbit_limit()) << " m=" << format_double(est.min_abs_state)
        << " M=" << format_double(est.max_abs_state) << " n=" << est.n << '\n';
}

void task_market(const json& job, const JobContext& ctx, std::ostream& out) {
    const auto params = pwl::market_params_from_json(load_document(job.at("params"), ctx));
    const std::string model = job.value("model", std::string("g4"));
    pwl::PwlMap map = model == "g4"   ? pwl::build_g4(params)
                      : model == "g3" ? pwl::build_g3_offset(params, job.value("mu_R", 0.0))
                                      : throw Error(ErrorCode::InvalidArgument, "model must be g3 or g4");
    if (job.contains("n")) {
        const double x0 = job.value("x0", params.z_right / 2.0);
        out << pwl::price_series_csv(pwl::price_series(map, x0, job["n"].get<std::size_t>(), params.fundamental));
    } else {
        out << pwl::map_to_json(map).dump(2) << '\n';
    }
}

void task_series(const json& job, const JobContext& ctx, std::ostream& out) {
    const auto map = map_from_job(job, ctx);
    const std::size_t transient = job.value("transient", std::size_t{0});
    double x = x0_from_job(job, ctx);
    for (std::size_t k = 0; k < transient; ++k) x = map(x);
    out << pwl::price_series_csv(pwl::price_series(map, x, job.value("n", std::size_t{200}), job.value("F", 0.0)));
}

void task_basin(const json& job, const JobContext& ctx, std::ostream& out) {
    const auto map = map_from_job(job, ctx);
    const json& g = job.at("grid");
    const auto grid = pwl::cell_centres(g.at("min").get<double>(), g.at("max").get<double>(),
                                        g.at("count").get<std::size_t>());
    const auto table = pwl::basin_probe(map, grid, budget_from(job), ctx.threads);
    out << pwl::basin_csv(table);
    if (ctx.log) {
        for (const auto& r : table.runs) {
            *ctx.log << "basin " << to_string(r.verdict) << " period=" << r.period << " seeds=" << r.count << " ["
                     << format_double(r.lo) << ", " << format_double(r.hi) << "]\n";
        }
    }
}

pwl::SweepSpec sweep_from_job(const json& job, const JobContext& ctx) {
    json resolved = job;
    resolved["map"] = load_document(job.at("map"), ctx);
    return pwl::sweep_spec_from_json(resolved);
}

void task_bif1d(const json& job, const JobContext& ctx, std::ostream& out) {
    const auto spec = sweep_from_job(job, ctx);
    const auto cells = pwl::bif1d(spec, ctx.threads);
    out << pwl::bif1d_csv(cells);
    if (ctx.image) pwl::bif1d_image(cells, spec.image.value_or(pwl::ImageSpec{})).write(*ctx.image);
}

void task_bif2d(const json& job, const JobContext& ctx, std::ostream& out) {
    const auto spec = sweep_from_job(job, ctx);
    const auto cells = pwl::bif2d(spec, ctx.threads);
    out << pwl::bif2d_csv(cells);
    if (ctx.image) pwl::bif2d_image(cells, spec.axes[0].count, spec.axes[1].count).write(*ctx.image);
    if (ctx.log) {
        std::map<std::string, std::size_t> tally;
        for (const auto& c : cells) {
            tally[std::string(to_string(c.verdict)) + (c.period ? "(" + std::to_string(c.period) + ")" : "")]++;
        }
        for (const auto& [k, v] : tally) *ctx.log << "cells " << k << ' ' << v << '\n';
    }
}

}  // namespace

void run_job(const json& job, const JobContext& ctx, std::ostream& out) {
    std::ofstream file;
    std::ostream* sink = &out;
    if (ctx.out) {
        file.open(*ctx.out);
        if (!file) throw Error(ErrorCode::IoError, "cannot write " + ctx.out->string());
        sink = &file;
    }
    const std::string task = job.value("task", std::string());
    try {
        if (task == "simulate") task_simulate(job, ctx, *sink);
        else if (task == "classify") task_classify(job, ctx, *sink);
        else if (task == "return-map") task_return_map(job, ctx, *sink);
        else if (task == "lorenz") task_lorenz(job, ctx, *sink);
        else if (task == "rotation") task_rotation(job, ctx, *sink);
        else if (task == "lyapunov") task_lyapunov(job, ctx, *sink);
        else if (task == "market") task_market(job, ctx, *sink);
        else if (task == "series") task_series(job, ctx, *sink);
        else if (task == "basin") task_basin(job, ctx, *sink);
        else if (task == "bif1d") task_bif1d(job, ctx, *sink);
        else if (task == "bif2d") task_bif2d(job, ctx, *sink);
        else throw Error(ErrorCode::InvalidArgument, "unknown task \"" + task + "\"");
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    if (file.is_open() && !file) throw Error(ErrorCode::IoError, "short write to " + ctx.out->string());
}

}  // namespace pwlmap
