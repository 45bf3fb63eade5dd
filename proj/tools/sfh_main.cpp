// Experiment runner: validates a config, executes the named experiment, and
// writes CSV/JSON artifacts plus a manifest with checksums.  Exit codes:
//   0 success, 2 config error, 3 precondition violation,
//   4 numerical failure, 5 assertion/suite failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sfh/analysis.hpp"
#include "sfh/config.hpp"
#include "sfh/errors.hpp"
#include "sfh/field.hpp"
#include "sfh/io.hpp"
#include "sfh/sampler.hpp"
#include "sfh/suite.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using sfh::config::ExperimentConfig;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kPreconditionError = 3,
    kNumericalError = 4,
    kAssertionError = 5,
};

struct RunContext {
    ExperimentConfig cfg;
    fs::path out_dir;
    std::vector<fs::path> outputs;
    json report;

    void add_output(const fs::path& p) { outputs.push_back(p); }
};

json fit_to_json(const sfh::analysis::ExponentFit& fit) {
    json j;
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["stderr"] = fit.stderr_slope;
    j["target"] = fit.target;
    j["tolerance"] = fit.tolerance;
    j["pass"] = fit.pass;
    j["resolution_ok"] = fit.resolution_ok;
    j["window"] = {fit.abscissa.front(), fit.abscissa.back()};
    return j;
}

std::vector<double> require_number_list(const json& options, const char* key) {
    if (!options.contains(key) || !options.at(key).is_array())
        throw sfh::config_error(std::string("options: missing array '") + key + "'");
    std::vector<double> out;
    for (const auto& v : options.at(key)) out.push_back(v.get<double>());
    return out;
}

void run_sample(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    sfh::QuadratureConfig quad;
    const auto& opt = cfg.options;
    sfh::sampler::TimeGrid grid;
    if (opt.contains("times")) {
        grid = sfh::sampler::TimeGrid(require_number_list(opt, "times"), cfg.model.horizon);
    } else {
        const double start = opt.value("start", cfg.model.horizon / 8.0);
        const double stop = opt.value("stop", cfg.model.horizon);
        const int count = opt.value("count", 8);
        grid = sfh::sampler::TimeGrid::uniform(start, stop, count, cfg.model.horizon);
    }

    const auto sets = sfh::sampler::sample_coefficient_paths(cfg.model, grid, cfg.seed,
                                                             cfg.replicates, quad, cfg.workers);
    const fs::path coeff_path = ctx.out_dir / "coefficients.csv";
    sfh::io::write_coefficients_csv(coeff_path.string(), sets);
    ctx.add_output(coeff_path);

    if (opt.contains("points")) {
        std::vector<sfh::harmonics::SphericalPoint> pts;
        for (const auto& p : opt.at("points"))
            pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
        const auto fg = sfh::field::FieldGrid::of_points(pts);
        const auto sample = sfh::field::evaluate_field(sets.front(), fg);
        const fs::path csv = ctx.out_dir / "field.csv";
        const fs::path bin = ctx.out_dir / "field.bin";
        sfh::io::write_field_csv(csv.string(), sample);
        sfh::io::write_field_binary(bin.string(), sample);
        ctx.add_output(csv);
        ctx.add_output(bin);
    }
    ctx.report["replicates"] = cfg.replicates;
    ctx.report["grid_points"] = grid.size();
}

void run_spectrum(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    sfh::QuadratureConfig quad;
    const double t = cfg.options.value("time", 1.0);
    const auto window = cfg.options.value("window", std::vector<int>{8, 64});
    const auto fit = sfh::analysis::spectrum_slope(cfg.model, t, window[0], window[1], quad,
                                                   0.1 * cfg.tolerance_scale);
    ctx.report["analytic"] = fit_to_json(fit);

    std::vector<std::vector<double>> cols{fit.abscissa, fit.ordinate};
    std::vector<std::string> header{"l_plus_half", "analytic_power"};
    if (cfg.options.value("monte_carlo", false)) {
        const auto mc =
            sfh::analysis::spectrum_slope_mc(cfg.model, t, window[0], window[1], quad, cfg.seed,
                                             cfg.replicates, cfg.workers, 0.15 * cfg.tolerance_scale);
        ctx.report["monte_carlo"] = fit_to_json(mc);
        cols.push_back(mc.ordinate);
        header.push_back("mc_power");
    }
    const fs::path curve = ctx.out_dir / "spectrum.csv";
    sfh::io::write_table_csv(curve.string(), header, cols);
    ctx.add_output(curve);
}

void run_variogram(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    sfh::QuadratureConfig quad;
    const double t = cfg.options.value("time", 1.0);
    const std::string kind = cfg.options.value("kind", "temporal");
    const auto mode = cfg.options.value("mode", "analytic") == std::string("monte_carlo")
                          ? sfh::analysis::VariogramMode::monte_carlo
                          : sfh::analysis::VariogramMode::analytic;
    sfh::analysis::ExponentFit fit;
    if (kind == "temporal") {
        fit = sfh::analysis::temporal_variogram(cfg.model, t, require_number_list(cfg.options, "lags"),
                                                mode, quad, cfg.seed, cfg.replicates, cfg.workers,
                                                0.1 * cfg.tolerance_scale);
    } else {
        fit = sfh::analysis::spatial_variogram(cfg.model, t,
                                               require_number_list(cfg.options, "distances"), mode,
                                               quad, cfg.seed, cfg.replicates, cfg.workers,
                                               0.1 * cfg.tolerance_scale);
    }
    ctx.report["fit"] = fit_to_json(fit);
    ctx.report["kind"] = kind;
    const fs::path curve = ctx.out_dir / "variogram.csv";
    sfh::io::write_table_csv(curve.string(), {"separation", "variogram"},
                             {fit.abscissa, fit.ordinate});
    ctx.add_output(curve);
}

void run_slnd(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    sfh::QuadratureConfig quad;
    const double t = cfg.options.value("time", 1.0);
    const std::string kind = cfg.options.value("kind", "temporal");
    const int k_lo = cfg.options.value("k_lo", 3);
    const int k_hi = cfg.options.value("k_hi", 9);
    const int points = cfg.options.value("points", 8);
    sfh::analysis::SlndReport rep;
    if (kind == "temporal") {
        rep = sfh::analysis::temporal_slnd_scaling(cfg.model, t, k_lo, k_hi, points, quad,
                                                   0.15 * cfg.tolerance_scale,
                                                   cfg.options.value("two_sided", false));
    } else {
        rep = sfh::analysis::spatial_slnd_scaling(cfg.model, t, k_lo, k_hi, points, quad,
                                                  0.15 * cfg.tolerance_scale);
    }
    ctx.report["fit"] = fit_to_json(rep.fit);
    ctx.report["kind"] = kind;
    ctx.report["unconditional_variance"] = rep.unconditional;
    ctx.report["monotone_ok"] = rep.monotone_ok;
    const fs::path curve = ctx.out_dir / "slnd.csv";
    sfh::io::write_table_csv(curve.string(), {"scale", "conditional_variance"},
                             {rep.scales, rep.cond_var});
    ctx.add_output(curve);
}

void run_truncation(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    sfh::QuadratureConfig quad;
    const double t = cfg.options.value("time", 1.0);
    std::vector<int> levels;
    if (cfg.options.contains("levels"))
        for (const auto& v : cfg.options.at("levels")) levels.push_back(v.get<int>());
    else
        levels = {8, 12, 16, 24, 32, 48, 64, 96, 128};
    const auto rep = sfh::analysis::truncation_error(cfg.model, t, levels, quad);
    ctx.report["fit"] = fit_to_json(rep.fit);
    ctx.report["calibration_constant"] = rep.calibration_constant;
    std::vector<double> lv(levels.begin(), levels.end());
    const fs::path curve = ctx.out_dir / "truncation.csv";
    sfh::io::write_table_csv(curve.string(), {"level", "tail", "bound", "ratio"},
                             {lv, rep.tail, rep.bound, rep.ratio});
    ctx.add_output(curve);
}

void run_modulus(RunContext& ctx) {
    const auto& cfg = ctx.cfg;
    sfh::QuadratureConfig quad;
    const std::string kind = cfg.options.value("kind", "temporal");
    const int level = cfg.options.value("grid_level", 14);
    const int count = cfg.options.value("count", 1025);
    std::vector<double> eps;
    if (cfg.options.contains("epsilons"))
        eps = require_number_list(cfg.options, "epsilons");
    else
        eps = {std::ldexp(1.0, -6), std::ldexp(1.0, -8), std::ldexp(1.0, -10)};

    sfh::analysis::ModulusReport rep;
    if (kind == "temporal") {
        const double start = cfg.options.value("start", 0.5);
        std::vector<double> times(count);
        for (int i = 0; i < count; ++i) times[i] = start + i * std::ldexp(1.0, -level);
        const auto paths = sfh::analysis::sample_field_paths_at_point(cfg.model, times, cfg.seed,
                                                                      cfg.replicates, quad);
        const double expo =
            cfg.options.value("exponent", sfh::analysis::exponents(cfg.model).eta);
        rep = sfh::analysis::modulus_statistic(cfg.model, paths, times, eps, expo);
    } else {
        const double t = cfg.options.value("time", 1.0);
        std::vector<double> pos(count);
        for (int i = 0; i < count; ++i) pos[i] = i * std::ldexp(1.0, -level);
        const auto fields = sfh::analysis::sample_field_on_arc(
            cfg.model, t, pos, cfg.seed, cfg.replicates, quad,
            cfg.options.value("smoothing_k", 0.0));
        const double expo =
            cfg.options.value("exponent", sfh::analysis::exponents(cfg.model).gamma);
        rep = sfh::analysis::spatial_modulus_statistic(cfg.model, fields, pos, eps, expo);
    }
    ctx.report["kind"] = kind;
    ctx.report["exponent"] = rep.exponent;
    ctx.report["resolution_ok"] = rep.resolution_ok;
    ctx.report["epsilons"] = rep.epsilons;
    ctx.report["median"] = rep.median;
    ctx.report["quartile_lo"] = rep.quartile_lo;
    ctx.report["quartile_hi"] = rep.quartile_hi;
    const fs::path curve = ctx.out_dir / "modulus.csv";
    sfh::io::write_table_csv(curve.string(), {"epsilon", "median", "q25", "q75"},
                             {rep.epsilons, rep.median, rep.quartile_lo, rep.quartile_hi});
    ctx.add_output(curve);
}

int run_suite_lines(int workers, double tolerance_scale, const std::vector<int>& only,
                    json* report_out) {
    const auto results = sfh::suite::run_acceptance(workers, tolerance_scale, only);
    bool all = true;
    json arr = json::array();
    for (const auto& res : results) {
        std::printf("[%s] criterion %2d: %s (%.1fs) %s\n", res.pass ? "PASS" : "FAIL", res.id,
                    res.name.c_str(), res.seconds, res.details.c_str());
        std::fflush(stdout);
        all = all && res.pass;
        json j;
        j["id"] = res.id;
        j["name"] = res.name;
        j["pass"] = res.pass;
        j["details"] = res.details;
        j["seconds"] = res.seconds;
        arr.push_back(std::move(j));
    }
    if (report_out) (*report_out)["criteria"] = std::move(arr);
    return all ? kOk : kAssertionError;
}

int execute(ExperimentConfig cfg, const std::string& out_override) {
    if (!out_override.empty()) cfg.output_dir = out_override;
    const auto violations = sfh::config::validate(cfg);
    if (!violations.empty()) {
        for (const auto& v : violations) std::fprintf(stderr, "error: %s\n", v.c_str());
        return kConfigError;
    }
    if (cfg.output_dir.empty()) {
        std::fprintf(stderr, "error: no output directory (set 'output' or pass --out)\n");
        return kConfigError;
    }

    RunContext ctx;
    ctx.cfg = cfg;
    ctx.out_dir = cfg.output_dir;
    fs::create_directories(ctx.out_dir);

    const auto start = std::chrono::steady_clock::now();
    int suite_status = kOk;
    if (cfg.experiment == "sample")
        run_sample(ctx);
    else if (cfg.experiment == "spectrum")
        run_spectrum(ctx);
    else if (cfg.experiment == "variogram")
        run_variogram(ctx);
    else if (cfg.experiment == "slnd")
        run_slnd(ctx);
    else if (cfg.experiment == "truncation")
        run_truncation(ctx);
    else if (cfg.experiment == "modulus")
        run_modulus(ctx);
    else if (cfg.experiment == "suite")
        suite_status = run_suite_lines(cfg.workers, cfg.tolerance_scale, {}, &ctx.report);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    // report.json, then the manifest last: a failed run leaves no manifest
    ctx.report["experiment"] = cfg.experiment;
    ctx.report["seed"] = cfg.seed;
    {
        const fs::path report_path = ctx.out_dir / "report.json";
        std::ofstream out(report_path);
        out << ctx.report.dump(2) << "\n";
        ctx.add_output(report_path);
    }

    json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = cfg.raw;
    manifest["seed"] = cfg.seed;
    manifest["wall_time_s"] = wall;
    json outputs = json::array();
    for (const auto& p : ctx.outputs) {
        json o;
        o["file"] = p.filename().string();
        o["fnv1a64"] = sfh::io::fnv1a64_file(p.string());
        o["bytes"] = fs::file_size(p);
        outputs.push_back(std::move(o));
    }
    manifest["outputs"] = std::move(outputs);
    const fs::path tmp = ctx.out_dir / "manifest.json.tmp";
    {
        std::ofstream out(tmp);
        out << manifest.dump(2) << "\n";
    }
    fs::rename(tmp, ctx.out_dir / "manifest.json");
    return suite_status;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"sfh: spectral simulation and verification toolkit for the fractional "
                 "stochastic heat equation on the sphere"};
    app.require_subcommand(1);

    std::string config_path, out_dir, suite_name = "acceptance";
    std::uint64_t seed_override = 0;
    bool seed_set = false;
    int workers = 0;
    double tolerance_scale = 1.0;
    std::vector<int> criteria;

    auto* validate_cmd = app.add_subcommand("validate", "check a config against preconditions");
    validate_cmd->add_option("--config", config_path, "config file (JSON)")->required();

    auto* run_cmd = app.add_subcommand("run", "run the configured experiment");
    run_cmd->add_option("--config", config_path, "config file (JSON)")->required();
    run_cmd->add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    run_cmd->add_option("--out", out_dir, "output directory (overrides config)");
    run_cmd->add_option("--workers", workers, "worker pool size (0 = hardware)");
    run_cmd->add_option("--tolerance-scale", tolerance_scale, "scale all tolerances");

    auto* suite_cmd = app.add_subcommand("suite", "run a named verification suite");
    suite_cmd->add_option("name", suite_name, "suite name (acceptance)");
    suite_cmd->add_option("--out", out_dir, "write acceptance_report.json here");
    suite_cmd->add_option("--workers", workers, "worker pool size (0 = hardware)");
    suite_cmd->add_option("--tolerance-scale", tolerance_scale, "scale all tolerances");
    suite_cmd->add_option("--criteria", criteria, "run only these criterion ids")
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    if (validate_cmd->parsed()) {
        const auto cfg = ExperimentConfig::parse_file(config_path);
        const auto violations = sfh::config::validate(cfg);
        if (violations.empty()) {
            std::printf("OK: configuration satisfies every checked precondition\n");
        } else {
            for (const auto& v : violations) std::printf("violation: %s\n", v.c_str());
        }
        return kOk; // diagnostics are the output
    }
    if (run_cmd->parsed()) {
        auto cfg = ExperimentConfig::parse_file(config_path);
        if (seed_set) cfg.seed = seed_override;
        if (workers != 0) cfg.workers = workers;
        if (tolerance_scale != 1.0) cfg.tolerance_scale = tolerance_scale;
        return execute(std::move(cfg), out_dir);
    }
    if (suite_cmd->parsed()) {
        if (suite_name != "acceptance") {
            std::fprintf(stderr, "error: unknown suite '%s'\n", suite_name.c_str());
            return kConfigError;
        }
        json report;
        const int status = run_suite_lines(workers, tolerance_scale, criteria, &report);
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            std::ofstream out(fs::path(out_dir) / "acceptance_report.json");
            out << report.dump(2) << "\n";
        }
        return status;
    }
    return kConfigError;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const sfh::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const sfh::precondition_error& e) {
        std::fprintf(stderr, "precondition violation: %s\n", e.what());
        return kPreconditionError;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "precondition violation: %s\n", e.what());
        return kPreconditionError;
    } catch (const sfh::convergence_error& e) {
        std::fprintf(stderr, "numerical failure: %s (achieved %.3e)\n", e.what(), e.achieved);
        return kNumericalError;
    } catch (const sfh::factorization_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kNumericalError;
    } catch (const sfh::symmetry_error& e) {
        std::fprintf(stderr, "assertion failure: %s\n", e.what());
        return kAssertionError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "assertion failure: %s\n", e.what());
        return kAssertionError;
    }
}
