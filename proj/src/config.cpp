#include "sfh/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "sfh/analysis.hpp"
#include "sfh/errors.hpp"

namespace sfh::config {

using nlohmann::json;

namespace {

const std::set<std::string> kExperiments{"sample",     "spectrum", "variogram", "slnd",
                                         "truncation", "modulus",  "suite"};

double require_number(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw config_error(std::string("config: missing or non-numeric field '") + key + "'");
    return j.at(key).get<double>();
}

} // namespace

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config: JSON parse error: ") + e.what());
    }
    return parse_json(j);
}

ExperimentConfig ExperimentConfig::parse_json(const json& j) {
    ExperimentConfig cfg;
    cfg.raw = j;

    if (!j.contains("model") || !j.at("model").is_object())
        throw config_error("config: missing 'model' object");
    const json& m = j.at("model");
    cfg.model.hurst = require_number(m, "hurst");
    cfg.model.alpha = require_number(m, "alpha");
    cfg.model.horizon = require_number(m, "horizon");
    cfg.model.truncation = static_cast<int>(require_number(m, "truncation"));
    cfg.model.d0 = m.value("d0", 0.0);
    cfg.model.beta = m.value("beta", 5.0);
    if (m.contains("upsilon")) {
        const json& u = m.at("upsilon");
        const std::string type = u.value("type", "constant");
        if (type != "constant")
            throw config_error("config: only the constant upsilon family is supported in files");
        cfg.upsilon_constant = u.value("value", 1.0);
        if (!(cfg.upsilon_constant > 0.0))
            throw config_error("config: upsilon value must be positive");
    }
    const double c = cfg.upsilon_constant;
    cfg.model.c0_bound = std::max({1.0, c, 1.0 / c});
    if (c != 1.0)
        cfg.model.upsilon = [c](int) { return c; };

    if (!j.contains("experiment") || !j.at("experiment").is_string())
        throw config_error("config: missing 'experiment' string");
    cfg.experiment = j.at("experiment").get<std::string>();
    if (kExperiments.count(cfg.experiment) == 0)
        throw config_error("config: unknown experiment '" + cfg.experiment + "'");

    if (!j.contains("seed") || !j.at("seed").is_number_integer() ||
        (j.at("seed").is_number_integer() && !j.at("seed").is_number_unsigned() &&
         j.at("seed").get<std::int64_t>() < 0))
        throw config_error("config: 'seed' is mandatory (nonnegative integer, no wall-clock default)");
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.seed_given = true;

    cfg.replicates = j.value("replicates", 0ULL);
    cfg.workers = j.value("workers", 0);
    cfg.tolerance_scale = j.value("tolerance_scale", 1.0);
    cfg.output_dir = j.value("output", std::string{});
    cfg.options = j.value("options", json::object());
    return cfg;
}

namespace {

void validate_model(const ExperimentConfig& cfg, std::vector<std::string>& out) {
    try {
        cfg.model.validate();
    } catch (const std::exception& e) {
        out.emplace_back(e.what());
    }
}

void need_positive_time(const ExperimentConfig& cfg, std::vector<std::string>& out) {
    const double t = cfg.options.value("time", 1.0);
    if (!(t > 0.0 && t <= cfg.model.horizon))
        out.push_back("option 'time' must lie in (0, horizon]");
}

} // namespace

std::vector<std::string> validate(const ExperimentConfig& cfg) {
    std::vector<std::string> out;
    validate_model(cfg, out);
    if (!(cfg.tolerance_scale > 0.0)) out.push_back("tolerance_scale must be positive");

    const auto gamma = 0.5 * cfg.model.alpha - 1.0 + 2.0 * cfg.model.hurst;
    const bool initial_regular =
        cfg.model.d0 == 0.0 || cfg.model.beta > 4.0 * cfg.model.hurst + 2.0;

    if (cfg.experiment == "sample") {
        if (cfg.replicates < 1) out.push_back("sample: replicates must be >= 1");
    } else if (cfg.experiment == "spectrum") {
        if (cfg.model.d0 != 0.0) out.push_back("spectrum: requires u0 = 0 (d0 = 0)");
        need_positive_time(cfg, out);
        const auto window = cfg.options.value("window", std::vector<int>{8, 64});
        if (window.size() != 2 || window[0] < 0 || window[1] <= window[0])
            out.push_back("spectrum: 'window' must be [lo, hi] with lo < hi");
        else if (window[1] > cfg.model.truncation)
            out.push_back("spectrum: window exceeds the truncation level");
        if (cfg.options.value("monte_carlo", false) && cfg.replicates < 100)
            out.push_back("spectrum: monte_carlo mode needs replicates >= 100");
    } else if (cfg.experiment == "variogram") {
        const std::string kind = cfg.options.value("kind", "temporal");
        need_positive_time(cfg, out);
        if (kind == "temporal") {
            if (!initial_regular) out.push_back("variogram: requires u0 = 0 or beta > 4H + 2");
            if (!cfg.options.contains("lags")) out.push_back("variogram: missing 'lags'");
        } else if (kind == "spatial") {
            if (cfg.model.d0 != 0.0) out.push_back("spatial variogram: requires u0 = 0");
            if (!(gamma > 0.0 && gamma < 1.0))
                out.push_back("spatial variogram: gamma = " + std::to_string(gamma) +
                              " outside (0,1)");
            if (!cfg.options.contains("distances"))
                out.push_back("spatial variogram: missing 'distances'");
        } else {
            out.push_back("variogram: 'kind' must be temporal or spatial");
        }
        if (cfg.options.value("mode", "analytic") == "monte_carlo" && cfg.replicates < 100)
            out.push_back("variogram: monte_carlo mode needs replicates >= 100");
    } else if (cfg.experiment == "slnd") {
        const std::string kind = cfg.options.value("kind", "temporal");
        need_positive_time(cfg, out);
        if (kind == "temporal") {
            if (!initial_regular) out.push_back("slnd: requires u0 = 0 or beta > 4H + 2");
        } else if (kind == "spatial") {
            if (cfg.model.d0 != 0.0) out.push_back("spatial slnd: requires u0 = 0");
            if (!(gamma > 0.0 && gamma < 1.0))
                out.push_back("spatial slnd: gamma = " + std::to_string(gamma) + " outside (0,1)");
        } else {
            out.push_back("slnd: 'kind' must be temporal or spatial");
        }
    } else if (cfg.experiment == "truncation") {
        need_positive_time(cfg, out);
    } else if (cfg.experiment == "modulus") {
        const std::string kind = cfg.options.value("kind", "temporal");
        if (kind == "temporal") {
            if (!initial_regular)
                out.push_back("modulus: requires u0 = 0 or beta > 4H + 2 (got beta <= 4H + 2)");
        } else if (kind == "spatial") {
            if (cfg.model.d0 != 0.0) out.push_back("spatial modulus: requires u0 = 0");
            if (!(gamma > 0.0 && gamma < 1.0))
                out.push_back("spatial modulus: gamma = " + std::to_string(gamma) +
                              " outside (0,1)");
        } else {
            out.push_back("modulus: 'kind' must be temporal or spatial");
        }
        if (cfg.replicates < 2) out.push_back("modulus: replicates must be >= 2");
    }
    return out;
}

} // namespace sfh::config
