#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sfh/sampler.hpp"

namespace sfh::config {

// A fully parsed experiment configuration.  The schema is documented in the
// README; all times are in model units and all angles in radians.  The seed
// is mandatory: there is no wall-clock default.
struct ExperimentConfig {
    sampler::ModelParams model;
    double upsilon_constant = 1.0; // the only Upsilon family the file format carries

    std::string experiment; // sample | spectrum | variogram | slnd | truncation | modulus | suite
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::uint64_t replicates = 0;
    int workers = 0; // 0: hardware default
    double tolerance_scale = 1.0;
    std::string output_dir;

    nlohmann::json options; // experiment-specific block, schema per experiment
    nlohmann::json raw;     // full config snapshot for the manifest

    static ExperimentConfig parse_file(const std::string& path);
    static ExperimentConfig parse_json(const nlohmann::json& j);
};

// Lists every violated precondition of the configured experiment without
// running anything.  Empty result means the configuration is runnable.
std::vector<std::string> validate(const ExperimentConfig& cfg);

} // namespace sfh::config
