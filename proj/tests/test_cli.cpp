#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "sfh/config.hpp"
#include "sfh/errors.hpp"
#include "sfh/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using sfh::config::ExperimentConfig;

namespace {

#ifndef SFH_BINARY
#define SFH_BINARY "sfh"
#endif

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("sfh_test_" + std::to_string(std::rand()) + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SFH_BINARY) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

json base_config() {
    json j;
    j["model"] = {{"hurst", 0.75}, {"alpha", 2.0}, {"beta", 5.0},      {"d0", 0.0},
                  {"horizon", 1.0}, {"truncation", 8}};
    j["experiment"] = "sample";
    j["seed"] = 42;
    j["replicates"] = 3;
    j["options"] = {{"start", 0.25}, {"stop", 1.0}, {"count", 4}};
    return j;
}

fs::path write_config(const TempDir& dir, const json& j, const char* name = "config.json") {
    const fs::path p = dir.path / name;
    std::ofstream out(p);
    out << j.dump(2);
    return p;
}

} // namespace

TEST_CASE("config parsing and validation diagnostics") {
    json j = base_config();
    auto cfg = ExperimentConfig::parse_json(j);
    CHECK(cfg.experiment == "sample");
    CHECK(sfh::config::validate(cfg).empty());

    // seed is mandatory
    json no_seed = base_config();
    no_seed.erase("seed");
    CHECK_THROWS_AS(ExperimentConfig::parse_json(no_seed), sfh::config_error);

    // gamma window arithmetic: alpha=0.5, H=0.6 -> gamma = 0.45 is fine
    json spatial = base_config();
    spatial["experiment"] = "variogram";
    spatial["model"]["alpha"] = 0.5;
    spatial["model"]["hurst"] = 0.6;
    spatial["options"] = {{"kind", "spatial"}, {"time", 1.0}, {"distances", {0.05, 0.1, 0.2}}};
    CHECK(sfh::config::validate(ExperimentConfig::parse_json(spatial)).empty());

    // alpha=2.5, H=0.9 -> gamma = 2.05 rejected
    spatial["model"]["alpha"] = 2.5;
    spatial["model"]["hurst"] = 0.9;
    const auto diags = sfh::config::validate(ExperimentConfig::parse_json(spatial));
    CHECK(!diags.empty());

    // temporal modulus with d0 > 0 and beta <= 4H + 2 rejected
    json modulus = base_config();
    modulus["experiment"] = "modulus";
    modulus["replicates"] = 8;
    modulus["model"]["d0"] = 1.0;
    modulus["model"]["beta"] = 4.5;
    modulus["model"]["hurst"] = 0.75; // 4H + 2 = 5 >= beta
    const auto diags2 = sfh::config::validate(ExperimentConfig::parse_json(modulus));
    REQUIRE(!diags2.empty());
    CHECK(diags2.front().find("beta") != std::string::npos);
}

TEST_CASE("cli: validate is diagnostic-only, run enforces") {
    TempDir dir;
    json bad = base_config();
    bad["replicates"] = 0; // sample precondition violation
    const auto cfg_path = write_config(dir, bad);

    CHECK(run_cli("validate --config " + cfg_path.string()) == 0);
    const int rc = run_cli("run --config " + cfg_path.string() + " --out " +
                           (dir.path / "out").string());
    CHECK(rc == 2);
    // no partial outputs: a failed run leaves no manifest
    CHECK(!fs::exists(dir.path / "out" / "manifest.json"));
}

TEST_CASE("cli: sample experiment is reproducible byte for byte") {
    TempDir dir;
    const auto cfg_path = write_config(dir, base_config());

    const auto out1 = dir.path / "run1";
    const auto out2 = dir.path / "run2";
    REQUIRE(run_cli("run --config " + cfg_path.string() + " --out " + out1.string()) == 0);
    REQUIRE(run_cli("run --config " + cfg_path.string() + " --out " + out2.string()) == 0);

    REQUIRE(fs::exists(out1 / "manifest.json"));
    REQUIRE(fs::exists(out1 / "coefficients.csv"));
    CHECK(sfh::io::fnv1a64_file((out1 / "coefficients.csv").string()) ==
          sfh::io::fnv1a64_file((out2 / "coefficients.csv").string()));

    json manifest;
    std::ifstream(out1 / "manifest.json") >> manifest;
    CHECK(manifest["outputs"].size() >= 2); // coefficients + report
    for (const auto& o : manifest["outputs"]) {
        const fs::path f = out1 / o["file"].get<std::string>();
        CHECK(fs::exists(f));
        CHECK(sfh::io::fnv1a64_file(f.string()) == o["fnv1a64"].get<std::uint64_t>());
    }

    // different seed changes the data
    REQUIRE(run_cli("run --config " + cfg_path.string() + " --seed 43 --out " +
                    (dir.path / "run3").string()) == 0);
    CHECK(sfh::io::fnv1a64_file((out1 / "coefficients.csv").string()) !=
          sfh::io::fnv1a64_file((dir.path / "run3" / "coefficients.csv").string()));
}

TEST_CASE("cli: spectrum experiment emits a passing report") {
    TempDir dir;
    json j = base_config();
    j["experiment"] = "spectrum";
    j["model"]["alpha"] = 1.0;
    j["model"]["hurst"] = 0.75;
    j["model"]["truncation"] = 128;
    j["options"] = {{"time", 1.0}, {"window", {8, 64}}};
    const auto cfg_path = write_config(dir, j);
    const auto out = dir.path / "out";
    REQUIRE(run_cli("run --config " + cfg_path.string() + " --out " + out.string()) == 0);

    json report;
    std::ifstream(out / "report.json") >> report;
    const double slope = report["analytic"]["slope"].get<double>();
    CHECK(std::abs(slope - (-4.0)) < 0.1);
    CHECK(report["analytic"]["pass"].get<bool>());
    CHECK(fs::exists(out / "spectrum.csv"));
}

TEST_CASE("cli: precondition violations map to exit code 3") {
    TempDir dir;
    json j = base_config();
    j["experiment"] = "truncation";
    j["options"] = {{"time", 1.0}, {"levels", {32, 16, 8}}}; // not increasing
    const auto cfg_path = write_config(dir, j);
    const int rc = run_cli("run --config " + cfg_path.string() + " --out " +
                           (dir.path / "out").string());
    CHECK(rc == 3);
    CHECK(!fs::exists(dir.path / "out" / "manifest.json"));
}

TEST_CASE("cli: remaining experiment kinds produce manifests") {
    TempDir dir;

    json vario = base_config();
    vario["experiment"] = "variogram";
    vario["model"]["truncation"] = 48;
    vario["options"] = {{"kind", "temporal"},
                        {"time", 0.5},
                        {"lags", {1.0 / 128, 1.0 / 64, 1.0 / 32, 1.0 / 16}}};
    REQUIRE(run_cli("run --config " + write_config(dir, vario, "v.json").string() + " --out " +
                    (dir.path / "vario").string()) == 0);
    CHECK(fs::exists(dir.path / "vario" / "variogram.csv"));
    CHECK(fs::exists(dir.path / "vario" / "manifest.json"));

    json slnd = base_config();
    slnd["experiment"] = "slnd";
    slnd["model"]["truncation"] = 32;
    slnd["options"] = {{"kind", "temporal"}, {"time", 1.0}, {"k_lo", 3}, {"k_hi", 6}, {"points", 4}};
    REQUIRE(run_cli("run --config " + write_config(dir, slnd, "s.json").string() + " --out " +
                    (dir.path / "slnd").string()) == 0);
    CHECK(fs::exists(dir.path / "slnd" / "slnd.csv"));

    json modulus = base_config();
    modulus["experiment"] = "modulus";
    modulus["replicates"] = 4;
    modulus["model"]["truncation"] = 32;
    modulus["options"] = {{"kind", "temporal"},
                          {"grid_level", 10},
                          {"count", 65},
                          {"start", 0.5},
                          {"epsilons", {1.0 / 16, 1.0 / 64}}};
    REQUIRE(run_cli("run --config " + write_config(dir, modulus, "m.json").string() + " --out " +
                    (dir.path / "mod").string()) == 0);
    CHECK(fs::exists(dir.path / "mod" / "modulus.csv"));

    json sample_pts = base_config();
    sample_pts["options"]["points"] = {{0.3, 0.1}, {1.5, 2.0}};
    REQUIRE(run_cli("run --config " + write_config(dir, sample_pts, "p.json").string() + " --out " +
                    (dir.path / "pts").string()) == 0);
    CHECK(fs::exists(dir.path / "pts" / "field.csv"));
    CHECK(fs::exists(dir.path / "pts" / "field.bin"));
}

TEST_CASE("field binary round trip") {
    TempDir dir;
    sfh::field::FieldSample sample;
    sample.times = {0.25, 0.5};
    sample.grid = sfh::field::FieldGrid::of_points(
        {sfh::harmonics::SphericalPoint(0.3, 0.1), sfh::harmonics::SphericalPoint(1.5, 2.0)});
    sample.values = {1.0, -2.0, 3.5, 0.25};
    const fs::path p = dir.path / "f.bin";
    sfh::io::write_field_binary(p.string(), sample);

    std::ifstream in(p, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    CHECK(std::string(magic, 4) == "SFHB");
    std::uint32_t version;
    in.read(reinterpret_cast<char*>(&version), 4);
    CHECK(version == 1);
    std::uint64_t nt, np;
    in.read(reinterpret_cast<char*>(&nt), 8);
    in.read(reinterpret_cast<char*>(&np), 8);
    CHECK(nt == 2);
    CHECK(np == 2);
    std::vector<double> times(nt), pts(2 * np), vals(nt * np);
    in.read(reinterpret_cast<char*>(times.data()), nt * 8);
    in.read(reinterpret_cast<char*>(pts.data()), 2 * np * 8);
    in.read(reinterpret_cast<char*>(vals.data()), nt * np * 8);
    CHECK(times[1] == 0.5);
    CHECK(pts[2] == 1.5);
    CHECK(vals[2] == 3.5);
}
