#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "test_support.hpp"
#include "tmag/config.hpp"

using namespace tmag;
using doctest::Approx;

namespace {

std::string default_config_path() { return test::data_dir() + "/default_config.json"; }

std::string write_temp_config(const std::string& name, const std::string& body) {
    std::string path = name;
    std::ofstream out(path);
    out << body;
    return path;
}

std::string patched_default(const std::string& needle, const std::string& replacement,
                            const std::string& name) {
    std::ifstream in(default_config_path());
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto pos = body.find(needle);
    REQUIRE(pos != std::string::npos);
    body.replace(pos, needle.size(), replacement);
    // dataset path is resolved relative to the config file, so point at data/
    auto ds = body.find("\"alnico5_synthetic_bh.csv\"");
    if (ds != std::string::npos) {
        body.replace(ds, std::string("\"alnico5_synthetic_bh.csv\"").size(),
                     "\"" + test::data_dir() + "/alnico5_synthetic_bh.csv\"");
    }
    return write_temp_config(name, body);
}

}  // namespace

TEST_CASE("the bundled default config loads and validates [config]") {
    RunConfig cfg = load_config(default_config_path());
    CHECK(cfg.circuit.N == 350.0);
    CHECK(cfg.gains.k_p == Approx(2.07));
    CHECK(cfg.gains.k_i == Approx(150.0));
    CHECK(cfg.control.settle_hold == 50);
    CHECK(cfg.loop->size() == 1201);
    CHECK(cfg.campaign_set_points.size() == 8);
    CHECK(cfg.master_seed == 12345);
    CHECK(cfg.plant_recoil->is_linear());
    CHECK_FALSE(cfg.plant_k1_affine.has_value());

    TuningContext ctx = cfg.context();
    CHECK(ctx.loop == cfg.loop.get());
    CHECK(ctx.predictor_params.k1 == ctx.plant_params.k1);
}

TEST_CASE("missing dataset fails before anything runs [config][errors]") {
    std::string path = patched_default("\"alnico5_synthetic_bh.csv\"", "\"missing_dataset.csv\"",
                                       "cfg_missing_dataset.json");
    CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("cannot open"), TmagError);
}

TEST_CASE("invalid circuit constants are rejected [config][errors]") {
    std::string path = patched_default("\"k1\": 0.88", "\"k1\": 1.4", "cfg_bad_k1.json");
    CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("k1"), TmagError);
}

TEST_CASE("missing keys are named in the error [config][errors]") {
    std::string path = patched_default("\"k_p\": 2.07,", "", "cfg_missing_kp.json");
    CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("k_p"), TmagError);
}

TEST_CASE("plant step too coarse for the electrical time constant is rejected [config][errors]") {
    std::string path = patched_default("\"dt_plant\": 5.0e-5", "\"dt_plant\": 2.0e-3",
                                       "cfg_coarse_dt.json");
    CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("tau_min"), TmagError);
}

TEST_CASE("dt_control must be a multiple of dt_plant [config][errors]") {
    std::string path = patched_default("\"dt_plant\": 5.0e-5", "\"dt_plant\": 3.0e-5",
                                       "cfg_ratio.json");
    CHECK_THROWS_WITH_AS(load_config(path), doctest::Contains("integer multiple"), TmagError);
}

TEST_CASE("mismatch blocks parse into plant-side models [config]") {
    std::string path = patched_default(
        "\"mismatch\": null",
        "\"mismatch\": {\"plant_recoil_table\": [[-1.0, 4.0], [0.0, 4.69], [1.0, 5.0]], "
        "\"plant_k1_affine\": {\"a\": 0.84, \"b\": 40.0}}",
        "cfg_mismatch.json");
    RunConfig cfg = load_config(path);
    CHECK_FALSE(cfg.plant_recoil->is_linear());
    CHECK(cfg.plant_recoil->mu_at(0.0) == Approx(4.69));
    REQUIRE(cfg.plant_k1_affine.has_value());
    CHECK(cfg.plant_k1_affine->first + cfg.plant_k1_affine->second * 0.001 == Approx(0.88));
}

TEST_CASE("minimum time constant covers the recoil permeability range [config]") {
    RunConfig cfg = load_config(default_config_path());
    double tau = min_time_constant(*cfg.loop, *cfg.plant_recoil, cfg.circuit);
    CHECK(tau > 10.0 * cfg.control.dt_plant);
    CHECK(tau == Approx(4.69e-3).epsilon(0.05));  // L(mu = 4.69)/R for the bundled geometry
}
