#include "tmag/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace tmag {

namespace {

using nlohmann::json;

json require(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw TmagError("config: missing key \"" + key + "\" in " + where);
    return j.at(key);
}

double require_num(const json& j, const std::string& key, const std::string& where) {
    json v = require(j, key, where);
    if (!v.is_number()) throw TmagError("config: \"" + key + "\" in " + where + " must be a number");
    return v.get<double>();
}

}  // namespace

double min_time_constant(const MajorLoop& loop, const RecoilModel& model, const CircuitParams& p) {
    LoadLine ll = load_line(0.0, p);
    double mu_min = model.mu_at(0.0);
    double br_max = loop.remanence();
    for (int i = 0; i <= 100; ++i) {
        double br = br_max * i / 100.0;
        mu_min = std::min(mu_min, model.mu_at(br));
    }
    double m = mu_min * kMu0;
    double c_b = ll.slope * m * p.N / (p.L_m * (ll.slope - m));
    double inductance = p.N * p.A_m * c_b;
    return inductance / p.R;
}

TuningContext RunConfig::context() const {
    TuningContext ctx;
    ctx.loop = loop.get();
    ctx.predictor_params = circuit;
    ctx.predictor_fit = recoil_fit;
    ctx.plant_params = circuit;
    ctx.plant_recoil = plant_recoil.get();
    ctx.gains = gains;
    ctx.control = control;
    ctx.sensor = sensor;
    return ctx;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TmagError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw TmagError("config " + path + " is not valid JSON: " + e.what());
    }

    RunConfig cfg;

    std::string dataset = require(j, "bh_dataset", "config").get<std::string>();
    std::filesystem::path dataset_path(dataset);
    if (dataset_path.is_relative()) {
        dataset_path = std::filesystem::path(path).parent_path() / dataset_path;
    }
    cfg.loop = std::make_shared<MajorLoop>(MajorLoop::from_csv_file(dataset_path.string()));

    json c = require(j, "circuit", "config");
    cfg.circuit.A_m = require_num(c, "A_m", "circuit");
    cfg.circuit.A_g = require_num(c, "A_g", "circuit");
    cfg.circuit.L_m = require_num(c, "L_m", "circuit");
    cfg.circuit.l_g = require_num(c, "l_g", "circuit");
    cfg.circuit.N = require_num(c, "N", "circuit");
    cfg.circuit.R = require_num(c, "R", "circuit");
    cfg.circuit.k1 = require_num(c, "k1", "circuit");
    cfg.circuit.k2 = require_num(c, "k2", "circuit");
    cfg.circuit.validate();

    json rf = require(j, "recoil_fit", "config");
    cfg.recoil_fit.slope = require_num(rf, "slope", "recoil_fit");
    cfg.recoil_fit.intercept = require_num(rf, "intercept", "recoil_fit");
    if (!(cfg.recoil_fit.intercept > 0.0)) {
        throw TmagError("config: recoil_fit.intercept must be > 0");
    }

    json ctl = require(j, "controller", "config");
    cfg.gains.k_p = require_num(ctl, "k_p", "controller");
    cfg.gains.k_i = require_num(ctl, "k_i", "controller");
    cfg.gains.u_max = require_num(ctl, "U_max", "controller");
    cfg.control.dt_control = require_num(ctl, "dt_control", "controller");
    cfg.control.settle_band = require_num(ctl, "settle_band_T", "controller");
    cfg.control.settle_hold = static_cast<int>(require_num(ctl, "settle_hold", "controller"));
    cfg.control.coast_current = require_num(ctl, "coast_current_A", "controller");
    cfg.gains.validate();

    json pl = require(j, "plant", "config");
    cfg.control.dt_plant = require_num(pl, "dt_plant", "plant");
    cfg.control.pulse_voltage = require_num(pl, "pulse_voltage", "plant");
    cfg.control.dwell = require_num(pl, "dwell_s", "plant");
    if (pl.contains("sat_timeout_s")) cfg.control.sat_timeout = pl.at("sat_timeout_s").get<double>();
    if (pl.contains("demag_timeout_s")) {
        cfg.control.demag_timeout = pl.at("demag_timeout_s").get<double>();
    }
    if (pl.contains("log_decimation")) {
        cfg.log_decimation = pl.at("log_decimation").get<int>();
        if (cfg.log_decimation < 1) throw TmagError("config: log_decimation must be >= 1");
    }
    cfg.control.validate();

    if (j.contains("sensor")) {
        json s = j.at("sensor");
        if (s.contains("noise_sigma")) cfg.sensor.noise_sigma = s.at("noise_sigma").get<double>();
        if (cfg.sensor.noise_sigma < 0.0) throw TmagError("config: sensor.noise_sigma must be >= 0");
    }

    if (j.contains("seed")) cfg.master_seed = j.at("seed").get<std::uint64_t>();
    cfg.sensor.seed = cfg.master_seed;

    if (j.contains("mismatch") && !j.at("mismatch").is_null()) {
        json m = j.at("mismatch");
        if (m.contains("plant_recoil_table") && !m.at("plant_recoil_table").is_null()) {
            std::vector<std::pair<double, double>> table;
            for (const auto& row : m.at("plant_recoil_table")) {
                if (!row.is_array() || row.size() != 2) {
                    throw TmagError("config: plant_recoil_table rows must be [B_r', mu_rec] pairs");
                }
                table.emplace_back(row[0].get<double>(), row[1].get<double>());
            }
            cfg.plant_recoil = std::make_shared<RecoilModel>(RecoilModel::table(std::move(table)));
        }
        if (m.contains("plant_k1_affine") && !m.at("plant_k1_affine").is_null()) {
            json k = m.at("plant_k1_affine");
            cfg.plant_k1_affine = {require_num(k, "a", "plant_k1_affine"),
                                   require_num(k, "b", "plant_k1_affine")};
        }
    }
    if (!cfg.plant_recoil) {
        cfg.plant_recoil = std::make_shared<RecoilModel>(RecoilModel::linear(cfg.recoil_fit));
    }

    if (j.contains("campaign")) {
        json cj = j.at("campaign");
        if (cj.contains("set_points")) {
            cfg.campaign_set_points = cj.at("set_points").get<std::vector<double>>();
        }
        if (cj.contains("gaps")) cfg.campaign_gaps = cj.at("gaps").get<std::vector<double>>();
        if (cj.contains("n")) cfg.campaign_n = cj.at("n").get<int>();
        if (cj.contains("workers")) cfg.campaign_workers = cj.at("workers").get<int>();
        if (cfg.campaign_n < 1) throw TmagError("config: campaign.n must be >= 1");
    }

    double tau_min = min_time_constant(*cfg.loop, *cfg.plant_recoil, cfg.circuit);
    if (cfg.control.dt_plant > tau_min / 10.0) {
        throw TmagError("config: dt_plant = " + std::to_string(cfg.control.dt_plant) +
                        " s exceeds tau_min/10 = " + std::to_string(tau_min / 10.0) +
                        " s for this dataset and geometry");
    }

    return cfg;
}

}  // namespace tmag
