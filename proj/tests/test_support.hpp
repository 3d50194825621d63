#pragma once

#include <string>
#include <vector>

#include "tmag/config.hpp"

namespace tmag::test {

inline std::string data_dir() { return TMAG_DATA_DIR; }
inline std::string cli_path() { return TMAG_CLI_PATH; }

inline const MajorLoop& bundled_loop() {
    static MajorLoop loop = MajorLoop::from_csv_file(data_dir() + "/alnico5_synthetic_bh.csv");
    return loop;
}

/// Nominal bundled actuator geometry (matches data/default_config.json).
inline CircuitParams nominal_params() {
    CircuitParams p;
    p.A_m = 1.0e-4;
    p.A_g = 3.6e-4;
    p.L_m = 0.012;
    p.l_g = 1.0e-3;
    p.N = 350.0;
    p.R = 1.0;
    p.k1 = 0.88;
    p.k2 = 1.15;
    return p;
}

inline RecoilFit paper_fit() { return RecoilFit{0.955, 4.69}; }

/// Straight-line toy branch B = 1.2 + 2.4e-5 * H over [-50000, 0].
inline MajorLoop toy_branch() {
    return MajorLoop::from_samples({{0.0, 1.2}, {-50000.0, 0.0}});
}

inline ControlSettings nominal_control() {
    ControlSettings cs;
    cs.dt_control = 1e-4;
    cs.dt_plant = 5e-5;
    cs.settle_band = 5e-5;
    cs.settle_hold = 50;
    cs.coast_current = 1e-6;
    cs.demag_timeout = 10.0;
    cs.sat_timeout = 1.0;
    cs.pulse_voltage = 12.0;
    cs.dwell = 0.01;
    return cs;
}

inline TuningContext nominal_context(const RecoilModel& plant_recoil) {
    TuningContext ctx;
    ctx.loop = &bundled_loop();
    ctx.predictor_params = nominal_params();
    ctx.predictor_fit = paper_fit();
    ctx.plant_params = nominal_params();
    ctx.plant_recoil = &plant_recoil;
    ctx.gains = PIGains{};
    ctx.control = nominal_control();
    ctx.sensor = SensorModel{};
    return ctx;
}

/// Plant-side nonlinear recoil table deviating from the linear fit near the
/// major curve: mu = fit(B_r') - 0.9 * max(B_r', 0)^4.
inline RecoilModel mismatch_recoil_table() {
    std::vector<std::pair<double, double>> rows;
    for (int i = -30; i <= 30; ++i) {
        double br = 0.05 * i;
        double mu = recoil_permeability(br, paper_fit());
        if (br > 0.0) mu -= 0.9 * br * br * br * br;
        rows.emplace_back(br, mu);
    }
    return RecoilModel::table(rows);
}

}  // namespace tmag::test
