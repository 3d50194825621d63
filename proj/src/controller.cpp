#include "tmag/controller.hpp"

#include <algorithm>
#include <cmath>

namespace tmag {

int ControlSettings::substeps() const {
    double ratio = dt_control / dt_plant;
    int n = static_cast<int>(std::lround(ratio));
    if (n < 1 || std::abs(ratio - n) > 1e-9 * ratio) {
        throw TmagError("dt_control must be an integer multiple of dt_plant");
    }
    return n;
}

void ControlSettings::validate() const {
    if (!(dt_control > 0.0) || !(dt_plant > 0.0)) throw TmagError("control steps must be > 0");
    if (!(settle_band > 0.0)) throw TmagError("settle_band_T must be > 0");
    if (settle_hold < 1) throw TmagError("settle_hold must be >= 1");
    if (!(coast_current > 0.0)) throw TmagError("coast_current_A must be > 0");
    if (!(pulse_voltage > 0.0)) throw TmagError("pulse voltage must be > 0");
    if (!(dwell >= 0.0)) throw TmagError("dwell must be >= 0");
    substeps();
}

double reference_transform(double corner_b, const CircuitParams& p) {
    return gap_flux_from_magnet(corner_b, p);
}

std::pair<double, ControllerState> pi_step(const ControllerState& cs, double error, double dt,
                                           const PIGains& g) {
    if (!(dt > 0.0)) throw TmagError("pi_step: dt must be > 0");
    ControllerState out = cs;
    double next_int = cs.integrator + error * dt;
    double u_raw = g.k_p * error + g.k_i * next_int;
    bool deepening = (u_raw > g.u_max && error > 0.0) || (u_raw < -g.u_max && error < 0.0);
    if (!deepening) out.integrator = next_int;
    double u = std::clamp(u_raw, -g.u_max, g.u_max);
    return {u, out};
}

namespace {

PlantState run_plant(PlantState s, double u_c, int steps, double dt, const CircuitParams& p,
                     const MajorLoop& loop, const RecoilModel& model, TrajectoryLog* log) {
    for (int i = 0; i < steps; ++i) {
        s = plant_step(s, u_c, dt, p, loop, model);
        if (log) log->record(s);
    }
    return s;
}

}  // namespace

PlantState coast(PlantState plant, const CircuitParams& p, const MajorLoop& loop,
                 const RecoilModel& model, const ControlSettings& cs, TrajectoryLog* log) {
    double t0 = plant.t;
    while (std::abs(plant.i_c) >= cs.coast_current) {
        plant = run_plant(plant, 0.0, 1, cs.dt_plant, p, loop, model, log);
        if (plant.t - t0 > cs.demag_timeout) {
            throw TmagError("coast: current did not decay below " +
                            std::to_string(cs.coast_current) + " A within timeout");
        }
    }
    return plant;
}

PlantState saturation_pulse(PlantState plant, const CircuitParams& p, const MajorLoop& loop,
                            const RecoilModel& model, const ControlSettings& cs,
                            TrajectoryLog* log) {
    if (!(cs.pulse_voltage > 0.0)) throw TmagError("saturation_pulse: pulse voltage must be > 0");
    const double b_thresh = kSaturationFraction * loop.b_sat();

    double t0 = plant.t;
    while (!(plant.magnet.mode == MagnetMode::OnMajorDescending && plant.magnet.b_m >= b_thresh)) {
        plant = run_plant(plant, cs.pulse_voltage, 1, cs.dt_plant, p, loop, model, log);
        if (plant.t - t0 > cs.sat_timeout) {
            throw TmagError("insufficient pulse voltage: B_m = " + std::to_string(plant.magnet.b_m) +
                            " T after " + std::to_string(plant.t - t0) + " s (threshold " +
                            std::to_string(b_thresh) + " T)");
        }
    }

    int dwell_steps = static_cast<int>(std::llround(cs.dwell / cs.dt_plant));
    plant = run_plant(plant, cs.pulse_voltage, dwell_steps, cs.dt_plant, p, loop, model, log);
    return coast(plant, p, loop, model, cs, log);
}

DemagResult run_demagnetization(PlantState plant, double reference_b_g, const PIGains& gains,
                                const SensorModel& sensor, const CircuitParams& p,
                                const MajorLoop& loop, const RecoilModel& model,
                                const ControlSettings& cs, Rng& rng, TrajectoryLog* log,
                                ControllerState* phase_out) {
    gains.validate();
    cs.validate();
    if (plant.b_g < reference_b_g - cs.settle_band) {
        throw TmagError("run_demagnetization: reference " + std::to_string(reference_b_g) +
                        " T is above the current gap flux " + std::to_string(plant.b_g) +
                        " T; demagnetization only moves B_g downward");
    }

    ControllerState ctl;
    ctl.phase = TuningPhase::Demagnetizing;
    const int substeps = cs.substeps();

    DemagResult result;
    result.min_b_g_minus_ref = plant.b_g - reference_b_g;

    double t0 = plant.t;
    int in_band = 0;
    while (in_band < cs.settle_hold) {
        double measured = measure_b_g(plant, sensor, rng);
        double error = reference_b_g - measured;
        if (std::abs(error) < cs.settle_band) {
            ++in_band;
        } else {
            in_band = 0;
        }
        result.settled_error = error;

        double u;
        std::tie(u, ctl) = pi_step(ctl, error, cs.dt_control, gains);
        plant = run_plant(plant, u, substeps, cs.dt_plant, p, loop, model, log);
        result.min_b_g_minus_ref = std::min(result.min_b_g_minus_ref, plant.b_g - reference_b_g);

        if (plant.t - t0 > cs.demag_timeout) {
            throw TmagError("controller timeout: |error| = " + std::to_string(std::abs(error)) +
                            " T after " + std::to_string(plant.t - t0) + " s of demagnetization");
        }
    }

    ctl.phase = TuningPhase::Coasting;
    if (phase_out) *phase_out = ctl;
    plant = coast(plant, p, loop, model, cs, log);
    if (phase_out) phase_out->phase = TuningPhase::Done;
    result.plant = plant;
    return result;
}

}  // namespace tmag
