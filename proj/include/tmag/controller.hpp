#pragma once

#include <utility>

#include "tmag/plant.hpp"

namespace tmag {

/// PI gains and output saturation. Defaults are the tuned values the
/// demagnetization loop ships with.
struct PIGains {
    double k_p = 2.07;    // V/T
    double k_i = 150.0;   // V/(T s)
    double u_max = 24.0;  // V

    void validate() const {
        if (!(k_p >= 0.0) || !(k_i >= 0.0)) throw TmagError("PI gains must be >= 0");
        if (!(u_max > 0.0)) throw TmagError("U_max must be > 0");
    }
};

enum class TuningPhase { Idle, Saturating, Demagnetizing, Coasting, Done };

struct ControllerState {
    double integrator = 0.0;  // T*s
    TuningPhase phase = TuningPhase::Idle;
};

/// Timing and settle parameters of the closed loop.
struct ControlSettings {
    double dt_control = 1e-4;      // s, controller period
    double dt_plant = 5e-5;        // s, plant integration step (divides dt_control)
    double settle_band = 5e-5;     // T
    int settle_hold = 50;          // consecutive in-band samples before coast
    double coast_current = 1e-6;   // A
    double demag_timeout = 10.0;   // s
    double sat_timeout = 1.0;      // s
    double pulse_voltage = 12.0;   // V
    double dwell = 0.01;           // s, hold after reaching saturation

    int substeps() const;
    void validate() const;
};

/// Corner-point reference translated to air-gap flux density units.
double reference_transform(double corner_b, const CircuitParams& p);

/// One discrete PI update: integrator first (conditionally frozen while the
/// output is saturated and the error would deepen saturation), then the
/// clamped output.
std::pair<double, ControllerState> pi_step(const ControllerState& cs, double error, double dt,
                                           const PIGains& g);

/// Drive the coil with +pulse_voltage until the magnet sits on the major
/// descending branch at or above the saturation threshold, hold for the
/// dwell, then coast to negligible current.
PlantState saturation_pulse(PlantState plant, const CircuitParams& p, const MajorLoop& loop,
                            const RecoilModel& model, const ControlSettings& cs,
                            TrajectoryLog* log = nullptr);

struct DemagResult {
    PlantState plant;
    double min_b_g_minus_ref = 0.0;  // most negative excursion past the reference
    double settled_error = 0.0;      // measured error when settle fired
};

/// Closed-loop demagnetization to the transformed corner reference, then
/// coast until the coil current has decayed and the operating point has
/// relaxed onto the recoil line.
DemagResult run_demagnetization(PlantState plant, double reference_b_g, const PIGains& gains,
                                const SensorModel& sensor, const CircuitParams& p,
                                const MajorLoop& loop, const RecoilModel& model,
                                const ControlSettings& cs, Rng& rng,
                                TrajectoryLog* log = nullptr,
                                ControllerState* phase_out = nullptr);

/// Step the plant with u_c = 0 until |I_c| < coast_current.
PlantState coast(PlantState plant, const CircuitParams& p, const MajorLoop& loop,
                 const RecoilModel& model, const ControlSettings& cs,
                 TrajectoryLog* log = nullptr);

}  // namespace tmag
