#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tmag/controller.hpp"

namespace tmag {

struct MeasurementSample {
    double t = 0.0;    // s
    double i_c = 0.0;  // A
    double b_g = 0.0;  // T
};

/// Logged (t, I_c, B_g) measurements with the circuit constants they were
/// taken under.
struct MeasurementLog {
    std::vector<MeasurementSample> samples;
    CircuitParams params;

    static std::vector<MeasurementSample> read_csv(const std::string& path);
    static void write_csv(const std::string& path, const std::vector<MeasurementSample>& samples);
    void validate() const;
};

/// Pointwise inversion of the circuit equations: the magnet-interior
/// (H_m, B_m) trajectory implied by the log.
std::vector<std::pair<double, double>> estimate_bh_trajectory(const MeasurementLog& log);

struct ExtractedRecoilLine {
    double b_r_prime = 0.0;
    double mu_rec = 0.0;
    double corner_lo_h = 0.0;  // lower-H corner of the excursion
    double corner_lo_b = 0.0;
    double corner_hi_h = 0.0;
    double corner_hi_b = 0.0;
};

struct SegmentationSettings {
    double reversal_band = 100.0;  // A/m, hysteresis on H-direction detection
    double min_h_span = 500.0;     // A/m, skip narrower excursions
};

struct RecoilExtraction {
    std::vector<ExtractedRecoilLine> lines;  // ordered by B_r'
    std::vector<std::string> warnings;       // skipped ill-conditioned excursions
};

/// Detect H reversals below saturation and fit the chord through the two
/// extreme corners of each recoil excursion.
RecoilExtraction extract_recoil_lines(const std::vector<std::pair<double, double>>& trajectory,
                                      const SegmentationSettings& seg = {});

struct RecoilFitReport {
    RecoilFit fit;
    double residual_rms = 0.0;
    std::vector<ExtractedRecoilLine> lines;
};

/// Ordinary least squares of mu_rec against B_r'. Needs >= 2 distinct
/// remanence values.
RecoilFitReport fit_recoil_permeability(const std::vector<ExtractedRecoilLine>& lines);

/// Descending-branch estimate from a trajectory: the running-minimum-H
/// envelope after the positive-saturation peak, which skips recoil
/// excursions.
std::vector<std::pair<double, double>> extract_descending_branch(
    const std::vector<std::pair<double, double>>& trajectory);

struct SweepSettings {
    double ramp_rate = 4.0;       // V/s of the main descent
    double u_floor = -8.0;        // V, most negative drive
    std::vector<double> excursion_at;  // drive voltages where a recoil loop is inserted
    double excursion_v = 0.6;     // V, height of each excursion
    double excursion_rate = 8.0;  // V/s within an excursion
};

struct SweepResult {
    MeasurementLog log;
    std::vector<std::pair<double, double>> true_trajectory;  // plant (H_m, B_m) per sample
};

/// Drive the plant through positive saturation and a slow descent to
/// negative saturation with recoil excursions, logging (t, I_c, B_g).
SweepResult run_bh_sweep(const CircuitParams& p, const MajorLoop& loop, const RecoilModel& model,
                         const ControlSettings& control, const SweepSettings& sweep,
                         const SensorModel& sensor, Rng& rng, int decimation = 20);

}  // namespace tmag
