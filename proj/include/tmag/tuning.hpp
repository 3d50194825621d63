#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tmag/controller.hpp"
#include "tmag/prediction.hpp"

namespace tmag {

/// Everything one tuning cycle needs. The predictor side and the plant side
/// are separate so model mismatch can be injected: the plant may carry a
/// nonlinear recoil table and a gap-dependent k1 while the predictor keeps
/// the identified linear fit and nominal k1.
struct TuningContext {
    const MajorLoop* loop = nullptr;
    CircuitParams predictor_params;
    RecoilFit predictor_fit;
    CircuitParams plant_params;
    const RecoilModel* plant_recoil = nullptr;
    PIGains gains;
    ControlSettings control;
    SensorModel sensor;
};

/// Outcome of one Predict/Saturate/Demagnetize cycle.
struct TuningResult {
    double b_g_set = 0.0;
    double l_g = 0.0;
    double final_b_g = 0.0;
    double error = 0.0;  // final_b_g - b_g_set
    bool saturated = false;
    double duration = 0.0;  // simulated seconds
    double min_b_g_minus_ref = 0.0;
    PredictionResult prediction;
    PlantState plant;
    std::vector<TrajectorySample> trajectory;
};

/// Remanence margin for the "higher recoil line" comparison.
inline constexpr double kRemanenceEpsilon = 1e-4;  // T

/// Run one full tuning cycle on the given plant state.
TuningResult tune(double b_g_set, PlantState plant, const TuningContext& ctx, Rng& rng,
                  int log_decimation = 1);

struct CellStats {
    double b_g_set = 0.0;
    double l_g = 0.0;
    double mean = 0.0;              // mean of final B_g
    double mae = 0.0;               // mean |error|
    double precision_3sigma = 0.0;  // 3 * sample std of final B_g (0 for n = 1)
    int n = 0;
    std::string error;  // non-empty if the cell failed
};

struct CampaignStats {
    std::vector<CellStats> cells;  // ordered by descending set-point, then ascending gap
};

/// Mean / MAE / 3-sigma over a list of achieved values against a set-point.
CellStats compute_cell_stats(double b_g_set, double l_g, const std::vector<double>& finals);

struct CampaignConfig {
    std::vector<double> set_points;
    std::vector<double> gaps;
    int n = 1;
    std::uint64_t master_seed = 0;
    int workers = 0;  // 0 = one per cell, capped at hardware concurrency

    /// Plant k1 as an affine function of the gap: k1(l_g) = a + b * l_g.
    /// The predictor keeps the k1 identified at the nominal gap.
    std::optional<std::pair<double, double>> plant_k1_affine;
};

/// Sweep set-points x gaps, n fresh-plant cycles per cell, each cycle on an
/// independent RNG substream. Cells run in parallel; aggregation order is
/// deterministic.
CampaignStats run_campaign(const TuningContext& base, const CampaignConfig& cfg);

}  // namespace tmag
