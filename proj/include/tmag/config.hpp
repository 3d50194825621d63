#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tmag/tuning.hpp"

namespace tmag {

/// Fully validated run configuration: dataset loaded, every parameter
/// checked, mismatch models built. Construction fails before any simulation
/// side effect.
struct RunConfig {
    std::shared_ptr<MajorLoop> loop;
    CircuitParams circuit;
    RecoilFit recoil_fit;
    PIGains gains;
    ControlSettings control;
    SensorModel sensor;
    std::uint64_t master_seed = 0;
    int log_decimation = 10;

    // Plant-side mismatch models; absent in the perfect-model case.
    std::shared_ptr<RecoilModel> plant_recoil;  // never null; linear fit when unset
    std::optional<std::pair<double, double>> plant_k1_affine;

    std::vector<double> campaign_set_points;
    std::vector<double> campaign_gaps;
    int campaign_n = 1;
    int campaign_workers = 0;

    /// Tuning context for a given air gap (both sides start from the config;
    /// campaign cells override l_g and plant k1).
    TuningContext context() const;
};

/// Parse and validate a JSON config file. The dataset path is resolved
/// relative to the config file's directory. Throws TmagError on any invalid
/// or missing input; nothing is written.
RunConfig load_config(const std::string& path);

/// Smallest electrical time constant over the recoil permeability range;
/// the plant step must stay below a tenth of it.
double min_time_constant(const MajorLoop& loop, const RecoilModel& model, const CircuitParams& p);

}  // namespace tmag
