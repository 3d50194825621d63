#pragma once

#include <utility>
#include <vector>

#include "tmag/circuit.hpp"
#include "tmag/hysteresis.hpp"

namespace tmag {

/// Additive Gaussian noise on measured B_g with a deterministic seeded RNG.
struct SensorModel {
    double noise_sigma = 0.0;  // T
    std::uint64_t seed = 0;
};

/// Dynamic simulation state of the electrical/magnetic plant.
struct PlantState {
    double t = 0.0;    // s
    double i_c = 0.0;  // A
    double u_c = 0.0;  // V, last applied
    MagnetState magnet;
    double b_g = 0.0;  // T, derived from the magnet flux each step
};

struct TrajectorySample {
    double t = 0.0;
    double u_c = 0.0;
    double i_c = 0.0;
    double h_m = 0.0;
    double b_m = 0.0;
    double b_g = 0.0;
};

/// Decimated trajectory recorder shared by all phases of a cycle.
class TrajectoryLog {
public:
    explicit TrajectoryLog(int decimation = 1) : decimation_(decimation < 1 ? 1 : decimation) {}

    void record(const PlantState& s) {
        if (count_++ % decimation_ == 0) samples_.push_back(sample_of(s));
    }
    void record_forced(const PlantState& s) { samples_.push_back(sample_of(s)); }

    const std::vector<TrajectorySample>& samples() const { return samples_; }

private:
    static TrajectorySample sample_of(const PlantState& s) {
        return TrajectorySample{s.t, s.u_c, s.i_c, s.magnet.h_m, s.magnet.b_m, s.b_g};
    }
    int decimation_;
    std::size_t count_ = 0;
    std::vector<TrajectorySample> samples_;
};

/// Fresh plant at rest: demagnetized magnet (B_r' = 0 recoil line), zero
/// current, zero gap flux.
PlantState make_fresh_plant(const MajorLoop& loop, const RecoilModel& model,
                            const CircuitParams& p);

/// Plant at the zero-current equilibrium of the given magnet state: the
/// intersection of its characteristic with the I = 0 load line. Seed states
/// off that line would otherwise violate the quasi-static circuit constraint.
PlantState make_plant_at_rest(const MagnetState& seed, const MajorLoop& loop,
                              const RecoilModel& model, const CircuitParams& p);

/// Advance the plant one step under coil voltage u_c. Semi-implicit: the
/// coil L/R dynamic is integrated with the local differential permeability
/// of the active characteristic, then the magnet state follows the
/// quasi-static load-line intersection.
PlantState plant_step(const PlantState& s, double u_c, double dt, const CircuitParams& p,
                      const MajorLoop& loop, const RecoilModel& model);

/// Local small-signal DC gain [T/V] and inductance [H] at the current
/// operating point. direction selects the one-sided slope at branch kinks.
std::pair<double, double> linearize(const PlantState& s, const CircuitParams& p,
                                    const MajorLoop& loop, const RecoilModel& model,
                                    int direction = -1);

/// Measured gap flux density: true B_g plus seeded Gaussian noise.
double measure_b_g(const PlantState& s, const SensorModel& sensor, Rng& rng);

}  // namespace tmag
