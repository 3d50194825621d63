#pragma once

#include <utility>

#include "tmag/circuit.hpp"
#include "tmag/hysteresis.hpp"

namespace tmag {

/// Output of the Predict step: the target operating point, the recoil line
/// that realizes it, and the demagnetization corner-point reference.
struct PredictionResult {
    double b_o = 0.0;        // target magnet flux density [T]
    double h_o = 0.0;        // target magnet field [A/m]
    double b_r_prime = 0.0;  // required recoil-line remanence [T]
    double mu_rec = 0.0;
    double corner_h = 0.0;   // demagnetization reference point
    double corner_b = 0.0;

    RecoilLine line() const { return RecoilLine{b_r_prime, mu_rec, corner_h, corner_b}; }
};

/// Target magnet operating point (H_o, B_o) for a desired air-gap flux
/// density at the known gap.
std::pair<double, double> predict_target_point(double b_g_set, const CircuitParams& p);

/// Remanence of the recoil line through (H_o, B_o), solved jointly with the
/// linear permeability fit. Bracketed root find to 1e-12 T, cross-checked
/// against the closed-form linear solution.
std::pair<double, double> required_remanence(double h_o, double b_o, const RecoilFit& fit);

/// Full Predict step: target point, recoil line, corner point.
PredictionResult predict(double b_g_set, const CircuitParams& p, const MajorLoop& loop,
                         const RecoilFit& fit);

}  // namespace tmag
