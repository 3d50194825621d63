#pragma once

#include <utility>

#include "tmag/hysteresis.hpp"

namespace tmag {

/// Geometry and circuit constants of the actuator.
struct CircuitParams {
    double A_m = 0.0;  // magnet cross-section [m^2]
    double A_g = 0.0;  // pole/gap cross-section [m^2]
    double L_m = 0.0;  // magnet length [m]
    double l_g = 0.0;  // single air-gap length [m]
    double N = 0.0;    // coil turns
    double R = 0.0;    // coil resistance [ohm]
    double k1 = 1.0;   // flux leakage coefficient
    double k2 = 1.0;   // loss factor

    /// Throws on invalid values: geometry > 0, N >= 1, R > 0, k1 in (0, 1],
    /// k2 >= 1.
    void validate() const;
};

/// Load line B_m = slope * (H_m - h_intercept).
struct LoadLine {
    double slope = 0.0;        // T per A/m, strictly negative
    double h_intercept = 0.0;  // A/m

    double b_at(double h) const { return slope * (h - h_intercept); }
};

/// Flux conservation: B_g from the magnet flux density.
double gap_flux_from_magnet(double b_m, const CircuitParams& p);

/// Invert the circuit equations from a (B_g, I_c) measurement to the magnet
/// interior fields (H_m, B_m).
std::pair<double, double> magnet_fields_from_measurement(double b_g, double i_c,
                                                         const CircuitParams& p);

/// Load line of the circuit for a given coil current.
LoadLine load_line(double i_c, const CircuitParams& p);

/// Intersection of the load line with the magnet's active characteristic
/// (major branch or the state's recoil line). Bracketed bisection to a
/// residual of 1e-9 T; recoil-line mode is cross-checked against the
/// closed-form two-line intersection.
std::pair<double, double> circuit_operating_point(const MagnetState& state, const MajorLoop& loop,
                                                  double i_c, const CircuitParams& p);

/// Intersection of the load line with an arbitrary state path. Used by the
/// plant integrator, where the path is the full piecewise characteristic.
std::pair<double, double> intersect_load_line(const Characteristic& path, const LoadLine& ll,
                                              const MajorLoop& loop);

}  // namespace tmag
