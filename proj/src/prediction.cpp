#include "tmag/prediction.hpp"

#include <cmath>
#include <tuple>

namespace tmag {

std::pair<double, double> predict_target_point(double b_g_set, const CircuitParams& p) {
    if (b_g_set < 0.0) throw TmagError("predict_target_point: B_g_set must be >= 0");
    double b_o = p.k1 * (p.A_g / p.A_m) * b_g_set;
    double h_o = -2.0 * p.k2 * p.l_g * b_g_set / (p.L_m * kMu0);
    return {h_o, b_o};
}

std::pair<double, double> required_remanence(double h_o, double b_o, const RecoilFit& fit) {
    double denom = 1.0 + fit.slope * kMu0 * h_o;
    if (std::abs(denom) < 1e-9) {
        throw TmagError("required_remanence: singular configuration, 1 + slope*mu0*H_o = " +
                        std::to_string(denom));
    }
    double closed = (b_o - fit.intercept * kMu0 * h_o) / denom;

    // The joint system is solved numerically so a nonlinear fit can slot in
    // later; the closed form stays as a cross-check.
    auto residual = [&](double br) {
        return br - (b_o - recoil_permeability(br, fit) * kMu0 * h_o);
    };
    double span = std::max(1.0, 2.0 * std::abs(closed));
    double lo = closed - span;
    double hi = closed + span;
    double r_lo = residual(lo);
    double r_hi = residual(hi);
    if ((r_lo > 0.0) == (r_hi > 0.0)) {
        throw TmagError("required_remanence: root not bracketed");
    }
    double br = closed;
    for (int i = 0; i < 200; ++i) {
        br = 0.5 * (lo + hi);
        double r = residual(br);
        if (std::abs(r) <= 1e-12) break;
        if ((r > 0.0) == (r_lo > 0.0)) {
            lo = br;
            r_lo = r;
        } else {
            hi = br;
        }
    }
    if (std::abs(br - closed) > 1e-9) {
        throw TmagError("required_remanence: numeric solution disagrees with closed form");
    }
    return {br, recoil_permeability(br, fit)};
}

PredictionResult predict(double b_g_set, const CircuitParams& p, const MajorLoop& loop,
                         const RecoilFit& fit) {
    auto [h_o, b_o] = predict_target_point(b_g_set, p);
    auto [br, mu] = required_remanence(h_o, b_o, fit);
    double ch = 0.0, cb = 0.0;
    try {
        std::tie(ch, cb) = corner_point(loop, br, mu);
    } catch (const TmagError& e) {
        throw TmagError("set-point " + std::to_string(b_g_set) +
                        " T unreachable for this magnet/geometry: " + e.what());
    }
    return PredictionResult{b_o, h_o, br, mu, ch, cb};
}

}  // namespace tmag
