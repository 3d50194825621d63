#include "tmag/circuit.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace tmag {

void CircuitParams::validate() const {
    auto fail = [](const std::string& msg) { throw TmagError("invalid circuit params: " + msg); };
    if (!(A_m > 0.0)) fail("A_m must be > 0");
    if (!(A_g > 0.0)) fail("A_g must be > 0");
    if (!(L_m > 0.0)) fail("L_m must be > 0");
    if (!(l_g > 0.0)) fail("l_g must be > 0");
    if (!(N >= 1.0)) fail("N must be >= 1");
    if (!(R > 0.0)) fail("R must be > 0");
    if (!(k1 > 0.0 && k1 <= 1.0)) fail("k1 must be in (0, 1]");
    if (!(k2 >= 1.0)) fail("k2 must be >= 1");
}

double gap_flux_from_magnet(double b_m, const CircuitParams& p) {
    return b_m * p.A_m / (p.k1 * p.A_g);
}

std::pair<double, double> magnet_fields_from_measurement(double b_g, double i_c,
                                                         const CircuitParams& p) {
    double b_m = p.k1 * b_g * p.A_g / p.A_m;
    double h_m = (p.N * i_c - 2.0 * p.k2 * p.l_g * b_g / kMu0) / p.L_m;
    return {h_m, b_m};
}

LoadLine load_line(double i_c, const CircuitParams& p) {
    double slope = -kMu0 * (p.k1 / p.k2) * (p.A_g * p.L_m) / (2.0 * p.A_m * p.l_g);
    double h_intercept = p.N * i_c / p.L_m;
    return LoadLine{slope, h_intercept};
}

namespace {

// Bisection of f(h) = load(h) - path(h), which is strictly decreasing
// (load slope < 0, path non-decreasing). Residual target 1e-9 T.
std::pair<double, double> bisect_crossing(const LoadLine& ll, double h_lo, double h_hi,
                                          const std::function<double(double)>& path_b,
                                          const std::string& what) {
    auto f = [&](double h) { return ll.b_at(h) - path_b(h); };
    double f_lo = f(h_lo);
    double f_hi = f(h_hi);
    if (std::abs(f_lo) <= 1e-9) return {h_lo, path_b(h_lo)};
    if (std::abs(f_hi) <= 1e-9) return {h_hi, path_b(h_hi)};
    if (f_lo < 0.0 || f_hi > 0.0) {
        std::ostringstream os;
        os << what << ": no intersection in sampled range; load line spans ["
           << ll.b_at(h_hi) << ", " << ll.b_at(h_lo) << "] T while the characteristic spans ["
           << path_b(h_lo) << ", " << path_b(h_hi) << "] T over H in [" << h_lo << ", " << h_hi
           << "] A/m";
        throw TmagError(os.str());
    }
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (h_lo + h_hi);
        double fm = f(mid);
        if (std::abs(fm) <= 1e-9) return {mid, path_b(mid)};
        if (fm > 0.0) h_lo = mid; else h_hi = mid;
    }
    double h = 0.5 * (h_lo + h_hi);
    return {h, path_b(h)};
}

}  // namespace

std::pair<double, double> circuit_operating_point(const MagnetState& state, const MajorLoop& loop,
                                                  double i_c, const CircuitParams& p) {
    LoadLine ll = load_line(i_c, p);

    if (state.mode == MagnetMode::OnRecoilLine) {
        const RecoilLine& line = *state.recoil;
        double denom = ll.slope - line.slope();
        if (denom == 0.0) {
            throw TmagError("circuit_operating_point: load line parallel to recoil line");
        }
        double h_closed = (line.b_r_prime + ll.slope * ll.h_intercept) / denom;
        auto [h, b] = bisect_crossing(
            ll, loop.h_min(), loop.h_max(), [&](double x) { return line.b_at(x); },
            "circuit_operating_point (recoil line)");
        if (std::abs(h - h_closed) * std::abs(line.slope()) > 1e-6) {
            throw TmagError("circuit_operating_point: bisection disagrees with closed form");
        }
        return {h, b};
    }

    return bisect_crossing(
        ll, loop.h_min(), loop.h_max(), [&](double x) { return loop.b_at(x); },
        "circuit_operating_point (major branch)");
}

std::pair<double, double> intersect_load_line(const Characteristic& path, const LoadLine& ll,
                                              const MajorLoop& loop) {
    return bisect_crossing(
        ll, loop.h_min(), loop.h_max(), [&](double x) { return path.b_at(x); },
        "operating-point solve");
}

}  // namespace tmag
