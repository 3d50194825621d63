#include "tmag/plant.hpp"

#include <cmath>

namespace tmag {

namespace {

// dB_m/dI_c at fixed characteristic slope m: the load line shifts with I
// while the magnet rides the local tangent.
double flux_current_gain(double m, const LoadLine& ll, const CircuitParams& p) {
    double a = ll.slope;
    return a * m * p.N / (p.L_m * (a - m));
}

}  // namespace

PlantState make_fresh_plant(const MajorLoop& loop, const RecoilModel& model,
                            const CircuitParams& p) {
    double mu = model.mu_at(0.0);
    RecoilLine line = make_recoil_line(loop, 0.0, mu);
    MagnetState magnet = MagnetState::on_line(line, 0.0);
    PlantState s;
    s.magnet = magnet;
    s.b_g = gap_flux_from_magnet(magnet.b_m, p);
    return s;
}

PlantState make_plant_at_rest(const MagnetState& seed, const MajorLoop& loop,
                              const RecoilModel& model, const CircuitParams& p) {
    Characteristic path(loop, model, seed);
    auto [h, b] = intersect_load_line(path, load_line(0.0, p), loop);
    (void)b;
    PlantState s;
    s.magnet = apply_h(seed, loop, model, h);
    s.b_g = gap_flux_from_magnet(s.magnet.b_m, p);
    return s;
}

PlantState plant_step(const PlantState& s, double u_c, double dt, const CircuitParams& p,
                      const MajorLoop& loop, const RecoilModel& model) {
    if (!(dt > 0.0)) throw TmagError("plant_step: dt must be > 0");

    double drive = u_c - p.R * s.i_c;
    int direction = drive > 0.0 ? 1 : (drive < 0.0 ? -1 : 0);

    Characteristic path(loop, model, s.magnet);
    double m = path.slope_at(s.magnet.h_m, direction);
    LoadLine ll0 = load_line(s.i_c, p);
    double c_b = flux_current_gain(m, ll0, p);
    double inductance = p.N * p.A_m * c_b;

    // Implicit Euler on U = R*I + L*dI/dt, written to stay finite as L -> 0.
    double i_next = (s.i_c * inductance / dt + u_c) / (inductance / dt + p.R);

    PlantState out = s;
    out.t = s.t + dt;
    out.u_c = u_c;
    if (i_next == s.i_c) return out;

    LoadLine ll = load_line(i_next, p);
    std::pair<double, double> op;
    try {
        op = intersect_load_line(path, ll, loop);
    } catch (const TmagError& e) {
        throw TmagError("plant_step at t = " + std::to_string(out.t) + " s, I_c = " +
                        std::to_string(i_next) + " A: " + e.what());
    }
    out.i_c = i_next;
    out.magnet = apply_h(s.magnet, loop, model, op.first);
    out.b_g = gap_flux_from_magnet(out.magnet.b_m, p);
    return out;
}

std::pair<double, double> linearize(const PlantState& s, const CircuitParams& p,
                                    const MajorLoop& loop, const RecoilModel& model,
                                    int direction) {
    double m;
    if (s.magnet.mode == MagnetMode::OnRecoilLine) {
        m = s.magnet.recoil->slope();
    } else {
        m = loop.slope_at(s.magnet.h_m, direction);
    }
    LoadLine ll = load_line(s.i_c, p);
    double c_b = flux_current_gain(m, ll, p);
    double inductance = p.N * p.A_m * c_b;
    double g0 = c_b * p.A_m / (p.k1 * p.A_g * p.R);
    return {g0, inductance};
}

double measure_b_g(const PlantState& s, const SensorModel& sensor, Rng& rng) {
    if (sensor.noise_sigma < 0.0) throw TmagError("sensor noise_sigma must be >= 0");
    if (sensor.noise_sigma == 0.0) return s.b_g;
    return s.b_g + rng.gaussian(0.0, sensor.noise_sigma);
}

}  // namespace tmag
