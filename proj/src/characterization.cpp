#include "tmag/characterization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tmag {

std::vector<MeasurementSample> MeasurementLog::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TmagError("cannot open measurement log: " + path);
    std::string line;
    if (!std::getline(in, line)) throw TmagError("empty measurement log: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t_s,I_c_A,B_g_T") {
        throw TmagError("measurement log header must be \"t_s,I_c_A,B_g_T\", got \"" + line + "\"");
    }
    std::vector<MeasurementSample> samples;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream is(line);
        MeasurementSample s;
        char c1 = 0, c2 = 0;
        if (!(is >> s.t >> c1 >> s.i_c >> c2 >> s.b_g) || c1 != ',' || c2 != ',') {
            throw TmagError("measurement log line " + std::to_string(line_no) +
                            " does not parse: \"" + line + "\"");
        }
        samples.push_back(s);
    }
    return samples;
}

void MeasurementLog::write_csv(const std::string& path,
                               const std::vector<MeasurementSample>& samples) {
    std::ofstream out(path);
    if (!out) throw TmagError("cannot write measurement log: " + path);
    out << "t_s,I_c_A,B_g_T\n";
    char buf[128];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g\n", s.t, s.i_c, s.b_g);
        out << buf;
    }
}

void MeasurementLog::validate() const {
    params.validate();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (!std::isfinite(s.t) || !std::isfinite(s.i_c) || !std::isfinite(s.b_g)) {
            throw TmagError("measurement sample " + std::to_string(i) + " is not finite");
        }
        if (i > 0 && !(s.t > samples[i - 1].t)) {
            throw TmagError("measurement log t must be strictly increasing (sample " +
                            std::to_string(i) + ")");
        }
    }
}

std::vector<std::pair<double, double>> estimate_bh_trajectory(const MeasurementLog& log) {
    log.validate();
    std::vector<std::pair<double, double>> out;
    out.reserve(log.samples.size());
    for (const auto& s : log.samples) {
        out.push_back(magnet_fields_from_measurement(s.b_g, s.i_c, log.params));
    }
    return out;
}

RecoilExtraction extract_recoil_lines(const std::vector<std::pair<double, double>>& trajectory,
                                      const SegmentationSettings& seg) {
    RecoilExtraction result;
    if (trajectory.size() < 3) return result;

    // Turning points of H with a hysteresis band against noise-induced
    // micro-reversals.
    struct Turn {
        std::size_t index;
        int direction_after;  // +1 rising, -1 falling
    };
    std::vector<Turn> turns;
    int dir = 0;
    std::size_t extreme_idx = 0;
    double extreme_h = trajectory[0].first;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        double h = trajectory[i].first;
        if (dir >= 0 && h > extreme_h) {
            extreme_h = h;
            extreme_idx = i;
        } else if (dir <= 0 && h < extreme_h) {
            extreme_h = h;
            extreme_idx = i;
        }
        if (dir >= 0 && h < extreme_h - seg.reversal_band) {
            turns.push_back({extreme_idx, -1});
            dir = -1;
            extreme_h = h;
            extreme_idx = i;
        } else if (dir <= 0 && h > extreme_h + seg.reversal_band) {
            turns.push_back({extreme_idx, +1});
            dir = +1;
            extreme_h = h;
            extreme_idx = i;
        }
    }

    // A recoil excursion is a local H minimum followed by a local maximum:
    // the magnet backs up from the descent and returns.
    for (std::size_t k = 0; k + 1 < turns.size(); ++k) {
        if (turns[k].direction_after != +1 || turns[k + 1].direction_after != -1) continue;
        auto [h_lo, b_lo] = trajectory[turns[k].index];
        auto [h_hi, b_hi] = trajectory[turns[k + 1].index];
        if (h_hi - h_lo < seg.min_h_span) {
            std::ostringstream os;
            os << "skipping recoil excursion at H = " << h_lo << " A/m: span " << (h_hi - h_lo)
               << " A/m below minimum " << seg.min_h_span << " A/m (ill-conditioned chord)";
            result.warnings.push_back(os.str());
            continue;
        }
        double slope = (b_hi - b_lo) / (h_hi - h_lo);
        ExtractedRecoilLine line;
        line.mu_rec = slope / kMu0;
        line.b_r_prime = b_lo - slope * h_lo;
        line.corner_lo_h = h_lo;
        line.corner_lo_b = b_lo;
        line.corner_hi_h = h_hi;
        line.corner_hi_b = b_hi;
        result.lines.push_back(line);
    }

    std::sort(result.lines.begin(), result.lines.end(),
              [](const ExtractedRecoilLine& a, const ExtractedRecoilLine& b) {
                  return a.b_r_prime < b.b_r_prime;
              });
    return result;
}

RecoilFitReport fit_recoil_permeability(const std::vector<ExtractedRecoilLine>& lines) {
    if (lines.size() < 2) {
        throw TmagError("fit_recoil_permeability: need at least 2 recoil lines, got " +
                        std::to_string(lines.size()));
    }
    double min_br = lines.front().b_r_prime;
    double max_br = lines.front().b_r_prime;
    for (const auto& l : lines) {
        min_br = std::min(min_br, l.b_r_prime);
        max_br = std::max(max_br, l.b_r_prime);
    }
    if (max_br - min_br < 1e-12) {
        throw TmagError("fit_recoil_permeability: all B_r' values identical, slope unidentifiable");
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    double n = static_cast<double>(lines.size());
    for (const auto& l : lines) {
        sx += l.b_r_prime;
        sy += l.mu_rec;
        sxx += l.b_r_prime * l.b_r_prime;
        sxy += l.b_r_prime * l.mu_rec;
    }
    double denom = n * sxx - sx * sx;
    RecoilFitReport report;
    report.fit.slope = (n * sxy - sx * sy) / denom;
    report.fit.intercept = (sy - report.fit.slope * sx) / n;
    double ss = 0.0;
    for (const auto& l : lines) {
        double r = l.mu_rec - recoil_permeability(l.b_r_prime, report.fit);
        ss += r * r;
    }
    report.residual_rms = std::sqrt(ss / n);
    report.lines = lines;
    return report;
}

std::vector<std::pair<double, double>> extract_descending_branch(
    const std::vector<std::pair<double, double>>& trajectory) {
    std::vector<std::pair<double, double>> branch;
    if (trajectory.empty()) return branch;
    std::size_t start = 0;
    for (std::size_t i = 1; i < trajectory.size(); ++i) {
        if (trajectory[i].first > trajectory[start].first) start = i;
    }
    double h_min_seen = trajectory[start].first + 1.0;
    for (std::size_t i = start; i < trajectory.size(); ++i) {
        if (trajectory[i].first < h_min_seen) {
            h_min_seen = trajectory[i].first;
            branch.push_back(trajectory[i]);
        }
    }
    return branch;
}

SweepResult run_bh_sweep(const CircuitParams& p, const MajorLoop& loop, const RecoilModel& model,
                         const ControlSettings& control, const SweepSettings& sweep,
                         const SensorModel& sensor, Rng& rng, int decimation) {
    if (decimation < 1) decimation = 1;
    SweepResult result;
    result.log.params = p;

    PlantState plant = make_fresh_plant(loop, model, p);
    const double dt = control.dt_plant;
    const double b_thresh = kSaturationFraction * loop.b_sat();

    std::size_t step_count = 0;
    auto record = [&](const PlantState& s) {
        if (step_count++ % static_cast<std::size_t>(decimation) != 0) return;
        MeasurementSample ms;
        ms.t = s.t;
        ms.i_c = s.i_c;
        ms.b_g = sensor.noise_sigma == 0.0 ? s.b_g : s.b_g + rng.gaussian(0.0, sensor.noise_sigma);
        result.log.samples.push_back(ms);
        result.true_trajectory.emplace_back(s.magnet.h_m, s.magnet.b_m);
    };

    record(plant);

    // Positive saturation first; both loop polarities end up in the log.
    double t0 = plant.t;
    while (!(plant.magnet.mode == MagnetMode::OnMajorDescending && plant.magnet.b_m >= b_thresh)) {
        plant = plant_step(plant, control.pulse_voltage, dt, p, loop, model);
        record(plant);
        if (plant.t - t0 > control.sat_timeout) {
            throw TmagError("sweep drive amplitude insufficient to reach positive saturation");
        }
    }

    // Piecewise-linear drive profile: slow descent with recoil excursions.
    std::vector<double> eligible = sweep.excursion_at;
    std::sort(eligible.rbegin(), eligible.rend());
    std::size_t next_exc = 0;

    double u = plant.u_c;
    const double horizon = plant.t + 600.0;
    auto step_at = [&](double voltage) {
        plant = plant_step(plant, voltage, dt, p, loop, model);
        record(plant);
        if (plant.t > horizon) throw TmagError("sweep exceeded simulation horizon");
    };

    while (plant.magnet.b_m > -b_thresh) {
        double target_u = next_exc < eligible.size() ? eligible[next_exc] : sweep.u_floor;

        while (u > target_u && plant.magnet.b_m > -b_thresh) {
            u = std::max(target_u, u - sweep.ramp_rate * dt);
            step_at(u);
        }
        if (plant.magnet.b_m <= -b_thresh) break;

        if (next_exc < eligible.size()) {
            double peak = u + sweep.excursion_v;
            while (u < peak) {
                u = std::min(peak, u + sweep.excursion_rate * dt);
                step_at(u);
            }
            while (u > eligible[next_exc]) {
                u = std::max(eligible[next_exc], u - sweep.excursion_rate * dt);
                step_at(u);
            }
            ++next_exc;
            continue;
        }

        // At the drive floor: let the current settle toward U/R.
        double t_hold = plant.t;
        while (plant.magnet.b_m > -b_thresh) {
            step_at(u);
            if (plant.t - t_hold > 2.0) {
                throw TmagError("sweep drive amplitude insufficient to reach negative saturation "
                                "(B_m = " + std::to_string(plant.magnet.b_m) + " T at U = " +
                                std::to_string(u) + " V)");
            }
        }
    }
    return result;
}

}  // namespace tmag
