#include "tmag/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace tmag {

TuningResult tune(double b_g_set, PlantState plant, const TuningContext& ctx, Rng& rng,
                  int log_decimation) {
    const MajorLoop& loop = *ctx.loop;
    const RecoilModel& plant_recoil = *ctx.plant_recoil;
    const double t_start = plant.t;

    TuningResult result;
    result.b_g_set = b_g_set;
    result.l_g = ctx.plant_params.l_g;
    result.prediction = predict(b_g_set, ctx.predictor_params, loop, ctx.predictor_fit);

    // Fig. 3 branch: saturate only when the required recoil line is higher
    // than the present one.
    bool on_known_line = plant.magnet.mode == MagnetMode::OnRecoilLine;
    bool need_saturation =
        !on_known_line ||
        plant.magnet.recoil->b_r_prime + kRemanenceEpsilon < result.prediction.b_r_prime;

    TrajectoryLog log(log_decimation);
    log.record_forced(plant);

    if (need_saturation) {
        plant = saturation_pulse(plant, ctx.plant_params, loop, plant_recoil, ctx.control, &log);
    }
    result.saturated = need_saturation;

    double ref = reference_transform(result.prediction.corner_b, ctx.predictor_params);
    DemagResult demag = run_demagnetization(plant, ref, ctx.gains, ctx.sensor, ctx.plant_params,
                                            loop, plant_recoil, ctx.control, rng, &log);
    plant = demag.plant;
    log.record_forced(plant);

    result.final_b_g = plant.b_g;
    result.error = result.final_b_g - b_g_set;
    result.duration = plant.t - t_start;
    result.min_b_g_minus_ref = demag.min_b_g_minus_ref;
    result.plant = plant;
    result.trajectory = log.samples();
    return result;
}

CellStats compute_cell_stats(double b_g_set, double l_g, const std::vector<double>& finals) {
    CellStats cs;
    cs.b_g_set = b_g_set;
    cs.l_g = l_g;
    cs.n = static_cast<int>(finals.size());
    if (finals.empty()) return cs;

    double sum = 0.0;
    double abs_err_sum = 0.0;
    for (double f : finals) {
        sum += f;
        abs_err_sum += std::abs(f - b_g_set);
    }
    cs.mean = sum / finals.size();
    cs.mae = abs_err_sum / finals.size();

    if (finals.size() >= 2) {
        double ss = 0.0;
        for (double f : finals) ss += (f - cs.mean) * (f - cs.mean);
        cs.precision_3sigma = 3.0 * std::sqrt(ss / (finals.size() - 1));
    }
    return cs;
}

namespace {

CellStats run_cell(const TuningContext& base, const CampaignConfig& cfg, double set_point,
                   double gap, std::size_t cell_index) {
    TuningContext ctx = base;
    ctx.predictor_params.l_g = gap;
    ctx.plant_params.l_g = gap;
    if (cfg.plant_k1_affine) {
        ctx.plant_params.k1 = cfg.plant_k1_affine->first + cfg.plant_k1_affine->second * gap;
    }

    std::vector<double> finals;
    finals.reserve(static_cast<std::size_t>(cfg.n));
    try {
        for (int cycle = 0; cycle < cfg.n; ++cycle) {
            Rng rng(Rng::mix(cfg.master_seed, cell_index, static_cast<std::uint64_t>(cycle)));
            PlantState plant = make_fresh_plant(*ctx.loop, *ctx.plant_recoil, ctx.plant_params);
            TuningResult r = tune(set_point, plant, ctx, rng, /*log_decimation=*/1000000);
            finals.push_back(r.final_b_g);
        }
    } catch (const TmagError& e) {
        CellStats failed = compute_cell_stats(set_point, gap, finals);
        failed.error = e.what();
        return failed;
    }
    return compute_cell_stats(set_point, gap, finals);
}

}  // namespace

CampaignStats run_campaign(const TuningContext& base, const CampaignConfig& cfg) {
    if (cfg.n < 1) throw TmagError("campaign n must be >= 1");
    if (cfg.set_points.empty() || cfg.gaps.empty()) {
        throw TmagError("campaign needs at least one set-point and one gap");
    }

    // Tables layout: descending set-point, then ascending gap.
    std::vector<double> set_points = cfg.set_points;
    std::sort(set_points.rbegin(), set_points.rend());
    std::vector<double> gaps = cfg.gaps;
    std::sort(gaps.begin(), gaps.end());

    struct Cell {
        double set_point;
        double gap;
        std::size_t index;
    };
    std::vector<Cell> cells;
    for (double sp : set_points) {
        for (double g : gaps) {
            cells.push_back({sp, g, cells.size()});
        }
    }

    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::size_t workers = cfg.workers > 0 ? static_cast<std::size_t>(cfg.workers)
                                          : std::min<std::size_t>(cells.size(), hw);

    CampaignStats stats;
    stats.cells.resize(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            stats.cells[i] = run_cell(base, cfg, cells[i].set_point, cells[i].gap, cells[i].index);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w + 1 < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return stats;
}

}  // namespace tmag
