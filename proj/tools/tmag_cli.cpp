#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tmag/config.hpp"
#include "tmag/reports.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::int64_t seed = -1;  // -1: keep config seed
};

tmag::RunConfig load_run_config(const GlobalArgs& g) {
    tmag::RunConfig cfg = tmag::load_config(g.config_path);
    if (g.seed >= 0) {
        cfg.master_seed = static_cast<std::uint64_t>(g.seed);
        cfg.sensor.seed = cfg.master_seed;
    }
    return cfg;
}

void write_error_json(const GlobalArgs& g, const std::string& command, const std::string& message) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["error"] = message;
    std::cout << j.dump(2) << std::endl;
    std::error_code ec;
    fs::create_directories(g.out_dir, ec);
    if (!ec) {
        std::ofstream out(fs::path(g.out_dir) / "error.json");
        if (out) out << j.dump(2) << "\n";
    }
}

int cmd_tune(const GlobalArgs& g, double set_point, double gap) {
    tmag::RunConfig cfg = load_run_config(g);
    tmag::TuningContext ctx = cfg.context();
    if (gap > 0.0) {
        ctx.predictor_params.l_g = gap;
        ctx.plant_params.l_g = gap;
    }
    if (cfg.plant_k1_affine) {
        ctx.plant_params.k1 = cfg.plant_k1_affine->first +
                              cfg.plant_k1_affine->second * ctx.plant_params.l_g;
    }

    tmag::Rng rng(tmag::Rng::mix(cfg.master_seed, 0, 0));
    tmag::PlantState plant = tmag::make_fresh_plant(*ctx.loop, *ctx.plant_recoil, ctx.plant_params);
    tmag::TuningResult result = tmag::tune(set_point, plant, ctx, rng, cfg.log_decimation);

    fs::create_directories(g.out_dir);
    tmag::write_trajectory_csv((fs::path(g.out_dir) / "trajectory.csv").string(),
                               result.trajectory);
    tmag::write_tune_summary_json((fs::path(g.out_dir) / "summary.json").string(), result);
    std::cout << "tune: B_g_set = " << set_point << " T, final B_g = " << result.final_b_g
              << " T, error = " << result.error * 1e3 << " mT, saturated = "
              << (result.saturated ? "yes" : "no") << ", duration = " << result.duration << " s\n";
    return 0;
}

int cmd_campaign(const GlobalArgs& g, std::vector<double> set_points, std::vector<double> gaps,
                 int n) {
    tmag::RunConfig cfg = load_run_config(g);
    tmag::TuningContext ctx = cfg.context();

    tmag::CampaignConfig cc;
    cc.set_points = set_points.empty() ? cfg.campaign_set_points : set_points;
    cc.gaps = gaps.empty() ? cfg.campaign_gaps : gaps;
    cc.n = n > 0 ? n : cfg.campaign_n;
    cc.master_seed = cfg.master_seed;
    cc.workers = cfg.campaign_workers;
    cc.plant_k1_affine = cfg.plant_k1_affine;
    if (cc.set_points.empty() || cc.gaps.empty()) {
        throw tmag::TmagError("campaign needs set-points and gaps (flags or config)");
    }

    tmag::CampaignStats stats = tmag::run_campaign(ctx, cc);

    fs::create_directories(g.out_dir);
    tmag::write_campaign_csv((fs::path(g.out_dir) / "campaign.csv").string(), stats);

    int ok = 0;
    for (const auto& cell : stats.cells) {
        if (cell.error.empty()) {
            ++ok;
        } else {
            std::cerr << "cell (B_g_set = " << cell.b_g_set << " T, l_g = " << cell.l_g
                      << " m) failed: " << cell.error << "\n";
        }
    }
    std::cout << "campaign: " << ok << "/" << stats.cells.size() << " cells ok, n = " << cc.n
              << " cycles per cell\n";
    return ok > 0 ? 0 : 1;
}

int cmd_sweep(const GlobalArgs& g) {
    tmag::RunConfig cfg = load_run_config(g);

    tmag::SweepSettings sweep;
    sweep.excursion_at = {-1.0, -1.8, -2.6, -3.4};
    tmag::Rng rng(tmag::Rng::mix(cfg.master_seed, 7, 1));
    tmag::SweepResult result = tmag::run_bh_sweep(cfg.circuit, *cfg.loop, *cfg.plant_recoil,
                                                  cfg.control, sweep, cfg.sensor, rng,
                                                  cfg.log_decimation);

    fs::create_directories(g.out_dir);
    tmag::MeasurementLog::write_csv((fs::path(g.out_dir) / "sweep_log.csv").string(),
                                    result.log.samples);
    std::cout << "sweep: " << result.log.samples.size() << " samples, t_end = "
              << result.log.samples.back().t << " s\n";
    return 0;
}

int cmd_characterize(const GlobalArgs& g, const std::string& log_path) {
    tmag::RunConfig cfg = load_run_config(g);

    tmag::MeasurementLog log;
    log.samples = tmag::MeasurementLog::read_csv(log_path);
    log.params = cfg.circuit;

    auto trajectory = tmag::estimate_bh_trajectory(log);
    tmag::RecoilExtraction extraction = tmag::extract_recoil_lines(trajectory);
    for (const auto& w : extraction.warnings) std::cerr << "warning: " << w << "\n";
    tmag::RecoilFitReport report = tmag::fit_recoil_permeability(extraction.lines);

    fs::create_directories(g.out_dir);
    tmag::write_fit_report_json((fs::path(g.out_dir) / "fit_report.json").string(), report);

    auto branch = tmag::extract_descending_branch(trajectory);
    std::ofstream out(fs::path(g.out_dir) / "estimated_branch.csv");
    if (!out) throw tmag::TmagError("cannot write estimated_branch.csv");
    out << "H_A_per_m,B_T\n";
    char buf[96];
    for (auto it = branch.rbegin(); it != branch.rend(); ++it) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", it->first, it->second);
        out << buf;
    }

    std::cout << "characterize: mu_rec = " << report.fit.slope << " * B_r' + "
              << report.fit.intercept << " (residual RMS " << report.residual_rms << ", "
              << report.lines.size() << " recoil loops)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tunable-magnet actuator simulator"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "path to JSON run config")->required();
    app.add_option("--seed", g.seed, "master seed (overrides config)");
    app.add_option("--out", g.out_dir, "output directory");

    auto* tune = app.add_subcommand("tune", "run one tuning cycle");
    double set_point = 0.0;
    double gap = 0.0;
    tune->add_option("--set-point", set_point, "air-gap flux density set-point [T]")->required();
    tune->add_option("--gap", gap, "air-gap length [m] (default: config l_g)");

    auto* campaign = app.add_subcommand("campaign", "sweep set-points x gaps x repetitions");
    std::vector<double> set_points;
    std::vector<double> gaps;
    int n = 0;
    campaign->add_option("--set-points", set_points, "set-points [T]");
    campaign->add_option("--gaps", gaps, "air gaps [m]");
    campaign->add_option("--n", n, "cycles per cell");

    auto* sweep = app.add_subcommand("sweep", "low-frequency major-loop sweep with recoil loops");

    auto* characterize = app.add_subcommand("characterize", "BH estimation from a measurement log");
    std::string log_path;
    characterize->add_option("--log", log_path, "measurement log CSV")->required();

    CLI11_PARSE(app, argc, argv);

    std::string command = app.get_subcommands().front()->get_name();
    try {
        if (tune->parsed()) return cmd_tune(g, set_point, gap);
        if (campaign->parsed()) return cmd_campaign(g, set_points, gaps, n);
        if (sweep->parsed()) return cmd_sweep(g);
        if (characterize->parsed()) return cmd_characterize(g, log_path);
    } catch (const std::exception& e) {
        write_error_json(g, command, e.what());
        return 1;
    }
    return 2;
}
