#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_support.hpp"
#include "tmag/characterization.hpp"

using namespace tmag;
using doctest::Approx;

namespace {

SweepResult default_sweep(const RecoilModel& model, double noise_sigma = 0.0,
                          std::uint64_t seed = 11) {
    SweepSettings sweep;
    sweep.excursion_at = {-1.0, -1.8, -2.6, -3.4};
    SensorModel sensor{noise_sigma, seed};
    Rng rng(seed);
    return run_bh_sweep(test::nominal_params(), test::bundled_loop(), model,
                        test::nominal_control(), sweep, sensor, rng, 10);
}

}  // namespace

TEST_CASE("zero log estimates to the origin [estimate]") {
    MeasurementLog log;
    log.params = test::nominal_params();
    for (int i = 0; i < 5; ++i) log.samples.push_back({i * 0.1, 0.0, 0.0});
    auto traj = estimate_bh_trajectory(log);
    REQUIRE(traj.size() == 5);
    for (const auto& [h, b] : traj) {
        CHECK(h == 0.0);
        CHECK(b == 0.0);
    }
}

TEST_CASE("estimation is linear in the measured flux [estimate][property]") {
    MeasurementLog log;
    log.params = test::nominal_params();
    log.samples = {{0.0, 0.5, 0.12}, {0.1, -0.5, 0.08}, {0.2, 1.0, -0.02}};
    auto base = estimate_bh_trajectory(log);

    const double c = 3.0;
    MeasurementLog scaled = log;
    for (auto& s : scaled.samples) s.b_g *= c;
    auto traj = estimate_bh_trajectory(scaled);
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(traj[i].second == Approx(c * base[i].second).epsilon(1e-12));
        double h_shift = -2.0 * log.params.k2 * log.params.l_g * (c - 1.0) *
                         log.samples[i].b_g / kMu0 / log.params.L_m;
        CHECK(traj[i].first - base[i].first == Approx(h_shift).epsilon(1e-9));
    }
}

TEST_CASE("estimation round-trips the simulated sweep exactly [estimate]") {
    RecoilModel model = RecoilModel::linear(test::paper_fit());
    SweepResult sweep = default_sweep(model);
    auto est = estimate_bh_trajectory(sweep.log);
    REQUIRE(est.size() == sweep.true_trajectory.size());
    for (std::size_t i = 0; i < est.size(); i += 7) {
        CHECK(est[i].first == Approx(sweep.true_trajectory[i].first).epsilon(1e-9));
        CHECK(std::abs(est[i].second - sweep.true_trajectory[i].second) <= 1e-9);
    }
}

TEST_CASE("k1 mismatch between generation and estimation scales B_m [estimate]") {
    RecoilModel model = RecoilModel::linear(test::paper_fit());
    SweepResult sweep = default_sweep(model);

    MeasurementLog wrong = sweep.log;
    wrong.params.k1 = 0.8;  // true plant used 0.88
    auto est = estimate_bh_trajectory(wrong);
    double ratio = wrong.params.k1 / test::nominal_params().k1;
    for (std::size_t i = 0; i < est.size(); i += 101) {
        CHECK(est[i].second ==
              Approx(ratio * sweep.true_trajectory[i].second).epsilon(1e-9));
    }
}

TEST_CASE("exact synthetic excursion recovers its line exactly [extract]") {
    // B = 0.6 + 5 * mu0 * H traversed down and back up
    std::vector<std::pair<double, double>> traj;
    auto line_b = [](double h) { return 0.6 + 5.0 * kMu0 * h; };
    for (double h = 0.0; h >= -20000.0; h -= 250.0) traj.emplace_back(h, line_b(h));
    for (double h = -20000.0; h <= -8000.0; h += 250.0) traj.emplace_back(h, line_b(h));
    for (double h = -8000.0; h >= -30000.0; h -= 250.0) traj.emplace_back(h, line_b(h));

    RecoilExtraction ex = extract_recoil_lines(traj);
    REQUIRE(ex.lines.size() == 1);
    CHECK(ex.lines[0].b_r_prime == Approx(0.6).epsilon(1e-12));
    CHECK(ex.lines[0].mu_rec == Approx(5.0).epsilon(1e-12));
    CHECK(ex.lines[0].corner_lo_h == Approx(-20000.0).epsilon(1e-12));
}

TEST_CASE("stacked excursions come back ordered by remanence [extract]") {
    std::vector<std::pair<double, double>> traj;
    auto seg = [&](double b_r, double mu, double h_from, double h_to, double step) {
        for (double h = h_from; (step > 0.0) ? h <= h_to : h >= h_to; h += step) {
            traj.emplace_back(h, b_r + mu * kMu0 * h);
        }
    };
    // descent on a steep pseudo-branch, excursion, deeper descent, excursion
    seg(1.2, 20.0, 0.0, -30000.0, -250.0);
    seg(0.9, 5.5, -30000.0, -20000.0, 250.0);   // up
    seg(0.9, 5.5, -20000.0, -30000.0, -250.0);  // back
    seg(1.2, 20.0, -30000.0, -42000.0, -250.0);
    seg(0.55, 5.2, -42000.0, -31000.0, 250.0);
    seg(0.55, 5.2, -31000.0, -45000.0, -250.0);

    RecoilExtraction ex = extract_recoil_lines(traj);
    REQUIRE(ex.lines.size() == 2);
    CHECK(ex.lines[0].b_r_prime == Approx(0.55).epsilon(1e-9));
    CHECK(ex.lines[1].b_r_prime == Approx(0.9).epsilon(1e-9));
    CHECK(ex.lines[0].mu_rec == Approx(5.2).epsilon(1e-9));
    CHECK(ex.lines[1].mu_rec == Approx(5.5).epsilon(1e-9));
}

TEST_CASE("narrow excursions are skipped with a warning [extract]") {
    std::vector<std::pair<double, double>> traj;
    auto line_b = [](double h) { return 0.6 + 5.0 * kMu0 * h; };
    for (double h = 0.0; h >= -20000.0; h -= 50.0) traj.emplace_back(h, line_b(h));
    for (double h = -20000.0; h <= -19700.0; h += 50.0) traj.emplace_back(h, line_b(h));
    for (double h = -19700.0; h >= -30000.0; h -= 50.0) traj.emplace_back(h, line_b(h));

    SegmentationSettings seg;
    seg.reversal_band = 100.0;
    seg.min_h_span = 500.0;
    RecoilExtraction ex = extract_recoil_lines(traj, seg);
    CHECK(ex.lines.empty());
    REQUIRE(ex.warnings.size() == 1);
    CHECK(ex.warnings[0].find("ill-conditioned") != std::string::npos);
}

TEST_CASE("simulated recoil loops recover the plant permeability [extract]") {
    RecoilModel model = RecoilModel::linear(test::paper_fit());
    SweepResult sweep = default_sweep(model);
    auto est = estimate_bh_trajectory(sweep.log);
    RecoilExtraction ex = extract_recoil_lines(est);
    REQUIRE(ex.lines.size() == 4);
    for (const auto& l : ex.lines) {
        CHECK(l.mu_rec == Approx(recoil_permeability(l.b_r_prime, test::paper_fit()))
                              .epsilon(1e-6));
    }
}

TEST_CASE("least squares recovers exact generating coefficients [fit]") {
    std::vector<ExtractedRecoilLine> lines;
    for (double br : {0.2, 0.8}) {
        ExtractedRecoilLine l;
        l.b_r_prime = br;
        l.mu_rec = recoil_permeability(br, test::paper_fit());
        lines.push_back(l);
    }
    RecoilFitReport report = fit_recoil_permeability(lines);
    CHECK(report.fit.slope == Approx(0.955).epsilon(1e-12));
    CHECK(report.fit.intercept == Approx(4.69).epsilon(1e-12));
    CHECK(report.residual_rms <= 1e-12);
}

TEST_CASE("degenerate fit inputs are rejected [fit][errors]") {
    std::vector<ExtractedRecoilLine> one(1);
    one[0].b_r_prime = 0.5;
    one[0].mu_rec = 5.0;
    CHECK_THROWS_WITH_AS(fit_recoil_permeability(one), doctest::Contains("at least 2"), TmagError);

    std::vector<ExtractedRecoilLine> same(3);
    for (auto& l : same) {
        l.b_r_prime = 0.5;
        l.mu_rec = 5.0;
    }
    CHECK_THROWS_WITH_AS(fit_recoil_permeability(same), doctest::Contains("identical"), TmagError);
}

TEST_CASE("noisy regression lands within three standard errors [fit][statistics]") {
    // Monte Carlo over seeds: OLS on noisy mu_rec samples around the fit
    const RecoilFit truth = test::paper_fit();
    const double sigma = 0.05;
    int within_slope = 0;
    int within_intercept = 0;
    const int trials = 40;
    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(1000 + trial);
        std::vector<ExtractedRecoilLine> lines;
        double sx = 0.0, sxx = 0.0;
        const int n = 30;
        for (int i = 0; i < n; ++i) {
            double br = 0.1 + 0.9 * i / (n - 1);
            ExtractedRecoilLine l;
            l.b_r_prime = br;
            l.mu_rec = recoil_permeability(br, truth) + rng.gaussian(0.0, sigma);
            lines.push_back(l);
            sx += br;
            sxx += br * br;
        }
        double mean_x = sx / n;
        double sxx_centered = sxx - n * mean_x * mean_x;
        double se_slope = sigma / std::sqrt(sxx_centered);
        double se_intercept = sigma * std::sqrt(1.0 / n + mean_x * mean_x / sxx_centered);

        RecoilFitReport report = fit_recoil_permeability(lines);
        if (std::abs(report.fit.slope - truth.slope) <= 3.0 * se_slope) ++within_slope;
        if (std::abs(report.fit.intercept - truth.intercept) <= 3.0 * se_intercept) {
            ++within_intercept;
        }
    }
    // 3-sigma coverage is ~99.7%; allow a couple of misses out of 40
    CHECK(within_slope >= trials - 2);
    CHECK(within_intercept >= trials - 2);
}

TEST_CASE("full round trip recovers the recoil model within 1% [roundtrip]") {
    RecoilModel model = RecoilModel::linear(test::paper_fit());
    SweepResult sweep = default_sweep(model);
    auto est = estimate_bh_trajectory(sweep.log);
    RecoilExtraction ex = extract_recoil_lines(est);
    RecoilFitReport report = fit_recoil_permeability(ex.lines);
    CHECK(report.fit.slope == Approx(0.955).epsilon(0.01));
    CHECK(report.fit.intercept == Approx(4.69).epsilon(0.01));
}

TEST_CASE("descending branch extraction stays within 1 mT of the loop [roundtrip]") {
    RecoilModel model = RecoilModel::linear(test::paper_fit());
    SweepResult sweep = default_sweep(model);
    auto est = estimate_bh_trajectory(sweep.log);
    auto branch = extract_descending_branch(est);
    REQUIRE(branch.size() > 100);
    const MajorLoop& loop = test::bundled_loop();
    for (const auto& [h, b] : branch) {
        CHECK(std::abs(b - loop.b_at(h)) <= 1e-3);
    }
    // spans both polarities
    CHECK(branch.front().second >= kSaturationFraction * loop.b_sat());
    CHECK(branch.back().second <= -kSaturationFraction * loop.b_sat());
}

TEST_CASE("sweep drive that cannot saturate reports a diagnostic [sweep][errors]") {
    RecoilModel model = RecoilModel::linear(test::paper_fit());
    SweepSettings sweep;
    sweep.excursion_at = {};
    sweep.u_floor = -0.5;  // far too shallow
    SensorModel sensor{};
    Rng rng(12);
    CHECK_THROWS_WITH_AS(run_bh_sweep(test::nominal_params(), test::bundled_loop(), model,
                                      test::nominal_control(), sweep, sensor, rng, 10),
                         doctest::Contains("insufficient"), TmagError);
}

TEST_CASE("measurement log CSV round trip and validation [io]") {
    std::vector<MeasurementSample> samples = {{0.0, 0.1, 0.01}, {0.1, 0.2, 0.02}};
    std::string path = "test_measurement_log.csv";
    MeasurementLog::write_csv(path, samples);
    auto back = MeasurementLog::read_csv(path);
    REQUIRE(back.size() == 2);
    CHECK(back[1].i_c == 0.2);

    MeasurementLog log;
    log.params = test::nominal_params();
    log.samples = {{0.1, 0.0, 0.0}, {0.1, 0.0, 0.0}};  // t not strictly increasing
    CHECK_THROWS_AS(log.validate(), TmagError);
}
