#include "tmag/reports.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace tmag {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw TmagError("cannot write file: " + path);
    return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const std::vector<TrajectorySample>& samples) {
    std::ofstream out = open_out(path);
    out << "t_s,U_c_V,I_c_A,H_m_A_per_m,B_m_T,B_g_T\n";
    char buf[192];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", s.t, s.u_c, s.i_c,
                      s.h_m, s.b_m, s.b_g);
        out << buf;
    }
}

void write_campaign_csv(const std::string& path, const CampaignStats& stats) {
    std::ofstream out = open_out(path);
    out << "B_g_set_T,l_g_m,mean_T,MAE_T,precision_3sigma_T,n,errors\n";
    char buf[256];
    for (const auto& c : stats.cells) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%d,", c.b_g_set, c.l_g,
                      c.mean, c.mae, c.precision_3sigma, c.n);
        out << buf;
        for (char ch : c.error) out << (ch == ',' || ch == '\n' ? ';' : ch);
        out << "\n";
    }
}

void write_tune_summary_json(const std::string& path, const TuningResult& result) {
    nlohmann::ordered_json j;
    j["B_g_set_T"] = result.b_g_set;
    j["l_g_m"] = result.l_g;
    j["final_B_g_T"] = result.final_b_g;
    j["error_T"] = result.error;
    j["saturated"] = result.saturated;
    j["duration_s"] = result.duration;
    j["min_B_g_minus_ref_T"] = result.min_b_g_minus_ref;
    j["prediction"] = {{"B_o_T", result.prediction.b_o},
                       {"H_o_A_per_m", result.prediction.h_o},
                       {"B_r_prime_T", result.prediction.b_r_prime},
                       {"mu_rec", result.prediction.mu_rec},
                       {"corner_H_A_per_m", result.prediction.corner_h},
                       {"corner_B_T", result.prediction.corner_b}};
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
}

void write_fit_report_json(const std::string& path, const RecoilFitReport& report) {
    nlohmann::ordered_json j;
    j["slope_per_T"] = report.fit.slope;
    j["intercept"] = report.fit.intercept;
    j["residual_rms"] = report.residual_rms;
    nlohmann::ordered_json loops = nlohmann::ordered_json::array();
    for (const auto& l : report.lines) {
        loops.push_back({{"B_r_prime_T", l.b_r_prime},
                         {"mu_rec", l.mu_rec},
                         {"corner_lo_H_A_per_m", l.corner_lo_h},
                         {"corner_lo_B_T", l.corner_lo_b},
                         {"corner_hi_H_A_per_m", l.corner_hi_h},
                         {"corner_hi_B_T", l.corner_hi_b}});
    }
    j["recoil_loops"] = loops;
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
}

}  // namespace tmag
