#pragma once

#include <string>
#include <vector>

#include "tmag/characterization.hpp"
#include "tmag/tuning.hpp"

namespace tmag {

/// Trajectory CSV, header "t_s,U_c_V,I_c_A,H_m_A_per_m,B_m_T,B_g_T".
void write_trajectory_csv(const std::string& path, const std::vector<TrajectorySample>& samples);

/// Campaign CSV, header "B_g_set_T,l_g_m,mean_T,MAE_T,precision_3sigma_T,n,errors";
/// the errors column is empty for clean cells.
void write_campaign_csv(const std::string& path, const CampaignStats& stats);

/// Tuning summary as ordered JSON.
void write_tune_summary_json(const std::string& path, const TuningResult& result);

/// Recoil fit report: coefficients, residual RMS, per-loop table.
void write_fit_report_json(const std::string& path, const RecoilFitReport& report);

}  // namespace tmag
