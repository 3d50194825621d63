#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tmag/common.hpp"

namespace tmag {

struct BhSample {
    double h;  // A/m
    double b;  // T
};

/// Sampled descending branch of the major BH loop, ordered by decreasing H
/// from positive saturation to negative saturation. Interpolation is
/// monotone piecewise-linear; exact at sample points.
class MajorLoop {
public:
    /// Build from samples ordered by strictly decreasing H. Rejects
    /// non-monotone H, increasing B, or a branch that never reaches B <= 0
    /// at negative H.
    static MajorLoop from_samples(std::vector<BhSample> descending);

    /// Strict CSV load; header must be exactly "H_A_per_m,B_T".
    static MajorLoop from_csv_file(const std::string& path);

    /// B on the descending branch. Throws a range error outside the sampled
    /// interval, naming the valid range.
    double b_at(double h) const;

    /// One-sided differential slope dB/dH [T/(A/m)] at h. direction < 0
    /// selects the segment to the left of a sample point, direction > 0 the
    /// one to the right; interior points ignore direction.
    double slope_at(double h, int direction) const;

    double b_sat() const { return b_sat_; }
    double h_sat() const { return h_sat_; }
    double remanence() const { return b_at(0.0); }
    double h_min() const { return samples_.front().h; }
    double h_max() const { return samples_.back().h; }
    std::size_t size() const { return samples_.size(); }

    /// Samples in ascending-H order (reversed from the file order).
    const std::vector<BhSample>& ascending_samples() const { return samples_; }

private:
    MajorLoop() = default;
    std::size_t segment_index(double h) const;

    std::vector<BhSample> samples_;  // ascending H
    double b_sat_ = 0.0;
    double h_sat_ = 0.0;
};

/// Linear recoil-permeability fit mu_rec = slope * B_r' + intercept.
struct RecoilFit {
    double slope = 0.0;      // 1/T
    double intercept = 0.0;  // dimensionless
};

/// mu_rec for a given recoil-line remanence under a linear fit.
double recoil_permeability(double b_r_prime, const RecoilFit& fit);

/// Recoil-permeability model used by the plant: either the linear fit or an
/// interpolated (B_r', mu_rec) table for mismatch experiments.
class RecoilModel {
public:
    static RecoilModel linear(RecoilFit fit);
    static RecoilModel table(std::vector<std::pair<double, double>> br_to_mu);

    double mu_at(double b_r_prime) const;

    /// Remanence of the recoil line passing through (h, b), solved
    /// self-consistently with mu_at. Linear models solve in closed form;
    /// tables fall back to a bracketed root find.
    double implied_remanence(double h, double b) const;

    bool is_linear() const { return table_.empty(); }
    const RecoilFit& fit() const { return fit_; }

private:
    RecoilFit fit_{};
    std::vector<std::pair<double, double>> table_;  // sorted by B_r'
};

/// A recoil line B(H) = B_r' + mu_rec * mu0 * H with its corner point on the
/// major descending branch.
struct RecoilLine {
    double b_r_prime = 0.0;
    double mu_rec = 0.0;
    double corner_h = 0.0;
    double corner_b = 0.0;

    double b_at(double h) const { return b_r_prime + mu_rec * kMu0 * h; }
    double slope() const { return mu_rec * kMu0; }
};

/// Intersection of a recoil line with the major descending branch, searched
/// from H = 0 toward negative H (the demagnetization corner). Bracketed
/// bisection to |line - branch| <= 1e-9 T.
std::pair<double, double> corner_point(const MajorLoop& loop, double b_r_prime, double mu_rec);

/// corner_point packaged as a RecoilLine.
RecoilLine make_recoil_line(const MajorLoop& loop, double b_r_prime, double mu_rec);

enum class MagnetMode { OnMajorDescending, OnRecoilLine };

/// Where the magnet currently lives: on the major descending branch or on a
/// specific recoil line, with the current operating point.
struct MagnetState {
    MagnetMode mode = MagnetMode::OnMajorDescending;
    std::optional<RecoilLine> recoil;  // present iff mode == OnRecoilLine
    double h_m = 0.0;
    double b_m = 0.0;

    static MagnetState on_branch(const MajorLoop& loop, double h);
    static MagnetState on_line(const RecoilLine& line, double h);
};

/// State-dependent magnetization path B(H): the branch below the pivot
/// (corner or current point), and min(recoil line, branch) above it. The
/// rising line for a branch state is spawned at the current point with a
/// model-consistent mu_rec.
class Characteristic {
public:
    Characteristic(const MajorLoop& loop, const RecoilModel& model, const MagnetState& state);

    double b_at(double h) const;
    double slope_at(double h, int direction) const;

    double pivot_h() const { return pivot_h_; }
    const RecoilLine& rising_line() const { return line_; }

private:
    const MajorLoop& loop_;
    RecoilLine line_;
    double pivot_h_;
};

/// Hysteresis state transition to a new field value. Moving down the branch
/// demagnetizes; moving up from the branch spawns a recoil line; recoil
/// motion is reversible between the corner and the branch re-join; dropping
/// below the corner abandons the line and rejoins the branch.
MagnetState apply_h(const MagnetState& state, const MajorLoop& loop, const RecoilModel& model,
                    double h_new);

}  // namespace tmag
