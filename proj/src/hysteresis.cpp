#include "tmag/hysteresis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tmag {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

MajorLoop MajorLoop::from_samples(std::vector<BhSample> descending) {
    if (descending.size() < 2) {
        throw TmagError("major loop needs at least 2 samples, got " +
                        std::to_string(descending.size()));
    }
    for (std::size_t i = 1; i < descending.size(); ++i) {
        if (!(descending[i].h < descending[i - 1].h)) {
            throw TmagError("major loop H must be strictly decreasing (row " +
                            std::to_string(i) + ": H=" + fmt(descending[i].h) +
                            " after H=" + fmt(descending[i - 1].h) + ")");
        }
        if (descending[i].b > descending[i - 1].b) {
            throw TmagError("major loop B must be non-increasing along the branch (row " +
                            std::to_string(i) + ")");
        }
        if (!std::isfinite(descending[i].h) || !std::isfinite(descending[i].b)) {
            throw TmagError("major loop sample " + std::to_string(i) + " is not finite");
        }
    }

    MajorLoop loop;
    loop.b_sat_ = descending.front().b;
    loop.h_sat_ = std::abs(descending.front().h);
    std::reverse(descending.begin(), descending.end());
    loop.samples_ = std::move(descending);

    bool crosses_zero = false;
    for (const auto& s : loop.samples_) {
        if (s.h < 0.0 && s.b <= 0.0) {
            crosses_zero = true;
            break;
        }
    }
    if (!crosses_zero) {
        throw TmagError("major loop descending branch never reaches B <= 0 at H < 0 "
                        "(no coercive point in sampled range)");
    }
    return loop;
}

MajorLoop MajorLoop::from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TmagError("cannot open BH dataset: " + path);

    std::string line;
    if (!std::getline(in, line)) throw TmagError("empty BH dataset: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "H_A_per_m,B_T") {
        throw TmagError("BH dataset header must be \"H_A_per_m,B_T\", got \"" + line + "\" in " +
                        path);
    }

    std::vector<BhSample> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw TmagError("BH dataset line " + std::to_string(line_no) + " is not \"H,B\"");
        }
        try {
            std::size_t used_h = 0;
            std::size_t used_b = 0;
            double h = std::stod(line.substr(0, comma), &used_h);
            double b = std::stod(line.substr(comma + 1), &used_b);
            if (used_h != comma || used_b != line.size() - comma - 1) {
                throw std::invalid_argument("trailing characters");
            }
            rows.push_back({h, b});
        } catch (const std::exception&) {
            throw TmagError("BH dataset line " + std::to_string(line_no) + " does not parse: \"" +
                            line + "\"");
        }
    }
    return from_samples(std::move(rows));
}

std::size_t MajorLoop::segment_index(double h) const {
    // index i such that samples_[i].h <= h <= samples_[i+1].h
    auto it = std::upper_bound(samples_.begin(), samples_.end(), h,
                               [](double v, const BhSample& s) { return v < s.h; });
    std::size_t i = static_cast<std::size_t>(it - samples_.begin());
    if (i == 0) return 0;
    if (i >= samples_.size()) return samples_.size() - 2;
    return i - 1;
}

double MajorLoop::b_at(double h) const {
    if (h < h_min() || h > h_max()) {
        throw TmagError("H = " + fmt(h) + " A/m outside sampled branch range [" + fmt(h_min()) +
                        ", " + fmt(h_max()) + "] A/m");
    }
    std::size_t i = segment_index(h);
    const BhSample& a = samples_[i];
    const BhSample& b = samples_[i + 1];
    if (h == a.h) return a.b;
    if (h == b.h) return b.b;
    double t = (h - a.h) / (b.h - a.h);
    return a.b + t * (b.b - a.b);
}

double MajorLoop::slope_at(double h, int direction) const {
    if (h < h_min() || h > h_max()) {
        throw TmagError("H = " + fmt(h) + " A/m outside sampled branch range [" + fmt(h_min()) +
                        ", " + fmt(h_max()) + "] A/m");
    }
    std::size_t i = segment_index(h);
    // At an interior sample point the two adjacent segments disagree; pick
    // the one matching the direction of motion.
    if (h == samples_[i].h && direction < 0 && i > 0) --i;
    if (h == samples_[i + 1].h && direction > 0 && i + 2 < samples_.size()) ++i;
    const BhSample& a = samples_[i];
    const BhSample& b = samples_[i + 1];
    return (b.b - a.b) / (b.h - a.h);
}

double recoil_permeability(double b_r_prime, const RecoilFit& fit) {
    return fit.slope * b_r_prime + fit.intercept;
}

RecoilModel RecoilModel::linear(RecoilFit fit) {
    RecoilModel m;
    m.fit_ = fit;
    return m;
}

RecoilModel RecoilModel::table(std::vector<std::pair<double, double>> br_to_mu) {
    if (br_to_mu.size() < 2) throw TmagError("recoil table needs at least 2 entries");
    std::sort(br_to_mu.begin(), br_to_mu.end());
    for (std::size_t i = 1; i < br_to_mu.size(); ++i) {
        if (br_to_mu[i].first == br_to_mu[i - 1].first) {
            throw TmagError("recoil table has duplicate B_r' = " + fmt(br_to_mu[i].first));
        }
    }
    for (const auto& [br, mu] : br_to_mu) {
        if (!(mu > 0.0)) throw TmagError("recoil table mu_rec must be > 0 at B_r' = " + fmt(br));
    }
    RecoilModel m;
    m.table_ = std::move(br_to_mu);
    return m;
}

double RecoilModel::mu_at(double b_r_prime) const {
    if (table_.empty()) return recoil_permeability(b_r_prime, fit_);
    if (b_r_prime <= table_.front().first) return table_.front().second;
    if (b_r_prime >= table_.back().first) return table_.back().second;
    auto it = std::upper_bound(table_.begin(), table_.end(),
                               std::make_pair(b_r_prime, -1e300));
    const auto& [h1, m1] = *(it - 1);
    const auto& [h2, m2] = *it;
    double t = (b_r_prime - h1) / (h2 - h1);
    return m1 + t * (m2 - m1);
}

double RecoilModel::implied_remanence(double h, double b) const {
    // Solve x = b - mu(x) * mu0 * h for the line's remanence x.
    if (table_.empty()) {
        double denom = 1.0 + fit_.slope * kMu0 * h;
        if (std::abs(denom) < 1e-9) {
            throw TmagError("singular recoil-line spawn: 1 + slope*mu0*H = " + fmt(denom) +
                            " at H = " + fmt(h));
        }
        return (b - fit_.intercept * kMu0 * h) / denom;
    }
    auto g = [&](double x) { return x - (b - mu_at(x) * kMu0 * h); };
    double lo = -5.0, hi = 5.0;
    double glo = g(lo), ghi = g(hi);
    if (glo > 0.0 || ghi < 0.0) {
        throw TmagError("recoil-line spawn did not bracket at (H=" + fmt(h) + ", B=" + fmt(b) + ")");
    }
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double gm = g(mid);
        if (std::abs(gm) <= 1e-12) return mid;
        if (gm < 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::pair<double, double> corner_point(const MajorLoop& loop, double b_r_prime, double mu_rec) {
    auto line_b = [&](double h) { return b_r_prime + mu_rec * kMu0 * h; };
    auto diff = [&](double h) { return line_b(h) - loop.b_at(h); };

    if (loop.h_min() >= 0.0) {
        throw TmagError("recoil line does not intersect major branch: branch has no H < 0 samples");
    }
    const double h_top = std::min(0.0, loop.h_max());

    // Walk branch segments from H = 0 toward negative H and bracket the
    // first sign change; the line sits below the branch above the corner.
    double h_hi = h_top;
    double d_hi = diff(h_hi);
    if (std::abs(d_hi) <= 1e-9) return {h_hi, loop.b_at(h_hi)};

    const auto& samples = loop.ascending_samples();
    // first sample index at or below h_top, walking down
    std::ptrdiff_t idx = 0;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(samples.size()) - 1; i >= 0; --i) {
        if (samples[static_cast<std::size_t>(i)].h < h_top) {
            idx = i;
            break;
        }
    }

    double h_lo = h_hi;
    double d_lo = d_hi;
    bool bracketed = false;
    for (std::ptrdiff_t i = idx; i >= 0; --i) {
        double h = samples[static_cast<std::size_t>(i)].h;
        double d = diff(h);
        if (std::abs(d) <= 1e-9) return {h, loop.b_at(h)};
        if ((d > 0.0) != (d_hi > 0.0)) {
            h_lo = h;
            d_lo = d;
            bracketed = true;
            break;
        }
        h_hi = h;
        d_hi = d;
    }
    if (!bracketed) {
        throw TmagError("recoil line does not intersect major branch (B_r' = " + std::to_string(
                            b_r_prime) + ", mu_rec = " + std::to_string(mu_rec) + ")");
    }

    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (h_lo + h_hi);
        double d = diff(mid);
        if (std::abs(d) <= 1e-9) return {mid, loop.b_at(mid)};
        if ((d > 0.0) == (d_lo > 0.0)) {
            h_lo = mid;
            d_lo = d;
        } else {
            h_hi = mid;
        }
    }
    double h = 0.5 * (h_lo + h_hi);
    return {h, loop.b_at(h)};
}

RecoilLine make_recoil_line(const MajorLoop& loop, double b_r_prime, double mu_rec) {
    auto [ch, cb] = corner_point(loop, b_r_prime, mu_rec);
    return RecoilLine{b_r_prime, mu_rec, ch, cb};
}

MagnetState MagnetState::on_branch(const MajorLoop& loop, double h) {
    return MagnetState{MagnetMode::OnMajorDescending, std::nullopt, h, loop.b_at(h)};
}

MagnetState MagnetState::on_line(const RecoilLine& line, double h) {
    return MagnetState{MagnetMode::OnRecoilLine, line, h, line.b_at(h)};
}

Characteristic::Characteristic(const MajorLoop& loop, const RecoilModel& model,
                               const MagnetState& state)
    : loop_(loop) {
    if (state.mode == MagnetMode::OnRecoilLine) {
        line_ = *state.recoil;
        pivot_h_ = line_.corner_h;
    } else {
        // Rising from the branch spawns a recoil line cornered at the
        // current point; used only for H above the pivot.
        double br = model.implied_remanence(state.h_m, state.b_m);
        line_ = RecoilLine{br, model.mu_at(br), state.h_m, state.b_m};
        pivot_h_ = state.h_m;
    }
}

double Characteristic::b_at(double h) const {
    if (h < pivot_h_) return loop_.b_at(h);
    return std::min(line_.b_at(h), loop_.b_at(h));
}

double Characteristic::slope_at(double h, int direction) const {
    if (h < pivot_h_ || (h == pivot_h_ && direction < 0)) return loop_.slope_at(h, direction);
    if (line_.b_at(h) <= loop_.b_at(h)) return line_.slope();
    return loop_.slope_at(h, direction);
}

MagnetState apply_h(const MagnetState& state, const MajorLoop& loop, const RecoilModel& model,
                    double h_new) {
    if (h_new < loop.h_min() || h_new > loop.h_max()) {
        throw TmagError("apply_h: H = " + std::to_string(h_new) + " A/m outside sampled range [" +
                        std::to_string(loop.h_min()) + ", " + std::to_string(loop.h_max()) + "]");
    }
    if (h_new == state.h_m) return state;

    if (state.mode == MagnetMode::OnRecoilLine) {
        const RecoilLine& line = *state.recoil;
        if (h_new < line.corner_h) {
            // rule (d): drop below the corner, rejoin the branch
            return MagnetState::on_branch(loop, h_new);
        }
        // rule (c): reversible motion along the line; the branch caps it
        double lb = line.b_at(h_new);
        double bb = loop.b_at(h_new);
        if (lb >= bb) return MagnetState::on_branch(loop, h_new);
        return MagnetState::on_line(line, h_new);
    }

    if (h_new < state.h_m) {
        // rule (a): further demagnetization along the branch
        return MagnetState::on_branch(loop, h_new);
    }
    // rule (b): spawn a recoil line cornered at the current point
    Characteristic ch(loop, model, state);
    const RecoilLine& line = ch.rising_line();
    double lb = line.b_at(h_new);
    double bb = loop.b_at(h_new);
    if (lb >= bb) return MagnetState::on_branch(loop, h_new);
    return MagnetState::on_line(line, h_new);
}

}  // namespace tmag
