#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "giro/rng.hpp"
#include "giro/sampling.hpp"

namespace giro {

enum class RewardFamily { kBernoulli, kBeta };

/// A stochastic K-armed environment with [0,1]-supported rewards: the ground
/// truth of a simulation. Ties for the best mean resolve to the lowest index.
class BanditInstance {
 public:
  static BanditInstance bernoulli(std::vector<double> means) {
    return BanditInstance(RewardFamily::kBernoulli, std::move(means), 0.0);
  }

  /// Beta(v*mu, v*(1-mu)) rewards; requires v >= 1 and mu in (0, 1).
  static BanditInstance beta(std::vector<double> means, double v) {
    return BanditInstance(RewardFamily::kBeta, std::move(means), v);
  }

  int num_arms() const { return int(means_.size()); }
  double mean(int arm) const { return means_[check_arm(arm)]; }
  double gap(int arm) const { return gaps_[check_arm(arm)]; }
  const std::vector<double>& means() const { return means_; }
  const std::vector<double>& gaps() const { return gaps_; }
  int best_arm() const { return best_arm_; }
  double best_mean() const { return means_[best_arm_]; }
  double max_gap() const {
    return *std::max_element(gaps_.begin(), gaps_.end());
  }
  RewardFamily family() const { return family_; }
  double concentration() const { return v_; }

  double pull(int arm, RngStream& rng) const {
    check_arm(arm);
    const double mu = means_[arm];
    if (family_ == RewardFamily::kBernoulli)
      return rng.bernoulli(mu) ? 1.0 : 0.0;
    return sample_beta(v_ * mu, v_ * (1.0 - mu), rng);
  }

 private:
  BanditInstance(RewardFamily family, std::vector<double> means, double v)
      : family_(family), means_(std::move(means)), v_(v) {
    if (means_.empty())
      throw std::invalid_argument("BanditInstance: no arms");
    for (double mu : means_)
      if (!(mu >= 0.0 && mu <= 1.0))
        throw std::invalid_argument("BanditInstance: mean outside [0,1]");
    if (family_ == RewardFamily::kBeta) {
      if (!(v_ >= 1.0))
        throw std::invalid_argument("BanditInstance: beta concentration < 1");
      for (double mu : means_)
        if (mu == 0.0 || mu == 1.0)
          throw std::invalid_argument(
              "BanditInstance: beta family needs means in (0,1), a shape "
              "parameter would vanish");
    }
    best_arm_ = int(std::max_element(means_.begin(), means_.end()) -
                    means_.begin());  // lowest index wins ties
    gaps_.resize(means_.size());
    for (std::size_t i = 0; i < means_.size(); ++i)
      gaps_[i] = means_[best_arm_] - means_[i];
  }

  int check_arm(int arm) const {
    if (arm < 0 || arm >= int(means_.size()))
      throw std::out_of_range("arm index " + std::to_string(arm) +
                              " outside [0," + std::to_string(means_.size()) +
                              ")");
    return arm;
  }

  RewardFamily family_;
  std::vector<double> means_;
  double v_;
  int best_arm_ = 0;
  std::vector<double> gaps_;
};

/// One simulated round: which arm was pulled, what it paid, and the
/// gap-weighted (pseudo-)regret accumulated so far.
struct RoundLog {
  std::int64_t round = 0;  // 1-based
  int pulled = 0;
  double reward = 0.0;
  double cumulative_regret = 0.0;
};

/// Recomputes the cumulative pseudo-regret curve from the pull sequence.
/// Rounds must be contiguous 1..n.
inline std::vector<double> regret_curve(const BanditInstance& env,
                                        std::span<const RoundLog> log) {
  std::vector<double> curve;
  curve.reserve(log.size());
  double total = 0.0;
  std::int64_t expected_round = 1;
  for (const RoundLog& entry : log) {
    if (entry.round != expected_round)
      throw std::runtime_error("regret_curve: rounds not contiguous at t=" +
                               std::to_string(expected_round));
    ++expected_round;
    total += env.gap(entry.pulled);
    curve.push_back(total);
  }
  return curve;
}

}  // namespace giro
