#pragma once

#include <array>
#include <vector>

#include <nlohmann/json.hpp>

#include "adaptthink/rng.hpp"
#include "adaptthink/types.hpp"

namespace adaptthink {

/// Ordered collection of problems with per-level counts. Ids are assigned
/// 0..total-1 in level-major order, so construction is fully determined by
/// the counts.
class ProblemBank {
 public:
  static ProblemBank make(const std::array<int, kNumLevels>& counts_per_level,
                          std::uint64_t seed);

  const std::vector<Problem>& problems() const { return problems_; }
  const std::array<int, kNumLevels>& counts_per_level() const {
    return counts_;
  }
  int size() const { return static_cast<int>(problems_.size()); }

 private:
  ProblemBank() = default;
  std::vector<Problem> problems_;
  std::array<int, kNumLevels> counts_{};
};

/// Parametric solve-rate model: per (level, mode) an asymptotic cap and the
/// body length at which half of the cap is reached, plus a global token
/// budget past which responses are truncated.
struct AccuracyProfile {
  // Indexed [mode][level-1], mode order: thinking, nothinking.
  std::array<std::array<double, kNumLevels>, kNumModes> cap{};
  std::array<std::array<double, kNumLevels>, kNumModes> halflife{};
  int length_budget = 256;

  static AccuracyProfile defaults();
  void validate() const;
};

void to_json(nlohmann::json& j, const AccuracyProfile& p);
void from_json(const nlohmann::json& j, AccuracyProfile& p);

struct RewardOutcome {
  int reward = 0;  // 0 or 1
  bool truncated = false;
  double success_prob_used = 0.0;
};

ProblemBank make_bank(const std::array<int, kNumLevels>& counts_per_level,
                      std::uint64_t seed);

/// cap * (1 - 2^(-body_len / halflife)); non-decreasing in body_len and
/// bounded by the cap.
double success_prob(const AccuracyProfile& profile, int level,
                    ThinkingMode mode, int body_len);

/// Scores one response: zero reward when the total length exceeds the
/// budget, otherwise a Bernoulli draw at the profile's success probability.
RewardOutcome score(const AccuracyProfile& profile, const Problem& problem,
                    const Response& response, RngStream& reward_rng);

}  // namespace adaptthink
