#pragma once

#include <array>
#include <optional>
#include <string>

#include "adaptthink/metrics.hpp"
#include "adaptthink/synthenv.hpp"
#include "adaptthink/trainer.hpp"

namespace adaptthink::cli {

struct BankSpec {
  std::array<int, kNumLevels> counts_per_level{50, 50, 50, 50, 50};
  std::uint64_t seed = 0;
};

struct EvalSpec {
  int samples = 16;
  std::uint64_t seed = 10007;
};

/// Top-level experiment document consumed by --config. All keys are
/// optional; omitted sections fall back to the defaults below.
///
/// {
///   "train":   { TrainConfig fields },
///   "bank":    { "counts_per_level": [..5 ints..], "seed": n },
///   "profile": "path/to/profile.json",
///   "policy":  { PolicyParams fields },
///   "eval":    { "samples": n, "seed": n }
/// }
struct ExperimentConfig {
  TrainConfig train;
  BankSpec bank;
  std::optional<std::string> profile_path;
  PolicyParams policy_init = PolicyParams::defaults();
  EvalSpec eval;

  static ExperimentConfig load(const std::string& path);

  /// Flag path wins over the config's profile path; otherwise the embedded
  /// default profile.
  AccuracyProfile resolve_profile(
      const std::optional<std::string>& flag_path) const;

  ProblemBank make_bank() const;
};

std::vector<double> parse_double_list(const std::string& csv);
std::vector<std::string> parse_string_list(const std::string& csv);

}  // namespace adaptthink::cli
