#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "adaptthink/policy.hpp"
#include "adaptthink/synthenv.hpp"

namespace adaptthink {

struct LevelStats {
  int level = 1;
  double accuracy = 0.0;
  double mean_len = 0.0;
  double nothink_ratio = 0.0;
};

struct EvalReport {
  double accuracy = 0.0;
  double mean_total_len = 0.0;
  double nothink_ratio = 0.0;
  std::vector<LevelStats> per_level;  // levels present in the bank only
  int n_samples_per_problem = 0;
};

struct DeltaReport {
  double delta_acc = 0.0;
  double delta_length_rate = 0.0;  // negative means shorter than reference
};

void to_json(nlohmann::json& j, const LevelStats& s);
void from_json(const nlohmann::json& j, LevelStats& s);
void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);
void to_json(nlohmann::json& j, const DeltaReport& r);
void from_json(const nlohmann::json& j, DeltaReport& r);

/// Draws n_samples unforced responses per problem, scores them and
/// aggregates overall and per level. Deterministic given the stream.
EvalReport evaluate(const PolicyParams& policy, const ProblemBank& bank,
                    const AccuracyProfile& profile, int n_samples,
                    RngStream& rng, int workers = 1);

/// Fraction of n mode-forced responses that score 1 on one problem.
double pass_rate(const PolicyParams& policy, const Problem& problem,
                 const AccuracyProfile& profile, int n, ThinkingMode mode,
                 RngStream& rng);

DeltaReport delta_metrics(double acc, double mean_len, double ref_acc,
                          double ref_mean_len);
DeltaReport delta_metrics(const EvalReport& report,
                          const EvalReport& reference);

}  // namespace adaptthink
