#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adaptthink/policy.hpp"
#include "adaptthink/synthenv.hpp"

namespace adaptthink {

/// Distribution the rollout batch is drawn from. ImportanceSampling forces
/// an even Thinking/NoThinking split at the first token (probability 0.5
/// each) and follows the old policy afterwards; OnPolicy draws unforced
/// trajectories from the old policy.
enum class SamplerKind { ImportanceSampling, OnPolicy };

const char* to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& name);

/// Per-problem mean reward of the frozen reference policy, estimated by
/// pre-sampling K responses before training starts.
struct RefRewardTable {
  std::map<int, double> mean_reward;  // keyed by problem id
  int K_used = 0;

  double at(int problem_id) const;  // throws if the problem was not presampled
};

void to_json(nlohmann::json& j, const RefRewardTable& t);
void from_json(const nlohmann::json& j, RefRewardTable& t);

struct TrainConfig {
  int K = 16;              // rollouts per problem per step
  double delta = 0.05;     // bonus for choosing NoThinking
  double epsilon = 0.2;    // clip radius
  // Plain gradient-descent step size. The mode gate's gradient is damped by
  // the gate probability itself (both the score and the importance weight
  // scale with it), so escaping the strong initial Thinking preference
  // within a few hundred steps needs a step size of this magnitude.
  double lr = 8.0;
  int batch_size = 32;     // problems per step
  int steps = 500;
  std::uint64_t seed = 1;
  SamplerKind sampler = SamplerKind::ImportanceSampling;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct RolloutSample {
  Problem problem;
  Response response;
  int reward = 0;
  double logp_sampler = 0.0;  // log-prob under the distribution that drew it
  double advantage = 0.0;
};

struct StepReport {
  int step = 0;
  double loss = 0.0;
  std::optional<double> mean_adv_think;
  std::optional<double> mean_adv_nothink;
  double nothink_ratio = 0.0;
  double mean_total_len = 0.0;
  double train_accuracy = 0.0;
  double clip_fraction = 0.0;
};

bool operator==(const StepReport& a, const StepReport& b);

void to_json(nlohmann::json& j, const StepReport& r);
void from_json(const nlohmann::json& j, StepReport& r);

/// Draws K responses per problem from the reference policy, scores them and
/// stores the per-problem mean reward. Deterministic given the stream state;
/// per-problem child streams keep the result independent of worker count.
RefRewardTable presample_ref_rewards(const PolicyParams& ref_policy,
                                     const ProblemBank& bank,
                                     const AccuracyProfile& profile, int K,
                                     RngStream& rng, int workers = 1);

/// Presamples with the stream derivation train() uses internally, so a table
/// exported here matches the one train() computes for the same config.
RefRewardTable presample_for_config(const PolicyParams& ref_policy,
                                    const ProblemBank& bank,
                                    const AccuracyProfile& profile,
                                    const TrainConfig& config,
                                    int workers = 1);

/// delta * [mode == NoThinking] + reward - ref_mean.
double advantage(const Response& response, int reward, double ref_mean,
                 double delta);

/// Log probability of the response under the importance-sampling
/// distribution: exactly log(0.5) at the first position, the old policy
/// afterwards.
double is_log_prob(const PolicyParams& old_policy, const Problem& problem,
                   const Response& response);

/// Rolls out config.K responses per problem, scores them and fills
/// advantages from the reference table. Throws if a problem is missing from
/// the table ("presample required").
std::vector<RolloutSample> sample_batch(const PolicyParams& old_policy,
                                        std::span<const Problem> problems,
                                        const AccuracyProfile& profile,
                                        const RefRewardTable& ref_table,
                                        const TrainConfig& config,
                                        RngStream& rng);

struct SurrogateResult {
  double loss = 0.0;
  GradVector grad;
  double clip_fraction = 0.0;
};

/// Clipped surrogate loss over the batch:
///   loss = -mean_i min(r_i A_i, clip(r_i, 1-eps, 1+eps) A_i),
///   r_i = exp(log_prob(policy, y_i) - logp_sampler_i).
/// The gradient is exact, with the convention that a sample whose clipped
/// branch is selected by the min contributes zero (ties go to the unclipped
/// branch). Throws on non-finite ratios, naming the offending sample.
SurrogateResult surrogate_loss_and_grad(const PolicyParams& policy,
                                        std::span<const RolloutSample> batch,
                                        double epsilon);

/// True iff mean_r_nothink + delta strictly exceeds both the reference mean
/// and mean_r_think; the regime in which the loss favors NoThinking.
bool mode_preference_condition(double mean_r_nothink, double mean_r_think,
                               double ref_mean, double delta);

/// Empirical mean advantage per mode; a mean is absent when the batch holds
/// no sample of that mode.
std::pair<std::optional<double>, std::optional<double>> mean_mode_advantages(
    std::span<const RolloutSample> batch);  // (think, nothink)

struct TrainResult {
  PolicyParams policy;
  std::vector<StepReport> history;
  RefRewardTable ref_table;
};

/// Called after each parameter update with the post-update policy.
using StepObserver =
    std::function<void(int step, const PolicyParams&, const StepReport&)>;

/// Full training loop: presample the reference table with the initial policy
/// as the frozen reference, then per step snapshot the old policy, roll out
/// a batch (problems drawn without replacement within an epoch, reshuffled
/// per epoch) and take one gradient-descent step on the surrogate loss.
/// Bit-reproducible for a fixed config.
TrainResult train(const PolicyParams& init, const ProblemBank& bank,
                  const AccuracyProfile& profile, const TrainConfig& config,
                  int workers = 1, const StepObserver& observer = {});

}  // namespace adaptthink
