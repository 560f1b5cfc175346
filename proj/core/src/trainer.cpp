#include "adaptthink/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "adaptthink/math.hpp"
#include "adaptthink/parallel.hpp"

namespace adaptthink {

namespace {

constexpr std::uint64_t kPresampleTag = 0xA11CE;
constexpr std::uint64_t kShuffleTag = 0x5F0FFEE;
constexpr std::uint64_t kStepTag = 0xBA7C4;

const double kLogHalf = std::log(0.5);

/// Unbiased integer in [0, n) via rejection; avoids the implementation-
/// defined draw sequence of std::uniform_int_distribution.
std::uint64_t unbiased_below(RngStream& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

void fisher_yates(std::vector<int>& idx, RngStream& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j =
        static_cast<std::size_t>(unbiased_below(rng, static_cast<std::uint64_t>(i)));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

const char* to_string(SamplerKind kind) {
  return kind == SamplerKind::OnPolicy ? "on_policy" : "importance_sampling";
}

SamplerKind sampler_kind_from_string(const std::string& name) {
  if (name == "importance_sampling") return SamplerKind::ImportanceSampling;
  if (name == "on_policy") return SamplerKind::OnPolicy;
  throw std::invalid_argument("unknown sampler kind: " + name);
}

double RefRewardTable::at(int problem_id) const {
  const auto it = mean_reward.find(problem_id);
  if (it == mean_reward.end())
    throw std::runtime_error("presample required: no reference reward for problem " +
                             std::to_string(problem_id));
  return it->second;
}

void to_json(nlohmann::json& j, const RefRewardTable& t) {
  nlohmann::json rewards = nlohmann::json::object();
  for (const auto& [id, v] : t.mean_reward) rewards[std::to_string(id)] = v;
  j = nlohmann::json{{"K_used", t.K_used}, {"mean_reward", std::move(rewards)}};
}

void from_json(const nlohmann::json& j, RefRewardTable& t) {
  t.mean_reward.clear();
  j.at("K_used").get_to(t.K_used);
  for (const auto& [key, v] : j.at("mean_reward").items())
    t.mean_reward[std::stoi(key)] = v.get<double>();
}

void TrainConfig::validate() const {
  if (sampler == SamplerKind::ImportanceSampling) {
    if (K < 2 || K % 2 != 0)
      throw std::invalid_argument(
          "K must be even and >= 2 for importance sampling");
  } else if (K < 1) {
    throw std::invalid_argument("K must be >= 1");
  }
  if (delta < 0.0) throw std::invalid_argument("delta must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (lr < 0.0) throw std::invalid_argument("lr must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"K", c.K},
                     {"delta", c.delta},
                     {"epsilon", c.epsilon},
                     {"lr", c.lr},
                     {"batch_size", c.batch_size},
                     {"steps", c.steps},
                     {"seed", c.seed},
                     {"sampler", to_string(c.sampler)}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  j.at("K").get_to(c.K);
  j.at("delta").get_to(c.delta);
  j.at("epsilon").get_to(c.epsilon);
  j.at("lr").get_to(c.lr);
  j.at("batch_size").get_to(c.batch_size);
  j.at("steps").get_to(c.steps);
  j.at("seed").get_to(c.seed);
  c.sampler = sampler_kind_from_string(j.at("sampler").get<std::string>());
  c.validate();
}

bool operator==(const StepReport& a, const StepReport& b) {
  return a.step == b.step && a.loss == b.loss &&
         a.mean_adv_think == b.mean_adv_think &&
         a.mean_adv_nothink == b.mean_adv_nothink &&
         a.nothink_ratio == b.nothink_ratio &&
         a.mean_total_len == b.mean_total_len &&
         a.train_accuracy == b.train_accuracy &&
         a.clip_fraction == b.clip_fraction;
}

namespace {

nlohmann::json optional_to_json(const std::optional<double>& v) {
  if (v.has_value()) return *v;
  return nullptr;
}

std::optional<double> optional_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const StepReport& r) {
  j = nlohmann::json{{"step", r.step},
                     {"loss", r.loss},
                     {"mean_adv_think", optional_to_json(r.mean_adv_think)},
                     {"mean_adv_nothink", optional_to_json(r.mean_adv_nothink)},
                     {"nothink_ratio", r.nothink_ratio},
                     {"mean_total_len", r.mean_total_len},
                     {"train_accuracy", r.train_accuracy},
                     {"clip_fraction", r.clip_fraction}};
}

void from_json(const nlohmann::json& j, StepReport& r) {
  j.at("step").get_to(r.step);
  j.at("loss").get_to(r.loss);
  r.mean_adv_think = optional_from_json(j.at("mean_adv_think"));
  r.mean_adv_nothink = optional_from_json(j.at("mean_adv_nothink"));
  j.at("nothink_ratio").get_to(r.nothink_ratio);
  j.at("mean_total_len").get_to(r.mean_total_len);
  j.at("train_accuracy").get_to(r.train_accuracy);
  j.at("clip_fraction").get_to(r.clip_fraction);
}

RefRewardTable presample_ref_rewards(const PolicyParams& ref_policy,
                                     const ProblemBank& bank,
                                     const AccuracyProfile& profile, int K,
                                     RngStream& rng, int workers) {
  if (K < 1) throw std::invalid_argument("presample K must be >= 1");
  if (bank.size() == 0) throw std::invalid_argument("empty bank");
  ref_policy.validate();
  profile.validate();

  const auto& problems = bank.problems();
  // Child seeds are drawn in bank order up front so the result does not
  // depend on the worker count.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> seeds;
  seeds.reserve(problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const std::uint64_t a = rng();
    const std::uint64_t b = rng();
    seeds.emplace_back(a, b);
  }

  std::vector<double> means(problems.size(), 0.0);
  parallel_for_indexed(problems.size(), workers, [&](std::size_t i) {
    RngStream policy_stream(seeds[i].first);
    RngStream reward_stream(seeds[i].second);
    int total = 0;
    for (int k = 0; k < K; ++k) {
      const Response resp =
          sample_response(ref_policy, problems[i], std::nullopt, policy_stream);
      total += score(profile, problems[i], resp, reward_stream).reward;
    }
    means[i] = static_cast<double>(total) / K;
  });

  RefRewardTable table;
  table.K_used = K;
  for (std::size_t i = 0; i < problems.size(); ++i)
    table.mean_reward[problems[i].id] = means[i];
  return table;
}

RefRewardTable presample_for_config(const PolicyParams& ref_policy,
                                    const ProblemBank& bank,
                                    const AccuracyProfile& profile,
                                    const TrainConfig& config, int workers) {
  config.validate();
  RngStream stream = make_stream(config.seed, {kPresampleTag});
  return presample_ref_rewards(ref_policy, bank, profile, config.K, stream,
                               workers);
}

double advantage(const Response& response, int reward, double ref_mean,
                 double delta) {
  if (!(ref_mean >= 0.0 && ref_mean <= 1.0))
    throw std::invalid_argument("ref_mean must lie in [0,1]");
  const double bonus =
      response.mode == ThinkingMode::NoThinking ? delta : 0.0;
  return bonus + reward - ref_mean;
}

double is_log_prob(const PolicyParams& old_policy, const Problem& problem,
                   const Response& response) {
  return kLogHalf + body_log_prob(old_policy, problem, response);
}

std::vector<RolloutSample> sample_batch(const PolicyParams& old_policy,
                                        std::span<const Problem> problems,
                                        const AccuracyProfile& profile,
                                        const RefRewardTable& ref_table,
                                        const TrainConfig& config,
                                        RngStream& rng) {
  config.validate();
  std::vector<RolloutSample> batch;
  batch.reserve(problems.size() * static_cast<std::size_t>(config.K));
  for (const Problem& problem : problems) {
    const double ref_mean = ref_table.at(problem.id);
    RngStream policy_stream(rng());
    RngStream reward_stream(rng());
    for (int k = 0; k < config.K; ++k) {
      RolloutSample s;
      s.problem = problem;
      if (config.sampler == SamplerKind::ImportanceSampling) {
        const ThinkingMode mode = k < config.K / 2 ? ThinkingMode::Thinking
                                                   : ThinkingMode::NoThinking;
        s.response = sample_response(old_policy, problem, mode, policy_stream);
        s.logp_sampler = is_log_prob(old_policy, problem, s.response);
      } else {
        s.response =
            sample_response(old_policy, problem, std::nullopt, policy_stream);
        s.logp_sampler = log_prob(old_policy, problem, s.response);
      }
      s.reward = score(profile, problem, s.response, reward_stream).reward;
      s.advantage = advantage(s.response, s.reward, ref_mean, config.delta);
      batch.push_back(std::move(s));
    }
  }
  return batch;
}

SurrogateResult surrogate_loss_and_grad(const PolicyParams& policy,
                                        std::span<const RolloutSample> batch,
                                        double epsilon) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");

  SurrogateResult out;
  double loss_sum = 0.0;
  int clipped = 0;
  const double lo = 1.0 - epsilon;
  const double hi = 1.0 + epsilon;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const RolloutSample& s = batch[i];
    if (!std::isfinite(s.logp_sampler))
      throw std::runtime_error("non-finite sampler log-prob at sample " +
                               std::to_string(i) + " (problem " +
                               std::to_string(s.problem.id) + ")");
    const double lp = log_prob(policy, s.problem, s.response);
    const double ratio = std::exp(lp - s.logp_sampler);
    if (!std::isfinite(ratio))
      throw std::runtime_error("non-finite ratio at sample " +
                               std::to_string(i) + " (problem " +
                               std::to_string(s.problem.id) + ")");
    const double unclipped = ratio * s.advantage;
    const double clipped_term = std::clamp(ratio, lo, hi) * s.advantage;
    if (unclipped <= clipped_term) {
      // Unclipped branch active (ties included): gradient flows.
      loss_sum += unclipped;
      const GradVector glp = grad_log_prob(policy, s.problem, s.response);
      out.grad.add_scaled(glp, ratio * s.advantage);
    } else {
      // Clipped branch active: constant in the parameters, zero gradient.
      loss_sum += clipped_term;
      ++clipped;
    }
  }
  const double n = static_cast<double>(batch.size());
  out.loss = -loss_sum / n;
  out.grad.scale(-1.0 / n);
  out.clip_fraction = clipped / n;
  return out;
}

bool mode_preference_condition(double mean_r_nothink, double mean_r_think,
                               double ref_mean, double delta) {
  return mean_r_nothink + delta > ref_mean &&
         mean_r_nothink + delta > mean_r_think;
}

std::pair<std::optional<double>, std::optional<double>> mean_mode_advantages(
    std::span<const RolloutSample> batch) {
  double sum_think = 0.0, sum_nothink = 0.0;
  int n_think = 0, n_nothink = 0;
  for (const RolloutSample& s : batch) {
    if (s.response.mode == ThinkingMode::NoThinking) {
      sum_nothink += s.advantage;
      ++n_nothink;
    } else {
      sum_think += s.advantage;
      ++n_think;
    }
  }
  std::pair<std::optional<double>, std::optional<double>> out;
  if (n_think > 0) out.first = sum_think / n_think;
  if (n_nothink > 0) out.second = sum_nothink / n_nothink;
  return out;
}

namespace {

StepReport make_step_report(int step, const SurrogateResult& res,
                            std::span<const RolloutSample> batch) {
  StepReport r;
  r.step = step;
  r.loss = res.loss;
  r.clip_fraction = res.clip_fraction;
  const auto [adv_think, adv_nothink] = mean_mode_advantages(batch);
  r.mean_adv_think = adv_think;
  r.mean_adv_nothink = adv_nothink;
  double nothink = 0.0, len = 0.0, acc = 0.0;
  for (const RolloutSample& s : batch) {
    nothink += s.response.mode == ThinkingMode::NoThinking ? 1.0 : 0.0;
    len += s.response.total_len;
    acc += s.reward;
  }
  const double n = static_cast<double>(batch.size());
  r.nothink_ratio = nothink / n;
  r.mean_total_len = len / n;
  r.train_accuracy = acc / n;
  return r;
}

}  // namespace

TrainResult train(const PolicyParams& init, const ProblemBank& bank,
                  const AccuracyProfile& profile, const TrainConfig& config,
                  int workers, const StepObserver& observer) {
  init.validate();
  profile.validate();
  config.validate();

  TrainResult result;
  result.policy = snapshot(init);
  result.ref_table = presample_for_config(init, bank, profile, config, workers);

  const auto& problems = bank.problems();
  const int n = bank.size();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  RngStream shuffle_stream = make_stream(config.seed, {kShuffleTag});
  fisher_yates(order, shuffle_stream);
  int cursor = 0;
  const int take = std::min(config.batch_size, n);

  result.history.reserve(static_cast<std::size_t>(config.steps));
  for (int step = 1; step <= config.steps; ++step) {
    const PolicyParams old_policy = snapshot(result.policy);

    if (cursor + take > n) {
      fisher_yates(order, shuffle_stream);
      cursor = 0;
    }
    std::vector<Problem> batch_problems;
    batch_problems.reserve(static_cast<std::size_t>(take));
    for (int i = 0; i < take; ++i)
      batch_problems.push_back(problems[static_cast<std::size_t>(order[static_cast<std::size_t>(cursor + i)])]);
    cursor += take;

    RngStream step_stream =
        make_stream(config.seed, {kStepTag, static_cast<std::uint64_t>(step)});
    const std::vector<RolloutSample> batch =
        sample_batch(old_policy, batch_problems, profile, result.ref_table,
                     config, step_stream);

    const SurrogateResult res =
        surrogate_loss_and_grad(result.policy, batch, config.epsilon);

    for (int l = 0; l < kNumLevels; ++l) {
      result.policy.gate[static_cast<std::size_t>(l)] -=
          config.lr * res.grad.d_gate[static_cast<std::size_t>(l)];
      for (int m = 0; m < kNumModes; ++m)
        result.policy.cont[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)] -=
            config.lr *
            res.grad.d_cont[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)];
    }

    result.history.push_back(make_step_report(step, res, batch));
    if (observer) observer(step, result.policy, result.history.back());
  }
  return result;
}

}  // namespace adaptthink
