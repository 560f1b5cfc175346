#pragma once

// Test-side oracles. Response probabilities, expectations and gradients are
// computed here from first principles (direct products over branch
// probabilities, exhaustive enumeration, central finite differences) so they
// stay independent of the library's log-prob / loss implementation paths.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "adaptthink/policy.hpp"
#include "adaptthink/synthenv.hpp"
#include "adaptthink/trainer.hpp"

namespace oracle {

using adaptthink::AccuracyProfile;
using adaptthink::GradVector;
using adaptthink::kNumLevels;
using adaptthink::kNumModes;
using adaptthink::PolicyParams;
using adaptthink::Problem;
using adaptthink::Response;
using adaptthink::ThinkingMode;

inline double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// P(body length = k) under a truncated-geometric chain with continue
/// probability p: p^k (1-p) for k < l_max, p^l_max at the cap.
inline double body_prob(double p_cont, int k, int l_max) {
  double prob = 1.0;
  for (int i = 0; i < k; ++i) prob *= p_cont;
  if (k < l_max) prob *= 1.0 - p_cont;
  return prob;
}

struct Outcome {
  Response response;
  double prob;
};

/// Enumerates every syntactically valid response with its probability under
/// the policy's own law. Probabilities sum to one.
inline std::vector<Outcome> policy_law(const PolicyParams& params,
                                       const Problem& problem) {
  std::vector<Outcome> out;
  const int li = problem.level - 1;
  const double p_end = sig(params.gate[static_cast<std::size_t>(li)]);
  for (int m = 0; m < kNumModes; ++m) {
    const ThinkingMode mode =
        m == 0 ? ThinkingMode::Thinking : ThinkingMode::NoThinking;
    const double first = mode == ThinkingMode::NoThinking ? p_end : 1.0 - p_end;
    const double p_cont = sig(params.cont[static_cast<std::size_t>(m)]
                                         [static_cast<std::size_t>(li)]);
    for (int k = 0; k <= params.l_max; ++k) {
      out.push_back(Outcome{adaptthink::make_response(params, mode, k),
                            first * body_prob(p_cont, k, params.l_max)});
    }
  }
  return out;
}

/// Law of the importance-sampling distribution: 0.5 per mode at the first
/// position, the old policy's body chain afterwards.
inline std::vector<Outcome> is_law(const PolicyParams& old_params,
                                   const Problem& problem) {
  std::vector<Outcome> out;
  const int li = problem.level - 1;
  for (int m = 0; m < kNumModes; ++m) {
    const ThinkingMode mode =
        m == 0 ? ThinkingMode::Thinking : ThinkingMode::NoThinking;
    const double p_cont = sig(old_params.cont[static_cast<std::size_t>(m)]
                                             [static_cast<std::size_t>(li)]);
    for (int k = 0; k <= old_params.l_max; ++k) {
      out.push_back(Outcome{adaptthink::make_response(old_params, mode, k),
                            0.5 * body_prob(p_cont, k, old_params.l_max)});
    }
  }
  return out;
}

/// Probability of one response under the policy, by direct product.
inline double response_prob(const PolicyParams& params, const Problem& problem,
                            const Response& resp) {
  const int li = problem.level - 1;
  const double p_end = sig(params.gate[static_cast<std::size_t>(li)]);
  const double first =
      resp.mode == ThinkingMode::NoThinking ? p_end : 1.0 - p_end;
  const double p_cont =
      sig(params.cont[static_cast<std::size_t>(adaptthink::mode_index(resp.mode))]
                     [static_cast<std::size_t>(li)]);
  return first * body_prob(p_cont, resp.body_len, params.l_max);
}

inline double success(const AccuracyProfile& profile, int level,
                      ThinkingMode mode, int body_len) {
  const int li = level - 1;
  const int mi = adaptthink::mode_index(mode);
  const double c =
      profile.cap[static_cast<std::size_t>(mi)][static_cast<std::size_t>(li)];
  const double h = profile.halflife[static_cast<std::size_t>(mi)]
                                   [static_cast<std::size_t>(li)];
  return c * (1.0 - std::pow(2.0, -static_cast<double>(body_len) / h));
}

/// Exact expected reward of unforced sampling (or one forced mode) followed
/// by scoring, ignoring truncation (valid when lengths stay in budget).
inline double expected_reward(const PolicyParams& params,
                              const Problem& problem,
                              const AccuracyProfile& profile,
                              std::optional<ThinkingMode> forced) {
  if (forced.has_value()) {
    const int li = problem.level - 1;
    const double p_cont =
        sig(params.cont[static_cast<std::size_t>(adaptthink::mode_index(*forced))]
                       [static_cast<std::size_t>(li)]);
    double total = 0.0;
    for (int k = 0; k <= params.l_max; ++k)
      total += body_prob(p_cont, k, params.l_max) *
               success(profile, problem.level, *forced, k);
    return total;
  }
  double total = 0.0;
  for (const Outcome& o : policy_law(params, problem))
    total += o.prob * success(profile, problem.level, o.response.mode,
                              o.response.body_len);
  return total;
}

struct SurrogateExpectation {
  double loss = 0.0;
  double gate_grad = 0.0;  // d loss / d gate[level], clipped branch flat
};

/// Exact expectation of the clipped surrogate loss and its gate derivative
/// under the importance-sampling law, with Bernoulli rewards mixed in.
inline SurrogateExpectation expected_surrogate(
    const PolicyParams& policy, const PolicyParams& old_policy,
    const Problem& problem, const AccuracyProfile& profile, double ref_mean,
    double delta, double epsilon) {
  SurrogateExpectation e;
  const int li = problem.level - 1;
  const double gate_sig = sig(policy.gate[static_cast<std::size_t>(li)]);
  for (const Outcome& o : is_law(old_policy, problem)) {
    const double p_theta = response_prob(policy, problem, o.response);
    const double ratio = p_theta / o.prob;
    const double p_win = success(profile, problem.level, o.response.mode,
                                 o.response.body_len);
    const double d_gate_logp =
        (o.response.mode == ThinkingMode::NoThinking ? 1.0 : 0.0) - gate_sig;
    for (int reward = 0; reward <= 1; ++reward) {
      const double p_r = reward == 1 ? p_win : 1.0 - p_win;
      if (p_r == 0.0) continue;
      const double adv =
          (o.response.mode == ThinkingMode::NoThinking ? delta : 0.0) +
          reward - ref_mean;
      const double unclipped = ratio * adv;
      const double clipped =
          std::min(std::max(ratio, 1.0 - epsilon), 1.0 + epsilon) * adv;
      const double w = o.prob * p_r;
      if (unclipped <= clipped) {
        e.loss += w * -unclipped;
        e.gate_grad += w * -(ratio * adv * d_gate_logp);
      } else {
        e.loss += w * -clipped;
      }
    }
  }
  return e;
}

/// Central finite differences of a scalar function over every learnable
/// coordinate of the policy.
inline GradVector fd_gradient(const PolicyParams& base,
                              const std::function<double(const PolicyParams&)>& f,
                              double h) {
  GradVector g;
  for (int l = 0; l < kNumLevels; ++l) {
    PolicyParams up = base, down = base;
    up.gate[static_cast<std::size_t>(l)] += h;
    down.gate[static_cast<std::size_t>(l)] -= h;
    g.d_gate[static_cast<std::size_t>(l)] = (f(up) - f(down)) / (2.0 * h);
    for (int m = 0; m < kNumModes; ++m) {
      PolicyParams cu = base, cd = base;
      cu.cont[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)] += h;
      cd.cont[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)] -= h;
      g.d_cont[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)] =
          (f(cu) - f(cd)) / (2.0 * h);
    }
  }
  return g;
}

/// Scale-aware gradient comparison: |a-b| <= tol * max(1, |a|, |b|).
inline bool grads_close(const GradVector& a, const GradVector& b, double tol) {
  const auto close = [tol](double x, double y) {
    return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)});
  };
  for (int l = 0; l < kNumLevels; ++l) {
    if (!close(a.d_gate[static_cast<std::size_t>(l)],
               b.d_gate[static_cast<std::size_t>(l)]))
      return false;
    for (int m = 0; m < kNumModes; ++m)
      if (!close(a.d_cont[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)],
                 b.d_cont[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)]))
        return false;
  }
  return true;
}

}  // namespace oracle
