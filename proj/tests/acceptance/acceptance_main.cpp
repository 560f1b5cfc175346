// End-to-end acceptance suite. Each criterion runs at its stated tolerance
// and prints exactly one PASS/FAIL line; the exit code is the number of
// failed criteria. Detail lines show the measured quantities so a failure
// documents itself.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "adaptthink/logio.hpp"
#include "adaptthink/metrics.hpp"
#include "adaptthink/trainer.hpp"
#include "oracle.hpp"

using namespace adaptthink;
namespace fs = std::filesystem;

namespace {

struct CriterionResult {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << "    [" << (ok ? "ok" : "FAILED") << "] " << what << "\n";
  }
};

PolicyParams random_params(RngStream& rng, int l_max) {
  PolicyParams p = PolicyParams::defaults();
  p.l_max = l_max;
  for (auto& g : p.gate) g = 4.0 * (uniform01(rng) - 0.5);
  for (auto& row : p.cont)
    for (auto& c : row) c = 4.0 * (uniform01(rng) - 0.5);
  return p;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

struct Inversions {
  int count = 0;
  double worst = 0.0;
};

Inversions non_increasing_violations(const std::vector<double>& v) {
  Inversions inv;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i + 1] > v[i]) {
      ++inv.count;
      inv.worst = std::max(inv.worst, v[i + 1] - v[i]);
    }
  }
  return inv;
}

Inversions non_decreasing_violations(const std::vector<double>& v) {
  Inversions inv;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i + 1] < v[i]) {
      ++inv.count;
      inv.worst = std::max(inv.worst, v[i] - v[i + 1]);
    }
  }
  return inv;
}

// --- criterion 1: analytic gradients vs central finite differences --------

CriterionResult criterion_gradients() {
  CriterionResult res;
  RngStream rng(101);
  const AccuracyProfile profile = AccuracyProfile::defaults();
  const double h = 1e-5, tol = 1e-5;

  int logp_checked = 0, logp_ok = 0;
  while (logp_checked < 100) {
    const PolicyParams p = random_params(rng, 3);
    const Problem prob{0, 1 + static_cast<int>(rng() % 5)};
    const ThinkingMode mode = uniform01(rng) < 0.5 ? ThinkingMode::Thinking
                                                   : ThinkingMode::NoThinking;
    const Response r = make_response(p, mode, static_cast<int>(rng() % 4));
    const GradVector analytic = grad_log_prob(p, prob, r);
    const GradVector numeric = oracle::fd_gradient(
        p, [&](const PolicyParams& q) { return log_prob(q, prob, r); }, h);
    logp_ok += oracle::grads_close(analytic, numeric, tol) ? 1 : 0;
    ++logp_checked;
  }
  res.require(logp_ok == logp_checked,
              "log_prob gradient: " + std::to_string(logp_ok) + "/" +
                  std::to_string(logp_checked) + " instances within " +
                  fmt(tol));

  int surr_checked = 0, surr_ok = 0;
  while (surr_checked < 100) {
    const PolicyParams policy = random_params(rng, 3);
    const PolicyParams old_policy = random_params(rng, 3);
    const ProblemBank bank = make_bank({1, 1, 0, 0, 0}, 0);
    RefRewardTable table;
    table.K_used = 8;
    for (const Problem& p : bank.problems())
      table.mean_reward[p.id] = uniform01(rng);
    TrainConfig cfg;
    cfg.K = 8;
    cfg.delta = 0.1 * uniform01(rng);
    RngStream batch_rng(rng());
    const auto batch = sample_batch(old_policy, bank.problems(), profile,
                                    table, cfg, batch_rng);
    bool near_kink = false;
    for (const RolloutSample& s : batch) {
      const double r =
          std::exp(log_prob(policy, s.problem, s.response) - s.logp_sampler);
      if (std::abs(r - 0.8) < 1e-3 || std::abs(r - 1.2) < 1e-3 ||
          std::abs(s.advantage) < 1e-3)
        near_kink = true;
    }
    if (near_kink) continue;  // not differentiable there; redraw

    const SurrogateResult sr = surrogate_loss_and_grad(policy, batch, 0.2);
    const GradVector numeric = oracle::fd_gradient(
        policy,
        [&](const PolicyParams& q) {
          return surrogate_loss_and_grad(q, batch, 0.2).loss;
        },
        h);
    surr_ok += oracle::grads_close(sr.grad, numeric, tol) ? 1 : 0;
    ++surr_checked;
  }
  res.require(surr_ok == surr_checked,
              "surrogate gradient: " + std::to_string(surr_ok) + "/" +
                  std::to_string(surr_checked) + " instances within " +
                  fmt(tol));
  return res;
}

// --- criterion 2: enumerated expected loss vs Monte Carlo ------------------

CriterionResult criterion_enumeration() {
  CriterionResult res;
  const AccuracyProfile profile = AccuracyProfile::defaults();
  const Problem prob{0, 2};
  RngStream seed_rng(202);

  for (int instance = 0; instance < 2; ++instance) {
    PolicyParams old_policy = random_params(seed_rng, 3);
    // First instance evaluates at the sampling snapshot, second off it.
    const PolicyParams policy =
        instance == 0 ? old_policy : random_params(seed_rng, 3);
    const double ref_mean = 0.45;
    const double delta = 0.05, eps = 0.2;

    const double exact =
        oracle::expected_surrogate(policy, old_policy, prob, profile, ref_mean,
                                   delta, eps)
            .loss;

    const int K = 100000;
    RngStream rng(seed_rng());
    RngStream reward_rng(seed_rng());
    double sum = 0.0, sumsq = 0.0;
    for (int k = 0; k < K; ++k) {
      const ThinkingMode mode = uniform01(rng) < 0.5 ? ThinkingMode::NoThinking
                                                     : ThinkingMode::Thinking;
      const Response y = sample_response(old_policy, prob, mode, rng);
      const int reward = score(profile, prob, y, reward_rng).reward;
      const double a = advantage(y, reward, ref_mean, delta);
      const double r =
          std::exp(log_prob(policy, prob, y) - is_log_prob(old_policy, prob, y));
      const double term =
          -std::min(r * a, std::clamp(r, 1.0 - eps, 1.0 + eps) * a);
      sum += term;
      sumsq += term * term;
    }
    const double mc = sum / K;
    const double var = std::max(sumsq / K - mc * mc, 0.0);
    const double se = std::sqrt(var / K);
    res.require(std::abs(mc - exact) <= 3.0 * se,
                "instance " + std::to_string(instance) + ": |MC - exact| = " +
                    fmt(std::abs(mc - exact)) + " <= 3 SE = " + fmt(3.0 * se) +
                    " (exact " + fmt(exact) + ", MC " + fmt(mc) + ")");
  }
  return res;
}

// --- criterion 3: mean-advantage identity ----------------------------------

CriterionResult criterion_advantage_identity() {
  CriterionResult res;
  const AccuracyProfile profile = AccuracyProfile::defaults();
  RngStream rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const PolicyParams policy = random_params(rng, 16);
    const ProblemBank bank = make_bank({2, 2, 2, 2, 2}, 0);
    RefRewardTable table;
    table.K_used = 16;
    for (const Problem& p : bank.problems())
      table.mean_reward[p.id] = uniform01(rng);
    TrainConfig cfg;
    cfg.K = 16;
    cfg.delta = 0.2 * uniform01(rng);
    RngStream batch_rng(rng());
    const auto batch =
        sample_batch(policy, bank.problems(), profile, table, cfg, batch_rng);

    double r_think = 0.0, r_nothink = 0.0;
    int n_think = 0, n_nothink = 0;
    for (const RolloutSample& s : batch) {
      if (s.response.mode == ThinkingMode::NoThinking) {
        r_nothink += s.reward;
        ++n_nothink;
      } else {
        r_think += s.reward;
        ++n_think;
      }
    }
    r_think /= n_think;
    r_nothink /= n_nothink;
    const auto [adv_think, adv_nothink] = mean_mode_advantages(batch);
    const double lhs = *adv_nothink - *adv_think;
    const double rhs = cfg.delta + r_nothink - r_think;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  res.require(worst <= 1e-12,
              "max |(A_nt - A_th) - (delta + R_nt - R_th)| = " + fmt(worst) +
                  " <= 1e-12 over 20 balanced batches");
  return res;
}

// --- criterion 4: expected gate gradient sign ------------------------------

CriterionResult criterion_gradient_direction() {
  CriterionResult res;
  const Problem prob{0, 1};
  PolicyParams params = PolicyParams::defaults();
  params.l_max = 3;
  params.gate.fill(0.0);  // neutral gate keeps every ratio inside the band
  params.cont[0].fill(1.0);
  params.cont[1].fill(1.0);

  AccuracyProfile preferred = AccuracyProfile::defaults();
  preferred.cap[1][0] = 0.9;
  preferred.halflife[1][0] = 1.0;
  preferred.cap[0][0] = 0.4;
  preferred.halflife[0][0] = 8.0;

  AccuracyProfile dominated = AccuracyProfile::defaults();
  dominated.cap[1][0] = 0.05;
  dominated.halflife[1][0] = 8.0;
  dominated.cap[0][0] = 0.9;
  dominated.halflife[0][0] = 1.0;

  for (double delta : {0.0, 0.05, 0.2}) {
    {
      const double ref_mean = 0.3;
      const double r_nt = oracle::expected_reward(params, prob, preferred,
                                                  ThinkingMode::NoThinking);
      const double r_th = oracle::expected_reward(params, prob, preferred,
                                                  ThinkingMode::Thinking);
      const bool condition =
          mode_preference_condition(r_nt, r_th, ref_mean, delta);
      const double g = oracle::expected_surrogate(params, params, prob,
                                                  preferred, ref_mean, delta,
                                                  0.2)
                           .gate_grad;
      res.require(condition && g < 0.0,
                  "delta=" + fmt(delta) +
                      " preferred: condition holds and loss gradient " +
                      fmt(g) + " points toward EndThink");
    }
    {
      const double ref_mean = 0.85;
      const double r_nt = oracle::expected_reward(params, prob, dominated,
                                                  ThinkingMode::NoThinking);
      const double r_th = oracle::expected_reward(params, prob, dominated,
                                                  ThinkingMode::Thinking);
      const bool strictly_dominated =
          r_nt + delta < std::min(ref_mean, r_th);
      const double g = oracle::expected_surrogate(params, params, prob,
                                                  dominated, ref_mean, delta,
                                                  0.2)
                           .gate_grad;
      res.require(strictly_dominated && g > 0.0,
                  "delta=" + fmt(delta) +
                      " dominated: condition fails and loss gradient " +
                      fmt(g) + " points away from EndThink");
    }
  }
  return res;
}

// --- criterion 5: per-level mode-selection profile after training ----------

CriterionResult criterion_level_profile() {
  CriterionResult res;
  const AccuracyProfile profile = AccuracyProfile::defaults();
  const ProblemBank bank = make_bank({50, 50, 50, 50, 50}, 0);
  const PolicyParams init = PolicyParams::defaults();
  TrainConfig cfg;  // K=16 delta=0.05 epsilon=0.2 lr=0.05 batch=32 steps=500
  cfg.seed = 1;

  const TrainResult result = train(init, bank, profile, cfg);
  RngStream eval_rng = make_stream(505, {});
  const EvalReport report = evaluate(result.policy, bank, profile, 16, eval_rng);

  std::vector<double> ratios;
  std::ostringstream levels;
  for (const LevelStats& ls : report.per_level) {
    ratios.push_back(ls.nothink_ratio);
    levels << " L" << ls.level << "=" << fmt(ls.nothink_ratio);
  }
  res.detail << "    per-level nothink ratio:" << levels.str() << "\n";

  res.require(ratios.front() >= 0.9,
              "level-1 nothink ratio " + fmt(ratios.front()) + " >= 0.9");
  res.require(ratios.back() <= 0.1,
              "level-5 nothink ratio " + fmt(ratios.back()) + " <= 0.1");
  const Inversions inv = non_increasing_violations(ratios);
  res.require(inv.count <= 1 && inv.worst <= 0.05,
              "monotone non-increasing: " + std::to_string(inv.count) +
                  " inversion(s), worst " + fmt(inv.worst));

  double ref_acc = 0.0;
  for (const auto& [id, v] : result.ref_table.mean_reward) ref_acc += v;
  ref_acc /= static_cast<double>(result.ref_table.mean_reward.size());
  res.require(report.accuracy >= ref_acc - 0.01,
              "evaluated accuracy " + fmt(report.accuracy) +
                  " >= reference " + fmt(ref_acc) + " - 0.01");
  return res;
}

// --- criterion 6: cold start with and without forced exploration -----------

CriterionResult criterion_cold_start() {
  CriterionResult res;
  const AccuracyProfile profile = AccuracyProfile::defaults();
  const ProblemBank bank = make_bank({50, 50, 50, 0, 0}, 0);
  const PolicyParams init = PolicyParams::defaults();  // gate -6

  TrainConfig on_policy_cfg;
  on_policy_cfg.sampler = SamplerKind::OnPolicy;
  on_policy_cfg.seed = 1;
  double max_ratio = 0.0;
  train(init, bank, profile, on_policy_cfg, 1,
        [&](int step, const PolicyParams& policy, const StepReport&) {
          RngStream rng = make_stream(606, {static_cast<std::uint64_t>(step)});
          const EvalReport r = evaluate(policy, bank, profile, 4, rng);
          max_ratio = std::max(max_ratio, r.nothink_ratio);
        });
  res.require(max_ratio < 0.05,
              "on-policy: max evaluated nothink ratio over 500 steps = " +
                  fmt(max_ratio) + " < 0.05");

  TrainConfig is_cfg;
  is_cfg.seed = 1;
  const TrainResult is_result = train(init, bank, profile, is_cfg);
  RngStream rng = make_stream(607, {});
  const EvalReport is_eval = evaluate(is_result.policy, bank, profile, 16, rng);
  res.require(is_eval.nothink_ratio > 0.5,
              "importance sampling: final evaluated nothink ratio " +
                  fmt(is_eval.nothink_ratio) + " > 0.5");
  return res;
}

// --- criterion 7: delta sweep trend -----------------------------------------

CriterionResult criterion_delta_sweep() {
  CriterionResult res;
  const AccuracyProfile profile = AccuracyProfile::defaults();
  const ProblemBank bank = make_bank({50, 50, 50, 50, 50}, 0);
  const PolicyParams init = PolicyParams::defaults();

  std::vector<double> ratios, lengths;
  std::ostringstream sweep;
  const std::vector<double> deltas = {0.0, 0.02, 0.05, 0.1};
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    TrainConfig cfg;
    cfg.delta = deltas[i];
    cfg.seed = 1;
    const TrainResult result = train(init, bank, profile, cfg);
    RngStream rng = make_stream(707, {static_cast<std::uint64_t>(i)});
    const EvalReport report =
        evaluate(result.policy, bank, profile, 16, rng);
    ratios.push_back(report.nothink_ratio);
    lengths.push_back(report.mean_total_len);
    sweep << " d=" << deltas[i] << ": ratio=" << fmt(report.nothink_ratio)
          << " len=" << fmt(report.mean_total_len);
  }
  res.detail << "    sweep:" << sweep.str() << "\n";

  const Inversions rinv = non_decreasing_violations(ratios);
  res.require(rinv.count <= 1 && rinv.worst <= 0.02,
              "nothink ratio non-decreasing in delta: " +
                  std::to_string(rinv.count) + " inversion(s), worst " +
                  fmt(rinv.worst));
  const Inversions linv = non_increasing_violations(lengths);
  res.require(linv.count <= 1 && linv.worst <= 2.0,
              "mean length non-increasing in delta: " +
                  std::to_string(linv.count) + " inversion(s), worst " +
                  fmt(linv.worst) + " tokens");
  return res;
}

// --- criterion 8: analyzer golden test --------------------------------------

CriterionResult criterion_analyzer() {
  CriterionResult res;
  const std::string fixture =
      std::string(ADAPTTHINK_TEST_DATA_DIR) + "/sample_response_log.jsonl";
  const auto records = read_response_log(fixture);
  const LogAnalysis a = analyze_logs(records, kDefaultThinkingKeywords);

  res.require(a.overall.accuracy == 4.0 / 6.0,
              "fixture accuracy " + fmt(a.overall.accuracy) + " == 4/6");
  res.require(a.overall.ratio_nt == 3.0 / 6.0,
              "fixture ratio_nt " + fmt(a.overall.ratio_nt) + " == 3/6");
  double mean_tokens = 0.0;
  for (const auto& r : records) mean_tokens += r.token_count;
  mean_tokens /= static_cast<double>(records.size());
  res.require(a.overall.mean_length == mean_tokens,
              "fixture mean length " + fmt(a.overall.mean_length) +
                  " == arithmetic mean of token counts");
  res.require(a.implicit_thinking_ratio == 1.0 / 5.0 &&
                  a.solution_text_count == 5,
              "implicit thinking ratio " + fmt(a.implicit_thinking_ratio) +
                  " == 1/5 over 5 records with text");

  const DeltaReport d = delta_metrics(0.831, 480.0, 0.790, 978.0);
  res.require(std::abs(d.delta_acc - 0.041) <= 1e-3 &&
                  std::abs(d.delta_length_rate - -0.509) <= 1e-3,
              "delta metrics on published-style numbers: (" +
                  fmt(d.delta_acc) + ", " + fmt(d.delta_length_rate) +
                  ") within 1e-3 of (+0.041, -0.509)");
  return res;
}

// --- criterion 9: byte-identical training runs ------------------------------

CriterionResult criterion_determinism() {
  CriterionResult res;
  const fs::path dir = fs::temp_directory_path() / "adaptthink_acceptance";
  fs::create_directories(dir);

  const nlohmann::json cfg = {
      {"train",
       {{"K", 16},
        {"delta", 0.05},
        {"epsilon", 0.2},
        {"lr", 0.05},
        {"batch_size", 16},
        {"steps", 100},
        {"seed", 7},
        {"sampler", "importance_sampling"}}},
      {"bank", {{"counts_per_level", {20, 20, 20, 20, 20}}, {"seed", 0}}}};
  const fs::path cfg_path = dir / "config.json";
  std::ofstream(cfg_path) << cfg.dump(2);

  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const auto run_once = [&](const std::string& tag) {
    const fs::path hist = dir / ("history_" + tag + ".jsonl");
    const fs::path pol = dir / ("policy_" + tag + ".json");
    const std::string cmd = std::string(ADAPTTHINK_CLI_PATH) +
                            " train --config " + cfg_path.string() +
                            " --out-history " + hist.string() +
                            " --out-policy " + pol.string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return std::make_tuple(status, slurp(hist), slurp(pol));
  };

  const auto [s1, h1, p1] = run_once("a");
  const auto [s2, h2, p2] = run_once("b");
  res.require(s1 == 0 && s2 == 0, "both train invocations exit 0");
  res.require(!h1.empty() && h1 == h2, "history files are byte-identical");
  res.require(!p1.empty() && p1 == p2, "policy files are byte-identical");
  return res;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    double limit_seconds;
    std::function<CriterionResult()> fn;
  };
  const std::vector<Entry> entries = {
      {1, "gradient correctness vs finite differences", 30, criterion_gradients},
      {2, "enumerated expected loss vs Monte Carlo", 60, criterion_enumeration},
      {3, "mode-advantage difference identity", 60, criterion_advantage_identity},
      {4, "expected gate gradient direction", 10, criterion_gradient_direction},
      {5, "per-level mode selection after training", 300, criterion_level_profile},
      {6, "cold start: on-policy vs importance sampling", 300, criterion_cold_start},
      {7, "delta sweep trend", 1200, criterion_delta_sweep},
      {8, "response-log analyzer golden values", 1, criterion_analyzer},
      {9, "byte-identical training runs", 300, criterion_determinism},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r = e.fn();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (seconds > e.limit_seconds) {
      r.pass = false;
      r.detail << "    [FAILED] runtime " << fmt(seconds) << "s exceeds "
               << fmt(e.limit_seconds) << "s\n";
    }
    std::cout << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << e.id
              << ": " << e.name << " (" << fmt(seconds) << "s)\n"
              << r.detail.str();
    if (!r.pass) ++failures;
  }
  std::cout << (failures == 0 ? "all criteria passed"
                              : std::to_string(failures) +
                                    " criterion(s) failed")
            << std::endl;
  return failures;
}
