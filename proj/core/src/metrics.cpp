#include "adaptthink/metrics.hpp"

#include <map>
#include <stdexcept>

#include "adaptthink/parallel.hpp"

namespace adaptthink {

void to_json(nlohmann::json& j, const LevelStats& s) {
  j = nlohmann::json{{"level", s.level},
                     {"accuracy", s.accuracy},
                     {"mean_len", s.mean_len},
                     {"nothink_ratio", s.nothink_ratio}};
}

void from_json(const nlohmann::json& j, LevelStats& s) {
  j.at("level").get_to(s.level);
  j.at("accuracy").get_to(s.accuracy);
  j.at("mean_len").get_to(s.mean_len);
  j.at("nothink_ratio").get_to(s.nothink_ratio);
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = nlohmann::json{{"accuracy", r.accuracy},
                     {"mean_total_len", r.mean_total_len},
                     {"nothink_ratio", r.nothink_ratio},
                     {"per_level", r.per_level},
                     {"n_samples_per_problem", r.n_samples_per_problem}};
}

void from_json(const nlohmann::json& j, EvalReport& r) {
  j.at("accuracy").get_to(r.accuracy);
  j.at("mean_total_len").get_to(r.mean_total_len);
  j.at("nothink_ratio").get_to(r.nothink_ratio);
  j.at("per_level").get_to(r.per_level);
  j.at("n_samples_per_problem").get_to(r.n_samples_per_problem);
}

void to_json(nlohmann::json& j, const DeltaReport& r) {
  j = nlohmann::json{{"delta_acc", r.delta_acc},
                     {"delta_length_rate", r.delta_length_rate}};
}

void from_json(const nlohmann::json& j, DeltaReport& r) {
  j.at("delta_acc").get_to(r.delta_acc);
  j.at("delta_length_rate").get_to(r.delta_length_rate);
}

EvalReport evaluate(const PolicyParams& policy, const ProblemBank& bank,
                    const AccuracyProfile& profile, int n_samples,
                    RngStream& rng, int workers) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (bank.size() == 0) throw std::invalid_argument("empty bank");
  policy.validate();
  profile.validate();

  const auto& problems = bank.problems();
  std::vector<std::pair<std::uint64_t, std::uint64_t>> seeds;
  seeds.reserve(problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const std::uint64_t a = rng();
    const std::uint64_t b = rng();
    seeds.emplace_back(a, b);
  }

  struct ProblemStats {
    double acc = 0.0, len = 0.0, nothink = 0.0;
  };
  std::vector<ProblemStats> stats(problems.size());
  parallel_for_indexed(problems.size(), workers, [&](std::size_t i) {
    RngStream policy_stream(seeds[i].first);
    RngStream reward_stream(seeds[i].second);
    ProblemStats s;
    for (int k = 0; k < n_samples; ++k) {
      const Response resp =
          sample_response(policy, problems[i], std::nullopt, policy_stream);
      s.acc += score(profile, problems[i], resp, reward_stream).reward;
      s.len += resp.total_len;
      s.nothink += resp.mode == ThinkingMode::NoThinking ? 1.0 : 0.0;
    }
    stats[i] = s;
  });

  EvalReport report;
  report.n_samples_per_problem = n_samples;
  std::map<int, ProblemStats> by_level;
  std::map<int, int> level_counts;
  ProblemStats total;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    total.acc += stats[i].acc;
    total.len += stats[i].len;
    total.nothink += stats[i].nothink;
    auto& ls = by_level[problems[i].level];
    ls.acc += stats[i].acc;
    ls.len += stats[i].len;
    ls.nothink += stats[i].nothink;
    ++level_counts[problems[i].level];
  }
  const double n_total = static_cast<double>(problems.size()) * n_samples;
  report.accuracy = total.acc / n_total;
  report.mean_total_len = total.len / n_total;
  report.nothink_ratio = total.nothink / n_total;
  for (const auto& [level, ls] : by_level) {
    const double n_level =
        static_cast<double>(level_counts[level]) * n_samples;
    report.per_level.push_back(LevelStats{level, ls.acc / n_level,
                                          ls.len / n_level,
                                          ls.nothink / n_level});
  }
  return report;
}

double pass_rate(const PolicyParams& policy, const Problem& problem,
                 const AccuracyProfile& profile, int n, ThinkingMode mode,
                 RngStream& rng) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  RngStream policy_stream(rng());
  RngStream reward_stream(rng());
  int hits = 0;
  for (int k = 0; k < n; ++k) {
    const Response resp = sample_response(policy, problem, mode, policy_stream);
    hits += score(profile, problem, resp, reward_stream).reward;
  }
  return static_cast<double>(hits) / n;
}

DeltaReport delta_metrics(double acc, double mean_len, double ref_acc,
                          double ref_mean_len) {
  if (!(ref_mean_len > 0.0))
    throw std::invalid_argument("reference mean length must be > 0");
  return DeltaReport{acc - ref_acc, (mean_len - ref_mean_len) / ref_mean_len};
}

DeltaReport delta_metrics(const EvalReport& report,
                          const EvalReport& reference) {
  return delta_metrics(report.accuracy, report.mean_total_len,
                       reference.accuracy, reference.mean_total_len);
}

}  // namespace adaptthink
