#include "adaptthink/synthenv.hpp"

#include <cmath>
#include <stdexcept>

namespace adaptthink {

ProblemBank ProblemBank::make(
    const std::array<int, kNumLevels>& counts_per_level, std::uint64_t seed) {
  (void)seed;  // construction is fully determined by the counts
  int total = 0;
  for (int c : counts_per_level) {
    if (c < 0) throw std::invalid_argument("negative per-level count");
    total += c;
  }
  if (total == 0) throw std::invalid_argument("empty bank");

  ProblemBank bank;
  bank.counts_ = counts_per_level;
  bank.problems_.reserve(static_cast<std::size_t>(total));
  int id = 0;
  for (int level = 1; level <= kNumLevels; ++level) {
    for (int k = 0; k < counts_per_level[static_cast<std::size_t>(level - 1)];
         ++k) {
      bank.problems_.push_back(Problem{id++, level});
    }
  }
  return bank;
}

ProblemBank make_bank(const std::array<int, kNumLevels>& counts_per_level,
                      std::uint64_t seed) {
  return ProblemBank::make(counts_per_level, seed);
}

AccuracyProfile AccuracyProfile::defaults() {
  AccuracyProfile p;
  p.cap[0] = {0.97, 0.95, 0.90, 0.80, 0.60};       // thinking
  p.cap[1] = {0.97, 0.93, 0.86, 0.55, 0.15};       // nothinking
  p.halflife[0] = {4.0, 6.0, 8.0, 12.0, 16.0};     // thinking
  p.halflife[1] = {1.0, 2.0, 3.0, 4.0, 5.0};       // nothinking
  p.length_budget = 256;
  return p;
}

void AccuracyProfile::validate() const {
  for (int m = 0; m < kNumModes; ++m) {
    for (int l = 0; l < kNumLevels; ++l) {
      const double c = cap[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)];
      const double h =
          halflife[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)];
      if (!(c >= 0.0 && c <= 1.0))
        throw std::invalid_argument("profile cap outside [0,1]");
      if (!(h > 0.0)) throw std::invalid_argument("profile halflife must be > 0");
    }
  }
  if (length_budget < 4)
    throw std::invalid_argument("length_budget must be >= 4");
}

namespace {

nlohmann::json mode_table_to_json(
    const std::array<std::array<double, kNumLevels>, kNumModes>& table) {
  return nlohmann::json{{"thinking", table[0]}, {"nothinking", table[1]}};
}

void mode_table_from_json(
    const nlohmann::json& j,
    std::array<std::array<double, kNumLevels>, kNumModes>& table) {
  j.at("thinking").get_to(table[0]);
  j.at("nothinking").get_to(table[1]);
}

}  // namespace

void to_json(nlohmann::json& j, const AccuracyProfile& p) {
  j = nlohmann::json{{"cap", mode_table_to_json(p.cap)},
                     {"halflife", mode_table_to_json(p.halflife)},
                     {"length_budget", p.length_budget}};
}

void from_json(const nlohmann::json& j, AccuracyProfile& p) {
  mode_table_from_json(j.at("cap"), p.cap);
  mode_table_from_json(j.at("halflife"), p.halflife);
  j.at("length_budget").get_to(p.length_budget);
  p.validate();
}

double success_prob(const AccuracyProfile& profile, int level,
                    ThinkingMode mode, int body_len) {
  if (body_len < 0) throw std::invalid_argument("body_len must be >= 0");
  const int li = level_index(level);
  const int mi = mode_index(mode);
  const double c =
      profile.cap[static_cast<std::size_t>(mi)][static_cast<std::size_t>(li)];
  const double h = profile.halflife[static_cast<std::size_t>(mi)]
                                   [static_cast<std::size_t>(li)];
  return c * (1.0 - std::exp2(-static_cast<double>(body_len) / h));
}

RewardOutcome score(const AccuracyProfile& profile, const Problem& problem,
                    const Response& response, RngStream& reward_rng) {
  if (response.total_len > profile.length_budget) {
    return RewardOutcome{0, true, 0.0};
  }
  const double p =
      success_prob(profile, problem.level, response.mode, response.body_len);
  const int reward = uniform01(reward_rng) < p ? 1 : 0;
  return RewardOutcome{reward, false, p};
}

}  // namespace adaptthink
