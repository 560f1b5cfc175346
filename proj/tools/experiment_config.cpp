#include "experiment_config.hpp"

#include <sstream>
#include <stdexcept>

#include "adaptthink/logio.hpp"

namespace adaptthink::cli {

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  const nlohmann::json j = read_json_file(path);
  ExperimentConfig cfg;
  if (j.contains("train")) j.at("train").get_to(cfg.train);
  if (j.contains("bank")) {
    const auto& b = j.at("bank");
    if (b.contains("counts_per_level"))
      b.at("counts_per_level").get_to(cfg.bank.counts_per_level);
    if (b.contains("seed")) b.at("seed").get_to(cfg.bank.seed);
  }
  if (j.contains("profile") && !j.at("profile").is_null())
    cfg.profile_path = j.at("profile").get<std::string>();
  if (j.contains("policy")) j.at("policy").get_to(cfg.policy_init);
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    if (e.contains("samples")) e.at("samples").get_to(cfg.eval.samples);
    if (e.contains("seed")) e.at("seed").get_to(cfg.eval.seed);
  }
  cfg.train.validate();
  cfg.policy_init.validate();
  if (cfg.eval.samples < 1)
    throw std::invalid_argument("eval.samples must be >= 1");
  return cfg;
}

AccuracyProfile ExperimentConfig::resolve_profile(
    const std::optional<std::string>& flag_path) const {
  const std::optional<std::string>& path =
      flag_path.has_value() ? flag_path : profile_path;
  if (!path.has_value()) return AccuracyProfile::defaults();
  AccuracyProfile profile = read_json_file(*path).get<AccuracyProfile>();
  profile.validate();
  return profile;
}

ProblemBank ExperimentConfig::make_bank() const {
  return adaptthink::make_bank(bank.counts_per_level, bank.seed);
}

namespace {

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> parts;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto begin = item.find_first_not_of(" \t");
    if (begin == std::string::npos) continue;
    const auto end = item.find_last_not_of(" \t");
    parts.push_back(item.substr(begin, end - begin + 1));
  }
  return parts;
}

}  // namespace

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> values;
  for (const std::string& part : split_csv(csv)) {
    std::size_t consumed = 0;
    const double v = std::stod(part, &consumed);
    if (consumed != part.size())
      throw std::invalid_argument("not a number: '" + part + "'");
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("empty number list");
  return values;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
  std::vector<std::string> values = split_csv(csv);
  if (values.empty()) throw std::invalid_argument("empty list");
  return values;
}

}  // namespace adaptthink::cli
