#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adaptthink/logio.hpp"
#include "adaptthink/metrics.hpp"
#include "adaptthink/trainer.hpp"
#include "experiment_config.hpp"

namespace {

using namespace adaptthink;
using cli::ExperimentConfig;

// Fixed internal seeds keep every command a pure function of its flags and
// input files.
constexpr std::uint64_t kStandaloneEvalSeed = 10007;
constexpr std::uint64_t kSweepEvalTag = 0x5EED;
constexpr std::uint64_t kCompareEvalTag = 0xC0DE;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

void run_presample(const std::string& config_path, const std::string& out_path,
                   int workers) {
  const ExperimentConfig cfg = ExperimentConfig::load(config_path);
  const AccuracyProfile profile = cfg.resolve_profile(std::nullopt);
  const ProblemBank bank = cfg.make_bank();
  const RefRewardTable table = presample_for_config(
      cfg.policy_init, bank, profile, cfg.train, workers);
  write_json_file(out_path, table);
}

void run_train(const std::string& config_path,
               const std::optional<std::string>& profile_path,
               const std::string& history_path, const std::string& policy_path,
               int workers) {
  const ExperimentConfig cfg = ExperimentConfig::load(config_path);
  const AccuracyProfile profile = cfg.resolve_profile(profile_path);
  const ProblemBank bank = cfg.make_bank();
  const TrainResult result =
      train(cfg.policy_init, bank, profile, cfg.train, workers);
  write_history(result.history, history_path);
  write_json_file(policy_path, result.policy);
}

void run_eval(const std::string& policy_path,
              const std::optional<std::string>& profile_path, int samples,
              const std::string& out_path, int workers) {
  PolicyParams policy = read_json_file(policy_path).get<PolicyParams>();
  AccuracyProfile profile = AccuracyProfile::defaults();
  if (profile_path.has_value())
    profile = read_json_file(*profile_path).get<AccuracyProfile>();
  const ProblemBank bank = make_bank({50, 50, 50, 50, 50}, 0);
  RngStream rng = make_stream(kStandaloneEvalSeed, {});
  const EvalReport report =
      evaluate(policy, bank, profile, samples, rng, workers);
  write_json_file(out_path, report);
}

void run_sweep_delta(const std::string& config_path, const std::string& deltas,
                     const std::string& out_path, int workers) {
  const ExperimentConfig cfg = ExperimentConfig::load(config_path);
  const AccuracyProfile profile = cfg.resolve_profile(std::nullopt);
  const ProblemBank bank = cfg.make_bank();
  const std::vector<double> values = cli::parse_double_list(deltas);

  std::ofstream out = open_out(out_path);
  for (std::size_t i = 0; i < values.size(); ++i) {
    TrainConfig train_cfg = cfg.train;
    train_cfg.delta = values[i];
    train_cfg.validate();
    const TrainResult result =
        train(cfg.policy_init, bank, profile, train_cfg, workers);
    RngStream eval_rng =
        make_stream(cfg.eval.seed, {kSweepEvalTag, static_cast<std::uint64_t>(i)});
    const EvalReport report = evaluate(result.policy, bank, profile,
                                       cfg.eval.samples, eval_rng, workers);
    const nlohmann::json row{{"delta", values[i]},
                             {"nothink_ratio", report.nothink_ratio},
                             {"accuracy", report.accuracy},
                             {"mean_total_len", report.mean_total_len}};
    out << row.dump() << '\n';
  }
}

void run_compare_samplers(const std::string& config_path,
                          const std::string& out_path, int workers) {
  const ExperimentConfig cfg = ExperimentConfig::load(config_path);
  const AccuracyProfile profile = cfg.resolve_profile(std::nullopt);
  const ProblemBank bank = cfg.make_bank();

  const SamplerKind kinds[] = {SamplerKind::ImportanceSampling,
                               SamplerKind::OnPolicy};
  std::vector<nlohmann::json> curves[2];
  for (int which = 0; which < 2; ++which) {
    TrainConfig train_cfg = cfg.train;
    train_cfg.sampler = kinds[which];
    if (train_cfg.sampler == SamplerKind::ImportanceSampling &&
        train_cfg.K % 2 != 0)
      throw std::invalid_argument("K must be even to compare samplers");
    curves[which].reserve(static_cast<std::size_t>(train_cfg.steps));
    const StepObserver observer = [&](int step, const PolicyParams& policy,
                                      const StepReport& report) {
      RngStream eval_rng = make_stream(
          cfg.eval.seed, {kCompareEvalTag, static_cast<std::uint64_t>(which),
                          static_cast<std::uint64_t>(step)});
      const EvalReport eval = evaluate(policy, bank, profile, cfg.eval.samples,
                                       eval_rng, workers);
      curves[which].push_back(
          nlohmann::json{{"loss", report.loss},
                         {"clip_fraction", report.clip_fraction},
                         {"train_nothink_ratio", report.nothink_ratio},
                         {"train_accuracy", report.train_accuracy},
                         {"train_mean_total_len", report.mean_total_len},
                         {"eval_nothink_ratio", eval.nothink_ratio},
                         {"eval_accuracy", eval.accuracy},
                         {"eval_mean_total_len", eval.mean_total_len}});
    };
    train(cfg.policy_init, bank, profile, train_cfg, workers, observer);
  }

  std::ofstream out = open_out(out_path);
  for (std::size_t s = 0; s < curves[0].size(); ++s) {
    const nlohmann::json row{{"step", static_cast<int>(s) + 1},
                             {"importance_sampling", curves[0][s]},
                             {"on_policy", curves[1][s]}};
    out << row.dump() << '\n';
  }
}

void run_analyze_logs(const std::string& in_path, const std::string& keywords,
                      const std::optional<std::string>& ref_path,
                      const std::string& out_path) {
  const std::vector<std::string> kws = cli::parse_string_list(keywords);
  const std::vector<ResponseLogRecord> records = read_response_log(in_path);
  const LogAnalysis analysis = analyze_logs(records, kws);
  nlohmann::json out = analysis;
  if (ref_path.has_value()) {
    const std::vector<ResponseLogRecord> ref_records =
        read_response_log(*ref_path);
    const LogAnalysis ref = analyze_logs(ref_records, kws);
    out["reference"] = ref;
    out["delta_vs_ref"] =
        delta_metrics(analysis.overall.accuracy, analysis.overall.mean_length,
                      ref.overall.accuracy, ref.overall.mean_length);
  }
  write_json_file(out_path, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive thinking-mode selection: synthetic RL testbed and "
               "response-log analyzer"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  int workers = 1;
  app.add_option("--workers", workers,
                 "Worker threads for rollout/evaluation phases")
      ->capture_default_str();

  std::string config_path, out_path, history_path, policy_path, in_path;
  std::string profile_flag, ref_flag;
  std::string deltas = "0,0.01,0.02,0.05,0.075,0.1";
  std::string keywords = "Wait,Alternatively";
  int samples = 16;

  auto* presample = app.add_subcommand(
      "presample", "Estimate per-problem reference rewards by pre-sampling");
  presample->add_option("--config", config_path, "Experiment config JSON")
      ->required();
  presample->add_option("--out", out_path, "Reference reward table JSON")
      ->required();

  auto* train_cmd =
      app.add_subcommand("train", "Run the mode-selection training loop");
  train_cmd->add_option("--config", config_path, "Experiment config JSON")
      ->required();
  train_cmd->add_option("--profile", profile_flag,
                        "Accuracy profile JSON (overrides config)");
  train_cmd->add_option("--out-history", history_path, "Step history JSONL")
      ->required();
  train_cmd->add_option("--out-policy", policy_path, "Final policy JSON")
      ->required();

  auto* eval_cmd = app.add_subcommand(
      "eval", "Evaluate a policy on the standard bank (50 problems per level)");
  eval_cmd->add_option("--policy", policy_path, "Policy JSON")->required();
  eval_cmd->add_option("--profile", profile_flag, "Accuracy profile JSON");
  eval_cmd->add_option("--samples", samples, "Responses per problem")
      ->capture_default_str();
  eval_cmd->add_option("--out", out_path, "Evaluation report JSON")->required();

  auto* sweep = app.add_subcommand(
      "sweep-delta", "Train once per delta value and tabulate final metrics");
  sweep->add_option("--config", config_path, "Experiment config JSON")
      ->required();
  sweep->add_option("--deltas", deltas, "Comma-separated delta values")
      ->capture_default_str();
  sweep->add_option("--out", out_path, "Summary JSONL, one row per delta")
      ->required();

  auto* compare = app.add_subcommand(
      "compare-samplers",
      "Train with importance sampling and on-policy sampling, shared seed");
  compare->add_option("--config", config_path, "Experiment config JSON")
      ->required();
  compare->add_option("--out", out_path, "Paired step curves JSONL")
      ->required();

  auto* analyze =
      app.add_subcommand("analyze-logs", "Analyze an external response log");
  analyze->add_option("--in", in_path, "Response log JSONL")->required();
  analyze->add_option("--keywords", keywords, "Comma-separated thinking keywords")
      ->capture_default_str();
  analyze->add_option("--ref-in", ref_flag,
                      "Reference response log JSONL for delta metrics");
  analyze->add_option("--out", out_path, "Analysis JSON")->required();

  try {
    app.parse(argc, argv);

    const auto opt = [](const std::string& s) {
      return s.empty() ? std::nullopt : std::optional<std::string>(s);
    };
    if (presample->parsed()) {
      run_presample(config_path, out_path, workers);
    } else if (train_cmd->parsed()) {
      run_train(config_path, opt(profile_flag), history_path, policy_path,
                workers);
    } else if (eval_cmd->parsed()) {
      run_eval(policy_path, opt(profile_flag), samples, out_path, workers);
    } else if (sweep->parsed()) {
      run_sweep_delta(config_path, deltas, out_path, workers);
    } else if (compare->parsed()) {
      run_compare_samplers(config_path, out_path, workers);
    } else if (analyze->parsed()) {
      run_analyze_logs(in_path, keywords, opt(ref_flag), out_path);
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
