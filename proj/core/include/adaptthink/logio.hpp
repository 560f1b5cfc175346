#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adaptthink/trainer.hpp"

namespace adaptthink {

/// One externally graded model response, as ingested from a JSONL log.
struct ResponseLogRecord {
  std::string problem_id;
  std::string dataset;
  bool correct = false;
  int token_count = 1;
  bool first_token_is_end_think = false;
  std::optional<std::string> solution_text;
};

bool operator==(const ResponseLogRecord& a, const ResponseLogRecord& b);

void to_json(nlohmann::json& j, const ResponseLogRecord& r);
void from_json(const nlohmann::json& j, ResponseLogRecord& r);

struct DatasetStats {
  double accuracy = 0.0;
  double mean_length = 0.0;
  double ratio_nt = 0.0;
  int count = 0;
};

void to_json(nlohmann::json& j, const DatasetStats& s);
void from_json(const nlohmann::json& j, DatasetStats& s);

struct LogAnalysis {
  DatasetStats overall;
  std::map<std::string, DatasetStats> per_dataset;
  /// Fraction of records whose solution text contains at least one keyword
  /// as a case-sensitive whole-word match; records without solution text are
  /// excluded from the denominator.
  double implicit_thinking_ratio = 0.0;
  int solution_text_count = 0;
  std::map<std::string, int> keyword_hits;  // records containing the keyword
};

void to_json(nlohmann::json& j, const LogAnalysis& a);
void from_json(const nlohmann::json& j, LogAnalysis& a);

inline const std::vector<std::string> kDefaultThinkingKeywords = {
    "Wait", "Alternatively"};

/// Order-preserving JSONL parse. Errors carry the 1-based line number and,
/// for missing required fields, the field name.
std::vector<ResponseLogRecord> read_response_log(const std::string& path);

void write_response_log(std::span<const ResponseLogRecord> records,
                        const std::string& path);

/// Case-sensitive whole-word containment; word characters are ASCII
/// alphanumerics and underscore.
bool contains_whole_word(const std::string& text, const std::string& word);

LogAnalysis analyze_logs(std::span<const ResponseLogRecord> records,
                         std::span<const std::string> keywords);

/// Training-history persistence: one JSON object per line, one line per
/// step. Round-trips losslessly for finite values.
void write_history(std::span<const StepReport> history,
                   const std::string& path);
std::vector<StepReport> read_history(const std::string& path);

std::string history_to_string(std::span<const StepReport> history);

/// Whole-document JSON file helpers shared by configs and reports.
nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace adaptthink
