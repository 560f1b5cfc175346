#include "adaptthink/logio.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace adaptthink {

bool operator==(const ResponseLogRecord& a, const ResponseLogRecord& b) {
  return a.problem_id == b.problem_id && a.dataset == b.dataset &&
         a.correct == b.correct && a.token_count == b.token_count &&
         a.first_token_is_end_think == b.first_token_is_end_think &&
         a.solution_text == b.solution_text;
}

void to_json(nlohmann::json& j, const ResponseLogRecord& r) {
  j = nlohmann::json{{"problem_id", r.problem_id},
                     {"dataset", r.dataset},
                     {"correct", r.correct},
                     {"token_count", r.token_count},
                     {"first_token_is_end_think", r.first_token_is_end_think}};
  if (r.solution_text.has_value()) j["solution_text"] = *r.solution_text;
}

void from_json(const nlohmann::json& j, ResponseLogRecord& r) {
  j.at("problem_id").get_to(r.problem_id);
  j.at("dataset").get_to(r.dataset);
  j.at("correct").get_to(r.correct);
  j.at("token_count").get_to(r.token_count);
  j.at("first_token_is_end_think").get_to(r.first_token_is_end_think);
  if (j.contains("solution_text") && !j.at("solution_text").is_null())
    r.solution_text = j.at("solution_text").get<std::string>();
  else
    r.solution_text.reset();
  if (r.token_count < 1)
    throw std::invalid_argument("token_count must be >= 1");
}

void to_json(nlohmann::json& j, const DatasetStats& s) {
  j = nlohmann::json{{"accuracy", s.accuracy},
                     {"mean_length", s.mean_length},
                     {"ratio_nt", s.ratio_nt},
                     {"count", s.count}};
}

void from_json(const nlohmann::json& j, DatasetStats& s) {
  j.at("accuracy").get_to(s.accuracy);
  j.at("mean_length").get_to(s.mean_length);
  j.at("ratio_nt").get_to(s.ratio_nt);
  j.at("count").get_to(s.count);
}

void to_json(nlohmann::json& j, const LogAnalysis& a) {
  j = nlohmann::json{{"overall", a.overall},
                     {"per_dataset", a.per_dataset},
                     {"implicit_thinking_ratio", a.implicit_thinking_ratio},
                     {"solution_text_count", a.solution_text_count},
                     {"keyword_hits", a.keyword_hits}};
}

void from_json(const nlohmann::json& j, LogAnalysis& a) {
  j.at("overall").get_to(a.overall);
  j.at("per_dataset").get_to(a.per_dataset);
  j.at("implicit_thinking_ratio").get_to(a.implicit_thinking_ratio);
  j.at("solution_text_count").get_to(a.solution_text_count);
  j.at("keyword_hits").get_to(a.keyword_hits);
}

namespace {

bool is_blank(const std::string& line) {
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

const char* kRequiredLogFields[] = {"problem_id", "dataset", "correct",
                                    "token_count",
                                    "first_token_is_end_think"};

}  // namespace

std::vector<ResponseLogRecord> read_response_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<ResponseLogRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error("parse error at line " +
                               std::to_string(line_no) + " of " + path + ": " +
                               e.what());
    }
    for (const char* field : kRequiredLogFields) {
      if (!j.contains(field))
        throw std::runtime_error("missing field " + std::string(field) +
                                 " at line " + std::to_string(line_no));
    }
    try {
      records.push_back(j.get<ResponseLogRecord>());
    } catch (const std::exception& e) {
      throw std::runtime_error("invalid record at line " +
                               std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

void write_response_log(std::span<const ResponseLogRecord> records,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& r : records) out << nlohmann::json(r).dump() << '\n';
}

bool contains_whole_word(const std::string& text, const std::string& word) {
  if (word.empty()) return false;
  const auto is_word_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
  };
  std::size_t pos = 0;
  while ((pos = text.find(word, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
    const std::size_t end = pos + word.size();
    const bool right_ok = end == text.size() || !is_word_char(text[end]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

LogAnalysis analyze_logs(std::span<const ResponseLogRecord> records,
                         std::span<const std::string> keywords) {
  if (records.empty()) throw std::invalid_argument("no records to analyze");

  LogAnalysis a;
  struct Acc {
    double correct = 0.0, length = 0.0, nt = 0.0;
    int count = 0;
  };
  std::map<std::string, Acc> per_dataset;
  Acc overall;
  int with_text = 0;
  int implicit = 0;
  for (const std::string& kw : keywords) a.keyword_hits[kw] = 0;

  for (const auto& r : records) {
    Acc& d = per_dataset[r.dataset];
    for (Acc* acc : {&overall, &d}) {
      acc->correct += r.correct ? 1.0 : 0.0;
      acc->length += r.token_count;
      acc->nt += r.first_token_is_end_think ? 1.0 : 0.0;
      ++acc->count;
    }
    if (r.solution_text.has_value()) {
      ++with_text;
      bool any = false;
      for (const std::string& kw : keywords) {
        if (contains_whole_word(*r.solution_text, kw)) {
          ++a.keyword_hits[kw];
          any = true;
        }
      }
      if (any) ++implicit;
    }
  }

  const auto to_stats = [](const Acc& acc) {
    return DatasetStats{acc.correct / acc.count, acc.length / acc.count,
                        acc.nt / acc.count, acc.count};
  };
  a.overall = to_stats(overall);
  for (const auto& [name, acc] : per_dataset)
    a.per_dataset[name] = to_stats(acc);
  a.solution_text_count = with_text;
  a.implicit_thinking_ratio =
      with_text > 0 ? static_cast<double>(implicit) / with_text : 0.0;
  return a;
}

std::string history_to_string(std::span<const StepReport> history) {
  std::ostringstream out;
  for (const auto& r : history) out << nlohmann::json(r).dump() << '\n';
  return out.str();
}

void write_history(std::span<const StepReport> history,
                   const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << history_to_string(history);
}

std::vector<StepReport> read_history(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<StepReport> history;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      history.push_back(nlohmann::json::parse(line).get<StepReport>());
    } catch (const std::exception& e) {
      throw std::runtime_error("corrupted history at line " +
                               std::to_string(line_no) + " of " + path + ": " +
                               e.what());
    }
  }
  return history;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("parse error in " + path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace adaptthink
