#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace adaptthink {

inline constexpr int kNumLevels = 5;
inline constexpr int kNumModes = 2;

/// Response mode: either a long thinking segment precedes the solution, or
/// the thinking segment is skipped entirely (first token closes it).
enum class ThinkingMode { Thinking, NoThinking };

inline int mode_index(ThinkingMode m) {
  return m == ThinkingMode::NoThinking ? 1 : 0;
}

inline const char* to_string(ThinkingMode m) {
  return m == ThinkingMode::NoThinking ? "nothinking" : "thinking";
}

/// Four-symbol token alphabet. Position 1 selects the mode; later positions
/// extend the body step by step until Stop.
enum class Token : std::uint8_t { EndThink, BeginThink, Step, Stop };

/// A task instance. Difficulty levels run 1..5.
struct Problem {
  int id = 0;
  int level = 1;
};

inline int level_index(int level) {
  if (level < 1 || level > kNumLevels)
    throw std::invalid_argument("level out of range: " + std::to_string(level));
  return level - 1;
}

/// A generated token trajectory. `tokens` holds the sampled prefix
/// [mode token, Step x body_len, Stop]; the fixed solution stub is not
/// materialized but is counted in total_len.
struct Response {
  std::vector<Token> tokens;
  ThinkingMode mode = ThinkingMode::Thinking;
  int body_len = 0;
  int total_len = 0;
};

}  // namespace adaptthink
