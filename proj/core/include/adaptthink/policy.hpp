#pragma once

#include <array>
#include <optional>
#include <utility>

#include <nlohmann/json.hpp>

#include "adaptthink/rng.hpp"
#include "adaptthink/types.hpp"

namespace adaptthink {

/// Tabular autoregressive policy over the four-token alphabet.
///
/// The first token is a binary choice between EndThink and BeginThink with
/// log-odds gate[level]. Every later body position is a binary choice
/// between Step (continue) and Stop with log-odds cont[level][mode]; the
/// body is force-stopped at l_max, and the post-Stop solution stub is fixed,
/// so both contribute probability one. This keeps the product decomposition
/// of the sequence probability exact.
struct PolicyParams {
  std::array<double, kNumLevels> gate{};
  std::array<std::array<double, kNumLevels>, kNumModes> cont{};
  int l_max = 64;
  int stub_len_thinking = 8;
  int stub_len_nothinking = 4;

  static PolicyParams defaults();
  int stub_len(ThinkingMode mode) const {
    return mode == ThinkingMode::NoThinking ? stub_len_nothinking
                                            : stub_len_thinking;
  }
  void validate() const;
};

void to_json(nlohmann::json& j, const PolicyParams& p);
void from_json(const nlohmann::json& j, PolicyParams& p);

/// Gradient with respect to the learnable fields of PolicyParams.
struct GradVector {
  std::array<double, kNumLevels> d_gate{};
  std::array<std::array<double, kNumLevels>, kNumModes> d_cont{};

  void add_scaled(const GradVector& other, double scale);
  void scale(double factor);
  double max_abs() const;
};

/// (p_end_think, p_begin_think) at the first position; the pair sums to 1.
std::pair<double, double> first_token_probs(const PolicyParams& params,
                                            const Problem& problem);

/// Probability of emitting Step (vs Stop) at a body position.
double continue_prob(const PolicyParams& params, int level, ThinkingMode mode);

/// Builds the well-formed response with the given mode and body length.
Response make_response(const PolicyParams& params, ThinkingMode mode,
                       int body_len);

/// Throws std::invalid_argument if the response is not a well-formed
/// trajectory under these params (token layout, lengths, mode tag).
void validate_response(const PolicyParams& params, const Response& response);

/// Samples a trajectory. If mode_override is set the first token is forced
/// and no random draw is consumed for it.
Response sample_response(const PolicyParams& params, const Problem& problem,
                         std::optional<ThinkingMode> mode_override,
                         RngStream& rng);

/// Log probability of the body decisions only (positions > 1). The forced
/// stop at l_max contributes zero.
double body_log_prob(const PolicyParams& params, const Problem& problem,
                     const Response& response);

/// Full sequence log probability: first-token term plus body terms.
double log_prob(const PolicyParams& params, const Problem& problem,
                const Response& response);

/// Exact gradient of log_prob. Forced decisions contribute zero.
GradVector grad_log_prob(const PolicyParams& params, const Problem& problem,
                         const Response& response);

/// Deep, independent copy (materializes a frozen old/reference policy).
PolicyParams snapshot(const PolicyParams& params);

}  // namespace adaptthink
