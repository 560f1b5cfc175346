#include "adaptthink/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "adaptthink/math.hpp"

namespace adaptthink {

PolicyParams PolicyParams::defaults() {
  PolicyParams p;
  p.gate.fill(-6.0);  // strong initial preference for Thinking
  for (auto& row : p.cont) row.fill(2.0);
  p.l_max = 64;
  p.stub_len_thinking = 8;
  p.stub_len_nothinking = 4;
  return p;
}

void PolicyParams::validate() const {
  for (double g : gate)
    if (!std::isfinite(g)) throw std::invalid_argument("non-finite gate logit");
  for (const auto& row : cont)
    for (double c : row)
      if (!std::isfinite(c))
        throw std::invalid_argument("non-finite cont logit");
  if (l_max < 1) throw std::invalid_argument("l_max must be >= 1");
  if (stub_len_thinking < 0 || stub_len_nothinking < 0)
    throw std::invalid_argument("stub lengths must be >= 0");
}

void to_json(nlohmann::json& j, const PolicyParams& p) {
  j = nlohmann::json{{"gate", p.gate},
                     {"cont",
                      {{"thinking", p.cont[0]}, {"nothinking", p.cont[1]}}},
                     {"L_max", p.l_max},
                     {"stub_len_thinking", p.stub_len_thinking},
                     {"stub_len_nothinking", p.stub_len_nothinking}};
}

void from_json(const nlohmann::json& j, PolicyParams& p) {
  j.at("gate").get_to(p.gate);
  j.at("cont").at("thinking").get_to(p.cont[0]);
  j.at("cont").at("nothinking").get_to(p.cont[1]);
  j.at("L_max").get_to(p.l_max);
  j.at("stub_len_thinking").get_to(p.stub_len_thinking);
  j.at("stub_len_nothinking").get_to(p.stub_len_nothinking);
  p.validate();
}

void GradVector::add_scaled(const GradVector& other, double s) {
  for (int l = 0; l < kNumLevels; ++l) {
    d_gate[static_cast<std::size_t>(l)] +=
        s * other.d_gate[static_cast<std::size_t>(l)];
    for (int m = 0; m < kNumModes; ++m)
      d_cont[static_cast<std::size_t>(m)][static_cast<std::size_t>(l)] +=
          s * other.d_cont[static_cast<std::size_t>(m)]
                          [static_cast<std::size_t>(l)];
  }
}

void GradVector::scale(double factor) {
  for (auto& g : d_gate) g *= factor;
  for (auto& row : d_cont)
    for (auto& g : row) g *= factor;
}

double GradVector::max_abs() const {
  double m = 0.0;
  for (double g : d_gate) m = std::max(m, std::abs(g));
  for (const auto& row : d_cont)
    for (double g : row) m = std::max(m, std::abs(g));
  return m;
}

std::pair<double, double> first_token_probs(const PolicyParams& params,
                                            const Problem& problem) {
  const double z = params.gate[static_cast<std::size_t>(level_index(problem.level))];
  return {sigmoid(z), sigmoid(-z)};
}

double continue_prob(const PolicyParams& params, int level, ThinkingMode mode) {
  return sigmoid(params.cont[static_cast<std::size_t>(mode_index(mode))]
                            [static_cast<std::size_t>(level_index(level))]);
}

Response make_response(const PolicyParams& params, ThinkingMode mode,
                       int body_len) {
  if (body_len < 0 || body_len > params.l_max)
    throw std::invalid_argument("body_len outside [0, l_max]");
  Response r;
  r.mode = mode;
  r.body_len = body_len;
  r.tokens.reserve(static_cast<std::size_t>(body_len) + 2);
  r.tokens.push_back(mode == ThinkingMode::NoThinking ? Token::EndThink
                                                      : Token::BeginThink);
  for (int i = 0; i < body_len; ++i) r.tokens.push_back(Token::Step);
  r.tokens.push_back(Token::Stop);
  r.total_len = 1 + body_len + 1 + params.stub_len(mode);
  return r;
}

void validate_response(const PolicyParams& params, const Response& response) {
  if (response.tokens.size() < 2)
    throw std::invalid_argument("response must hold a mode token and a Stop");
  const Token first = response.tokens.front();
  if (first != Token::EndThink && first != Token::BeginThink)
    throw std::invalid_argument("first token must select a mode");
  const ThinkingMode tag_mode = first == Token::EndThink
                                    ? ThinkingMode::NoThinking
                                    : ThinkingMode::Thinking;
  if (tag_mode != response.mode)
    throw std::invalid_argument("mode tag disagrees with first token");
  int steps = 0;
  for (std::size_t i = 1; i + 1 < response.tokens.size(); ++i) {
    if (response.tokens[i] != Token::Step)
      throw std::invalid_argument("body may contain only Step tokens");
    ++steps;
  }
  if (response.tokens.back() != Token::Stop)
    throw std::invalid_argument("response must end with Stop");
  if (steps != response.body_len)
    throw std::invalid_argument("body_len disagrees with token count");
  if (response.body_len > params.l_max)
    throw std::invalid_argument("body exceeds l_max");
  const int expected_total =
      1 + response.body_len + 1 + params.stub_len(response.mode);
  if (response.total_len != expected_total)
    throw std::invalid_argument("total_len disagrees with layout");
}

Response sample_response(const PolicyParams& params, const Problem& problem,
                         std::optional<ThinkingMode> mode_override,
                         RngStream& rng) {
  const int li = level_index(problem.level);
  ThinkingMode mode;
  if (mode_override.has_value()) {
    mode = *mode_override;
  } else {
    const double p_end = sigmoid(params.gate[static_cast<std::size_t>(li)]);
    mode = uniform01(rng) < p_end ? ThinkingMode::NoThinking
                                  : ThinkingMode::Thinking;
  }
  const double p_cont = sigmoid(params.cont[static_cast<std::size_t>(
      mode_index(mode))][static_cast<std::size_t>(li)]);
  int body_len = 0;
  while (body_len < params.l_max && uniform01(rng) < p_cont) ++body_len;
  return make_response(params, mode, body_len);
}

double body_log_prob(const PolicyParams& params, const Problem& problem,
                     const Response& response) {
  validate_response(params, response);
  const int li = level_index(problem.level);
  const double c = params.cont[static_cast<std::size_t>(
      mode_index(response.mode))][static_cast<std::size_t>(li)];
  double lp = response.body_len * log_sigmoid(c);
  if (response.body_len < params.l_max) lp += log_sigmoid(-c);
  // else: the Stop at l_max is forced and contributes log 1 = 0
  return lp;
}

double log_prob(const PolicyParams& params, const Problem& problem,
                const Response& response) {
  const double body = body_log_prob(params, problem, response);
  const double z =
      params.gate[static_cast<std::size_t>(level_index(problem.level))];
  const double first = response.mode == ThinkingMode::NoThinking
                           ? log_sigmoid(z)
                           : log_sigmoid(-z);
  return first + body;
}

GradVector grad_log_prob(const PolicyParams& params, const Problem& problem,
                         const Response& response) {
  validate_response(params, response);
  const std::size_t li =
      static_cast<std::size_t>(level_index(problem.level));
  const std::size_t mi = static_cast<std::size_t>(mode_index(response.mode));
  GradVector g;
  const double s_gate = sigmoid(params.gate[li]);
  g.d_gate[li] =
      (response.mode == ThinkingMode::NoThinking ? 1.0 : 0.0) - s_gate;
  const double s_cont = sigmoid(params.cont[mi][li]);
  const int decisions =
      response.body_len + (response.body_len < params.l_max ? 1 : 0);
  g.d_cont[mi][li] = response.body_len - decisions * s_cont;
  return g;
}

PolicyParams snapshot(const PolicyParams& params) { return params; }

}  // namespace adaptthink
