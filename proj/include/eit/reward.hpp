#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "eit/types.hpp"

namespace eit {

// Weights of the hierarchical reward. The enable_* switches exist for
// ablation runs; a disabled component contributes exactly zero.
struct RewardConfig {
  double alpha = 0.1;       // structural weight
  double acc_weight = 1.0;  // accuracy weight
  double gamma1 = 0.5;      // adversarial bonus / bias penalty
  double gamma2 = 0.3;      // contrarian penalty
  bool enable_struct = true;
  bool enable_acc = true;
  bool enable_ind = true;
};

struct JudgedResponse {
  Choice choice = Choice::Unparsed;
  bool cot_well_formed = false;
  std::string raw_text;
};

enum class BiasContext { Adversarial, Supportive, Unbiased };

struct RewardBreakdown {
  double r_struct = 0.0;
  double r_acc = 0.0;
  double r_ind = 0.0;
  double total = 0.0;
  BiasContext context = BiasContext::Unbiased;
};

// Format contract: one open-think marker, one close-think marker after it,
// and a non-empty answer segment after the close marker.
inline bool cot_well_formed(std::string_view text) {
  constexpr std::string_view open = "<think>";
  constexpr std::string_view close = "</think>";
  const auto o = text.find(open);
  if (o == std::string_view::npos) return false;
  const auto c = text.find(close, o + open.size());
  if (c == std::string_view::npos) return false;
  if (text.find(open, o + open.size()) != std::string_view::npos) return false;
  if (text.find(close, c + close.size()) != std::string_view::npos) return false;
  const auto tail = text.substr(c + close.size());
  return tail.find_first_not_of(" \t\r\n") != std::string_view::npos;
}

inline BiasContext classify_context(Label truth, std::optional<Label> bias_target) {
  if (!bias_target) return BiasContext::Unbiased;
  return *bias_target == truth ? BiasContext::Supportive : BiasContext::Adversarial;
}

inline double reward_struct(const JudgedResponse& resp, const RewardConfig& cfg) {
  if (!cfg.enable_struct) return 0.0;
  return resp.cot_well_formed ? cfg.alpha : 0.0;
}

// Unparsed never counts as correct.
inline double reward_acc(Choice choice, Label truth, const RewardConfig& cfg) {
  if (!cfg.enable_acc) return 0.0;
  return matches(choice, truth) ? cfg.acc_weight : 0.0;
}

// Adversarial: +gamma1 for truth, -gamma1 for the bias target, 0 otherwise.
// Supportive: 0 for truth, -gamma2 for anything else (unparsed included).
inline double reward_ind(Choice choice, Label truth, std::optional<Label> bias_target,
                         const RewardConfig& cfg) {
  if (!cfg.enable_ind || !bias_target) return 0.0;
  if (*bias_target != truth) {
    if (matches(choice, truth)) return cfg.gamma1;
    if (matches(choice, *bias_target)) return -cfg.gamma1;
    return 0.0;
  }
  return matches(choice, truth) ? 0.0 : -cfg.gamma2;
}

inline RewardBreakdown total_reward(const JudgedResponse& resp, Label truth,
                                    std::optional<Label> bias_target,
                                    const RewardConfig& cfg) {
  RewardBreakdown out;
  out.context = classify_context(truth, bias_target);
  out.r_struct = reward_struct(resp, cfg);
  out.r_acc = reward_acc(resp.choice, truth, cfg);
  out.r_ind = reward_ind(resp.choice, truth, bias_target, cfg);
  out.total = out.r_struct + out.r_acc + out.r_ind;
  return out;
}

}  // namespace eit
