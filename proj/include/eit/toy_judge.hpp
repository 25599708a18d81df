#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eit/reward.hpp"
#include "eit/rng.hpp"
#include "eit/types.hpp"

namespace eit::toy {

// Minimal synthetic stand-in for a biased two-option prompt: a signed
// evidence scalar (sign encodes the truth), a bias cue toward A/none/B, and
// the slot the correct option occupies.
struct SyntheticItem {
  double evidence = 0.0;   // in [-1,-delta] U [delta,1]; >0 means truth = A
  int cue = 0;             // +1 toward A, -1 toward B, 0 none
  int position_flag = 1;   // +1 correct option first, -1 second
  Label truth = Label::A;

  std::optional<Label> bias_target() const {
    if (cue == 0) return std::nullopt;
    return cue > 0 ? Label::A : Label::B;
  }
};

inline constexpr double kEvidenceFloor = 0.1;

enum class CuePolicy { BalancedConflict, WrongOnly, CorrectOnly, Clean };

std::string cue_policy_name(CuePolicy p);
CuePolicy parse_cue_policy(const std::string& s);

SyntheticItem gen_item(Rng& rng, CuePolicy policy);

// Parameter vector layout for the toy policy.
inline constexpr int kParamCount = 5;
inline constexpr std::array<const char*, kParamCount> kParamNames = {
    "w_evidence", "w_bias", "w_position", "bias0", "w_format"};
enum ParamIndex { kWEvidence = 0, kWBias, kWPosition, kBias0, kWFormat };

struct ToyResponse {
  Label choice = Label::A;
  bool cot_well_formed = true;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double choice_logit(const Eigen::VectorXd& params, const SyntheticItem& item);
double prob_choice_a(const Eigen::VectorXd& params, const SyntheticItem& item);

// Logistic policy over (evidence, cue, position) with an independent
// format-emission head. Satisfies the grpo policy interface.
class ToyPolicy {
 public:
  using Prompt = SyntheticItem;
  using Response = ToyResponse;

  ToyPolicy() : params_(Eigen::VectorXd::Zero(kParamCount)) {}
  explicit ToyPolicy(Eigen::VectorXd params);

  Response sample(const Prompt& item, Rng& rng) const;
  double log_prob(const Prompt& item, const Response& resp) const;
  Eigen::VectorXd log_prob_gradient(const Prompt& item, const Response& resp) const;

  const Eigen::VectorXd& parameters() const { return params_; }
  void apply_update(const Eigen::VectorXd& delta);

  // Exact KL over the 4-outcome response space (choice x format).
  double kl_to(const ToyPolicy& ref, const Prompt& item) const;
  Eigen::VectorXd kl_gradient(const ToyPolicy& ref, const Prompt& item) const;

 private:
  Eigen::VectorXd params_;
};

JudgedResponse to_judged(const ToyResponse& resp);

// Exact expected reward of the Bernoulli response mixture on a fixed item set.
double expected_reward(const Eigen::VectorXd& params,
                       std::span<const SyntheticItem> items,
                       const RewardConfig& cfg);

// Frozen evaluation set; for BalancedConflict the adversarial/supportive
// contexts alternate exactly so the sample carries no alignment skew.
std::vector<SyntheticItem> frozen_item_set(CuePolicy policy, int n_items,
                                           std::uint64_t seed);

struct GridSpec {
  double w_evidence_min = 0.0;
  double w_evidence_max = 6.0;
  double w_bias_min = -2.0;
  double w_bias_max = 2.0;
  double pitch = 0.25;
  double w_format = 3.0;  // fixed; not part of the lattice
};

struct SurfacePoint {
  double w_evidence = 0.0;
  double w_bias = 0.0;
  double expected_reward = 0.0;
};

struct OracleResult {
  Eigen::VectorXd argmax;  // full parameter vector at the best lattice point
  double value = 0.0;
  std::vector<SurfacePoint> surface;  // lattice order: w_evidence major
};

// Exact expected reward at every lattice point over (w_evidence, w_bias);
// w_position and bias0 are held at zero, w_format at the grid's fixed value.
OracleResult brute_force_optimal(CuePolicy policy, const RewardConfig& cfg,
                                 const GridSpec& grid, int n_items,
                                 std::uint64_t seed);

void write_surface_csv(const std::filesystem::path& path,
                       const std::vector<SurfacePoint>& surface);
void write_oracle_json(const std::filesystem::path& path, const OracleResult& result);

void write_params_json(const std::filesystem::path& path, const Eigen::VectorXd& params);
Eigen::VectorXd read_params_json(const std::filesystem::path& path);

}  // namespace eit::toy
