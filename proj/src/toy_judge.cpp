#include "eit/toy_judge.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace eit::toy {

using nlohmann::json;

std::string cue_policy_name(CuePolicy p) {
  switch (p) {
    case CuePolicy::BalancedConflict: return "balanced_conflict";
    case CuePolicy::WrongOnly: return "wrong_only";
    case CuePolicy::CorrectOnly: return "correct_only";
    default: return "clean";
  }
}

CuePolicy parse_cue_policy(const std::string& s) {
  if (s == "balanced_conflict") return CuePolicy::BalancedConflict;
  if (s == "wrong_only") return CuePolicy::WrongOnly;
  if (s == "correct_only") return CuePolicy::CorrectOnly;
  if (s == "clean") return CuePolicy::Clean;
  throw std::invalid_argument("unknown cue policy: " + s);
}

namespace {

SyntheticItem item_from_parts(double magnitude, bool truth_is_a, bool correct_first,
                              CuePolicy policy, bool cue_matches_truth) {
  SyntheticItem item;
  item.truth = truth_is_a ? Label::A : Label::B;
  item.evidence = truth_is_a ? magnitude : -magnitude;
  item.position_flag = correct_first ? 1 : -1;
  const int truth_dir = truth_is_a ? 1 : -1;
  switch (policy) {
    case CuePolicy::Clean: item.cue = 0; break;
    case CuePolicy::WrongOnly: item.cue = -truth_dir; break;
    case CuePolicy::CorrectOnly: item.cue = truth_dir; break;
    case CuePolicy::BalancedConflict:
      item.cue = cue_matches_truth ? truth_dir : -truth_dir;
      break;
  }
  return item;
}

}  // namespace

SyntheticItem gen_item(Rng& rng, CuePolicy policy) {
  const double magnitude = uniform_real(rng, kEvidenceFloor, 1.0);
  const bool truth_is_a = coin(rng);
  const bool correct_first = coin(rng);
  const bool cue_matches = policy == CuePolicy::BalancedConflict ? coin(rng) : false;
  return item_from_parts(magnitude, truth_is_a, correct_first, policy, cue_matches);
}

double choice_logit(const Eigen::VectorXd& params, const SyntheticItem& item) {
  return params[kWEvidence] * item.evidence + params[kWBias] * item.cue +
         params[kWPosition] * item.position_flag + params[kBias0];
}

double prob_choice_a(const Eigen::VectorXd& params, const SyntheticItem& item) {
  return sigmoid(choice_logit(params, item));
}

ToyPolicy::ToyPolicy(Eigen::VectorXd params) : params_(std::move(params)) {
  if (params_.size() != kParamCount)
    throw std::invalid_argument("toy policy expects " + std::to_string(kParamCount) +
                                " parameters");
}

ToyPolicy::Response ToyPolicy::sample(const Prompt& item, Rng& rng) const {
  Response resp;
  resp.choice = uniform_real(rng, 0.0, 1.0) < prob_choice_a(params_, item)
                    ? Label::A
                    : Label::B;
  resp.cot_well_formed = uniform_real(rng, 0.0, 1.0) < sigmoid(params_[kWFormat]);
  return resp;
}

namespace {

// log(sigmoid(z)), stable for large |z|.
double log_sigmoid(double z) {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

Eigen::Vector4d choice_features(const SyntheticItem& item) {
  return {item.evidence, static_cast<double>(item.cue),
          static_cast<double>(item.position_flag), 1.0};
}

}  // namespace

double ToyPolicy::log_prob(const Prompt& item, const Response& resp) const {
  const double z = choice_logit(params_, item);
  const double zf = params_[kWFormat];
  double lp = resp.choice == Label::A ? log_sigmoid(z) : log_sigmoid(-z);
  lp += resp.cot_well_formed ? log_sigmoid(zf) : log_sigmoid(-zf);
  return lp;
}

Eigen::VectorXd ToyPolicy::log_prob_gradient(const Prompt& item,
                                             const Response& resp) const {
  const double p_a = prob_choice_a(params_, item);
  const double p_fmt = sigmoid(params_[kWFormat]);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(kParamCount);
  const double choice_err = (resp.choice == Label::A ? 1.0 : 0.0) - p_a;
  grad.head<4>() = choice_err * choice_features(item);
  grad[kWFormat] = (resp.cot_well_formed ? 1.0 : 0.0) - p_fmt;
  return grad;
}

void ToyPolicy::apply_update(const Eigen::VectorXd& delta) {
  if (delta.size() != params_.size())
    throw std::invalid_argument("parameter delta has wrong dimension");
  params_ += delta;
}

namespace {

double bernoulli_kl(double z_p, double z_q) {
  const double p = sigmoid(z_p);
  return p * (log_sigmoid(z_p) - log_sigmoid(z_q)) +
         (1.0 - p) * (log_sigmoid(-z_p) - log_sigmoid(-z_q));
}

}  // namespace

double ToyPolicy::kl_to(const ToyPolicy& ref, const Prompt& item) const {
  const double kl_choice =
      bernoulli_kl(choice_logit(params_, item), choice_logit(ref.params_, item));
  const double kl_fmt = bernoulli_kl(params_[kWFormat], ref.params_[kWFormat]);
  return kl_choice + kl_fmt;
}

Eigen::VectorXd ToyPolicy::kl_gradient(const ToyPolicy& ref, const Prompt& item) const {
  // dKL/dz = p(1-p)(z - z_ref) for Bernoulli logits.
  const double z = choice_logit(params_, item);
  const double z_ref = choice_logit(ref.params_, item);
  const double p_a = sigmoid(z);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(kParamCount);
  grad.head<4>() = p_a * (1.0 - p_a) * (z - z_ref) * choice_features(item);
  const double zf = params_[kWFormat];
  const double pf = sigmoid(zf);
  grad[kWFormat] = pf * (1.0 - pf) * (zf - ref.params_[kWFormat]);
  return grad;
}

JudgedResponse to_judged(const ToyResponse& resp) {
  JudgedResponse out;
  out.choice = to_choice(resp.choice);
  out.cot_well_formed = resp.cot_well_formed;
  return out;
}

double expected_reward(const Eigen::VectorXd& params,
                       std::span<const SyntheticItem> items,
                       const RewardConfig& cfg) {
  if (items.empty()) throw std::invalid_argument("empty item set");
  const double p_fmt = sigmoid(params[kWFormat]);
  double total = 0.0;
  for (const auto& item : items) {
    const double p_a = prob_choice_a(params, item);
    const double p_truth = item.truth == Label::A ? p_a : 1.0 - p_a;
    double r = 0.0;
    if (cfg.enable_struct) r += cfg.alpha * p_fmt;
    if (cfg.enable_acc) r += cfg.acc_weight * p_truth;
    if (cfg.enable_ind && item.cue != 0) {
      const auto target = *item.bias_target();
      if (target != item.truth)
        r += cfg.gamma1 * p_truth - cfg.gamma1 * (1.0 - p_truth);
      else
        r += -cfg.gamma2 * (1.0 - p_truth);
    }
    total += r;
  }
  return total / static_cast<double>(items.size());
}

std::vector<SyntheticItem> frozen_item_set(CuePolicy policy, int n_items,
                                           std::uint64_t seed) {
  auto rng = make_rng(seed, "toy-frozen-items");
  std::vector<SyntheticItem> items;
  items.reserve(n_items);
  for (int i = 0; i < n_items; ++i) {
    const double magnitude = uniform_real(rng, kEvidenceFloor, 1.0);
    const bool truth_is_a = coin(rng);
    const bool correct_first = coin(rng);
    // Alternate contexts exactly so the frozen sample is balanced by
    // construction, not just in expectation.
    const bool cue_matches = (i % 2) == 0;
    items.push_back(
        item_from_parts(magnitude, truth_is_a, correct_first, policy, cue_matches));
  }
  return items;
}

OracleResult brute_force_optimal(CuePolicy policy, const RewardConfig& cfg,
                                 const GridSpec& grid, int n_items,
                                 std::uint64_t seed) {
  if (grid.pitch <= 0.0) throw std::invalid_argument("grid pitch must be positive");
  if (grid.w_evidence_max < grid.w_evidence_min ||
      grid.w_bias_max < grid.w_bias_min)
    throw std::invalid_argument("empty grid");
  const auto items = frozen_item_set(policy, n_items, seed);

  OracleResult result;
  Eigen::VectorXd params = Eigen::VectorXd::Zero(kParamCount);
  params[kWFormat] = grid.w_format;
  double best = -std::numeric_limits<double>::infinity();
  const auto steps = [&](double lo, double hi) {
    return static_cast<int>(std::llround((hi - lo) / grid.pitch));
  };
  for (int i = 0; i <= steps(grid.w_evidence_min, grid.w_evidence_max); ++i) {
    const double we = grid.w_evidence_min + i * grid.pitch;
    for (int j = 0; j <= steps(grid.w_bias_min, grid.w_bias_max); ++j) {
      const double wb = grid.w_bias_min + j * grid.pitch;
      params[kWEvidence] = we;
      params[kWBias] = wb;
      const double value = expected_reward(params, items, cfg);
      result.surface.push_back({we, wb, value});
      if (value > best) {
        best = value;
        result.argmax = params;
      }
    }
  }
  result.value = best;
  return result;
}

void write_surface_csv(const std::filesystem::path& path,
                       const std::vector<SurfacePoint>& surface) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << "w_evidence,w_bias,expected_reward\n";
  char buf[128];
  for (const auto& p : surface) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.12g\n", p.w_evidence, p.w_bias,
                  p.expected_reward);
    out << buf;
  }
}

namespace {

json params_to_json(const Eigen::VectorXd& params) {
  json obj = json::object();
  for (int i = 0; i < kParamCount; ++i) obj[kParamNames[i]] = params[i];
  return obj;
}

}  // namespace

void write_oracle_json(const std::filesystem::path& path, const OracleResult& result) {
  json doc{{"argmax", params_to_json(result.argmax)}, {"value", result.value}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << doc.dump(2) << '\n';
}

void write_params_json(const std::filesystem::path& path,
                       const Eigen::VectorXd& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << params_to_json(params).dump(2) << '\n';
}

Eigen::VectorXd read_params_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  json doc = json::parse(in);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(kParamCount);
  for (int i = 0; i < kParamCount; ++i) params[i] = doc.at(kParamNames[i]).get<double>();
  return params;
}

}  // namespace eit::toy
