#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "eit/rng.hpp"

namespace eit {

// Policy contract (see ToyPolicy): nested Prompt/Response types plus
//   sample(prompt, rng) -> Response
//   log_prob(prompt, response) -> double
//   log_prob_gradient(prompt, response) -> VectorXd
//   parameters() / apply_update(delta)
//   kl_to(ref, prompt) -> double, kl_gradient(ref, prompt) -> VectorXd

struct GrpoConfig {
  int group_size = 8;
  double kl_beta = 0.0005;
  double learning_rate = 0.05;
  int steps = 300;
  int batch_prompts = 32;
  int eval_every = 10;
  std::uint64_t seed = 0;
};

template <typename Policy>
struct GroupRollout {
  using Prompt = typename Policy::Prompt;
  using Response = typename Policy::Response;

  std::string prompt_id;
  Prompt prompt{};
  std::vector<Response> responses;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> advantages;
  double group_mean = 0.0;
};

struct TrainRecord {
  int step = 0;
  double mean_reward = 0.0;
  double mean_kl = 0.0;
  Eigen::VectorXd params;
  std::optional<double> val_score;  // present on checkpoint-evaluation steps
};

struct TrainingLog {
  std::vector<TrainRecord> records;
  int best_step = 0;
  double best_val = 0.0;
};

inline std::pair<std::vector<double>, double> compute_advantages(
    std::span<const double> rewards) {
  if (rewards.size() < 2)
    throw std::invalid_argument("advantage baseline needs a group of >= 2");
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(rewards.size());
  std::vector<double> adv(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = rewards[i] - mean;
  return {std::move(adv), mean};
}

template <typename Policy>
GroupRollout<Policy> sample_group(const Policy& policy, std::string prompt_id,
                                  const typename Policy::Prompt& prompt, int g,
                                  Rng& rng) {
  if (g < 2) throw std::invalid_argument("group size must be >= 2");
  GroupRollout<Policy> out;
  out.prompt_id = std::move(prompt_id);
  out.prompt = prompt;
  out.responses.reserve(g);
  out.log_probs.reserve(g);
  for (int i = 0; i < g; ++i) {
    out.responses.push_back(policy.sample(prompt, rng));
    out.log_probs.push_back(policy.log_prob(prompt, out.responses.back()));
  }
  return out;
}

// Ascent direction: lr * mean over groups of
//   [(1/G) sum_i advantage_i * grad log pi(y_i) - beta * grad KL(pi || ref)].
template <typename Policy>
Eigen::VectorXd grpo_step(const Policy& policy, const Policy& ref,
                          std::span<const GroupRollout<Policy>> batch,
                          const GrpoConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("empty rollout batch");
  Eigen::VectorXd total = Eigen::VectorXd::Zero(policy.parameters().size());
  for (const auto& group : batch) {
    if (group.advantages.size() != group.responses.size())
      throw std::invalid_argument("rollout " + group.prompt_id +
                                  ": advantages not filled");
    Eigen::VectorXd g = Eigen::VectorXd::Zero(total.size());
    for (std::size_t i = 0; i < group.responses.size(); ++i)
      g += group.advantages[i] *
           policy.log_prob_gradient(group.prompt, group.responses[i]);
    g /= static_cast<double>(group.responses.size());
    if (cfg.kl_beta != 0.0) g -= cfg.kl_beta * policy.kl_gradient(ref, group.prompt);
    if (!g.allFinite())
      throw std::runtime_error("non-finite gradient for prompt " + group.prompt_id);
    total += g;
  }
  return (cfg.learning_rate / static_cast<double>(batch.size())) * total;
}

template <typename Policy>
struct TrainResult {
  Policy policy;  // checkpoint with the highest validation score
  TrainingLog log;
};

// reward_fn(prompt, response) -> double; val_fn(policy) -> double (higher is
// better; sampled every eval_every steps for checkpoint selection).
template <typename Policy, typename RewardFn, typename ValFn>
TrainResult<Policy> train(Policy policy, const Policy& ref,
                          const std::vector<typename Policy::Prompt>& dataset,
                          RewardFn&& reward_fn, ValFn&& val_fn,
                          const GrpoConfig& cfg) {
  if (dataset.empty()) throw std::invalid_argument("empty training dataset");
  if (cfg.batch_prompts < 1) throw std::invalid_argument("batch_prompts must be >= 1");
  auto rng = make_rng(cfg.seed, "grpo-train");

  TrainResult<Policy> result{policy, {}};
  result.log.best_val = val_fn(policy);
  result.log.best_step = 0;
  Eigen::VectorXd best_params = policy.parameters();

  for (int step = 1; step <= cfg.steps; ++step) {
    std::vector<GroupRollout<Policy>> batch;
    batch.reserve(cfg.batch_prompts);
    double reward_sum = 0.0;
    int reward_n = 0;
    for (int b = 0; b < cfg.batch_prompts; ++b) {
      const auto idx = uniform_index(rng, dataset.size());
      auto group = sample_group(policy, std::to_string(idx), dataset[idx],
                                cfg.group_size, rng);
      group.rewards.reserve(group.responses.size());
      for (const auto& resp : group.responses)
        group.rewards.push_back(reward_fn(group.prompt, resp));
      auto [adv, mean] = compute_advantages(group.rewards);
      group.advantages = std::move(adv);
      group.group_mean = mean;
      reward_sum += mean * static_cast<double>(group.rewards.size());
      reward_n += static_cast<int>(group.rewards.size());
      batch.push_back(std::move(group));
    }
    policy.apply_update(grpo_step<Policy>(policy, ref, batch, cfg));

    double kl_sum = 0.0;
    for (const auto& group : batch) kl_sum += policy.kl_to(ref, group.prompt);

    TrainRecord rec;
    rec.step = step;
    rec.mean_reward = reward_sum / static_cast<double>(reward_n);
    rec.mean_kl = kl_sum / static_cast<double>(batch.size());
    rec.params = policy.parameters();
    if (step % cfg.eval_every == 0 || step == cfg.steps) {
      const double val = val_fn(policy);
      rec.val_score = val;
      if (val > result.log.best_val) {
        result.log.best_val = val;
        result.log.best_step = step;
        best_params = policy.parameters();
      }
    }
    result.log.records.push_back(std::move(rec));
  }
  result.policy = Policy(best_params);
  return result;
}

inline void write_training_csv(const std::filesystem::path& path,
                               const TrainingLog& log,
                               std::span<const char* const> param_names) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << "step,mean_reward,mean_kl";
  for (const char* name : param_names) out << ',' << name;
  out << ",val_score\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), ",%.12g", v);
    out << buf;
  };
  for (const auto& rec : log.records) {
    out << rec.step;
    put(rec.mean_reward);
    put(rec.mean_kl);
    for (int i = 0; i < rec.params.size(); ++i) put(rec.params[i]);
    if (rec.val_score)
      put(*rec.val_score);
    else
      out << ',';
    out << '\n';
  }
}

}  // namespace eit
