#include <doctest.h>

#include <cmath>
#include <numeric>

#include "eit/grpo.hpp"
#include "eit/toy_judge.hpp"

using namespace eit;
using namespace eit::toy;

namespace {

Eigen::VectorXd random_params(Rng& rng) {
  Eigen::VectorXd p(kParamCount);
  for (int i = 0; i < kParamCount; ++i) p[i] = uniform_real(rng, -1.5, 1.5);
  return p;
}

SyntheticItem random_item(Rng& rng) {
  SyntheticItem item;
  const double mag = uniform_real(rng, kEvidenceFloor, 1.0);
  const bool truth_a = coin(rng);
  item.evidence = truth_a ? mag : -mag;
  item.truth = truth_a ? Label::A : Label::B;
  item.cue = uniform_int(rng, -1, 1);
  item.position_flag = coin(rng) ? 1 : -1;
  return item;
}

double toy_reward(const SyntheticItem& item, const ToyResponse& resp) {
  return total_reward(to_judged(resp), item.truth, item.bias_target(), RewardConfig{})
      .total;
}

}  // namespace

TEST_CASE("advantages subtract the group mean exactly") {
  const double rewards[2] = {1.6, -0.4};
  const auto [adv, mean] = compute_advantages(rewards);
  CHECK(mean == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(adv[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(adv[1] == doctest::Approx(-1.0).epsilon(1e-15));

  const double single[1] = {1.0};
  CHECK_THROWS_AS(compute_advantages(std::span<const double>(single, 1)),
                  std::invalid_argument);
}

TEST_CASE("advantages are zero-sum for random groups") {
  auto rng = make_rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> rewards(uniform_int(rng, 2, 16));
    for (auto& r : rewards) r = uniform_real(rng, -5.0, 5.0);
    const auto [adv, mean] = compute_advantages(rewards);
    const double sum = std::accumulate(adv.begin(), adv.end(), 0.0);
    CHECK(std::abs(sum) < 1e-9);
    (void)mean;
  }
}

TEST_CASE("sample_group records self-consistent log probabilities") {
  auto rng = make_rng(2);
  const ToyPolicy policy(random_params(rng));
  const auto item = random_item(rng);
  const auto group = sample_group(policy, "p0", item, 8, rng);
  REQUIRE(group.responses.size() == 8);
  REQUIRE(group.log_probs.size() == 8);
  for (std::size_t i = 0; i < 8; ++i)
    CHECK(group.log_probs[i] ==
          doctest::Approx(policy.log_prob(item, group.responses[i])).epsilon(1e-15));
  CHECK_THROWS_AS(sample_group(policy, "p1", item, 1, rng), std::invalid_argument);
}

TEST_CASE("grpo_step with uniform rewards and zero beta is a no-op") {
  auto rng = make_rng(3);
  const ToyPolicy policy(random_params(rng));
  const auto item = random_item(rng);
  auto group = sample_group(policy, "g", item, 8, rng);
  group.rewards.assign(8, 2.5);
  auto [adv, mean] = compute_advantages(group.rewards);
  group.advantages = std::move(adv);
  group.group_mean = mean;
  GrpoConfig cfg;
  cfg.kl_beta = 0.0;
  std::vector<GroupRollout<ToyPolicy>> batch{group};
  const auto delta = grpo_step<ToyPolicy>(policy, policy, batch, cfg);
  CHECK(delta.norm() < 1e-12);
}

// Closed-form hand expansion for G = 2: with rewards r1, r2 the advantages are
// +/- (r1 - r2)/2 and the policy-gradient term reduces to
// (r1 - r2)/4 * (grad1 - grad2).
TEST_CASE("grpo_step matches the hand-expanded two-response formula") {
  auto rng = make_rng(4);
  const ToyPolicy policy(random_params(rng));
  const auto item = random_item(rng);
  auto group = sample_group(policy, "g", item, 2, rng);
  group.rewards = {1.6, -0.4};
  auto [adv, mean] = compute_advantages(group.rewards);
  group.advantages = std::move(adv);
  group.group_mean = mean;
  GrpoConfig cfg;
  cfg.kl_beta = 0.0;
  cfg.learning_rate = 0.05;
  std::vector<GroupRollout<ToyPolicy>> batch{group};
  const auto delta = grpo_step<ToyPolicy>(policy, policy, batch, cfg);
  const Eigen::VectorXd expected =
      cfg.learning_rate * (1.6 - (-0.4)) / 4.0 *
      (policy.log_prob_gradient(item, group.responses[0]) -
       policy.log_prob_gradient(item, group.responses[1]));
  CHECK((delta - expected).norm() < 1e-14);
}

TEST_CASE("update direction is invariant to constant reward shifts") {
  auto rng = make_rng(5);
  const ToyPolicy policy(random_params(rng));
  GrpoConfig cfg;
  std::vector<GroupRollout<ToyPolicy>> batch, shifted;
  for (int b = 0; b < 4; ++b) {
    auto group = sample_group(policy, std::to_string(b), random_item(rng), 8, rng);
    group.rewards.resize(8);
    for (auto& r : group.rewards) r = uniform_real(rng, -2.0, 2.0);
    auto twin = group;
    for (auto& r : twin.rewards) r += 17.25;
    for (auto* g : {&group, &twin}) {
      auto [adv, mean] = compute_advantages(g->rewards);
      g->advantages = std::move(adv);
      g->group_mean = mean;
    }
    batch.push_back(std::move(group));
    shifted.push_back(std::move(twin));
  }
  const auto d1 = grpo_step<ToyPolicy>(policy, policy, batch, cfg);
  const auto d2 = grpo_step<ToyPolicy>(policy, policy, shifted, cfg);
  CHECK((d1 - d2).lpNorm<Eigen::Infinity>() < 1e-12);
}

// Finite-difference oracle for the full update: the step must equal
// lr * grad of the surrogate
//   J(theta) = mean_groups[(1/G) sum_i a_i log pi_theta(y_i) - beta KL(theta)]
// evaluated at the sampling parameters (advantages held fixed).
TEST_CASE("grpo_step matches finite differences of the surrogate objective") {
  auto rng = make_rng(6);
  const auto theta0 = random_params(rng);
  const ToyPolicy policy(theta0);
  const ToyPolicy ref(random_params(rng));
  GrpoConfig cfg;
  cfg.kl_beta = 0.01;
  cfg.learning_rate = 1.0;

  std::vector<GroupRollout<ToyPolicy>> batch;
  for (int b = 0; b < 3; ++b) {
    auto group = sample_group(policy, std::to_string(b), random_item(rng), 6, rng);
    group.rewards.resize(6);
    for (std::size_t i = 0; i < 6; ++i)
      group.rewards[i] = toy_reward(group.prompt, group.responses[i]);
    auto [adv, mean] = compute_advantages(group.rewards);
    group.advantages = std::move(adv);
    group.group_mean = mean;
    batch.push_back(std::move(group));
  }

  const auto surrogate = [&](const Eigen::VectorXd& theta) {
    const ToyPolicy p(theta);
    double total = 0.0;
    for (const auto& group : batch) {
      double term = 0.0;
      for (std::size_t i = 0; i < group.responses.size(); ++i)
        term += group.advantages[i] * p.log_prob(group.prompt, group.responses[i]);
      term /= static_cast<double>(group.responses.size());
      term -= cfg.kl_beta * p.kl_to(ref, group.prompt);
      total += term;
    }
    return total / static_cast<double>(batch.size());
  };

  const auto delta = grpo_step<ToyPolicy>(policy, ref, batch, cfg);
  const double h = 1e-5;
  for (int k = 0; k < kParamCount; ++k) {
    auto hi = theta0, lo = theta0;
    hi[k] += h;
    lo[k] -= h;
    const double fd = (surrogate(hi) - surrogate(lo)) / (2 * h);
    CHECK(std::abs(delta[k] - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("train with zero steps returns the initial policy") {
  auto rng = make_rng(7);
  const auto theta0 = random_params(rng);
  std::vector<SyntheticItem> data;
  for (int i = 0; i < 8; ++i) data.push_back(random_item(rng));
  GrpoConfig cfg;
  cfg.steps = 0;
  const auto result = train(
      ToyPolicy(theta0), ToyPolicy(theta0), data, toy_reward,
      [](const ToyPolicy&) { return 0.0; }, cfg);
  CHECK((result.policy.parameters() - theta0).norm() == 0.0);
  CHECK(result.log.records.empty());
  CHECK(result.log.best_step == 0);
}

TEST_CASE("train is deterministic in the seed and logs every step") {
  auto rng = make_rng(8);
  std::vector<SyntheticItem> data;
  for (int i = 0; i < 32; ++i) data.push_back(random_item(rng));
  GrpoConfig cfg;
  cfg.steps = 20;
  cfg.batch_prompts = 4;
  cfg.eval_every = 5;
  cfg.seed = 99;
  const auto items = frozen_item_set(CuePolicy::BalancedConflict, 64, 1);
  const auto val = [&](const ToyPolicy& p) {
    return expected_reward(p.parameters(), items, RewardConfig{});
  };
  const auto a = train(ToyPolicy{}, ToyPolicy{}, data, toy_reward, val, cfg);
  const auto b = train(ToyPolicy{}, ToyPolicy{}, data, toy_reward, val, cfg);
  REQUIRE(a.log.records.size() == 20);
  CHECK((a.policy.parameters() - b.policy.parameters()).norm() == 0.0);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(a.log.records[i].step == static_cast<int>(i) + 1);
    CHECK(a.log.records[i].mean_reward == b.log.records[i].mean_reward);
    CHECK((a.log.records[i].params - b.log.records[i].params).norm() == 0.0);
    const bool eval_step = (i + 1) % 5 == 0 || i + 1 == 20;
    CHECK(a.log.records[i].val_score.has_value() == eval_step);
  }
  cfg.seed = 100;
  const auto c = train(ToyPolicy{}, ToyPolicy{}, data, toy_reward, val, cfg);
  CHECK((a.policy.parameters() - c.policy.parameters()).norm() > 0.0);
}

TEST_CASE("training improves the validation objective on the toy problem") {
  auto rng = make_rng(9);
  std::vector<SyntheticItem> data;
  for (int i = 0; i < 128; ++i) data.push_back(random_item(rng));
  GrpoConfig cfg;
  cfg.steps = 60;
  cfg.batch_prompts = 8;
  cfg.seed = 5;
  const auto items = frozen_item_set(CuePolicy::BalancedConflict, 256, 2);
  const auto val = [&](const ToyPolicy& p) {
    return expected_reward(p.parameters(), items, RewardConfig{});
  };
  const double before = val(ToyPolicy{});
  const auto result = train(ToyPolicy{}, ToyPolicy{}, data, toy_reward, val, cfg);
  CHECK(result.log.best_val > before + 0.1);
  CHECK(val(result.policy) == doctest::Approx(result.log.best_val).epsilon(1e-12));
}

TEST_CASE("training csv lists one row per step with the parameter columns") {
  auto rng = make_rng(10);
  std::vector<SyntheticItem> data;
  for (int i = 0; i < 16; ++i) data.push_back(random_item(rng));
  GrpoConfig cfg;
  cfg.steps = 6;
  cfg.batch_prompts = 2;
  cfg.eval_every = 3;
  const auto result = train(
      ToyPolicy{}, ToyPolicy{}, data, toy_reward,
      [](const ToyPolicy&) { return 0.0; }, cfg);
  const auto path = std::filesystem::temp_directory_path() / "eit_train_log.csv";
  write_training_csv(path, result.log, kParamNames);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "step,mean_reward,mean_kl,w_evidence,w_bias,w_position,bias0,w_format,"
        "val_score");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 6);
}
