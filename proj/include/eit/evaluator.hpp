#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eit/bias_injector.hpp"
#include "eit/corpus.hpp"
#include "eit/rng.hpp"
#include "eit/toy_judge.hpp"
#include "eit/types.hpp"

namespace eit {

struct PredictionPair {
  std::string item_id;
  Choice clean_choice = Choice::Unparsed;
  Choice biased_choice = Choice::Unparsed;
  Label truth = Label::A;
};

// Fraction of matching predictions; Unparsed never matches.
double accuracy(std::span<const Choice> preds, std::span<const Label> truths);

// Fraction with clean = biased. (unparsed, unparsed) counts as unchanged;
// a parse failure on exactly one side counts as changed.
double robustness_rate(std::span<const PredictionPair> pairs);

// Everything a judge may rely on, with labels in rendered coordinates (after
// any position swap).
struct JudgeRequest {
  std::string item_id;
  std::string rendered_text;
  Label correct_label = Label::A;
  std::optional<Label> bias_target;
  std::optional<BiasType> bias_type;
  bool swapped = false;
};

class Judge {
 public:
  virtual ~Judge() = default;
  virtual Choice decide(const JudgeRequest& req, Rng& rng) = 0;
};

// Always answers the correct option.
class TruthJudge : public Judge {
 public:
  Choice decide(const JudgeRequest& req, Rng&) override;
};

// Picks the bias target whenever one is present, otherwise the truth.
class CueJudge : public Judge {
 public:
  Choice decide(const JudgeRequest& req, Rng&) override;
};

// Samples a choice from a toy policy on a synthetic embedding of the request:
// evidence magnitude derived deterministically from the item id, sign from the
// rendered correct label, cue from the bias target, position from where the
// correct option sits.
class ToyBridgeJudge : public Judge {
 public:
  explicit ToyBridgeJudge(Eigen::VectorXd params) : params_(std::move(params)) {}
  Choice decide(const JudgeRequest& req, Rng& rng) override;
  toy::SyntheticItem embed(const JudgeRequest& req) const;

 private:
  Eigen::VectorXd params_;
};

struct EvalCell {
  long long count = 0;
  long long correct = 0;
  long long unchanged = 0;
  long long parse_failures = 0;

  double acc() const { return count ? static_cast<double>(correct) / count : 0.0; }
  double rr() const { return count ? static_cast<double>(unchanged) / count : 0.0; }
};

struct EvalReport {
  std::string model = "model";
  long long n_clean = 0;
  long long clean_correct = 0;
  long long clean_parse_failures = 0;

  struct BiasCells {
    EvalCell c;  // cue supports the correct option
    EvalCell w;  // cue supports the incorrect option
  };
  BiasCells bandwagon;
  BiasCells authority;
  BiasCells distraction;  // nominal C/W split over disjoint random halves
  EvalCell pos_a;         // correct answer rendered first
  EvalCell pos_b;         // correct answer rendered second

  long long judge_failures = 0;
  std::vector<std::string> failed_items;
  bool partial = false;

  double acc_clean() const {
    return n_clean ? static_cast<double>(clean_correct) / n_clean : 0.0;
  }
};

struct PredictionRecord {
  std::string item_id;
  std::string condition;  // clean, bandwagon_C, ..., position_A, position_B
  Choice clean_choice = Choice::Unparsed;
  Choice biased_choice = Choice::Unparsed;
  Label truth = Label::A;
};

// Builds clean + bandwagon-C/W + authority-C/W + distraction + both position
// orderings per item and fills every report cell. Clean predictions are judged
// once and reused as the robustness baseline for every condition.
EvalReport eval_matrix(Judge& judge, const std::vector<PairwiseItem>& items,
                       const TemplateCatalog& catalog, std::uint64_t seed,
                       std::vector<PredictionRecord>* prediction_log = nullptr);

void write_report_csv(const std::filesystem::path& path,
                      std::span<const EvalReport> reports);
void write_report_json(const std::filesystem::path& path, const EvalReport& report);
void write_prediction_log(const std::filesystem::path& path,
                          std::span<const PredictionRecord> records);

}  // namespace eit
