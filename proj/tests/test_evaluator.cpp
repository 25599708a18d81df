#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "eit/evaluator.hpp"

using namespace eit;
namespace fs = std::filesystem;

namespace {

PairwiseItem make_pw(const std::string& id, Label correct) {
  PairwiseItem p;
  p.base_id = id;
  p.question = "Question " + id + "?";
  p.option_a = "alpha " + id;
  p.option_b = "beta " + id;
  p.correct_label = correct;
  p.subject = "chem";
  return p;
}

std::vector<PairwiseItem> mixed_items(int n) {
  std::vector<PairwiseItem> items;
  for (int i = 0; i < n; ++i)
    items.push_back(make_pw("q" + std::to_string(i), i % 2 ? Label::B : Label::A));
  return items;
}

// Always answers slot A of whatever rendering it is shown.
class AlwaysAJudge : public Judge {
 public:
  Choice decide(const JudgeRequest&, Rng&) override { return Choice::A; }
};

class UnparsedJudge : public Judge {
 public:
  Choice decide(const JudgeRequest&, Rng&) override { return Choice::Unparsed; }
};

// Fails on one item, either at the clean baseline or on its authority
// variants only.
class FailOnIdJudge : public Judge {
 public:
  FailOnIdJudge(std::string id, bool fail_clean)
      : id_(std::move(id)), fail_clean_(fail_clean) {}
  Choice decide(const JudgeRequest& req, Rng&) override {
    const bool is_clean = !req.bias_type.has_value();
    const bool is_authority = req.bias_type == BiasType::Authority;
    if (req.item_id == id_ && (fail_clean_ ? is_clean : is_authority))
      throw std::runtime_error("boom");
    return to_choice(req.correct_label);
  }

 private:
  std::string id_;
  bool fail_clean_;
};

}  // namespace

TEST_CASE("accuracy hand fixtures") {
  const Choice preds[4] = {Choice::A, Choice::B, Choice::Unparsed, Choice::B};
  const Label truths[4] = {Label::A, Label::A, Label::B, Label::B};
  CHECK(accuracy(preds, truths) == 0.5);

  const Choice none[2] = {Choice::Unparsed, Choice::Unparsed};
  const Label t2[2] = {Label::A, Label::B};
  CHECK(accuracy(none, t2) == 0.0);  // unparsed is never correct
  const std::vector<Choice> empty_preds;
  const std::vector<Label> empty_truths;
  CHECK_THROWS_AS(accuracy(empty_preds, empty_truths), std::invalid_argument);
}

TEST_CASE("robustness rate hand fixtures") {
  std::vector<PredictionPair> pairs(4);
  pairs[0] = {"a", Choice::A, Choice::A, Label::A};           // unchanged
  pairs[1] = {"b", Choice::B, Choice::A, Label::A};           // flipped
  pairs[2] = {"c", Choice::Unparsed, Choice::Unparsed, Label::A};  // unchanged
  pairs[3] = {"d", Choice::A, Choice::Unparsed, Label::A};    // changed
  CHECK(robustness_rate(pairs) == 0.5);
  const std::vector<PredictionPair> empty;
  CHECK_THROWS_AS(robustness_rate(empty), std::invalid_argument);
}

TEST_CASE("truth judge scores perfectly everywhere") {
  const auto items = mixed_items(40);
  TruthJudge judge;
  std::vector<PredictionRecord> log;
  const auto report = eval_matrix(judge, items, default_catalog(), 7, &log);

  CHECK(report.n_clean == 40);
  CHECK(report.acc_clean() == 1.0);
  CHECK(report.clean_parse_failures == 0);
  for (const auto* cells : {&report.bandwagon, &report.authority}) {
    CHECK(cells->c.count == 40);
    CHECK(cells->w.count == 40);
    CHECK(cells->c.acc() == 1.0);
    CHECK(cells->w.acc() == 1.0);
    CHECK(cells->c.rr() == 1.0);
    CHECK(cells->w.rr() == 1.0);
  }
  CHECK(report.distraction.c.count == 20);  // disjoint random halves
  CHECK(report.distraction.w.count == 20);
  CHECK(report.distraction.c.acc() == 1.0);
  CHECK(report.distraction.w.acc() == 1.0);
  // Both orderings of every item are judged, so each position cell sees all 40.
  CHECK(report.pos_a.count == 40);
  CHECK(report.pos_b.count == 40);
  CHECK(report.pos_a.acc() == 1.0);
  CHECK(report.pos_b.acc() == 1.0);
  CHECK(report.pos_a.rr() == 1.0);
  CHECK(report.pos_b.rr() == 1.0);
  CHECK(report.judge_failures == 0);
  // clean + 5 bias variants + 2 orderings = 8 records per item.
  CHECK(log.size() == 40u * 8u);
}

TEST_CASE("cue judge collapses onto the bias target") {
  const auto items = mixed_items(30);
  CueJudge judge;
  const auto report = eval_matrix(judge, items, default_catalog(), 3, nullptr);

  CHECK(report.acc_clean() == 1.0);  // no cue on clean prompts
  for (const auto* cells : {&report.bandwagon, &report.authority}) {
    CHECK(cells->c.acc() == 1.0);  // supportive cue points at the truth
    CHECK(cells->c.rr() == 1.0);
    CHECK(cells->w.acc() == 0.0);  // adversarial cue always wins
    CHECK(cells->w.rr() == 0.0);
  }
  // Distraction and position carry no target, so the cue judge stays truthful.
  CHECK(report.distraction.c.acc() == 1.0);
  CHECK(report.distraction.w.acc() == 1.0);
  CHECK(report.pos_a.acc() == 1.0);
  CHECK(report.pos_b.acc() == 1.0);
  CHECK(report.pos_a.rr() == 1.0);
  CHECK(report.pos_b.rr() == 1.0);
}

// With every correct answer in slot A, an always-A judge isolates the
// position-cell semantics: accuracy is scored in rendered coordinates while
// robustness compares semantic identities against the clean baseline.
TEST_CASE("position cells separate rendered accuracy from semantic robustness") {
  std::vector<PairwiseItem> items;
  for (int i = 0; i < 20; ++i) items.push_back(make_pw("p" + std::to_string(i), Label::A));
  AlwaysAJudge judge;
  const auto report = eval_matrix(judge, items, default_catalog(), 1, nullptr);

  CHECK(report.acc_clean() == 1.0);  // truth sits in slot A
  CHECK(report.pos_a.count == 20);   // original orderings
  CHECK(report.pos_b.count == 20);   // swapped orderings
  CHECK(report.pos_a.acc() == 1.0);
  CHECK(report.pos_a.rr() == 1.0);
  CHECK(report.pos_b.acc() == 0.0);  // rendered correct slot is B after the swap
  CHECK(report.pos_b.rr() == 0.0);   // semantic answer flipped from A to B
}

TEST_CASE("parse failures count as incorrect but can be unchanged") {
  const auto items = mixed_items(10);
  UnparsedJudge judge;
  const auto report = eval_matrix(judge, items, default_catalog(), 5, nullptr);
  CHECK(report.acc_clean() == 0.0);
  CHECK(report.clean_parse_failures == 10);
  CHECK(report.bandwagon.w.acc() == 0.0);
  CHECK(report.bandwagon.w.parse_failures == 10);
  // unparsed -> unparsed counts as unchanged by convention.
  CHECK(report.bandwagon.w.rr() == 1.0);
  CHECK(report.pos_b.rr() == 1.0);
}

TEST_CASE("clean-judgment failure skips the whole item") {
  const auto items = mixed_items(6);
  FailOnIdJudge judge("q2", /*fail_clean=*/true);
  const auto report = eval_matrix(judge, items, default_catalog(), 9, nullptr);
  CHECK(report.n_clean == 5);
  CHECK(report.judge_failures == 1);
  REQUIRE(report.failed_items.size() == 1);
  CHECK(report.failed_items[0] == "q2");
  CHECK(report.bandwagon.c.count == 5);
  CHECK(report.pos_a.count == 5);
  CHECK(report.pos_b.count == 5);
}

TEST_CASE("variant failure marks the item but keeps its other cells") {
  const auto items = mixed_items(6);
  FailOnIdJudge judge("q3", /*fail_clean=*/false);
  const auto report = eval_matrix(judge, items, default_catalog(), 9, nullptr);
  CHECK(report.n_clean == 6);  // the clean baseline still succeeded
  CHECK(report.judge_failures == 2);  // authority C and W both failed
  REQUIRE(report.failed_items.size() == 1);
  CHECK(report.failed_items[0] == "q3");
  CHECK(report.authority.c.count == 5);
  CHECK(report.authority.w.count == 5);
  // Unaffected conditions keep the full item count.
  CHECK(report.bandwagon.c.count == 6);
  CHECK(report.pos_a.count == 6);
  CHECK(report.pos_b.count == 6);
}

TEST_CASE("eval matrix is invariant to item order") {
  auto items = mixed_items(24);
  CueJudge judge;
  const auto a = eval_matrix(judge, items, default_catalog(), 13, nullptr);
  std::reverse(items.begin(), items.end());
  const auto b = eval_matrix(judge, items, default_catalog(), 13, nullptr);
  CHECK(a.acc_clean() == b.acc_clean());
  CHECK(a.bandwagon.w.acc() == b.bandwagon.w.acc());
  CHECK(a.authority.c.rr() == b.authority.c.rr());
  CHECK(a.pos_b.acc() == b.pos_b.acc());
  // The nominal distraction halves are keyed to item identity order, so only
  // the totals are compared.
  CHECK(a.distraction.c.count + a.distraction.w.count ==
        b.distraction.c.count + b.distraction.w.count);
}

TEST_CASE("toy bridge embedding is stable across renderings of an item") {
  Eigen::VectorXd params = Eigen::VectorXd::Zero(toy::kParamCount);
  ToyBridgeJudge judge(params);
  JudgeRequest clean;
  clean.item_id = "item-42";
  clean.correct_label = Label::B;
  const auto base = judge.embed(clean);
  CHECK(base.truth == Label::B);
  CHECK(base.evidence < 0.0);
  CHECK(std::abs(base.evidence) >= toy::kEvidenceFloor);
  CHECK(base.cue == 0);
  CHECK(base.position_flag == -1);

  JudgeRequest biased = clean;
  biased.bias_target = Label::A;
  biased.bias_type = BiasType::Bandwagon;
  const auto adv = judge.embed(biased);
  CHECK(adv.evidence == base.evidence);  // same difficulty for the same id
  CHECK(adv.cue == 1);

  JudgeRequest swapped = clean;
  swapped.swapped = true;
  swapped.correct_label = Label::A;
  const auto sw = judge.embed(swapped);
  CHECK(sw.position_flag == 1);
  CHECK(sw.evidence == -base.evidence);
}

TEST_CASE("report writers emit the expected shapes") {
  const auto items = mixed_items(8);
  TruthJudge judge;
  std::vector<PredictionRecord> log;
  auto report = eval_matrix(judge, items, default_catalog(), 2, &log);
  report.model = "truth";

  const auto csv_path = fs::temp_directory_path() / "eit_report.csv";
  const EvalReport reports[1] = {report};
  write_report_csv(csv_path, reports);
  std::ifstream in(csv_path);
  std::string header, row;
  std::getline(in, header);
  CHECK(header ==
        "model,acc_clean,bandwagon_acc_C,bandwagon_rr_C,bandwagon_acc_W,"
        "bandwagon_rr_W,authority_acc_C,authority_rr_C,authority_acc_W,"
        "authority_rr_W,distraction_acc_C,distraction_rr_C,distraction_acc_W,"
        "distraction_rr_W,position_acc_A,position_rr_A,position_acc_B,"
        "position_rr_B");
  std::getline(in, row);
  CHECK(row.rfind("truth,1.0000,1.0000", 0) == 0);

  const auto json_path = fs::temp_directory_path() / "eit_report.json";
  write_report_json(json_path, report);
  std::ifstream jin(json_path);
  std::string all((std::istreambuf_iterator<char>(jin)),
                  std::istreambuf_iterator<char>());
  CHECK(all.find("\"bandwagon\"") != std::string::npos);
  CHECK(all.find("\"parse_failures\"") != std::string::npos);

  const auto pred_path = fs::temp_directory_path() / "eit_preds.jsonl";
  write_prediction_log(pred_path, log);
  std::ifstream pin(pred_path);
  std::size_t lines = 0;
  std::string line;
  while (std::getline(pin, line))
    if (!line.empty()) ++lines;
  CHECK(lines == log.size());
}
