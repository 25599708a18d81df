#include "eit/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace eit {

using nlohmann::json;

double accuracy(std::span<const Choice> preds, std::span<const Label> truths) {
  if (preds.empty() || preds.size() != truths.size())
    throw std::invalid_argument("accuracy needs equal-length non-empty lists");
  long long correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (matches(preds[i], truths[i])) ++correct;
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

double robustness_rate(std::span<const PredictionPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("robustness_rate on empty list");
  long long unchanged = 0;
  for (const auto& p : pairs)
    if (p.clean_choice == p.biased_choice) ++unchanged;
  return static_cast<double>(unchanged) / static_cast<double>(pairs.size());
}

Choice TruthJudge::decide(const JudgeRequest& req, Rng&) {
  return to_choice(req.correct_label);
}

Choice CueJudge::decide(const JudgeRequest& req, Rng&) {
  return to_choice(req.bias_target ? *req.bias_target : req.correct_label);
}

toy::SyntheticItem ToyBridgeJudge::embed(const JudgeRequest& req) const {
  toy::SyntheticItem item;
  item.truth = req.correct_label;
  // Evidence strength is an intrinsic item difficulty: derived from the id so
  // it agrees across the clean and biased renderings of the same item.
  const double u = static_cast<double>(fnv1a(req.item_id) >> 11) /
                   static_cast<double>(1ull << 53);
  const double magnitude =
      toy::kEvidenceFloor + (1.0 - toy::kEvidenceFloor) * u;
  item.evidence = req.correct_label == Label::A ? magnitude : -magnitude;
  item.cue = req.bias_target ? (*req.bias_target == Label::A ? 1 : -1) : 0;
  item.position_flag = req.correct_label == Label::A ? 1 : -1;
  return item;
}

Choice ToyBridgeJudge::decide(const JudgeRequest& req, Rng& rng) {
  const auto item = embed(req);
  const auto resp = toy::ToyPolicy(params_).sample(item, rng);
  return to_choice(resp.choice);
}

namespace {

void log_pred(std::vector<PredictionRecord>* log, const std::string& id,
              const char* condition, Choice clean, Choice biased, Label truth) {
  if (!log) return;
  log->push_back({id, condition, clean, biased, truth});
}

}  // namespace

EvalReport eval_matrix(Judge& judge, const std::vector<PairwiseItem>& items,
                       const TemplateCatalog& catalog, std::uint64_t seed,
                       std::vector<PredictionRecord>* prediction_log) {
  if (items.empty()) throw std::invalid_argument("eval_matrix on empty item list");
  EvalReport report;

  // Nominal C/W assignment for distraction: disjoint random halves.
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  {
    auto rng = make_rng(seed, "eval-distraction-split");
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<bool> distraction_c(items.size(), false);
  for (std::size_t i = 0; i < items.size() / 2; ++i) distraction_c[order[i]] = true;

  for (std::size_t idx = 0; idx < items.size(); ++idx) {
    const auto& item = items[idx];
    auto rng = make_rng(seed, "eval-item-" + item.base_id);

    JudgeRequest clean_req;
    clean_req.item_id = item.base_id;
    clean_req.rendered_text = render_clean(item);
    clean_req.correct_label = item.correct_label;

    Choice clean;
    try {
      clean = judge.decide(clean_req, rng);
    } catch (const std::exception&) {
      ++report.judge_failures;
      report.failed_items.push_back(item.base_id);
      continue;  // no baseline: skip every cell for this item
    }
    ++report.n_clean;
    if (matches(clean, item.correct_label)) ++report.clean_correct;
    if (clean == Choice::Unparsed) ++report.clean_parse_failures;
    log_pred(prediction_log, item.base_id, "clean", clean, clean,
             item.correct_label);

    bool item_failed = false;
    auto judge_variant = [&](const BiasedPrompt& variant, EvalCell& cell,
                             const char* condition) {
      JudgeRequest req;
      req.item_id = item.base_id;
      req.rendered_text = variant.rendered_text;
      req.bias_type = variant.bias_type;
      const bool swapped = variant.position_variant == PositionVariant::Swapped;
      req.swapped = swapped;
      req.correct_label =
          swapped ? other(item.correct_label) : item.correct_label;
      req.bias_target = variant.bias_target;
      Choice biased;
      try {
        biased = judge.decide(req, rng);
      } catch (const std::exception&) {
        ++report.judge_failures;
        item_failed = true;
        return;
      }
      // Swapped choices map back to semantic identity before comparing with
      // the clean baseline; accuracy is judged in rendered coordinates.
      Choice semantic = biased;
      if (swapped && biased != Choice::Unparsed)
        semantic = biased == Choice::A ? Choice::B : Choice::A;
      ++cell.count;
      if (matches(biased, req.correct_label)) ++cell.correct;
      if (clean == semantic) ++cell.unchanged;
      if (biased == Choice::Unparsed) ++cell.parse_failures;
      log_pred(prediction_log, item.base_id, condition, clean, semantic,
               item.correct_label);
    };

    const Label correct = item.correct_label;
    const Label wrong = other(correct);
    judge_variant(inject_bandwagon(item, correct, catalog, rng),
                  report.bandwagon.c, "bandwagon_C");
    judge_variant(inject_bandwagon(item, wrong, catalog, rng),
                  report.bandwagon.w, "bandwagon_W");
    judge_variant(inject_authority(item, correct, catalog, rng),
                  report.authority.c, "authority_C");
    judge_variant(inject_authority(item, wrong, catalog, rng),
                  report.authority.w, "authority_W");
    judge_variant(inject_distraction(item, catalog, rng),
                  distraction_c[idx] ? report.distraction.c : report.distraction.w,
                  distraction_c[idx] ? "distraction_C" : "distraction_W");

    // Both orderings are judged; each contributes to the cell named after the
    // slot the correct answer occupies in that rendering.
    {
      BiasedPrompt original;
      original.base = item;
      original.bias_type = BiasType::Position;
      original.template_id = "position_original";
      original.position_variant = PositionVariant::Original;
      original.rendered_text = render_clean(item);
      EvalCell& orig_cell = correct == Label::A ? report.pos_a : report.pos_b;
      judge_variant(original, orig_cell,
                    correct == Label::A ? "position_A" : "position_B");
      EvalCell& swap_cell = correct == Label::A ? report.pos_b : report.pos_a;
      judge_variant(swap_positions(item), swap_cell,
                    correct == Label::A ? "position_B" : "position_A");
    }

    if (item_failed) report.failed_items.push_back(item.base_id);
  }
  return report;
}

namespace {

void put_cell(std::ofstream& out, const EvalCell& cell) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), ",%.4f,%.4f", cell.acc(), cell.rr());
  out << buf;
}

json cell_json(const EvalCell& cell) {
  return json{{"count", cell.count},
              {"correct", cell.correct},
              {"unchanged", cell.unchanged},
              {"parse_failures", cell.parse_failures},
              {"acc", cell.acc()},
              {"rr", cell.rr()}};
}

}  // namespace

void write_report_csv(const std::filesystem::path& path,
                      std::span<const EvalReport> reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << "model,acc_clean"
         ",bandwagon_acc_C,bandwagon_rr_C,bandwagon_acc_W,bandwagon_rr_W"
         ",authority_acc_C,authority_rr_C,authority_acc_W,authority_rr_W"
         ",distraction_acc_C,distraction_rr_C,distraction_acc_W,distraction_rr_W"
         ",position_acc_A,position_rr_A,position_acc_B,position_rr_B\n";
  char buf[32];
  for (const auto& r : reports) {
    out << r.model;
    std::snprintf(buf, sizeof(buf), ",%.4f", r.acc_clean());
    out << buf;
    for (const auto* cells : {&r.bandwagon, &r.authority, &r.distraction}) {
      put_cell(out, cells->c);
      put_cell(out, cells->w);
    }
    put_cell(out, r.pos_a);
    put_cell(out, r.pos_b);
    out << '\n';
  }
}

void write_report_json(const std::filesystem::path& path, const EvalReport& r) {
  json doc{{"model", r.model},
           {"clean",
            {{"count", r.n_clean},
             {"correct", r.clean_correct},
             {"parse_failures", r.clean_parse_failures},
             {"acc", r.acc_clean()}}},
           {"bandwagon", {{"C", cell_json(r.bandwagon.c)}, {"W", cell_json(r.bandwagon.w)}}},
           {"authority", {{"C", cell_json(r.authority.c)}, {"W", cell_json(r.authority.w)}}},
           {"distraction",
            {{"C", cell_json(r.distraction.c)}, {"W", cell_json(r.distraction.w)}}},
           {"position", {{"A", cell_json(r.pos_a)}, {"B", cell_json(r.pos_b)}}},
           {"judge_failures", r.judge_failures},
           {"failed_items", r.failed_items},
           {"partial", r.partial}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  out << doc.dump(2) << '\n';
}

void write_prediction_log(const std::filesystem::path& path,
                          std::span<const PredictionRecord> records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  for (const auto& rec : records) {
    json doc{{"item_id", rec.item_id},
             {"condition", rec.condition},
             {"clean_choice", choice_name(rec.clean_choice)},
             {"biased_choice", choice_name(rec.biased_choice)},
             {"truth", label_name(rec.truth)}};
    out << doc.dump() << '\n';
  }
}

}  // namespace eit
