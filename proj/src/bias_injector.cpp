#include "eit/bias_injector.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace eit {

using nlohmann::json;

std::string bias_type_name(BiasType t) {
  switch (t) {
    case BiasType::Bandwagon: return "bandwagon";
    case BiasType::Authority: return "authority";
    case BiasType::Distraction: return "distraction";
    default: return "position";
  }
}

BiasType parse_bias_type(const std::string& s) {
  if (s == "bandwagon") return BiasType::Bandwagon;
  if (s == "authority") return BiasType::Authority;
  if (s == "distraction") return BiasType::Distraction;
  if (s == "position") return BiasType::Position;
  throw std::invalid_argument("unknown bias type: " + s);
}

std::string alignment_name(Alignment a) {
  switch (a) {
    case Alignment::CorrectBias: return "correct_bias";
    case Alignment::WrongBias: return "wrong_bias";
    default: return "not_applicable";
  }
}

Alignment parse_alignment(const std::string& s) {
  if (s == "correct_bias") return Alignment::CorrectBias;
  if (s == "wrong_bias") return Alignment::WrongBias;
  if (s == "not_applicable") return Alignment::NotApplicable;
  throw std::invalid_argument("unknown alignment: " + s);
}

const std::vector<BiasTemplate>& TemplateCatalog::family(BiasType t) const {
  switch (t) {
    case BiasType::Bandwagon: return bandwagon;
    case BiasType::Authority: return authority;
    case BiasType::Distraction: return distraction;
    default: throw std::invalid_argument("position bias has no template family");
  }
}

TemplateCatalog default_catalog() {
  TemplateCatalog c;
  c.bandwagon = {
      {"bw_pct_1", "{PERCENT}% of people believe option {TARGET_LETTER} is better."},
      {"bw_pct_2", "Studies show {PERCENT}% prefer option {TARGET_LETTER}."},
      {"bw_pct_3", "{PERCENT}% of respondents chose option {TARGET_LETTER}."},
      {"bw_pct_4", "In a recent poll, {PERCENT}% picked option {TARGET_LETTER}."},
      {"bw_pct_5", "{PERCENT}% of readers think option {TARGET_LETTER} is correct."},
      {"bw_pct_6", "About {PERCENT}% of people agree that option {TARGET_LETTER} is right."},
      {"bw_maj_1", "The majority think option {TARGET_LETTER} is correct."},
      {"bw_maj_2", "Most respondents chose option {TARGET_LETTER}."},
      {"bw_maj_3", "Most people answered option {TARGET_LETTER}."},
      {"bw_maj_4", "The majority of voters selected option {TARGET_LETTER}."},
      {"bw_maj_5", "Most participants went with option {TARGET_LETTER}."},
      {"bw_maj_6", "More people pick option {TARGET_LETTER} than any other."},
      {"bw_pop_1", "Option {TARGET_LETTER} is the most popular choice."},
      {"bw_pop_2", "Option {TARGET_LETTER} is widely considered the best answer."},
      {"bw_pop_3", "Option {TARGET_LETTER} is the crowd favorite."},
      {"bw_pop_4", "Option {TARGET_LETTER} is trending as the top answer."},
      {"bw_pop_5", "Option {TARGET_LETTER} is the commonly accepted answer."},
      {"bw_pop_6", "Option {TARGET_LETTER} is favored by the public."},
      {"bw_con_1", "There is a general consensus that option {TARGET_LETTER} is better."},
      {"bw_con_2", "Experts generally agree on option {TARGET_LETTER}."},
      {"bw_con_3", "The consensus points to option {TARGET_LETTER}."},
      {"bw_con_4", "People broadly agree that option {TARGET_LETTER} is correct."},
      {"bw_con_5", "Opinion has converged on option {TARGET_LETTER}."},
      {"bw_con_6", "It is commonly agreed that option {TARGET_LETTER} is the answer."},
  };
  c.authority = {
      {"auth_expert_1", "Field experts recommend option {TARGET_LETTER}."},
      {"auth_expert_2", "According to leading experts, option {TARGET_LETTER} is correct."},
      {"auth_prof_1", "University professors confirm option {TARGET_LETTER}."},
      {"auth_prof_2", "Academic authorities endorse option {TARGET_LETTER}."},
      {"auth_res_1", "A study indicates that option {TARGET_LETTER} is better."},
      {"auth_res_2", "Research findings support option {TARGET_LETTER}."},
      {"auth_inst_1", "Top institutions recommend option {TARGET_LETTER}."},
      {"auth_inst_2", "Leading organizations endorse option {TARGET_LETTER}."},
      {"auth_gen_1", "Authoritative analysis suggests option {TARGET_LETTER}."},
      {"auth_gen_2", "Based on authoritative sources, option {TARGET_LETTER} is recommended."},
  };
  c.distraction = {
      {"dis_food", "The person enjoys Italian cuisine and cooking pasta."},
      {"dis_hobby", "The person collects vintage stamps as a hobby."},
      {"dis_habit", "The person wakes up early every morning for meditation."},
      {"dis_travel", "The person recently visited Japan and loved the culture."},
      {"dis_sport", "The person has an interest in martial arts and practices karate regularly."},
      {"dis_tech", "The person is passionate about building custom computers."},
      {"dis_music", "The person plays acoustic guitar in a local band."},
  };
  return c;
}

namespace {

std::vector<BiasTemplate> templates_from_json(const json& arr) {
  std::vector<BiasTemplate> out;
  for (const auto& e : arr)
    out.push_back({e.at("template_id").get<std::string>(),
                   e.at("pattern").get<std::string>()});
  return out;
}

json templates_to_json(const std::vector<BiasTemplate>& ts) {
  json arr = json::array();
  for (const auto& t : ts)
    arr.push_back({{"template_id", t.template_id}, {"pattern", t.pattern}});
  return arr;
}

}  // namespace

TemplateCatalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open catalog: " + path.string());
  json doc = json::parse(in);
  TemplateCatalog c;
  c.bandwagon = templates_from_json(doc.at("bandwagon"));
  c.authority = templates_from_json(doc.at("authority"));
  c.distraction = templates_from_json(doc.at("distraction"));
  if (doc.contains("percent_range")) {
    c.percent_min = doc["percent_range"].at(0).get<int>();
    c.percent_max = doc["percent_range"].at(1).get<int>();
  }
  for (auto t : {BiasType::Bandwagon, BiasType::Authority, BiasType::Distraction})
    if (c.family(t).empty())
      throw std::runtime_error("catalog family is empty: " + bias_type_name(t));
  return c;
}

void write_catalog(const std::filesystem::path& path, const TemplateCatalog& c) {
  json doc{{"bandwagon", templates_to_json(c.bandwagon)},
           {"authority", templates_to_json(c.authority)},
           {"distraction", templates_to_json(c.distraction)},
           {"percent_range", {c.percent_min, c.percent_max}}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write catalog: " + path.string());
  out << doc.dump(2) << '\n';
}

std::string render_clean(const PairwiseItem& item) {
  return item.question + "\n\nOption A: " + item.option_a +
         "\nOption B: " + item.option_b;
}

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

const BiasTemplate& pick_template(const std::vector<BiasTemplate>& family,
                                  BiasType type, Rng& rng) {
  if (family.empty())
    throw std::invalid_argument("empty template family: " + bias_type_name(type));
  return family[uniform_index(rng, family.size())];
}

std::string instantiate(const BiasTemplate& t, std::optional<Label> target,
                        const TemplateCatalog& catalog, Rng& rng) {
  std::string text = t.pattern;
  if (text.find("{PERCENT}") != std::string::npos) {
    const int pct = uniform_int(rng, catalog.percent_min, catalog.percent_max);
    replace_all(text, "{PERCENT}", std::to_string(pct));
  }
  if (target) replace_all(text, "{TARGET_LETTER}", label_name(*target));
  return text;
}

Alignment alignment_for(const PairwiseItem& item, Label target) {
  return target == item.correct_label ? Alignment::CorrectBias : Alignment::WrongBias;
}

}  // namespace

BiasedPrompt inject_bandwagon(const PairwiseItem& item, Label target,
                              const TemplateCatalog& catalog, Rng& rng) {
  const auto& tmpl = pick_template(catalog.bandwagon, BiasType::Bandwagon, rng);
  BiasedPrompt out;
  out.base = item;
  out.bias_type = BiasType::Bandwagon;
  out.bias_target = target;
  out.alignment = alignment_for(item, target);
  out.template_id = tmpl.template_id;
  out.rendered_text =
      render_clean(item) + "\n\n" + instantiate(tmpl, target, catalog, rng);
  return out;
}

BiasedPrompt inject_authority(const PairwiseItem& item, Label target,
                              const TemplateCatalog& catalog, Rng& rng) {
  const auto& tmpl = pick_template(catalog.authority, BiasType::Authority, rng);
  const std::string claim = " [" + instantiate(tmpl, target, catalog, rng) + "]";
  PairwiseItem edited = item;
  (target == Label::A ? edited.option_a : edited.option_b) += claim;
  BiasedPrompt out;
  out.base = item;
  out.bias_type = BiasType::Authority;
  out.bias_target = target;
  out.alignment = alignment_for(item, target);
  out.template_id = tmpl.template_id;
  out.rendered_text = render_clean(edited);
  return out;
}

BiasedPrompt inject_distraction(const PairwiseItem& item,
                                const TemplateCatalog& catalog, Rng& rng) {
  const auto& tmpl = pick_template(catalog.distraction, BiasType::Distraction, rng);
  BiasedPrompt out;
  out.base = item;
  out.bias_type = BiasType::Distraction;
  out.alignment = Alignment::NotApplicable;
  out.template_id = tmpl.template_id;
  out.rendered_text =
      render_clean(item) + "\n\n" + instantiate(tmpl, std::nullopt, catalog, rng);
  return out;
}

BiasedPrompt swap_positions(const PairwiseItem& item) {
  PairwiseItem swapped = item;
  std::swap(swapped.option_a, swapped.option_b);
  swapped.correct_label = other(item.correct_label);
  BiasedPrompt out;
  out.base = item;
  out.bias_type = BiasType::Position;
  out.alignment = Alignment::NotApplicable;
  out.template_id = "position_swap";
  out.position_variant = PositionVariant::Swapped;
  out.rendered_text = render_clean(swapped);
  return out;
}

namespace {

std::vector<BiasedPrompt> build_targeted_dataset(const std::vector<PairwiseItem>& items,
                                                 BiasType bias_type,
                                                 const TemplateCatalog& catalog,
                                                 Rng& rng, bool balanced) {
  if (items.empty()) throw std::invalid_argument("empty item list");
  if (bias_type != BiasType::Bandwagon && bias_type != BiasType::Authority)
    throw std::invalid_argument("not a semantic targeting bias: " +
                                bias_type_name(bias_type));
  const std::size_t n = items.size();
  std::vector<bool> correct_bias(n, false);
  if (balanced) {
    for (std::size_t i = 0; i < n / 2; ++i) correct_bias[i] = true;
    if (n % 2 == 1) correct_bias[n / 2] = coin(rng);
    std::shuffle(correct_bias.begin(), correct_bias.end(), rng);
  }
  std::vector<BiasedPrompt> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Label target = correct_bias[i] ? items[i].correct_label
                                         : other(items[i].correct_label);
    out.push_back(bias_type == BiasType::Bandwagon
                      ? inject_bandwagon(items[i], target, catalog, rng)
                      : inject_authority(items[i], target, catalog, rng));
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

std::vector<BiasedPrompt> build_conflict_dataset(const std::vector<PairwiseItem>& items,
                                                 BiasType bias_type,
                                                 const TemplateCatalog& catalog,
                                                 Rng& rng) {
  return build_targeted_dataset(items, bias_type, catalog, rng, /*balanced=*/true);
}

std::vector<BiasedPrompt> build_wrong_only_dataset(const std::vector<PairwiseItem>& items,
                                                   BiasType bias_type,
                                                   const TemplateCatalog& catalog,
                                                   Rng& rng) {
  return build_targeted_dataset(items, bias_type, catalog, rng, /*balanced=*/false);
}

void write_biased_jsonl(const std::filesystem::path& path,
                        const std::vector<BiasedPrompt>& prompts) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path.string());
  for (const auto& p : prompts) {
    json rec{{"base_id", p.base.base_id},
             {"question", p.base.question},
             {"option_a", p.base.option_a},
             {"option_b", p.base.option_b},
             {"correct_label", label_name(p.base.correct_label)},
             {"subject", p.base.subject},
             {"split", split_name(p.base.split)},
             {"bias_type", bias_type_name(p.bias_type)},
             {"bias_target", p.bias_target ? label_name(*p.bias_target) : "none"},
             {"alignment", alignment_name(p.alignment)},
             {"template_id", p.template_id},
             {"position_variant", p.position_variant == PositionVariant::Swapped
                                      ? "swapped"
                                      : (p.position_variant == PositionVariant::Original
                                             ? "original"
                                             : "not_applicable")},
             {"rendered_text", p.rendered_text}};
    out << rec.dump() << '\n';
  }
}

std::vector<BiasedPrompt> read_biased_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<BiasedPrompt> prompts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    BiasedPrompt p;
    p.base.base_id = rec.at("base_id");
    p.base.question = rec.at("question");
    p.base.option_a = rec.at("option_a");
    p.base.option_b = rec.at("option_b");
    p.base.correct_label = parse_label(rec.at("correct_label"));
    p.base.subject = rec.at("subject");
    p.base.split = parse_split(rec.at("split"));
    p.bias_type = parse_bias_type(rec.at("bias_type"));
    const std::string target = rec.at("bias_target");
    if (target != "none") p.bias_target = parse_label(target);
    p.alignment = parse_alignment(rec.at("alignment"));
    p.template_id = rec.at("template_id");
    const std::string pv = rec.at("position_variant");
    p.position_variant = pv == "swapped" ? PositionVariant::Swapped
                         : pv == "original" ? PositionVariant::Original
                                            : PositionVariant::NotApplicable;
    p.rendered_text = rec.at("rendered_text");
    prompts.push_back(std::move(p));
  }
  return prompts;
}

}  // namespace eit
