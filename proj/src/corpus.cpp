#include "eit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace eit {

using nlohmann::json;

std::string split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
    default: return "unassigned";
  }
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  if (s == "unassigned") return Split::Unassigned;
  throw std::invalid_argument("unknown split: " + s);
}

void validate(const JudgeItem& item) {
  if (item.id.empty()) throw std::invalid_argument("item has empty id");
  if (item.question.empty())
    throw std::invalid_argument("item " + item.id + ": empty question");
  if (item.options.size() < 2)
    throw std::invalid_argument("item " + item.id + ": fewer than 2 options");
  if (item.correct_index < 0 ||
      item.correct_index >= static_cast<int>(item.options.size()))
    throw std::invalid_argument("item " + item.id + ": correct_index " +
                                std::to_string(item.correct_index) +
                                " out of range for " +
                                std::to_string(item.options.size()) + " options");
  for (std::size_t i = 0; i < item.options.size(); ++i) {
    if (item.options[i].empty())
      throw std::invalid_argument("item " + item.id + ": empty option text");
    for (std::size_t j = i + 1; j < item.options.size(); ++j)
      if (item.options[i] == item.options[j])
        throw std::invalid_argument("item " + item.id + ": duplicate option text");
  }
}

namespace {

JudgeItem item_from_json(const json& rec) {
  JudgeItem item;
  item.id = rec.at("id").get<std::string>();
  item.question = rec.at("question").get<std::string>();
  item.options = rec.at("options").get<std::vector<std::string>>();
  item.correct_index = rec.at("correct_index").get<int>();
  item.subject = rec.at("subject").get<std::string>();
  if (rec.contains("split")) item.split = parse_split(rec.at("split").get<std::string>());
  return item;
}

json item_to_json(const JudgeItem& item) {
  return json{{"id", item.id},
              {"question", item.question},
              {"options", item.options},
              {"correct_index", item.correct_index},
              {"subject", item.subject},
              {"split", split_name(item.split)}};
}

std::vector<std::string> split_csv_line(const std::string& line) {
  // Minimal CSV: double-quoted fields with "" escapes.
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

JudgeItem item_from_csv(const std::string& line) {
  auto fields = split_csv_line(line);
  if (fields.size() != 5)
    throw std::invalid_argument("expected 5 CSV columns, got " +
                                std::to_string(fields.size()));
  JudgeItem item;
  item.id = fields[0];
  item.question = fields[1];
  const std::string& opts = fields[2];
  const std::string sep = kCsvOptionSeparator;
  std::size_t pos = 0;
  while (true) {
    auto next = opts.find(sep, pos);
    item.options.push_back(opts.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + sep.size();
  }
  item.correct_index = std::stoi(fields[3]);
  item.subject = fields[4];
  return item;
}

}  // namespace

LoadResult load_corpus(const std::filesystem::path& path, CorpusFormat format,
                       bool strict) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());
  LoadResult result;
  std::string line;
  std::size_t lineno = 0;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (format == CorpusFormat::Csv && !header_skipped) {
      header_skipped = true;
      if (line.rfind("id,", 0) == 0) continue;  // optional header row
    }
    std::string id;
    try {
      JudgeItem item;
      if (format == CorpusFormat::JsonLines) {
        json rec = json::parse(line);
        if (rec.contains("id") && rec["id"].is_string()) id = rec["id"];
        item = item_from_json(rec);
      } else {
        item = item_from_csv(line);
        id = item.id;
      }
      validate(item);
      item.split = Split::Unassigned;
      result.items.push_back(std::move(item));
    } catch (const std::exception& e) {
      if (strict)
        throw std::runtime_error("line " + std::to_string(lineno) + ": " + e.what());
      result.rejects.push_back({lineno, id, e.what()});
    }
  }
  return result;
}

PairwiseItem make_pairwise(const JudgeItem& item, Rng& rng) {
  if (item.options.size() < 2)
    throw std::invalid_argument("item " + item.id + ": fewer than 2 options");
  const std::string& correct = item.options[item.correct_index];
  std::vector<const std::string*> wrong;
  for (int i = 0; i < static_cast<int>(item.options.size()); ++i)
    if (i != item.correct_index) wrong.push_back(&item.options[i]);
  const std::string& distractor = *wrong[uniform_index(rng, wrong.size())];

  PairwiseItem out;
  out.base_id = item.id;
  out.question = item.question;
  out.subject = item.subject;
  out.split = item.split;
  if (coin(rng)) {
    out.option_a = correct;
    out.option_b = distractor;
    out.correct_label = Label::A;
  } else {
    out.option_a = distractor;
    out.option_b = correct;
    out.correct_label = Label::B;
  }
  return out;
}

Partition split_corpus(const std::vector<JudgeItem>& items, const SplitSpec& spec) {
  Partition out;
  std::vector<JudgeItem> in_domain;
  for (const auto& item : items) {
    const bool in = spec.in_domain_subjects.count(item.subject) > 0;
    const bool ood = spec.out_of_domain_subjects.count(item.subject) > 0;
    if (in == ood)
      throw std::invalid_argument("item " + item.id + ": subject '" + item.subject +
                                  "' must be in exactly one subject set");
    if (ood) {
      out.test.push_back(item);
      out.test.back().split = Split::Test;
    } else {
      in_domain.push_back(item);
    }
  }
  auto rng = make_rng(spec.seed);
  std::shuffle(in_domain.begin(), in_domain.end(), rng);
  const auto n_val = static_cast<std::size_t>(
      std::llround(spec.val_fraction * static_cast<double>(in_domain.size())));
  for (std::size_t i = 0; i < in_domain.size(); ++i) {
    if (i < n_val) {
      in_domain[i].split = Split::Val;
      out.val.push_back(in_domain[i]);
    } else {
      in_domain[i].split = Split::Train;
      out.train.push_back(in_domain[i]);
    }
  }
  return out;
}

void write_items_jsonl(const std::filesystem::path& path,
                       const std::vector<JudgeItem>& items) {
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("cannot write: " + path.string());
  for (const auto& item : items) outf << item_to_json(item).dump() << '\n';
}

std::vector<JudgeItem> read_items_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<JudgeItem> items;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    items.push_back(item_from_json(json::parse(line)));
  }
  return items;
}

void write_pairwise_jsonl(const std::filesystem::path& path,
                          const std::vector<PairwiseItem>& items) {
  std::ofstream outf(path);
  if (!outf) throw std::runtime_error("cannot write: " + path.string());
  for (const auto& p : items) {
    json rec{{"base_id", p.base_id},     {"question", p.question},
             {"option_a", p.option_a},   {"option_b", p.option_b},
             {"correct_label", label_name(p.correct_label)},
             {"subject", p.subject},     {"split", split_name(p.split)}};
    outf << rec.dump() << '\n';
  }
}

std::vector<PairwiseItem> read_pairwise_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<PairwiseItem> items;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    PairwiseItem p;
    p.base_id = rec.at("base_id");
    p.question = rec.at("question");
    p.option_a = rec.at("option_a");
    p.option_b = rec.at("option_b");
    p.correct_label = parse_label(rec.at("correct_label"));
    p.subject = rec.at("subject");
    p.split = parse_split(rec.at("split"));
    items.push_back(std::move(p));
  }
  return items;
}

}  // namespace eit
