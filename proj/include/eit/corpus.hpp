#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "eit/rng.hpp"
#include "eit/types.hpp"

namespace eit {

enum class Split { Train, Val, Test, Unassigned };

std::string split_name(Split s);
Split parse_split(const std::string& s);

// One multiple-choice question as ingested.
struct JudgeItem {
  std::string id;
  std::string question;
  std::vector<std::string> options;
  int correct_index = 0;
  std::string subject;
  Split split = Split::Unassigned;
};

// Reduction of a JudgeItem to the two-option evaluation form.
struct PairwiseItem {
  std::string base_id;
  std::string question;
  std::string option_a;
  std::string option_b;
  Label correct_label = Label::A;
  std::string subject;
  Split split = Split::Unassigned;
};

struct SplitSpec {
  std::set<std::string> in_domain_subjects;
  std::set<std::string> out_of_domain_subjects;
  double val_fraction = 0.05;
  std::uint64_t seed = 0;
};

enum class CorpusFormat { JsonLines, Csv };

// CSV column order: id,question,options,correct_index,subject with option
// texts joined by "||".
inline constexpr const char* kCsvOptionSeparator = "||";

struct RejectedRecord {
  std::size_t line = 0;  // 1-based input line
  std::string id;        // empty when the record had no readable id
  std::string message;
};

struct LoadResult {
  std::vector<JudgeItem> items;
  std::vector<RejectedRecord> rejects;
};

// Malformed records are collected in rejects; with strict=true the first
// malformed record throws instead.
LoadResult load_corpus(const std::filesystem::path& path, CorpusFormat format,
                       bool strict = false);

// Keeps the correct option, draws one distractor uniformly from the
// incorrect ones, and assigns (correct, distractor) to (A, B) by fair coin.
PairwiseItem make_pairwise(const JudgeItem& item, Rng& rng);

struct Partition {
  std::vector<JudgeItem> train;
  std::vector<JudgeItem> val;
  std::vector<JudgeItem> test;
};

// Out-of-domain subjects go to test; in-domain items are shuffled by seed and
// divided train/val by val_fraction. Deterministic in (items, spec).
Partition split_corpus(const std::vector<JudgeItem>& items, const SplitSpec& spec);

void write_items_jsonl(const std::filesystem::path& path,
                       const std::vector<JudgeItem>& items);
std::vector<JudgeItem> read_items_jsonl(const std::filesystem::path& path);

void write_pairwise_jsonl(const std::filesystem::path& path,
                          const std::vector<PairwiseItem>& items);
std::vector<PairwiseItem> read_pairwise_jsonl(const std::filesystem::path& path);

void validate(const JudgeItem& item);  // throws std::invalid_argument

}  // namespace eit
