#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eit/corpus.hpp"
#include "eit/rng.hpp"
#include "eit/types.hpp"

namespace eit {

enum class BiasType { Bandwagon, Authority, Distraction, Position };

std::string bias_type_name(BiasType t);
BiasType parse_bias_type(const std::string& s);

enum class Alignment { CorrectBias, WrongBias, NotApplicable };
enum class PositionVariant { Original, Swapped, NotApplicable };

std::string alignment_name(Alignment a);
Alignment parse_alignment(const std::string& s);

struct BiasedPrompt {
  PairwiseItem base;
  BiasType bias_type = BiasType::Bandwagon;
  std::optional<Label> bias_target;  // empty for distraction/position
  Alignment alignment = Alignment::NotApplicable;
  std::string template_id;
  std::string rendered_text;
  PositionVariant position_variant = PositionVariant::NotApplicable;
};

// Placeholders: {TARGET_LETTER} expands to the target option letter,
// {PERCENT} to an integer drawn uniformly from the catalog's percent range.
struct BiasTemplate {
  std::string template_id;
  std::string pattern;
};

struct TemplateCatalog {
  std::vector<BiasTemplate> bandwagon;
  std::vector<BiasTemplate> authority;
  std::vector<BiasTemplate> distraction;
  int percent_min = 50;
  int percent_max = 100;

  const std::vector<BiasTemplate>& family(BiasType t) const;
};

TemplateCatalog default_catalog();
TemplateCatalog load_catalog(const std::filesystem::path& path);
void write_catalog(const std::filesystem::path& path, const TemplateCatalog& catalog);

// Layout shared by every rendering: question, blank line, the two option
// lines, and for appended statements a blank line plus the statement.
std::string render_clean(const PairwiseItem& item);

// Consensus statement appended after both options.
BiasedPrompt inject_bandwagon(const PairwiseItem& item, Label target,
                              const TemplateCatalog& catalog, Rng& rng);

// Authority claim concatenated to the target option's own text.
BiasedPrompt inject_authority(const PairwiseItem& item, Label target,
                              const TemplateCatalog& catalog, Rng& rng);

// Irrelevant personal fact appended after both options; no target.
BiasedPrompt inject_distraction(const PairwiseItem& item,
                                const TemplateCatalog& catalog, Rng& rng);

// Option order swapped; the correct answer keeps its semantic identity.
BiasedPrompt swap_positions(const PairwiseItem& item);

// One biased variant per item with targets assigned so alignments balance to
// within one; output order shuffled.
std::vector<BiasedPrompt> build_conflict_dataset(const std::vector<PairwiseItem>& items,
                                                 BiasType bias_type,
                                                 const TemplateCatalog& catalog,
                                                 Rng& rng);

// Every variant targets the incorrect option.
std::vector<BiasedPrompt> build_wrong_only_dataset(const std::vector<PairwiseItem>& items,
                                                   BiasType bias_type,
                                                   const TemplateCatalog& catalog,
                                                   Rng& rng);

void write_biased_jsonl(const std::filesystem::path& path,
                        const std::vector<BiasedPrompt>& prompts);
std::vector<BiasedPrompt> read_biased_jsonl(const std::filesystem::path& path);

}  // namespace eit
