#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace eit {

enum class Marker {
  DomainEngagement,
  ExplicitVerification,
  IndependenceLanguage,
  ReasonedDisagreement,
};
inline constexpr int kMarkerCount = 4;

std::string marker_name(Marker m);
Marker parse_marker(const std::string& s);

// Rules are case-insensitive substrings; a '*' inside a rule matches any run
// of characters (simple wildcard).
struct MarkerLexicon {
  std::vector<std::string> domain_engagement;
  std::vector<std::string> explicit_verification;
  // Structural rule: an equation-like token (= or congruence sign with a digit
  // nearby) counts toward explicit verification.
  bool equation_counts_as_verification = true;
  std::vector<std::string> independence_language;
  // reasoned_disagreement requires one match from each list.
  std::vector<std::string> disagreement_acknowledgment;
  std::vector<std::string> disagreement_override;
};

MarkerLexicon default_lexicon();
MarkerLexicon load_lexicon(const std::filesystem::path& path);
void write_lexicon(const std::filesystem::path& path, const MarkerLexicon& lexicon);

struct EvidenceSpan {
  Marker marker = Marker::DomainEngagement;
  std::string rule;    // the rule (or "equation") that matched
  std::size_t offset = 0;
  std::size_t length = 0;
};

struct MarkerProfile {
  bool domain_engagement = false;
  bool explicit_verification = false;
  bool independence_language = false;
  bool reasoned_disagreement = false;
  std::vector<EvidenceSpan> evidence;

  bool get(Marker m) const;
};

// Rules are evaluated over the think-delimited segment when one exists,
// otherwise over the whole text.
MarkerProfile detect_markers(const std::string& trace, const MarkerLexicon& lexicon);

struct MarkerRow {
  std::string method;
  std::size_t n = 0;
  double pct[kMarkerCount] = {0, 0, 0, 0};  // indexed by Marker
};

MarkerRow aggregate_markers(std::span<const MarkerProfile> profiles,
                            const std::string& method);

struct TraceRecord {
  std::string id;
  std::string method;
  std::string trace;
};

std::vector<TraceRecord> read_traces_jsonl(const std::filesystem::path& path);

// Substantive markers (domain engagement, verification, disagreement) grouped
// before the surface-form marker (independence language).
void write_markers_csv(const std::filesystem::path& path,
                       std::span<const MarkerRow> rows);

}  // namespace eit
