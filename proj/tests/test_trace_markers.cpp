#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "eit/trace_markers.hpp"

using namespace eit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct LabeledTrace {
  std::string id;
  std::string method;
  std::string trace;
  bool labels[kMarkerCount] = {false, false, false, false};
};

std::vector<LabeledTrace> load_labeled_fixture() {
  std::ifstream in(fs::path(EIT_FIXTURES_DIR) / "labeled_traces.jsonl");
  REQUIRE(in.good());
  std::vector<LabeledTrace> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = json::parse(line);
    LabeledTrace t;
    t.id = rec.at("id");
    t.method = rec.at("method");
    t.trace = rec.at("trace");
    const auto& labels = rec.at("labels");
    for (int m = 0; m < kMarkerCount; ++m)
      t.labels[m] = labels.at(marker_name(static_cast<Marker>(m))).get<bool>();
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

TEST_CASE("detector reproduces every hand label in the trace fixture") {
  const auto traces = load_labeled_fixture();
  REQUIRE(traces.size() == 12);
  const auto lexicon = default_lexicon();
  for (const auto& t : traces) {
    const auto profile = detect_markers(t.trace, lexicon);
    for (int m = 0; m < kMarkerCount; ++m) {
      INFO("trace ", t.id, ", marker ", marker_name(static_cast<Marker>(m)));
      CHECK(profile.get(static_cast<Marker>(m)) == t.labels[m]);
    }
  }
}

TEST_CASE("the shipped lexicon file behaves identically to the built-in one") {
  const auto traces = load_labeled_fixture();
  const auto shipped = load_lexicon(fs::path(EIT_DATA_DIR) / "lexicon.json");
  for (const auto& t : traces) {
    const auto profile = detect_markers(t.trace, shipped);
    for (int m = 0; m < kMarkerCount; ++m)
      CHECK(profile.get(static_cast<Marker>(m)) == t.labels[m]);
  }
}

TEST_CASE("empty and inert traces produce no markers") {
  const auto lexicon = default_lexicon();
  for (const std::string& text :
       {std::string{}, std::string{"Nothing noteworthy here."},
        std::string{"<think></think>Answer: A"}}) {
    const auto profile = detect_markers(text, lexicon);
    CHECK_FALSE(profile.domain_engagement);
    CHECK_FALSE(profile.explicit_verification);
    CHECK_FALSE(profile.independence_language);
    CHECK_FALSE(profile.reasoned_disagreement);
    CHECK(profile.evidence.empty());
  }
}

TEST_CASE("detection scopes to the think segment when present") {
  const auto lexicon = default_lexicon();
  // Marker text outside the think segment is ignored...
  const auto outside =
      detect_markers("<think>plain words</think> time dilation", lexicon);
  CHECK_FALSE(outside.domain_engagement);
  // ...while the same text inside the segment fires.
  const auto inside =
      detect_markers("<think>time dilation</think> plain words", lexicon);
  CHECK(inside.domain_engagement);
  // Without any think markers, the whole text is in scope.
  CHECK(detect_markers("time dilation", lexicon).domain_engagement);
}

TEST_CASE("detection is case-insensitive and records evidence spans") {
  const auto lexicon = default_lexicon();
  const auto profile = detect_markers("<think>TIME DILATION matters</think>x", lexicon);
  CHECK(profile.domain_engagement);
  REQUIRE_FALSE(profile.evidence.empty());
  CHECK(profile.evidence[0].marker == Marker::DomainEngagement);
  CHECK(profile.evidence[0].rule == "time dilation");
  CHECK(profile.evidence[0].offset == 0);
  CHECK(profile.evidence[0].length == 13);
}

TEST_CASE("equation rule needs a digit near the sign") {
  MarkerLexicon lexicon = default_lexicon();
  CHECK(detect_markers("so t = 42 here", lexicon).explicit_verification);
  CHECK(detect_markers("3x ≡ 4y holds", lexicon).explicit_verification);
  CHECK_FALSE(detect_markers("x = y with no numbers anywhere near the sign, 9",
                             lexicon)
                  .explicit_verification);
  lexicon.equation_counts_as_verification = false;
  CHECK_FALSE(detect_markers("so t = 42 here", lexicon).explicit_verification);
}

TEST_CASE("reasoned disagreement needs both acknowledgment and override") {
  const auto lexicon = default_lexicon();
  CHECK_FALSE(detect_markers("the consensus is B", lexicon).reasoned_disagreement);
  CHECK_FALSE(detect_markers("that contradicts the data", lexicon).reasoned_disagreement);
  CHECK(detect_markers("the consensus is B but that contradicts the data", lexicon)
            .reasoned_disagreement);
}

TEST_CASE("wildcard rules match across arbitrary gaps") {
  MarkerLexicon lexicon = default_lexicon();
  lexicon.domain_engagement = {"recall*formality"};
  CHECK(detect_markers("I recall the definition of formality", lexicon)
            .domain_engagement);
  CHECK_FALSE(detect_markers("I recall nothing relevant", lexicon).domain_engagement);
  CHECK_FALSE(detect_markers("formality, then recall", lexicon).domain_engagement);
}

// Adding rules can only add detections: with a superset lexicon every marker
// that fired before still fires.
TEST_CASE("detection is monotone in the lexicon") {
  const auto traces = load_labeled_fixture();
  const auto base = default_lexicon();
  auto extended = base;
  extended.domain_engagement.push_back("zzz-never-seen");
  extended.explicit_verification.push_back("also unseen");
  extended.disagreement_acknowledgment.push_back("unheard");
  for (const auto& t : traces) {
    const auto before = detect_markers(t.trace, base);
    const auto after = detect_markers(t.trace, extended);
    for (int m = 0; m < kMarkerCount; ++m)
      if (before.get(static_cast<Marker>(m)))
        CHECK(after.get(static_cast<Marker>(m)));
  }
}

TEST_CASE("aggregation computes percentages exactly") {
  std::vector<MarkerProfile> profiles(50);
  for (int i = 0; i < 44; ++i) profiles[i].domain_engagement = true;
  for (int i = 0; i < 25; ++i) profiles[i].explicit_verification = true;
  profiles[0].reasoned_disagreement = true;
  const auto row = aggregate_markers(profiles, "eit");
  CHECK(row.method == "eit");
  CHECK(row.n == 50);
  CHECK(row.pct[static_cast<int>(Marker::DomainEngagement)] == 88.0);
  CHECK(row.pct[static_cast<int>(Marker::ExplicitVerification)] == 50.0);
  CHECK(row.pct[static_cast<int>(Marker::ReasonedDisagreement)] == 2.0);
  CHECK(row.pct[static_cast<int>(Marker::IndependenceLanguage)] == 0.0);
  CHECK_THROWS_AS(aggregate_markers(std::vector<MarkerProfile>{}, "x"),
                  std::invalid_argument);
}

TEST_CASE("lexicon json round-trip preserves every rule") {
  const auto lex = default_lexicon();
  const auto path = fs::temp_directory_path() / "eit_lexicon_rt.json";
  write_lexicon(path, lex);
  const auto back = load_lexicon(path);
  CHECK(back.domain_engagement == lex.domain_engagement);
  CHECK(back.explicit_verification == lex.explicit_verification);
  CHECK(back.equation_counts_as_verification == lex.equation_counts_as_verification);
  CHECK(back.independence_language == lex.independence_language);
  CHECK(back.disagreement_acknowledgment == lex.disagreement_acknowledgment);
  CHECK(back.disagreement_override == lex.disagreement_override);
}

TEST_CASE("trace jsonl reader and markers csv writer") {
  const auto records =
      read_traces_jsonl(fs::path(EIT_FIXTURES_DIR) / "labeled_traces.jsonl");
  REQUIRE(records.size() == 12);
  CHECK(records[0].id == "main_baseline");
  CHECK(records[0].method == "baseline");
  CHECK_FALSE(records[0].trace.empty());

  const auto lexicon = default_lexicon();
  std::map<std::string, std::vector<MarkerProfile>> by_method;
  for (const auto& r : records)
    by_method[r.method].push_back(detect_markers(r.trace, lexicon));
  std::vector<MarkerRow> rows;
  for (const auto& [method, profiles] : by_method)
    rows.push_back(aggregate_markers(profiles, method));

  const auto path = fs::temp_directory_path() / "eit_markers.csv";
  write_markers_csv(path, rows);
  std::ifstream in(path);
  std::string group_header, column_header;
  std::getline(in, group_header);
  std::getline(in, column_header);
  CHECK(group_header == "group,substantive,substantive,substantive,surface");
  CHECK(column_header ==
        "method,n,domain_engagement,explicit_verification,reasoned_disagreement,"
        "independence_language");
  std::size_t data_rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++data_rows;
  CHECK(data_rows == rows.size());
}
