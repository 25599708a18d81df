#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace eit {

// Option label in a two-option item.
enum class Label { A, B };

// A judged decision; Unparsed means no option letter could be extracted.
enum class Choice { A, B, Unparsed };

inline Label other(Label l) { return l == Label::A ? Label::B : Label::A; }

inline char to_char(Label l) { return l == Label::A ? 'A' : 'B'; }

inline Choice to_choice(Label l) { return l == Label::A ? Choice::A : Choice::B; }

inline bool matches(Choice c, Label l) {
  return (c == Choice::A && l == Label::A) || (c == Choice::B && l == Label::B);
}

inline std::string label_name(Label l) { return l == Label::A ? "A" : "B"; }

inline std::string choice_name(Choice c) {
  switch (c) {
    case Choice::A: return "A";
    case Choice::B: return "B";
    default: return "unparsed";
  }
}

inline Label parse_label(const std::string& s) {
  if (s == "A" || s == "a") return Label::A;
  if (s == "B" || s == "b") return Label::B;
  throw std::invalid_argument("not an option label: " + s);
}

inline Choice parse_choice_name(const std::string& s) {
  if (s == "A" || s == "a") return Choice::A;
  if (s == "B" || s == "b") return Choice::B;
  if (s == "unparsed") return Choice::Unparsed;
  throw std::invalid_argument("not a choice: " + s);
}

}  // namespace eit
