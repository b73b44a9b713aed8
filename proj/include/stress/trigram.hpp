#pragma once

#include <cstddef>
#include <string>

#include "stress/text.hpp"

namespace stress {

// One dataset entry: a center word with its neighbours and the 1-based
// character index of the stressed vowel in `word`.
struct Trigram {
  std::string prev;  // empty when absent
  std::string word;
  std::string next;  // empty when absent
  std::size_t stress_pos = 0;
  Language language = Language::ru;

  friend bool operator==(const Trigram&, const Trigram&) = default;
};

// Throws InputError describing the first violated invariant: non-empty word,
// no combining accents anywhere, stress_pos addressing a vowel of `language`.
void validate_trigram(const Trigram& t);

}  // namespace stress
