#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stress/text.hpp"
#include "stress/trigram.hpp"

namespace stress {

// The 17 Universal Dependencies part-of-speech tags.
inline constexpr std::array<std::string_view, 17> kUposTags = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

bool is_valid_upos(std::string_view tag);  // includes the "_" placeholder

struct Token {
  std::string form;
  std::string upos;
  std::size_t index = 0;  // 1-based within the sentence

  friend bool operator==(const Token&, const Token&) = default;
};

using Sentence = std::vector<Token>;

struct RawTrigram {
  std::optional<Token> prev;  // absent at sentence start
  Token center;
  std::optional<Token> next;  // absent at sentence end
};

struct ParseIssue {
  std::size_t line;
  std::string message;
};

/// Reads CoNLL-U sentences. Multiword ranges ("3-4"), empty nodes ("5.1") and
/// comments are skipped. A malformed line throws ParseError unless `issues` is
/// given, in which case it is recorded there and skipped.
std::vector<Sentence> parse_conllu(std::istream& in, std::vector<ParseIssue>* issues = nullptr);

std::vector<RawTrigram> extract_trigrams(std::span<const Token> sentence);

enum class DropReason : std::uint8_t { kept, rejected_pos, non_cyrillic, no_vowel };
inline constexpr std::array<std::string_view, 4> kDropReasonNames = {"kept", "rejected_pos",
                                                                     "non_cyrillic", "no_vowel"};

// Reason a center token would be filtered out, or DropReason::kept.
DropReason classify_center(const Token& center, Language lang);

std::vector<RawTrigram> filter_trigrams(std::span<const RawTrigram> trigrams, Language lang);

enum class StressRule { first_vowel, last_vowel, penultimate_vowel };

StressRule parse_stress_rule(std::string_view name);
std::string_view stress_rule_name(StressRule rule);

// Applies the rule to a word; throws InputError if the word has too few vowels.
std::size_t apply_stress_rule(StressRule rule, std::u32string_view word, Language lang);

/// Deterministic corpus of Cyrillic pseudo-word trigrams whose center words
/// carry 2..9 vowels and are stressed according to `rule`.
std::vector<Trigram> generate_synthetic_corpus(StressRule rule, std::size_t n, std::uint64_t seed,
                                               Language lang);

}  // namespace stress
