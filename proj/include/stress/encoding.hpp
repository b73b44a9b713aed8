#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stress/text.hpp"
#include "stress/trigram.hpp"

namespace stress {

inline constexpr std::size_t kDefaultMaxLen = 40;
inline constexpr std::size_t kContextChars = 3;
inline constexpr char32_t kWordSeparator = U' ';
inline constexpr char32_t kJoinSeparator = U'_';

bool is_vowel(char32_t c, Language lang);

/// 1-based indices of the vowels of `lang` in `word`, case-insensitive.
std::vector<std::size_t> vowel_positions(std::u32string_view word, Language lang);
std::vector<std::size_t> vowel_positions(std::string_view word_utf8, Language lang);

/// Removes every combining acute accent (U+0301).
std::u32string strip_stress_marks(std::u32string_view text);
std::string strip_stress_marks(std::string_view text_utf8);

/// Half-open range [start, end) into a character sequence.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - start; }
  bool contains(std::size_t i) const { return i >= start && i < end; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct Context {
  std::u32string text;
  Span center;
};

/// Joins the center word with its reduced neighbours.
///
/// A neighbour of three or more characters contributes its last three
/// characters separated by a space. A shorter neighbour is kept whole and glued
/// to the word with "_". An empty neighbour contributes nothing. Inputs are
/// expected lowercased and stress-stripped; throws InputError on an empty word.
Context build_context(std::u32string_view prev, std::u32string_view word, std::u32string_view next);

/// Lowercases and strips stress marks from all three words, then builds the context.
Context prepare_context(std::string_view prev, std::string_view word, std::string_view next);

/// Character vocabulary with reserved ids PAD=0, UNK=1, SEP=2. Both the space
/// and underscore separators map to SEP. Immutable after construction.
class CharVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kSep = 2;
  static constexpr int kReserved = 3;

  CharVocab() = default;
  // Characters receive ids kReserved.. in the given order. Duplicates and
  // separators are rejected.
  explicit CharVocab(std::vector<char32_t> chars);

  int id(char32_t c) const;
  std::size_t size() const { return chars_.size() + kReserved; }
  const std::vector<char32_t>& chars() const { return chars_; }

  // One character per line, UTF-8; line k (0-based) holds id k + 3.
  void write(std::ostream& out) const;
  static CharVocab read(std::istream& in);

  friend bool operator==(const CharVocab& a, const CharVocab& b) { return a.chars_ == b.chars_; }

 private:
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, int> index_;
};

/// Vocabulary over all characters of the built contexts, sorted by code point.
CharVocab build_vocab(std::span<const Trigram> dataset);

struct EncodedExample {
  std::vector<int> char_ids;
  std::vector<std::uint8_t> labels;  // empty for unlabeled inputs
  Span center;
  std::vector<std::uint8_t> vowel_mask;
  Language language = Language::ru;

  std::size_t length() const { return char_ids.size(); }
  // Sequence index of the single positive label.
  std::size_t target() const;
};

/// Encodes an input without labels (for prediction).
EncodedExample encode_input(std::string_view prev, std::string_view word, std::string_view next,
                            Language lang, const CharVocab& vocab, std::size_t max_len);

/// Encodes a labeled trigram. Throws InputError if the context exceeds max_len.
EncodedExample encode(const Trigram& t, const CharVocab& vocab, std::size_t max_len);

}  // namespace stress
