#include "stress/encoding.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

namespace stress {

namespace {

constexpr std::u32string_view kRuVowels = U"аеёиоуыэюя";
constexpr std::u32string_view kUkVowels = U"аеєиіоуюя";
constexpr std::u32string_view kBeVowels = U"аеёіоуыэюя";

std::u32string_view vowel_set(Language lang) {
  switch (lang) {
    case Language::ru: return kRuVowels;
    case Language::uk: return kUkVowels;
    case Language::be: return kBeVowels;
  }
  throw InputError("unknown language");
}

}  // namespace

bool is_vowel(char32_t c, Language lang) {
  return vowel_set(lang).find(to_lower(c)) != std::u32string_view::npos;
}

std::vector<std::size_t> vowel_positions(std::u32string_view word, Language lang) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (is_vowel(word[i], lang)) out.push_back(i + 1);
  }
  return out;
}

std::vector<std::size_t> vowel_positions(std::string_view word_utf8, Language lang) {
  return vowel_positions(utf8_to_u32(word_utf8), lang);
}

std::u32string strip_stress_marks(std::u32string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (c != kCombiningAcute) out.push_back(c);
  }
  return out;
}

std::string strip_stress_marks(std::string_view text_utf8) {
  return u32_to_utf8(strip_stress_marks(utf8_to_u32(text_utf8)));
}

Context build_context(std::u32string_view prev, std::u32string_view word, std::u32string_view next) {
  if (word.empty()) throw InputError("cannot build context for an empty word");
  Context ctx;
  auto& s = ctx.text;
  if (!prev.empty()) {
    if (prev.size() >= kContextChars) {
      s.append(prev.substr(prev.size() - kContextChars));
      s.push_back(kWordSeparator);
    } else {
      s.append(prev);
      s.push_back(kJoinSeparator);
    }
  }
  ctx.center.start = s.size();
  s.append(word);
  ctx.center.end = s.size();
  if (!next.empty()) {
    if (next.size() >= kContextChars) {
      s.push_back(kWordSeparator);
      s.append(next.substr(next.size() - kContextChars));
    } else {
      s.push_back(kJoinSeparator);
      s.append(next);
    }
  }
  return ctx;
}

Context prepare_context(std::string_view prev, std::string_view word, std::string_view next) {
  auto norm = [](std::string_view w) { return to_lower(strip_stress_marks(utf8_to_u32(w))); };
  return build_context(norm(prev), norm(word), norm(next));
}

CharVocab::CharVocab(std::vector<char32_t> chars) : chars_(std::move(chars)) {
  for (std::size_t i = 0; i < chars_.size(); ++i) {
    const char32_t c = chars_[i];
    if (c == kWordSeparator || c == kJoinSeparator) {
      throw InputError("separator characters are reserved in the vocabulary");
    }
    if (!index_.emplace(c, static_cast<int>(i) + kReserved).second) {
      throw InputError("duplicate vocabulary character U+" + std::to_string(static_cast<unsigned>(c)));
    }
  }
}

int CharVocab::id(char32_t c) const {
  if (c == kWordSeparator || c == kJoinSeparator) return kSep;
  const auto it = index_.find(c);
  return it == index_.end() ? kUnk : it->second;
}

void CharVocab::write(std::ostream& out) const {
  for (char32_t c : chars_) {
    std::string line;
    append_utf8(line, c);
    out << line << '\n';
  }
}

CharVocab CharVocab::read(std::istream& in) {
  std::vector<char32_t> chars;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cps = utf8_to_u32(line);
    if (cps.size() != 1) throw ParseError(lineno, "expected exactly one character per vocabulary line");
    chars.push_back(cps[0]);
  }
  return CharVocab(std::move(chars));
}

CharVocab build_vocab(std::span<const Trigram> dataset) {
  if (dataset.empty()) throw InputError("cannot build a vocabulary from an empty dataset");
  std::set<char32_t> seen;
  for (const auto& t : dataset) {
    for (char32_t c : prepare_context(t.prev, t.word, t.next).text) {
      if (c != kWordSeparator && c != kJoinSeparator) seen.insert(c);
    }
  }
  return CharVocab(std::vector<char32_t>(seen.begin(), seen.end()));
}

std::size_t EncodedExample::target() const {
  const auto it = std::find(labels.begin(), labels.end(), std::uint8_t{1});
  if (it == labels.end()) throw InputError("example has no positive label");
  return static_cast<std::size_t>(it - labels.begin());
}

EncodedExample encode_input(std::string_view prev, std::string_view word, std::string_view next,
                            Language lang, const CharVocab& vocab, std::size_t max_len) {
  const Context ctx = prepare_context(prev, word, next);
  if (ctx.text.size() > max_len) {
    throw InputError("context of " + std::to_string(ctx.text.size()) + " characters exceeds max_len " +
                     std::to_string(max_len));
  }
  EncodedExample ex;
  ex.center = ctx.center;
  ex.language = lang;
  ex.char_ids.reserve(ctx.text.size());
  ex.vowel_mask.assign(ctx.text.size(), 0);
  for (std::size_t i = 0; i < ctx.text.size(); ++i) {
    ex.char_ids.push_back(vocab.id(ctx.text[i]));
    if (ctx.center.contains(i) && is_vowel(ctx.text[i], lang)) ex.vowel_mask[i] = 1;
  }
  return ex;
}

EncodedExample encode(const Trigram& t, const CharVocab& vocab, std::size_t max_len) {
  EncodedExample ex = encode_input(t.prev, t.word, t.next, t.language, vocab, max_len);
  const std::size_t pos = ex.center.start + t.stress_pos - 1;
  if (t.stress_pos == 0 || !ex.center.contains(pos) || !ex.vowel_mask[pos]) {
    throw InputError("stress_pos " + std::to_string(t.stress_pos) + " does not address a vowel of '" +
                     t.word + "'");
  }
  ex.labels.assign(ex.length(), 0);
  ex.labels[pos] = 1;
  return ex;
}

}  // namespace stress
