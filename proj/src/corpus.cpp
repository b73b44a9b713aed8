#include "stress/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <istream>

#include "stress/encoding.hpp"
#include "stress/rng.hpp"

namespace stress {

bool is_valid_upos(std::string_view tag) {
  return tag == "_" || std::find(kUposTags.begin(), kUposTags.end(), tag) != kUposTags.end();
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return cols;
}

}  // namespace

std::vector<Sentence> parse_conllu(std::istream& in, std::vector<ParseIssue>* issues) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::string line;
  std::size_t lineno = 0;

  auto fail = [&](const std::string& msg) {
    if (issues == nullptr) throw ParseError(lineno, msg);
    issues->push_back({lineno, msg});
  };
  auto flush = [&] {
    if (!current.empty()) sentences.push_back(std::move(current));
    current.clear();
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;

    const auto cols = split_tabs(line);
    if (cols.size() != 10) {
      fail("expected 10 tab-separated columns, got " + std::to_string(cols.size()));
      continue;
    }
    const std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) continue;

    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), index);
    if (ec != std::errc{} || ptr != id.data() + id.size() || index == 0) {
      fail("invalid token id '" + std::string(id) + "'");
      continue;
    }
    if (cols[1].empty()) {
      fail("empty FORM column");
      continue;
    }
    if (!is_valid_upos(cols[3])) {
      fail("unknown UPOS tag '" + std::string(cols[3]) + "'");
      continue;
    }
    current.push_back(Token{std::string(cols[1]), std::string(cols[3]), index});
  }
  flush();
  return sentences;
}

std::vector<RawTrigram> extract_trigrams(std::span<const Token> sentence) {
  std::vector<RawTrigram> out;
  out.reserve(sentence.size());
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    RawTrigram t;
    t.center = sentence[i];
    if (i > 0) t.prev = sentence[i - 1];
    if (i + 1 < sentence.size()) t.next = sentence[i + 1];
    out.push_back(std::move(t));
  }
  return out;
}

DropReason classify_center(const Token& center, Language lang) {
  static constexpr std::array<std::string_view, 4> kRejected = {"NUM", "PUNCT", "SYM", "X"};
  if (std::find(kRejected.begin(), kRejected.end(), center.upos) != kRejected.end()) {
    return DropReason::rejected_pos;
  }
  std::u32string form;
  try {
    form = utf8_to_u32(center.form);
  } catch (const InputError&) {
    return DropReason::non_cyrillic;
  }
  const bool cyrillic = !form.empty() && std::all_of(form.begin(), form.end(), [](char32_t c) {
    return c == kCombiningAcute || is_cyrillic_letter(c);
  });
  if (!cyrillic) return DropReason::non_cyrillic;
  if (vowel_positions(form, lang).empty()) return DropReason::no_vowel;
  return DropReason::kept;
}

std::vector<RawTrigram> filter_trigrams(std::span<const RawTrigram> trigrams, Language lang) {
  std::vector<RawTrigram> out;
  for (const auto& t : trigrams) {
    if (classify_center(t.center, lang) == DropReason::kept) out.push_back(t);
  }
  return out;
}

StressRule parse_stress_rule(std::string_view name) {
  if (name == "first-vowel") return StressRule::first_vowel;
  if (name == "last-vowel") return StressRule::last_vowel;
  if (name == "penultimate-vowel") return StressRule::penultimate_vowel;
  throw InputError("unknown stress rule '" + std::string(name) + "'");
}

std::string_view stress_rule_name(StressRule rule) {
  switch (rule) {
    case StressRule::first_vowel: return "first-vowel";
    case StressRule::last_vowel: return "last-vowel";
    case StressRule::penultimate_vowel: return "penultimate-vowel";
  }
  return "?";
}

std::size_t apply_stress_rule(StressRule rule, std::u32string_view word, Language lang) {
  const auto vowels = vowel_positions(word, lang);
  const std::size_t needed = rule == StressRule::penultimate_vowel ? 2 : 1;
  if (vowels.size() < needed) throw InputError("word has too few vowels for the stress rule");
  switch (rule) {
    case StressRule::first_vowel: return vowels.front();
    case StressRule::last_vowel: return vowels.back();
    case StressRule::penultimate_vowel: return vowels[vowels.size() - 2];
  }
  return 0;
}

namespace {

std::u32string_view consonants(Language lang) {
  switch (lang) {
    case Language::ru: return U"бвгджзйклмнпрстфхцчшщ";
    case Language::uk: return U"бвгґджзйклмнпрстфхцчшщ";
    case Language::be: return U"бвгджзйклмнпрстўфхцчш";
  }
  return U"";
}

std::u32string_view vowels(Language lang) {
  switch (lang) {
    case Language::ru: return U"аеёиоуыэюя";
    case Language::uk: return U"аеєиіоуюя";
    case Language::be: return U"аеёіоуыэюя";
  }
  return U"";
}

class WordMaker {
 public:
  WordMaker(Rng& rng, Language lang) : rng_(rng), cons_(consonants(lang)), vows_(vowels(lang)) {}

  // At most three characters per syllable.
  std::u32string word(std::size_t syllables) {
    std::u32string w;
    for (std::size_t s = 0; s < syllables; ++s) {
      if (rng_.chance(0.85)) w.push_back(pick(cons_));
      w.push_back(pick(vows_));
      if (rng_.chance(0.2)) w.push_back(pick(cons_));
    }
    return w;
  }

  // A neighbour: absent, a short 1-2 letter word, or 1..4 syllables.
  std::u32string neighbour() {
    const double r = rng_.uniform01();
    if (r < 0.1) return {};
    if (r < 0.25) {
      std::u32string w;
      w.push_back(pick(cons_));
      if (rng_.chance(0.6)) w.push_back(pick(vows_));
      return w;
    }
    return word(1 + rng_.below(4));
  }

 private:
  char32_t pick(std::u32string_view set) { return set[rng_.below(set.size())]; }

  Rng& rng_;
  std::u32string_view cons_;
  std::u32string_view vows_;
};

}  // namespace

std::vector<Trigram> generate_synthetic_corpus(StressRule rule, std::size_t n, std::uint64_t seed,
                                               Language lang) {
  if (n == 0) throw InputError("synthetic corpus size must be positive");
  Rng rng(seed);
  WordMaker maker(rng, lang);
  std::vector<Trigram> out;
  out.reserve(n);
  while (out.size() < n) {
    const std::u32string prev = maker.neighbour();
    const std::u32string center = maker.word(2 + rng.below(8));
    const std::u32string next = maker.neighbour();
    std::size_t pos = 0;
    try {
      pos = apply_stress_rule(rule, center, lang);
    } catch (const InputError&) {
      continue;  // regenerate
    }
    out.push_back(Trigram{u32_to_utf8(prev), u32_to_utf8(center), u32_to_utf8(next), pos, lang});
  }
  return out;
}

}  // namespace stress
