#include <doctest.h>

#include <sstream>

#include "stress/corpus.hpp"
#include "stress/encoding.hpp"
#include "stress/rng.hpp"

using namespace stress;

namespace {

// Direct enumeration against the Russian vowel letters.
std::vector<std::size_t> ru_vowels_by_hand(std::u32string_view w) {
  const std::u32string vowels = U"аеёиоуыэюяАЕЁИОУЫЭЮЯ";
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (vowels.find(w[i]) != std::u32string::npos) out.push_back(i + 1);
  }
  return out;
}

std::string ctx_text(const Context& c) { return u32_to_utf8(c.text); }

}  // namespace

TEST_CASE("vowel_positions") {
  CHECK(vowel_positions("ворона", Language::ru) == std::vector<std::size_t>{2, 4, 6});
  CHECK(vowel_positions("тит", Language::ru) == std::vector<std::size_t>{2});
  CHECK(vowel_positions("", Language::ru).empty());
  CHECK(vowel_positions("в", Language::ru).empty());
  CHECK(vowel_positions("ВОРОНА", Language::ru) == std::vector<std::size_t>{2, 4, 6});
  // і is a vowel in uk/be but not ru; ы is not a vowel in uk; ў is never a vowel.
  CHECK(vowel_positions("і", Language::ru).empty());
  CHECK(vowel_positions("і", Language::uk) == std::vector<std::size_t>{1});
  CHECK(vowel_positions("ы", Language::uk).empty());
  CHECK(vowel_positions("заўтра", Language::be) == std::vector<std::size_t>{2, 6});
  CHECK(vowel_positions("їжак", Language::uk) == std::vector<std::size_t>{3});
  CHECK(vowel_positions("єнот", Language::uk) == std::vector<std::size_t>{1, 3});
  CHECK_THROWS_AS(parse_language("pl"), InputError);
}

TEST_CASE("vowel_positions agrees with direct enumeration (property)") {
  const std::u32string alphabet = U"абвгдеёжзийклмнопрстуфхцчшщъыьэюяАОЁ";
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    std::u32string w;
    const std::size_t n = rng.below(15);
    for (std::size_t i = 0; i < n; ++i) w.push_back(alphabet[rng.below(alphabet.size())]);
    CHECK(vowel_positions(w, Language::ru) == ru_vowels_by_hand(w));
  }
}

TEST_CASE("strip_stress_marks") {
  CHECK(strip_stress_marks(std::string("воро́на")) == "ворона");
  CHECK(strip_stress_marks(std::string("тит")) == "тит");
  CHECK(strip_stress_marks(std::string("а́а́")) == "аа");
  for (const std::string s : {"воро́на", "а́а́", "", "тит", "за́мок замо́к"}) {
    const auto once = strip_stress_marks(s);
    CHECK(strip_stress_marks(once) == once);
  }
}

TEST_CASE("build_context examples") {
  const auto table = build_context(U"белая", U"ворона", U"летит");
  CHECK(ctx_text(table) == "лая ворона тит");
  CHECK(table.center == Span{4, 10});

  const auto joined = build_context(U"те", U"облака", U"");
  CHECK(ctx_text(joined) == "те_облака");
  CHECK(joined.center == Span{3, 9});

  const auto bare = build_context(U"", U"ворона", U"");
  CHECK(ctx_text(bare) == "ворона");
  CHECK(bare.center == Span{0, 6});

  const auto right_short = build_context(U"", U"облака", U"те");
  CHECK(ctx_text(right_short) == "облака_те");
  CHECK(right_short.center == Span{0, 6});

  CHECK_THROWS_AS(build_context(U"а", U"", U"б"), InputError);
}

TEST_CASE("prepare_context lowercases and strips stress marks") {
  const auto c = prepare_context("Бе́лая", "ВОРО́НА", "лети́т");
  CHECK(ctx_text(c) == "лая ворона тит");
}

TEST_CASE("build_context length is bounded by word + 8 (property)") {
  const std::u32string alphabet = U"абвгдеклмнопрст";
  Rng rng(5);
  auto word = [&](std::size_t max) {
    std::u32string w;
    const std::size_t n = rng.below(max + 1);
    for (std::size_t i = 0; i < n; ++i) w.push_back(alphabet[rng.below(alphabet.size())]);
    return w;
  };
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = word(8), n = word(8);
    auto w = word(12);
    if (w.empty()) w = U"а";
    const auto c = build_context(p, w, n);
    CHECK(c.text.size() <= w.size() + 8);
    CHECK(c.text.substr(c.center.start, c.center.size()) == w);
  }
}

TEST_CASE("encode reproduces the white-crow labels") {
  const Trigram t{"белая", "ворона", "летит", 4, Language::ru};
  const CharVocab vocab = build_vocab(std::vector<Trigram>{t});
  const auto ex = encode(t, vocab, kDefaultMaxLen);
  CHECK(ex.labels == std::vector<std::uint8_t>{0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0});
  CHECK(ex.center == Span{4, 10});
  CHECK(ex.vowel_mask == std::vector<std::uint8_t>{0, 0, 0, 0, 0, 1, 0, 1, 0, 1, 0, 0, 0, 0});
  CHECK(ex.char_ids[3] == CharVocab::kSep);
  CHECK(ex.char_ids[10] == CharVocab::kSep);
  CHECK(ex.target() == 7);
}

TEST_CASE("encode single-vowel and error cases") {
  const Trigram t{"", "тит", "", 2, Language::ru};
  const CharVocab vocab = build_vocab(std::vector<Trigram>{t});
  const auto ex = encode(t, vocab, kDefaultMaxLen);
  CHECK(ex.labels == std::vector<std::uint8_t>{0, 1, 0});

  CHECK_THROWS_AS(encode(t, vocab, 2), InputError);
  const Trigram consonant{"", "тит", "", 1, Language::ru};
  CHECK_THROWS_AS(encode(consonant, vocab, kDefaultMaxLen), InputError);
}

TEST_CASE("encoded examples satisfy the label invariants (property)") {
  for (Language lang : {Language::ru, Language::uk, Language::be}) {
    const auto data = generate_synthetic_corpus(StressRule::penultimate_vowel, 300, 9, lang);
    const CharVocab vocab = build_vocab(data);
    for (const auto& t : data) {
      const auto ex = encode(t, vocab, kDefaultMaxLen);
      const auto again = encode(t, vocab, kDefaultMaxLen);
      CHECK(ex.char_ids == again.char_ids);
      CHECK(ex.labels == again.labels);
      int ones = 0;
      for (std::size_t i = 0; i < ex.length(); ++i) {
        ones += ex.labels[i];
        if (ex.labels[i]) {
          CHECK(ex.center.contains(i));
          CHECK(ex.vowel_mask[i]);
        }
        if (ex.vowel_mask[i]) CHECK(ex.center.contains(i));
        CHECK(static_cast<std::size_t>(ex.char_ids[i]) < vocab.size());
      }
      CHECK(ones == 1);
      CHECK(ex.target() == ex.center.start + t.stress_pos - 1);
    }
  }
}

TEST_CASE("CharVocab ids, separators and file format") {
  const std::vector<Trigram> data = {{"те", "облака", "летит", 6, Language::ru}};
  const CharVocab vocab = build_vocab(data);
  const auto& chars = vocab.chars();
  CHECK(std::is_sorted(chars.begin(), chars.end()));
  CHECK(vocab.size() == chars.size() + 3);
  for (std::size_t i = 0; i < chars.size(); ++i) CHECK(vocab.id(chars[i]) == static_cast<int>(i) + 3);
  CHECK(vocab.id(U' ') == CharVocab::kSep);
  CHECK(vocab.id(U'_') == CharVocab::kSep);
  CHECK(vocab.id(U'щ') == CharVocab::kUnk);

  std::ostringstream out;
  vocab.write(out);
  std::istringstream in(out.str());
  CHECK(CharVocab::read(in) == vocab);

  CHECK_THROWS_AS(CharVocab(std::vector<char32_t>{U'а', U'а'}), InputError);
  CHECK_THROWS_AS(build_vocab(std::vector<Trigram>{}), InputError);
  std::istringstream bad("аб\n");
  CHECK_THROWS_AS(CharVocab::read(bad), ParseError);
}

TEST_CASE("utf8 conversion") {
  CHECK(u32_to_utf8(utf8_to_u32("ворона ёж ў є")) == "ворона ёж ў є");
  CHECK_THROWS_AS(utf8_to_u32(std::string("\xD0", 1)), InputError);
  CHECK_THROWS_AS(utf8_to_u32(std::string("\xFF")), InputError);
}
