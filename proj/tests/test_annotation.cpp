#include <doctest.h>

#include <sstream>

#include "stress/annotation.hpp"
#include "stress/encoding.hpp"

using namespace stress;

namespace {

RawTrigram raw(const std::string& prev, const std::string& word, const std::string& next) {
  RawTrigram t;
  if (!prev.empty()) t.prev = Token{prev, "ADJ", 1};
  t.center = Token{word, "NOUN", 2};
  if (!next.empty()) t.next = Token{next, "VERB", 3};
  return t;
}

}  // namespace

TEST_CASE("make_task capitalizes one vowel per option") {
  const auto task = make_task(raw("белая", "ворона", "летит"), Language::ru, "t1");
  CHECK(task.options == std::vector<std::string>{"вОрона", "ворОна", "воронА"});
  CHECK(task.prev == "белая");
  CHECK(task.next == "летит");

  CHECK(make_task(raw("", "тит", ""), Language::ru, "t2").options == std::vector<std::string>{"тИт"});
  CHECK_THROWS_AS(make_task(raw("", "в", ""), Language::ru, "t3"), InputError);
}

TEST_CASE("task options differ from the word in exactly one vowel's case") {
  for (const std::string w : {"Ворона", "пісня", "ёлка", "сёння", "заўтра"}) {
    for (Language lang : {Language::ru, Language::uk, Language::be}) {
      if (vowel_positions(w, lang).empty()) continue;
      const auto task = make_task(raw("", w, ""), lang, "x");
      const auto word = utf8_to_u32(task.word);
      CHECK(task.options.size() == vowel_positions(word, lang).size());
      for (const auto& opt : task.options) {
        const auto o = utf8_to_u32(opt);
        REQUIRE(o.size() == word.size());
        int diffs = 0;
        for (std::size_t i = 0; i < o.size(); ++i) {
          if (o[i] != word[i]) {
            ++diffs;
            CHECK(to_lower(o[i]) == word[i]);
            CHECK(is_vowel(word[i], lang));
          }
        }
        CHECK(diffs == 1);
      }
    }
  }
}

TEST_CASE("aggregate accepts only unanimous answers") {
  const auto task = make_task(raw("белая", "ворона", "летит"), Language::ru, "t1");
  const auto accepted = aggregate(task, AnswerSet{"t1", {1, 1, 1}}, Language::ru);
  REQUIRE(std::holds_alternative<Trigram>(accepted));
  const auto& t = std::get<Trigram>(accepted);
  CHECK(t.stress_pos == 4);
  CHECK(t.word == "ворона");
  CHECK(t.prev == "белая");

  const auto rejected = aggregate(task, AnswerSet{"t1", {1, 1, 2}}, Language::ru);
  REQUIRE(std::holds_alternative<Rejection>(rejected));
  CHECK(std::get<Rejection>(rejected).answers == std::vector<std::size_t>{1, 1, 2});

  const auto single = make_task(raw("", "тит", ""), Language::ru, "t2");
  CHECK(std::holds_alternative<Trigram>(aggregate(single, AnswerSet{"t2", {0, 0, 0}}, Language::ru)));

  CHECK_THROWS_AS(aggregate(task, AnswerSet{"t1", {1, 1}}, Language::ru), InputError);
  CHECK_THROWS_AS(aggregate(task, AnswerSet{"t1", {1, 1, 1, 1}}, Language::ru), InputError);
  CHECK_THROWS_AS(aggregate(task, AnswerSet{"t1", {3, 3, 3}}, Language::ru), InputError);
}

TEST_CASE("emit_dataset and load_dataset") {
  std::ostringstream empty;
  CHECK(emit_dataset({}, empty) == 0);
  CHECK(empty.str().empty());

  const std::vector<Trigram> one = {{"белая", "ворона", "летит", 4, Language::ru}};
  std::ostringstream out;
  CHECK(emit_dataset(one, out) == 1);
  CHECK(out.str() == "{\"lang\":\"ru\",\"next\":\"летит\",\"prev\":\"белая\",\"stress_pos\":4,\"word\":\"ворона\"}\n");
  std::istringstream in(out.str());
  CHECK(load_dataset(in) == one);

  const std::vector<Trigram> bad = {{"", "ворона", "", 3, Language::ru}};
  std::ostringstream sink;
  CHECK_THROWS_AS(emit_dataset(bad, sink), InputError);
  CHECK(sink.str().empty());

  const std::vector<Trigram> marked = {{"бе́лая", "ворона", "", 4, Language::ru}};
  CHECK_THROWS_AS(emit_dataset(marked, sink), InputError);
}

TEST_CASE("load_dataset reports the offending line") {
  std::istringstream in(
      "{\"prev\":\"\",\"word\":\"тит\",\"next\":\"\",\"stress_pos\":2,\"lang\":\"ru\"}\n"
      "{\"prev\":\"\",\"word\":\"тит\",\"next\":\"\",\"stress_pos\":1,\"lang\":\"ru\"}\n");
  try {
    load_dataset(in);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream garbage("{\"prev\":\n");
  CHECK_THROWS_AS(load_dataset(garbage), ParseError);
  std::istringstream lang("{\"prev\":\"\",\"word\":\"тит\",\"next\":\"\",\"stress_pos\":2,\"lang\":\"pl\"}\n");
  CHECK_THROWS_AS(load_dataset(lang), ParseError);
}

TEST_CASE("task and answer files") {
  std::vector<AnnotationTask> tasks = {make_task(raw("белая", "ворона", "летит"), Language::ru, "ru-1"),
                                       make_task(raw("", "тит", ""), Language::ru, "ru-2")};
  std::ostringstream out;
  write_tasks(tasks, out);
  std::istringstream in(out.str());
  CHECK(read_tasks(in) == tasks);

  std::istringstream answers("{\"task_id\":\"ru-1\",\"answers\":[1,1,1]}\n{\"task_id\":\"ru-2\",\"answers\":[0,0,0]}\n");
  const auto a = read_answers(answers);
  REQUIRE(a.size() == 2);
  CHECK(a[0].task_id == "ru-1");
  CHECK(a[0].answers == std::vector<std::size_t>{1, 1, 1});
}

TEST_CASE("emit then load is the identity on generated datasets (property)") {
  for (Language lang : {Language::ru, Language::uk, Language::be}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto data = generate_synthetic_corpus(StressRule::last_vowel, 200, seed, lang);
      std::ostringstream out;
      emit_dataset(data, out);
      std::istringstream in(out.str());
      CHECK(load_dataset(in) == data);
    }
  }
}
