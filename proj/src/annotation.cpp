#include "stress/annotation.hpp"

#include <algorithm>
#include <istream>
#include <json.hpp>
#include <ostream>

#include "stress/encoding.hpp"

namespace stress {

using nlohmann::json;

void validate_trigram(const Trigram& t) {
  if (t.word.empty()) throw InputError("trigram has an empty word");
  const auto word = utf8_to_u32(t.word);
  for (const std::string* part : {&t.prev, &t.word, &t.next}) {
    if (utf8_to_u32(*part).find(kCombiningAcute) != std::u32string::npos) {
      throw InputError("trigram '" + t.word + "' contains a stress mark in '" + *part + "'");
    }
  }
  if (t.stress_pos == 0 || t.stress_pos > word.size() || !is_vowel(word[t.stress_pos - 1], t.language)) {
    throw InputError("trigram '" + t.word + "': stress_pos " + std::to_string(t.stress_pos) +
                     " is not a vowel of language " + std::string(language_tag(t.language)));
  }
}

AnnotationTask make_task(const RawTrigram& trigram, Language lang, std::string task_id) {
  const std::u32string word = to_lower(strip_stress_marks(utf8_to_u32(trigram.center.form)));
  const auto vowels = vowel_positions(word, lang);
  if (vowels.empty()) throw InputError("no vowels in '" + trigram.center.form + "'; task undefined");

  AnnotationTask task;
  task.task_id = std::move(task_id);
  task.prev = trigram.prev ? strip_stress_marks(trigram.prev->form) : std::string();
  task.word = u32_to_utf8(word);
  task.next = trigram.next ? strip_stress_marks(trigram.next->form) : std::string();
  for (std::size_t pos : vowels) {
    std::u32string option = word;
    option[pos - 1] = to_upper(option[pos - 1]);
    task.options.push_back(u32_to_utf8(option));
  }
  return task;
}

AggregateOutcome aggregate(const AnnotationTask& task, const AnswerSet& answers, Language lang) {
  if (answers.answers.size() != kAnnotatorsPerTask) {
    throw InputError("task " + task.task_id + ": expected 3 answers, got " +
                     std::to_string(answers.answers.size()));
  }
  for (std::size_t a : answers.answers) {
    if (a >= task.options.size()) {
      throw InputError("task " + task.task_id + ": answer " + std::to_string(a) + " out of range");
    }
  }
  const auto& a = answers.answers;
  if (!std::all_of(a.begin(), a.end(), [&](std::size_t x) { return x == a.front(); })) {
    return Rejection{task.task_id, a};
  }
  const auto vowels = vowel_positions(task.word, lang);
  return Trigram{task.prev, task.word, task.next, vowels.at(a.front()), lang};
}

std::size_t emit_dataset(std::span<const Trigram> entries, std::ostream& out) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    try {
      validate_trigram(entries[i]);
    } catch (const InputError& e) {
      throw InputError("entry " + std::to_string(i) + ": " + e.what());
    }
  }
  for (const auto& t : entries) {
    const json j = {{"prev", t.prev},
                    {"word", t.word},
                    {"next", t.next},
                    {"stress_pos", t.stress_pos},
                    {"lang", language_tag(t.language)}};
    out << j.dump() << '\n';
  }
  return entries.size();
}

namespace {

template <typename Fn>
void for_each_json_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(lineno, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(lineno, e.what());
    }
  }
}

}  // namespace

std::vector<Trigram> load_dataset(std::istream& in) {
  std::vector<Trigram> out;
  for_each_json_line(in, [&](const json& j) {
    Trigram t;
    t.prev = j.at("prev").get<std::string>();
    t.word = j.at("word").get<std::string>();
    t.next = j.at("next").get<std::string>();
    const auto pos = j.at("stress_pos").get<long long>();
    if (pos <= 0) throw InputError("stress_pos must be positive");
    t.stress_pos = static_cast<std::size_t>(pos);
    t.language = parse_language(j.at("lang").get<std::string>());
    validate_trigram(t);
    out.push_back(std::move(t));
  });
  return out;
}

void write_tasks(std::span<const AnnotationTask> tasks, std::ostream& out) {
  for (const auto& t : tasks) {
    const json j = {{"task_id", t.task_id}, {"prev", t.prev},       {"word", t.word},
                    {"next", t.next},       {"options", t.options}};
    out << j.dump() << '\n';
  }
}

std::vector<AnnotationTask> read_tasks(std::istream& in) {
  std::vector<AnnotationTask> out;
  for_each_json_line(in, [&](const json& j) {
    AnnotationTask t;
    t.task_id = j.at("task_id").get<std::string>();
    t.prev = j.at("prev").get<std::string>();
    t.word = j.at("word").get<std::string>();
    t.next = j.at("next").get<std::string>();
    t.options = j.at("options").get<std::vector<std::string>>();
    if (t.options.empty()) throw InputError("task " + t.task_id + " has no options");
    out.push_back(std::move(t));
  });
  return out;
}

std::vector<AnswerSet> read_answers(std::istream& in) {
  std::vector<AnswerSet> out;
  for_each_json_line(in, [&](const json& j) {
    AnswerSet a;
    a.task_id = j.at("task_id").get<std::string>();
    for (const auto& v : j.at("answers")) {
      const auto x = v.get<long long>();
      if (x < 0) throw InputError("negative answer index");
      a.answers.push_back(static_cast<std::size_t>(x));
    }
    out.push_back(std::move(a));
  });
  return out;
}

}  // namespace stress
