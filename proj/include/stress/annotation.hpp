#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "stress/corpus.hpp"
#include "stress/trigram.hpp"

namespace stress {

inline constexpr std::size_t kAnnotatorsPerTask = 3;

// Multiple-choice stress question. `word` is the lowercased, stress-stripped
// center form; option i is `word` with its i-th vowel uppercased.
struct AnnotationTask {
  std::string task_id;
  std::string prev;
  std::string word;
  std::string next;
  std::vector<std::string> options;

  friend bool operator==(const AnnotationTask&, const AnnotationTask&) = default;
};

struct AnswerSet {
  std::string task_id;
  std::vector<std::size_t> answers;  // 0-based option indices, one per annotator
};

struct Rejection {
  std::string task_id;
  std::vector<std::size_t> answers;
};

using AggregateOutcome = std::variant<Trigram, Rejection>;

// Throws InputError if the center word has no vowel.
AnnotationTask make_task(const RawTrigram& trigram, Language lang, std::string task_id);

// Accepts only when all three annotators chose the same option.
AggregateOutcome aggregate(const AnnotationTask& task, const AnswerSet& answers, Language lang);

/// Writes one JSON object per line; throws InputError naming the first invalid
/// entry before anything is written.
std::size_t emit_dataset(std::span<const Trigram> entries, std::ostream& out);
std::vector<Trigram> load_dataset(std::istream& in);

void write_tasks(std::span<const AnnotationTask> tasks, std::ostream& out);
std::vector<AnnotationTask> read_tasks(std::istream& in);
std::vector<AnswerSet> read_answers(std::istream& in);

}  // namespace stress
