#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stress/models.hpp"
#include "stress/trigram.hpp"

namespace stress {

struct Stratum {
  std::size_t correct = 0;
  std::size_t support = 0;
  double accuracy() const { return support == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(support); }
};

struct MetricsReport {
  double overall_accuracy = 0.0;
  std::size_t n_test = 0;
  std::size_t correct = 0;
  std::map<std::size_t, Stratum> by_vowel_count;  // every observed count
  struct Homographs {
    Stratum total;
    std::map<std::size_t, Stratum> by_vowel_count;
  };
  std::optional<Homographs> homographs;
  ModelConfig config;
};

/// Exact-match stress accuracy stratified by the number of vowels in the
/// center word. With `homographs`, entries whose lowercased word is in the
/// set are also scored separately. Unencodable entries count as wrong.
MetricsReport accuracy(const TrainedModel& model, std::span<const Trigram> test_set,
                       const std::set<std::string>* homographs = nullptr);

// Any stress predictor: returns a 1-based index into the word, or nullopt
// when the entry cannot be handled (scored as wrong).
using StressPredictor = std::function<std::optional<std::size_t>(const Trigram&)>;

MetricsReport accuracy(const StressPredictor& predict, std::span<const Trigram> test_set,
                       const std::set<std::string>* homographs = nullptr);

/// Lowercased, stress-stripped forms attested with at least two distinct stress positions.
std::set<std::string> find_homographs(std::span<const Trigram> dataset);

struct Split {
  std::vector<Trigram> train;
  std::vector<Trigram> test;
};

// Random partition; the train side gets round(train_fraction * n) entries.
Split split_dataset(std::span<const Trigram> data, double train_fraction, std::uint64_t seed);

using Combo = std::vector<Language>;

// Parses "ru+uk" style combos separated by ';' or ','.
std::vector<Combo> parse_combos(std::string_view text);
std::string combo_name(const Combo& combo);
// The seven train-set combinations in the order used for the cross-lingual table.
std::vector<Combo> default_combos();

struct CellStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single run
  std::vector<double> runs;
};

struct ExperimentOptions {
  std::size_t runs = 20;
  double train_fraction = 0.7;
  std::uint64_t base_seed = 0;  // run r uses base_seed + r
  int jobs = 1;
};

struct ExperimentMatrix {
  std::vector<Combo> combos;
  std::vector<Language> test_languages;
  std::vector<std::vector<CellStats>> cells;  // [combo][test language]
  ModelConfig config;
  ExperimentOptions options;

  const CellStats& cell(const Combo& combo, Language test) const;
};

/// Every run splits each language once; all combos in that run train on the
/// union of their languages' train folds and are tested on the shared folds.
/// Cells (run, combo) execute concurrently up to options.jobs.
ExperimentMatrix run_experiment_matrix(const std::map<Language, std::vector<Trigram>>& datasets,
                                       const std::vector<Combo>& combos, const ModelConfig& config,
                                       const ExperimentOptions& options);

enum class ReportFormat { text, json };

std::string render_report(const ExperimentMatrix& matrix, ReportFormat format);
std::string render_report(const MetricsReport& report, ReportFormat format);

}  // namespace stress
