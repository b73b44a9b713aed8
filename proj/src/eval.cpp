#include "stress/eval.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <json.hpp>
#include <numeric>
#include <omp.h>
#include <sstream>

#include "stress/kernels.hpp"
#include "stress/rng.hpp"

namespace stress {

using nlohmann::json;

namespace {

std::string normalized_form(std::string_view word) {
  return u32_to_utf8(to_lower(strip_stress_marks(utf8_to_u32(word))));
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

namespace {

MetricsReport score(std::span<const Trigram> test_set, const std::vector<bool>& correct,
                    const std::set<std::string>* homographs) {
  MetricsReport rep;
  rep.n_test = test_set.size();
  if (homographs) rep.homographs.emplace();
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    const Trigram& t = test_set[i];
    const std::size_t vowels = vowel_positions(t.word, t.language).size();
    auto& s = rep.by_vowel_count[vowels];
    ++s.support;
    if (correct[i]) {
      ++s.correct;
      ++rep.correct;
    }
    if (homographs && homographs->contains(normalized_form(t.word))) {
      for (Stratum* h : {&rep.homographs->total, &rep.homographs->by_vowel_count[vowels]}) {
        ++h->support;
        if (correct[i]) ++h->correct;
      }
    }
  }
  rep.overall_accuracy =
      rep.n_test == 0 ? 0.0 : static_cast<double>(rep.correct) / static_cast<double>(rep.n_test);
  return rep;
}

}  // namespace

MetricsReport accuracy(const TrainedModel& model, std::span<const Trigram> test_set,
                       const std::set<std::string>* homographs) {
  std::vector<EncodedExample> encoded;
  std::vector<std::size_t> source;
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    try {
      encoded.push_back(encode(test_set[i], model.vocab, model.config.max_len));
      source.push_back(i);
    } catch (const InputError&) {
    }
  }
  const auto predicted = predict_positions_parallel(model.params, encoded, model.config);
  std::vector<bool> correct(test_set.size(), false);
  for (std::size_t k = 0; k < predicted.size(); ++k) correct[source[k]] = predicted[k] == encoded[k].target();
  MetricsReport rep = score(test_set, correct, homographs);
  rep.config = model.config;
  return rep;
}

MetricsReport accuracy(const StressPredictor& predict, std::span<const Trigram> test_set,
                       const std::set<std::string>* homographs) {
  std::vector<bool> correct(test_set.size(), false);
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    std::optional<std::size_t> p;
    try {
      p = predict(test_set[i]);
    } catch (const InputError&) {
    }
    correct[i] = p && *p == test_set[i].stress_pos;
  }
  return score(test_set, correct, homographs);
}

std::set<std::string> find_homographs(std::span<const Trigram> dataset) {
  std::map<std::string, std::set<std::size_t>> positions;
  for (const auto& t : dataset) positions[normalized_form(t.word)].insert(t.stress_pos);
  std::set<std::string> out;
  for (const auto& [form, pos] : positions) {
    if (pos.size() >= 2) out.insert(form);
  }
  return out;
}

Split split_dataset(std::span<const Trigram> data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InputError("train fraction must be in (0, 1)");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(idx);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(data.size())));
  Split s;
  s.train.reserve(n_train);
  s.test.reserve(data.size() - n_train);
  for (std::size_t i = 0; i < idx.size(); ++i) (i < n_train ? s.train : s.test).push_back(data[idx[i]]);
  return s;
}

std::vector<Combo> parse_combos(std::string_view text) {
  std::vector<Combo> out;
  std::string item;
  auto flush = [&] {
    if (item.empty()) return;
    Combo combo;
    std::size_t start = 0;
    while (start <= item.size()) {
      const auto plus = item.find('+', start);
      const std::string tag = item.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
      const Language lang = parse_language(tag);
      if (std::find(combo.begin(), combo.end(), lang) != combo.end()) {
        throw InputError("language repeated in combo '" + item + "'");
      }
      combo.push_back(lang);
      if (plus == std::string::npos) break;
      start = plus + 1;
    }
    out.push_back(std::move(combo));
    item.clear();
  };
  for (char c : text) {
    if (c == ';' || c == ',') {
      flush();
    } else if (c != ' ') {
      item.push_back(c);
    }
  }
  flush();
  if (out.empty()) throw InputError("no train-set combos given");
  return out;
}

std::string combo_name(const Combo& combo) {
  std::string s;
  for (Language l : combo) {
    if (!s.empty()) s += '+';
    s += language_tag(l);
  }
  return s;
}

std::vector<Combo> default_combos() {
  using enum Language;
  return {{be}, {ru}, {uk}, {uk, be}, {ru, be}, {ru, uk}, {ru, uk, be}};
}

const CellStats& ExperimentMatrix::cell(const Combo& combo, Language test) const {
  const auto ci = std::find(combos.begin(), combos.end(), combo);
  const auto li = std::find(test_languages.begin(), test_languages.end(), test);
  if (ci == combos.end() || li == test_languages.end()) throw InputError("no such matrix cell");
  return cells[static_cast<std::size_t>(ci - combos.begin())][static_cast<std::size_t>(li - test_languages.begin())];
}

ExperimentMatrix run_experiment_matrix(const std::map<Language, std::vector<Trigram>>& datasets,
                                       const std::vector<Combo>& combos, const ModelConfig& config,
                                       const ExperimentOptions& options) {
  if (options.runs == 0) throw InputError("run count must be positive");
  for (const auto& combo : combos) {
    if (combo.empty()) throw InputError("empty train-set combo");
    for (Language l : combo) {
      if (!datasets.contains(l)) {
        throw InputError("combo " + combo_name(combo) + " references missing language " +
                         std::string(language_tag(l)));
      }
    }
  }

  ExperimentMatrix m;
  m.combos = combos;
  m.config = config;
  m.options = options;
  for (const auto& [lang, data] : datasets) {
    if (data.empty()) throw InputError("dataset for " + std::string(language_tag(lang)) + " is empty");
    m.test_languages.push_back(lang);
  }
  const std::size_t n_lang = m.test_languages.size();

  // splits[run][lang]
  std::vector<std::vector<Split>> splits(options.runs);
  for (std::size_t r = 0; r < options.runs; ++r) {
    const std::uint64_t run_seed = options.base_seed + r;
    for (Language lang : m.test_languages) {
      const std::uint64_t split_seed = splitmix(run_seed * 8 + static_cast<std::uint64_t>(lang));
      splits[r].push_back(split_dataset(datasets.at(lang), options.train_fraction, split_seed));
    }
  }
  auto lang_index = [&](Language l) {
    return static_cast<std::size_t>(std::find(m.test_languages.begin(), m.test_languages.end(), l) -
                                    m.test_languages.begin());
  };

  // results[task][lang] with task = run * combos + combo
  const std::size_t n_tasks = options.runs * combos.size();
  std::vector<std::vector<double>> results(n_tasks, std::vector<double>(n_lang, 0.0));
  std::exception_ptr error;

#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, options.jobs))
  for (std::ptrdiff_t task = 0; task < static_cast<std::ptrdiff_t>(n_tasks); ++task) {
    try {
      const std::size_t r = static_cast<std::size_t>(task) / combos.size();
      const Combo& combo = combos[static_cast<std::size_t>(task) % combos.size()];
      std::vector<Trigram> train_set;
      for (Language l : combo) {
        const auto& fold = splits[r][lang_index(l)].train;
        train_set.insert(train_set.end(), fold.begin(), fold.end());
      }
      ModelConfig cfg = config;
      cfg.seed = options.base_seed + r;
      Rng(splitmix(cfg.seed ^ 0xC0B0ULL)).shuffle(train_set);
      const TrainedModel model = train(cfg, train_set);
      for (std::size_t li = 0; li < n_lang; ++li) {
        results[static_cast<std::size_t>(task)][li] = stress_accuracy(model, splits[r][li].test);
      }
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  m.cells.assign(combos.size(), std::vector<CellStats>(n_lang));
  for (std::size_t c = 0; c < combos.size(); ++c) {
    for (std::size_t li = 0; li < n_lang; ++li) {
      CellStats& cell = m.cells[c][li];
      for (std::size_t r = 0; r < options.runs; ++r) cell.runs.push_back(results[r * combos.size() + c][li]);
      const double n = static_cast<double>(cell.runs.size());
      cell.mean = std::accumulate(cell.runs.begin(), cell.runs.end(), 0.0) / n;
      if (cell.runs.size() > 1) {
        double ss = 0.0;
        for (double v : cell.runs) ss += (v - cell.mean) * (v - cell.mean);
        cell.stddev = std::sqrt(ss / (n - 1.0));
      }
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

long per_mille(double acc) { return std::lround(acc * 1000.0); }

json config_json(const ModelConfig& c) {
  return {{"vocab_size", c.vocab_size},       {"embedding_dim", c.embedding_dim},
          {"hidden_units", c.hidden_units},   {"max_len", c.max_len},
          {"head", head_name(c.head)},        {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},       {"epochs", c.epochs},
          {"seed", c.seed},                   {"optimizer", optimizer_name(c.optimizer)},
          {"beta1", c.beta1},                 {"beta2", c.beta2},
          {"adam_epsilon", c.adam_epsilon},   {"lr_schedule", lr_schedule_name(c.lr_schedule)}};
}

json strata_json(const std::map<std::size_t, Stratum>& strata) {
  json out = json::array();
  for (const auto& [vowels, s] : strata) {
    out.push_back({{"vowels", vowels}, {"accuracy", s.accuracy()}, {"support", s.support},
                   {"per_mille", per_mille(s.accuracy())}});
  }
  return out;
}

void strata_text(std::ostringstream& os, const std::map<std::size_t, Stratum>& strata) {
  for (const auto& [vowels, s] : strata) {
    os << std::setw(8) << vowels << std::setw(10) << per_mille(s.accuracy()) << std::setw(10) << s.support << '\n';
  }
}

}  // namespace

std::string render_report(const ExperimentMatrix& matrix, ReportFormat format) {
  if (format == ReportFormat::json) {
    json cells = json::array();
    for (std::size_t c = 0; c < matrix.combos.size(); ++c) {
      for (std::size_t li = 0; li < matrix.test_languages.size(); ++li) {
        const CellStats& cs = matrix.cells[c][li];
        cells.push_back({{"train", combo_name(matrix.combos[c])},
                         {"test", language_tag(matrix.test_languages[li])},
                         {"mean", cs.mean},
                         {"std", cs.stddev},
                         {"runs", cs.runs.size()},
                         {"per_mille", per_mille(cs.mean)},
                         {"run_accuracies", cs.runs}});
      }
    }
    json langs = json::array();
    for (Language l : matrix.test_languages) langs.push_back(language_tag(l));
    const json doc = {{"cells", cells},
                      {"test_languages", langs},
                      {"config", config_json(matrix.config)},
                      {"runs", matrix.options.runs},
                      {"train_fraction", matrix.options.train_fraction},
                      {"base_seed", matrix.options.base_seed}};
    return doc.dump(2) + "\n";
  }

  std::ostringstream os;
  os << "Accuracy x1000, mean (std) over " << matrix.options.runs << " runs; head="
     << head_name(matrix.config.head) << ", train fraction " << matrix.options.train_fraction << "\n";
  os << std::left << std::setw(16) << "train \\ test";
  for (Language l : matrix.test_languages) os << std::right << std::setw(14) << language_tag(l);
  os << '\n';
  for (std::size_t c = 0; c < matrix.combos.size(); ++c) {
    os << std::left << std::setw(16) << combo_name(matrix.combos[c]);
    for (std::size_t li = 0; li < matrix.test_languages.size(); ++li) {
      const CellStats& cs = matrix.cells[c][li];
      std::ostringstream cell;
      cell << per_mille(cs.mean) << " (" << per_mille(cs.stddev) << ")";
      os << std::right << std::setw(14) << cell.str();
    }
    os << '\n';
  }
  return os.str();
}

std::string render_report(const MetricsReport& report, ReportFormat format) {
  if (format == ReportFormat::json) {
    json doc = {{"overall_accuracy", report.overall_accuracy},
                {"per_mille", per_mille(report.overall_accuracy)},
                {"n_test", report.n_test},
                {"correct", report.correct},
                {"by_vowel_count", strata_json(report.by_vowel_count)},
                {"config", config_json(report.config)},
                {"seed", report.config.seed}};
    if (report.homographs) {
      doc["homographs"] = {{"accuracy", report.homographs->total.accuracy()},
                           {"support", report.homographs->total.support},
                           {"by_vowel_count", strata_json(report.homographs->by_vowel_count)}};
    }
    return doc.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "head=" << head_name(report.config.head) << " n_test=" << report.n_test << " accuracy x1000 = "
     << per_mille(report.overall_accuracy) << "\n";
  os << std::setw(8) << "vowels" << std::setw(10) << "acc" << std::setw(10) << "support" << "\n";
  strata_text(os, report.by_vowel_count);
  if (report.homographs) {
    os << "homographs: acc x1000 = " << per_mille(report.homographs->total.accuracy())
       << ", support = " << report.homographs->total.support << "\n";
    strata_text(os, report.homographs->by_vowel_count);
  }
  return os.str();
}

}  // namespace stress
