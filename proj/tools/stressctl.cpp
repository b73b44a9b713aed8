// stressctl: corpus building, annotation, training, prediction and
// experiments for character-level word-stress detection.
//
// Exit codes: 0 success, 1 input/validation error, 2 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cmath>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "stress/annotation.hpp"
#include "stress/corpus.hpp"
#include "stress/eval.hpp"
#include "stress/models.hpp"
#include "stress/neuro.hpp"
#include "stress/rng.hpp"

using namespace stress;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitNumeric = 2;

// ---------------------------------------------------------------------------
// Flat "key = value" config files. A key fills the flag of the same name in
// the active subcommand unless that flag was given on the command line.

void apply_config_file(const std::string& path, CLI::App& sub) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value in " + path);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r\"");
      const auto b = s.find_last_not_of(" \t\r\"");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option("--" + key);
    } catch (const CLI::OptionNotFound&) {
      throw ParseError(lineno, "unknown config key '" + key + "' for command " + sub.get_name());
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

// ---------------------------------------------------------------------------
// Shared option groups

struct ModelFlags {
  std::string head = "global";
  std::size_t epochs = 20;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_len = kDefaultMaxLen;
  std::size_t embedding_dim = 32;
  std::size_t hidden_units = 32;
  std::uint64_t seed = 0;
  std::string optimizer = "adam";
  std::string lr_schedule = "constant";

  void attach(CLI::App* app) {
    app->add_option("--head", head, "Output head: local or global")->capture_default_str();
    app->add_option("--epochs", epochs, "Training epochs")->capture_default_str();
    app->add_option("--lr", lr, "Learning rate")->capture_default_str();
    app->add_option("--batch-size", batch_size, "Minibatch size")->capture_default_str();
    app->add_option("--max-len", max_len, "Maximum context length in characters")->capture_default_str();
    app->add_option("--embedding-dim", embedding_dim, "Character embedding size")->capture_default_str();
    app->add_option("--hidden-units", hidden_units, "LSTM units per direction")->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--optimizer", optimizer, "sgd or adam")->capture_default_str();
    app->add_option("--lr-schedule", lr_schedule, "constant or cosine")->capture_default_str();
  }

  ModelConfig config() const {
    ModelConfig c;
    c.head = parse_head(head);
    c.epochs = epochs;
    c.learning_rate = lr;
    c.batch_size = batch_size;
    c.max_len = max_len;
    c.embedding_dim = embedding_dim;
    c.hidden_units = hidden_units;
    c.seed = seed;
    c.optimizer = parse_optimizer(optimizer);
    c.lr_schedule = parse_lr_schedule(lr_schedule);
    return c;
  }
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open " + path + " for writing");
  return out;
}

std::vector<Trigram> load_datasets(const std::vector<std::string>& paths) {
  std::vector<Trigram> all;
  for (const auto& p : paths) {
    auto in = open_in(p);
    try {
      auto part = load_dataset(in);
      all.insert(all.end(), part.begin(), part.end());
    } catch (const InputError& e) {
      throw InputError(p + ": " + e.what());
    }
  }
  return all;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    auto out = open_out(path);
    out << text;
  }
}

double parse_split(const std::string& s) {
  double frac = 0.0;
  const auto colon = s.find(':');
  try {
    if (colon != std::string::npos) {
      const double a = std::stod(s.substr(0, colon));
      const double b = std::stod(s.substr(colon + 1));
      frac = a / (a + b);
    } else {
      frac = std::stod(s);
    }
  } catch (const std::exception&) {
    throw InputError("invalid split '" + s + "' (expected e.g. 7:3 or 0.7)");
  }
  if (!(frac > 0.0 && frac < 1.0)) throw InputError("split must leave both sides non-empty");
  return frac;
}

// ---------------------------------------------------------------------------
// Commands

struct BuildDatasetCmd {
  std::vector<std::string> treebanks;
  std::string lang = "ru";
  std::string out;

  int run() const {
    const Language language = parse_language(lang);
    std::array<std::size_t, kDropReasonNames.size()> counts{};
    std::size_t malformed = 0;
    std::vector<AnnotationTask> tasks;
    for (const auto& path : treebanks) {
      auto in = open_in(path);
      std::vector<ParseIssue> issues;
      const auto sentences = parse_conllu(in, &issues);
      for (const auto& issue : issues) std::cerr << path << ":" << issue.line << ": " << issue.message << "\n";
      malformed += issues.size();
      for (const auto& s : sentences) {
        for (const auto& t : extract_trigrams(s)) {
          const DropReason r = classify_center(t.center, language);
          ++counts[static_cast<std::size_t>(r)];
          if (r != DropReason::kept) continue;
          std::ostringstream id;
          id << lang << "-" << std::setw(7) << std::setfill('0') << tasks.size() + 1;
          tasks.push_back(make_task(t, language, id.str()));
        }
      }
    }
    auto sink = open_out(out);
    write_tasks(tasks, sink);
    std::cout << "kept " << counts[0] << "\n";
    for (std::size_t i = 1; i < counts.size(); ++i) std::cout << "dropped " << kDropReasonNames[i] << " " << counts[i] << "\n";
    std::cout << "malformed_lines " << malformed << "\n";
    return 0;
  }
};

struct AnnotateCmd {
  std::string tasks_path;
  std::string answers_path;
  std::string out;
  std::string rejected_path;
  std::string lang = "ru";

  int run() const {
    const Language language = parse_language(lang);
    auto tin = open_in(tasks_path);
    const auto tasks = read_tasks(tin);
    auto ain = open_in(answers_path);
    const auto answers = read_answers(ain);

    std::map<std::string, const AnnotationTask*> by_id;
    for (const auto& t : tasks) {
      if (!by_id.emplace(t.task_id, &t).second) throw InputError("duplicate task id " + t.task_id);
    }
    std::vector<Trigram> accepted;
    std::vector<Rejection> rejected;
    std::size_t unknown = 0;
    for (const auto& a : answers) {
      const auto it = by_id.find(a.task_id);
      if (it == by_id.end()) {
        ++unknown;
        std::cerr << "warning: answers for unknown task " << a.task_id << "\n";
        continue;
      }
      auto outcome = aggregate(*it->second, a, language);
      if (auto* t = std::get_if<Trigram>(&outcome)) {
        accepted.push_back(std::move(*t));
      } else {
        rejected.push_back(std::get<Rejection>(outcome));
      }
    }
    auto sink = open_out(out);
    emit_dataset(accepted, sink);

    std::ostringstream log;
    for (const auto& r : rejected) {
      log << nlohmann::json{{"task_id", r.task_id}, {"answers", r.answers}}.dump() << "\n";
    }
    if (!rejected_path.empty()) write_text(rejected_path, log.str());

    const std::size_t answered = accepted.size() + rejected.size();
    std::cout << "tasks " << tasks.size() << "\nanswered " << answered << "\naccepted " << accepted.size()
              << "\nrejected " << rejected.size() << "\nunknown_task_ids " << unknown << "\nacceptance_rate "
              << (answered == 0 ? 0.0 : static_cast<double>(accepted.size()) / static_cast<double>(answered))
              << "\n";
    return 0;
  }
};

struct SynthCmd {
  std::string rule = "penultimate-vowel";
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::string lang = "ru";
  std::string out = "-";

  int run() const {
    const auto data = generate_synthetic_corpus(parse_stress_rule(rule), n, seed, parse_language(lang));
    std::ostringstream os;
    emit_dataset(data, os);
    write_text(out, os.str());
    return 0;
  }
};

nlohmann::json history_json(const TrainedModel& m) {
  nlohmann::json h = nlohmann::json::array();
  for (const auto& r : m.history) {
    nlohmann::json e = {{"epoch", r.epoch}, {"train_loss", r.train_loss}};
    e["dev_accuracy"] = r.dev_accuracy ? nlohmann::json(*r.dev_accuracy) : nlohmann::json(nullptr);
    h.push_back(e);
  }
  return h;
}

struct TrainCmd {
  ModelFlags model;
  std::vector<std::string> datasets;
  std::vector<std::string> dev;
  std::string checkpoint;
  std::string history;
  bool quiet = false;

  int run() const {
    const auto train_set = load_datasets(datasets);
    std::optional<std::vector<Trigram>> dev_set;
    if (!dev.empty()) dev_set = load_datasets(dev);
    auto progress = [&](const EpochRecord& r) {
      if (quiet) return;
      std::cerr << "epoch " << r.epoch << " loss " << r.train_loss;
      if (r.dev_accuracy) std::cerr << " dev_accuracy " << *r.dev_accuracy;
      std::cerr << "\n";
    };
    const auto m = dev_set ? train(model.config(), train_set, std::span<const Trigram>(*dev_set), progress)
                           : train(model.config(), train_set, std::nullopt, progress);
    if (m.skipped_train > 0) std::cerr << "warning: skipped " << m.skipped_train << " entries longer than max_len\n";
    save(m, checkpoint);
    write_text(history.empty() ? checkpoint + ".history.json" : history, history_json(m).dump(2) + "\n");
    return 0;
  }
};

struct PredictCmd {
  std::string checkpoint;
  std::string input = "-";
  std::string output = "-";
  std::string lang = "ru";

  int run() const {
    const auto m = load(checkpoint);
    const Language default_lang = parse_language(lang);
    std::ifstream file;
    if (input != "-") file = open_in(input);
    std::istream& in = input == "-" ? std::cin : file;
    std::ofstream ofile;
    if (output != "-") ofile = open_out(output);
    std::ostream& out = output == "-" ? std::cout : ofile;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) {
        out << "\n";
        continue;
      }
      std::string prev, word, next;
      Language l = default_lang;
      if (line.front() == '{') {
        try {
          const auto j = nlohmann::json::parse(line);
          prev = j.value("prev", "");
          word = j.at("word").get<std::string>();
          next = j.value("next", "");
          if (j.contains("lang")) l = parse_language(j["lang"].get<std::string>());
        } catch (const nlohmann::json::exception& e) {
          throw ParseError(lineno, e.what());
        }
      } else if (line.find('\t') != std::string::npos) {
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, '\t')) f.push_back(cell);
        if (line.back() == '\t') f.emplace_back();
        if (f.size() != 3) throw ParseError(lineno, "expected prev<TAB>word<TAB>next");
        prev = f[0];
        word = f[1];
        next = f[2];
      } else {
        std::istringstream ss(line);
        std::vector<std::string> w;
        for (std::string tok; ss >> tok;) w.push_back(tok);
        if (w.size() == 1) {
          word = w[0];
        } else if (w.size() == 3) {
          prev = w[0];
          word = w[1];
          next = w[2];
        } else {
          throw ParseError(lineno, "expected one word or a 'prev word next' trigram");
        }
      }
      std::size_t pos = 0;
      try {
        pos = predict_stress(m, prev, word, next, l);
      } catch (const NumericError&) {
        throw;
      } catch (const InputError& e) {
        throw ParseError(lineno, e.what());
      }
      std::u32string marked = strip_stress_marks(utf8_to_u32(word));
      marked.insert(marked.begin() + static_cast<std::ptrdiff_t>(pos), kCombiningAcute);
      out << u32_to_utf8(marked) << " " << pos << "\n";
    }
    return 0;
  }
};

struct EvaluateCmd {
  std::string checkpoint;
  std::vector<std::string> datasets;
  std::string format = "text";
  std::string report = "-";

  int run() const {
    const auto m = load(checkpoint);
    const auto data = load_datasets(datasets);
    const auto homographs = find_homographs(data);
    const auto rep = accuracy(m, data, &homographs);
    write_text(report, render_report(rep, format == "json" ? ReportFormat::json : ReportFormat::text));
    return 0;
  }
};

struct ExperimentCmd {
  ModelFlags model;
  std::vector<std::string> datasets;
  std::string combos = "be;ru;uk;uk+be;ru+be;ru+uk;ru+uk+be";
  std::size_t runs = 20;
  std::string split = "7:3";
  int jobs = 1;
  std::string report_text = "-";
  std::string report_json;

  int run() const {
    std::map<Language, std::vector<Trigram>> by_lang;
    for (auto& t : load_datasets(datasets)) by_lang[t.language].push_back(std::move(t));
    ExperimentOptions opt;
    opt.runs = runs;
    opt.train_fraction = parse_split(split);
    opt.base_seed = model.seed;
    opt.jobs = jobs;
    const auto matrix = run_experiment_matrix(by_lang, parse_combos(combos), model.config(), opt);
    write_text(report_text, render_report(matrix, ReportFormat::text));
    if (!report_json.empty()) write_text(report_json, render_report(matrix, ReportFormat::json));
    return 0;
  }
};

struct GradcheckCmd {
  std::size_t seeds = 5;
  std::size_t samples = 200;
  std::size_t hidden_units = 32;
  std::size_t embedding_dim = 32;
  std::size_t vocab = 40;
  std::size_t max_len = kDefaultMaxLen;
  // At 32 units some coordinates have |grad| near 1e-9, where a 1e-4 step
  // sits at the float64 roundoff floor.
  double epsilon = 1e-3;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;

  int run() const {
    double worst = 0.0;
    for (Head head : {Head::local, Head::global}) {
      ModelConfig cfg;
      cfg.head = head;
      cfg.vocab_size = vocab;
      cfg.hidden_units = hidden_units;
      cfg.embedding_dim = embedding_dim;
      cfg.max_len = max_len;
      double head_worst = 0.0;
      for (std::size_t s = 0; s < seeds; ++s) {
        Rng rng(seed * 1000 + s);
        // Random sequence of length 5..max_len with a random stressed position.
        const std::size_t lo = std::min<std::size_t>(5, max_len);
        const std::size_t len = lo + rng.below(max_len - lo + 1);
        EncodedExample ex;
        for (std::size_t i = 0; i < len; ++i) ex.char_ids.push_back(static_cast<int>(rng.below(vocab)));
        ex.center = {0, len};
        ex.labels.assign(len, 0);
        ex.vowel_mask.assign(len, 1);
        ex.labels[rng.below(len)] = 1;
        GradCheckOptions opt;
        opt.epsilon = epsilon;
        opt.samples = samples;
        opt.seed = seed * 1000 + s;
        const double err = grad_check(init_params(cfg, seed * 1000 + s), ex, cfg, opt);
        std::cout << "head " << head_name(head) << " seed " << s << " length " << len << " max_rel_error " << err
                  << "\n";
        head_worst = std::max(head_worst, err);
      }
      std::cout << "head " << head_name(head) << " worst " << head_worst << "\n";
      worst = std::max(worst, head_worst);
    }
    std::cout << "max_rel_error " << worst << (worst < tolerance ? " PASS" : " FAIL") << "\n";
    return worst < tolerance ? 0 : kExitNumeric;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Character-level word stress detection for Russian, Ukrainian and Belarusian"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Flat key = value file; keys are flag names of the chosen command");

  BuildDatasetCmd build;
  auto* c_build = app.add_subcommand("build-dataset", "Extract annotation tasks from CoNLL-U treebanks");
  c_build->add_option("--treebank", build.treebanks, "CoNLL-U file (repeatable)")->required();
  c_build->add_option("--lang", build.lang, "Language: ru, uk or be")->capture_default_str();
  c_build->add_option("--out", build.out, "Task file to write (JSON lines)")->required();

  AnnotateCmd annotate;
  auto* c_ann = app.add_subcommand("annotate", "Aggregate annotator answers into a dataset");
  c_ann->add_option("--tasks", annotate.tasks_path, "Task file")->required();
  c_ann->add_option("--answers", annotate.answers_path, "Answer file")->required();
  c_ann->add_option("--out", annotate.out, "Dataset file to write")->required();
  c_ann->add_option("--rejected", annotate.rejected_path, "Where to log rejected tasks");
  c_ann->add_option("--lang", annotate.lang, "Language: ru, uk or be")->capture_default_str();

  SynthCmd synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a rule-stressed synthetic dataset");
  c_synth->add_option("--rule", synth.rule, "first-vowel, last-vowel or penultimate-vowel")->capture_default_str();
  c_synth->add_option("--n", synth.n, "Number of entries")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  c_synth->add_option("--lang", synth.lang, "Language: ru, uk or be")->capture_default_str();
  c_synth->add_option("--out", synth.out, "Output file, - for stdout")->capture_default_str();

  TrainCmd trn;
  auto* c_train = app.add_subcommand("train", "Train a model");
  trn.model.attach(c_train);
  c_train->add_option("--dataset", trn.datasets, "Training dataset (repeatable)")->required();
  c_train->add_option("--dev", trn.dev, "Held-out dataset for best-epoch selection (repeatable)");
  c_train->add_option("--checkpoint", trn.checkpoint, "Checkpoint to write")->required();
  c_train->add_option("--history", trn.history, "History JSON (default <checkpoint>.history.json)");
  c_train->add_flag("--quiet", trn.quiet, "No per-epoch progress");

  PredictCmd pred;
  auto* c_pred = app.add_subcommand("predict", "Mark the stressed vowel of each input line");
  c_pred->add_option("--checkpoint", pred.checkpoint, "Trained checkpoint")->required();
  c_pred->add_option("--input", pred.input, "Input file, - for stdin")->capture_default_str();
  c_pred->add_option("--output", pred.output, "Output file, - for stdout")->capture_default_str();
  c_pred->add_option("--lang", pred.lang, "Language of plain-text lines")->capture_default_str();

  EvaluateCmd eval;
  auto* c_eval = app.add_subcommand("evaluate", "Accuracy by vowel count and on homographs");
  c_eval->add_option("--checkpoint", eval.checkpoint, "Trained checkpoint")->required();
  c_eval->add_option("--dataset", eval.datasets, "Test dataset (repeatable)")->required();
  c_eval->add_option("--format", eval.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  c_eval->add_option("--report", eval.report, "Report file, - for stdout")->capture_default_str();

  ExperimentCmd exp;
  auto* c_exp = app.add_subcommand("experiment", "Mono- and cross-lingual experiment matrix");
  exp.model.attach(c_exp);
  c_exp->add_option("--dataset", exp.datasets, "Dataset files; entries are grouped by language")->required();
  c_exp->add_option("--combos", exp.combos, "Train-set combos, e.g. 'ru;ru+uk'")->capture_default_str();
  c_exp->add_option("--runs", exp.runs, "Seeded runs per cell")->capture_default_str();
  c_exp->add_option("--split", exp.split, "Train:test ratio")->capture_default_str();
  c_exp->add_option("--jobs", exp.jobs, "Cells trained concurrently")->capture_default_str();
  c_exp->add_option("--report-text", exp.report_text, "Text table, - for stdout")->capture_default_str();
  c_exp->add_option("--report-json", exp.report_json, "JSON report path");

  GradcheckCmd gc;
  auto* c_gc = app.add_subcommand("gradcheck", "Finite-difference check of both heads");
  c_gc->add_option("--seeds", gc.seeds, "Seeds per head")->capture_default_str();
  c_gc->add_option("--samples", gc.samples, "Coordinates sampled per seed")->capture_default_str();
  c_gc->add_option("--hidden-units", gc.hidden_units)->capture_default_str();
  c_gc->add_option("--embedding-dim", gc.embedding_dim)->capture_default_str();
  c_gc->add_option("--max-len", gc.max_len)->capture_default_str();
  c_gc->add_option("--epsilon", gc.epsilon, "Central-difference step")->capture_default_str();
  c_gc->add_option("--seed", gc.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) apply_config_file(config_path, *sub);
    if (sub == c_build) return build.run();
    if (sub == c_ann) return annotate.run();
    if (sub == c_synth) return synth.run();
    if (sub == c_train) return trn.run();
    if (sub == c_pred) return pred.run();
    if (sub == c_eval) return eval.run();
    if (sub == c_exp) return exp.run();
    if (sub == c_gc) return gc.run();
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
