// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
// Exit status is non-zero iff any criterion fails.
//
// Criterion 5 needs the released UD-derived datasets. Point STRESS_UD_DATASETS
// at a directory holding ru.jsonl, uk.jsonl and be.jsonl to run it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "stress/annotation.hpp"
#include "stress/corpus.hpp"
#include "stress/encoding.hpp"
#include "stress/eval.hpp"
#include "stress/models.hpp"

using namespace stress;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << detail << std::endl;
}

void skip(int id, const char* name, const std::string& detail) {
  std::cout << "SKIP [" << id << "] " << name << ": " << detail << std::endl;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// Shared synthetic corpus: 5k train / 1k test, penultimate-vowel rule.
struct RuleCorpus {
  std::vector<Trigram> train, test;
};

RuleCorpus penultimate_corpus() {
  const auto all = generate_synthetic_corpus(StressRule::penultimate_vowel, 6000, 11, Language::ru);
  return {{all.begin(), all.begin() + 5000}, {all.begin() + 5000, all.end()}};
}

ModelConfig rule_config(Head head, std::uint64_t seed) {
  ModelConfig c;
  c.head = head;
  c.seed = seed;
  c.epochs = 20;
  c.batch_size = 32;
  c.learning_rate = 5e-3;
  c.lr_schedule = LrSchedule::cosine;
  return c;
}

void gradient_correctness() {
  Timer t;
  const std::string cmd = std::string(STRESSCTL_PATH) + " gradcheck --seeds 5 --samples 200 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  if (pipe) {
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) out += buf;
  }
  const int status = pipe ? pclose(pipe) : -1;
  const double secs = t.seconds();
  std::string last = out.substr(out.rfind("max_rel_error"));
  if (!last.empty() && last.back() == '\n') last.pop_back();
  report(1, "gradient check, both heads, hidden/embedding 32, lengths 5-40, 5 seeds x 200 coordinates",
         status == 0 && secs < 60.0, last + ", " + fmt(secs, 3) + " s");
}

void encoding_oracle() {
  const Trigram crow{"белая", "ворона", "летит", 4, Language::ru};
  const auto ctx = prepare_context(crow.prev, crow.word, crow.next);
  const CharVocab vocab = build_vocab(std::span<const Trigram>(&crow, 1));
  const auto ex = encode(crow, vocab, kDefaultMaxLen);
  const std::vector<std::uint8_t> labels{0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0};

  const auto short_ctx = prepare_context("те", "облака", "");

  const bool ok = u32_to_utf8(ctx.text) == "лая ворона тит" && ex.labels == labels &&
                  u32_to_utf8(short_ctx.text) == "те_облака";
  report(2, "encoding golden values", ok,
         "'" + u32_to_utf8(ctx.text) + "', '" + u32_to_utf8(short_ctx.text) + "'");
}

struct RuleResults {
  std::vector<double> local, global;
};

void rule_learnability(const RuleCorpus& corpus, RuleResults& results) {
  Timer t;
  const auto local = train(rule_config(Head::local, 1), corpus.train);
  const auto global = train(rule_config(Head::global, 1), corpus.train);
  const double a_local = stress_accuracy(local, corpus.test);
  const double a_global = stress_accuracy(global, corpus.test);
  results.local.push_back(a_local);
  results.global.push_back(a_global);
  const double secs = t.seconds();
  report(3, "penultimate-vowel corpus, 5k/1k, 20 epochs", a_local >= 0.99 && a_global >= 0.99 && secs < 600.0,
         "local " + fmt(a_local) + ", global " + fmt(a_global) + ", " + fmt(secs, 3) + " s");
}

void overfit() {
  Timer t;
  const auto data = generate_synthetic_corpus(StressRule::penultimate_vowel, 200, 23, Language::ru);
  ModelConfig c;
  c.head = Head::global;
  c.seed = 1;
  c.epochs = 60;
  c.batch_size = 16;
  c.learning_rate = 1e-2;
  c.lr_schedule = LrSchedule::cosine;
  const auto m = train(c, data);
  const double acc = stress_accuracy(m, data);
  const double secs = t.seconds();
  report(4, "global head memorises 200 examples", acc >= 0.99 && secs < 120.0,
         "train accuracy " + fmt(acc) + ", " + fmt(secs, 3) + " s");
}

void ud_reproduction() {
  const char* dir = std::getenv("STRESS_UD_DATASETS");
  const char* name = "UD-derived monolingual and cross-lingual accuracies";
  if (!dir) {
    skip(5, name, "STRESS_UD_DATASETS not set");
    return;
  }
  std::map<Language, std::vector<Trigram>> data;
  for (Language l : {Language::ru, Language::uk, Language::be}) {
    const fs::path p = fs::path(dir) / (std::string(language_tag(l)) + ".jsonl");
    std::ifstream in(p);
    if (!in) {
      report(5, name, false, "cannot open " + p.string());
      return;
    }
    data[l] = load_dataset(in);
  }
  Timer t;
  const auto combos = parse_combos("be;ru;uk;ru+uk;ru+uk+be");
  ExperimentOptions opt;
  opt.runs = 5;
  const auto m = run_experiment_matrix(data, combos, ModelConfig{}, opt);
  auto mean = [&](const char* combo, Language l) { return m.cell(parse_combos(combo).front(), l).mean; };
  const double be = mean("be", Language::be), ru = mean("ru", Language::ru), uk = mean("uk", Language::uk);
  const double all_be = mean("ru+uk+be", Language::be), ruuk_ru = mean("ru+uk", Language::ru);
  const bool diag = std::abs(be - 0.647) <= 0.05 && std::abs(ru - 0.738) <= 0.05 && std::abs(uk - 0.683) <= 0.05;
  const bool order = all_be >= be + 0.05 && ruuk_ru >= ru;
  const double secs = t.seconds();
  report(5, name, diag && order && secs <= 7200.0,
         "be " + fmt(be) + " ru " + fmt(ru) + " uk " + fmt(uk) + "; ru+uk+be on be " + fmt(all_be) +
             "; ru+uk on ru " + fmt(ruuk_ru) + ", " + fmt(secs, 4) + " s");
}

void head_ranking(const RuleCorpus& corpus, RuleResults& results) {
  for (std::uint64_t seed = 2; results.local.size() < 5; ++seed) {
    results.local.push_back(stress_accuracy(train(rule_config(Head::local, seed), corpus.train), corpus.test));
    results.global.push_back(stress_accuracy(train(rule_config(Head::global, seed), corpus.train), corpus.test));
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto min = [](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); };
  const double ml = mean(results.local), mg = mean(results.global);
  report(6, "global mean >= local mean - 0.01 over 5 seeds, both > 0.99",
         mg >= ml - 0.01 && min(results.local) > 0.99 && min(results.global) > 0.99,
         "local mean " + fmt(ml) + " (min " + fmt(min(results.local)) + "), global mean " + fmt(mg) + " (min " +
             fmt(min(results.global)) + ")");
}

void aggregation_exhaustive() {
  Timer t;
  std::size_t triples = 0, wrong = 0;
  for (std::size_t n = 1; n <= 9; ++n) {
    std::string word;
    for (std::size_t i = 0; i < n; ++i) word += "та";
    const RawTrigram raw{Token{"мы", "PRON", 1}, Token{word, "NOUN", 2}, Token{"тут", "ADV", 3}};
    const auto task = make_task(raw, Language::ru, "t");
    if (task.options.size() != n) ++wrong;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t c = 0; c < n; ++c) {
          ++triples;
          const auto out = aggregate(task, AnswerSet{"t", {a, b, c}}, Language::ru);
          const bool unanimous = a == b && b == c;
          const auto* accepted = std::get_if<Trigram>(&out);
          if (unanimous != (accepted != nullptr)) ++wrong;
          if (accepted && accepted->stress_pos != 2 * a + 2) ++wrong;
        }
  }
  const double secs = t.seconds();
  report(7, "aggregation accepts exactly the unanimous triples", wrong == 0 && secs < 1.0,
         std::to_string(triples) + " triples, " + std::to_string(wrong) + " mismatches, " + fmt(secs, 3) + " s");
}

void determinism() {
  const auto data = generate_synthetic_corpus(StressRule::penultimate_vowel, 1000, 31, Language::ru);
  const auto probe = generate_synthetic_corpus(StressRule::penultimate_vowel, 1000, 37, Language::ru);
  ModelConfig c;
  c.seed = 5;
  c.epochs = 3;
  std::ostringstream a, b;
  save_checkpoint(train(c, data), a);
  const auto model = train(c, data);
  save_checkpoint(model, b);
  const bool same_bytes = a.str() == b.str();

  const fs::path path = fs::temp_directory_path() / "stress_acceptance.ckpt";
  save(model, path);
  const auto loaded = load(path);
  fs::remove(path);
  std::size_t differ = 0;
  for (const auto& t : probe) {
    if (predict_stress(model, t.prev, t.word, t.next, t.language) !=
        predict_stress(loaded, t.prev, t.word, t.next, t.language))
      ++differ;
  }
  report(8, "bitwise-identical checkpoints and round-trip predictions", same_bytes && differ == 0,
         std::string("checkpoints ") + (same_bytes ? "identical" : "differ") + " (" + std::to_string(a.str().size()) +
             " bytes), " + std::to_string(differ) + "/1000 probe predictions differ");
}

template <typename F>
void guarded(int id, const char* name, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  const RuleCorpus corpus = penultimate_corpus();
  RuleResults results;
  guarded(1, "gradient check", gradient_correctness);
  guarded(2, "encoding golden values", encoding_oracle);
  guarded(3, "penultimate-vowel learnability", [&] { rule_learnability(corpus, results); });
  guarded(4, "overfit", overfit);
  guarded(5, "UD reproduction", ud_reproduction);
  guarded(6, "head ranking", [&] { head_ranking(corpus, results); });
  guarded(7, "aggregation", aggregation_exhaustive);
  guarded(8, "determinism", determinism);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
