// Serial reference vs OpenMP kernels: batch gradient and batched prediction.
//
//   bench_kernels [--batch N] [--examples N] [--repeats N] [--threads N]

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <iostream>
#include <vector>

#include "stress/corpus.hpp"
#include "stress/encoding.hpp"
#include "stress/kernels.hpp"
#include "stress/neuro.hpp"

using namespace stress;

namespace {

template <typename F>
double best_of(std::size_t repeats, F&& f) {
  double best = 1e300;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel) {
  std::cout << std::left << std::setw(16) << name << std::right << std::fixed << std::setprecision(2)
            << std::setw(12) << serial * 1e3 << std::setw(12) << parallel * 1e3 << std::setw(10)
            << serial / parallel << "x\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark serial and OpenMP kernels"};
  std::size_t batch = 32, examples = 1000, repeats = 5;
  int threads = omp_get_max_threads();
  app.add_option("--batch", batch, "Minibatch size for the gradient kernel")->capture_default_str();
  app.add_option("--examples", examples, "Examples for the prediction kernel")->capture_default_str();
  app.add_option("--repeats", repeats, "Timing repeats (best is reported)")->capture_default_str();
  app.add_option("--threads", threads, "OpenMP threads")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  omp_set_num_threads(threads);

  const auto data = generate_synthetic_corpus(StressRule::penultimate_vowel, std::max(batch, examples), 1, Language::ru);
  const CharVocab vocab = build_vocab(data);
  std::vector<EncodedExample> encoded;
  for (const auto& t : data) encoded.push_back(encode(t, vocab, kDefaultMaxLen));

  ModelConfig config;
  config.vocab_size = vocab.size();
  const ModelParams params = init_params(config, 1);

  std::vector<const EncodedExample*> ptrs;
  for (std::size_t i = 0; i < batch; ++i) ptrs.push_back(&encoded[i]);
  const std::span<const EncodedExample> probe(encoded.data(), examples);

  std::cout << "threads " << threads << ", batch " << batch << ", prediction examples " << examples
            << ", hidden " << config.hidden_units << "\n";
  std::cout << std::left << std::setw(16) << "kernel" << std::right << std::setw(12) << "serial ms" << std::setw(12)
            << "openmp ms" << std::setw(11) << "speedup\n";
  for (Head head : {Head::local, Head::global}) {
    config.head = head;
    const double gs = best_of(repeats, [&] { batch_gradient_serial(params, ptrs, config); });
    const double gp = best_of(repeats, [&] { batch_gradient_parallel(params, ptrs, config); });
    const double ps = best_of(repeats, [&] { predict_positions_serial(params, probe, config); });
    const double pp = best_of(repeats, [&] { predict_positions_parallel(params, probe, config); });
    std::cout << "head " << head_name(head) << "\n";
    row("  gradient", gs, gp);
    row("  predict", ps, pp);
  }
  return 0;
}
