#include "stress/models.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "stress/kernels.hpp"
#include "stress/rng.hpp"

namespace stress {

namespace {

constexpr std::uint64_t kShuffleSalt = 0x5bd1e995u;

struct EncodedSet {
  std::vector<EncodedExample> examples;
  std::vector<std::size_t> source;  // index into the original data
  std::size_t skipped = 0;
};

EncodedSet encode_all(std::span<const Trigram> data, const CharVocab& vocab, std::size_t max_len) {
  EncodedSet out;
  out.examples.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    try {
      out.examples.push_back(encode(data[i], vocab, max_len));
      out.source.push_back(i);
    } catch (const InputError&) {
      ++out.skipped;
    }
  }
  return out;
}

double accuracy_on(const ModelParams& params, const ModelConfig& config, const EncodedSet& set, std::size_t total) {
  if (total == 0) return 0.0;
  const auto predicted = predict_positions_parallel(params, set.examples, config);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == set.examples[i].target()) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

TrainedModel train(ModelConfig config, std::span<const Trigram> train_set,
                   std::optional<std::span<const Trigram>> dev_set, const EpochCallback& on_epoch) {
  if (train_set.empty()) throw InputError("training set is empty");
  TrainedModel model;
  model.vocab = build_vocab(train_set);
  config.vocab_size = model.vocab.size();
  config.validate();
  model.config = config;

  const EncodedSet train_enc = encode_all(train_set, model.vocab, config.max_len);
  if (train_enc.examples.empty()) throw InputError("no training entry fits within max_len");
  model.skipped_train = train_enc.skipped;

  std::optional<EncodedSet> dev_enc;
  if (dev_set) dev_enc = encode_all(*dev_set, model.vocab, config.max_len);

  model.params = init_params(config, config.seed);
  OptimizerState opt = OptimizerState::for_params(model.params);
  Rng shuffle_rng(config.seed ^ kShuffleSalt);

  std::vector<std::size_t> order(train_enc.examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const EncodedExample*> batch;
  std::optional<double> best_dev;
  ModelParams best_params;

  const double total_steps = static_cast<double>(config.epochs * ((order.size() + config.batch_size - 1) / config.batch_size));
  std::size_t global_step = 0;
  auto lr_scale = [&] {
    if (config.lr_schedule == LrSchedule::constant) return 1.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(global_step) / total_steps));
  };

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train_enc.examples[order[i]]);
      BatchGradient bg = batch_gradient_parallel(model.params, batch, config);
      if (!std::isfinite(bg.loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches));
      }
      try {
        step(model.params, bg.gradient, opt, config, lr_scale());
        ++global_step;
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches));
      }
      loss_sum += bg.loss;
      ++batches;
    }

    EpochRecord rec{epoch, loss_sum / static_cast<double>(batches), std::nullopt};
    if (dev_enc) {
      rec.dev_accuracy = accuracy_on(model.params, config, *dev_enc, dev_set->size());
      if (!best_dev || *rec.dev_accuracy > *best_dev) {
        best_dev = rec.dev_accuracy;
        best_params = model.params;
      }
    }
    model.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  if (best_dev) model.params = std::move(best_params);
  return model;
}

std::size_t predict_stress(const TrainedModel& model, std::string_view prev, std::string_view word,
                           std::string_view next, Language lang) {
  const EncodedExample ex = encode_input(prev, word, next, lang, model.vocab, model.config.max_len);
  const std::size_t pos = predict_position(forward(model.params, ex, model.config), ex);
  return pos - ex.center.start + 1;
}

double stress_accuracy(const TrainedModel& model, std::span<const Trigram> data) {
  return accuracy_on(model.params, model.config, encode_all(data, model.vocab, model.config.max_len), data.size());
}

}  // namespace stress
