#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stress/encoding.hpp"
#include "stress/neuro.hpp"
#include "stress/trigram.hpp"

namespace stress {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> dev_accuracy;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainedModel {
  ModelParams params;
  ModelConfig config;
  CharVocab vocab;
  std::vector<EpochRecord> history;
  std::size_t skipped_train = 0;  // entries whose context exceeded max_len
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Minibatch training with a per-epoch shuffle seeded from config.seed. With a
/// dev set, the parameters of the best dev-accuracy epoch are kept (earliest
/// on ties); otherwise those of the last epoch.
TrainedModel train(ModelConfig config, std::span<const Trigram> train_set,
                   std::optional<std::span<const Trigram>> dev_set = std::nullopt,
                   const EpochCallback& on_epoch = {});

/// 1-based character index into `word` of the predicted stressed vowel.
std::size_t predict_stress(const TrainedModel& model, std::string_view prev, std::string_view word,
                           std::string_view next, Language lang);

// Fraction of entries whose stress position is predicted exactly; entries that
// cannot be encoded count as wrong.
double stress_accuracy(const TrainedModel& model, std::span<const Trigram> data);

// Binary checkpoint, see README for the layout.
inline constexpr char kCheckpointMagic[4] = {'W', 'S', 'T', 'R'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

void save_checkpoint(const TrainedModel& model, std::ostream& out);
TrainedModel load_checkpoint(std::istream& in);
void save(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load(const std::filesystem::path& path);

}  // namespace stress
