#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stress/corpus.hpp"
#include "stress/models.hpp"
#include "stress/rng.hpp"

using namespace stress;

namespace {

ModelConfig quick_config(Head head, std::size_t epochs) {
  ModelConfig c;
  c.head = head;
  c.epochs = epochs;
  c.embedding_dim = 8;
  c.hidden_units = 8;
  c.seed = 3;
  return c;
}

std::string checkpoint_bytes(const TrainedModel& m) {
  std::ostringstream out(std::ios::binary);
  save_checkpoint(m, out);
  return out.str();
}

}  // namespace

TEST_CASE("zero epochs returns the initial parameters") {
  const auto data = generate_synthetic_corpus(StressRule::first_vowel, 40, 1, Language::ru);
  const auto m = train(quick_config(Head::global, 0), data);
  CHECK(m.params == init_params(m.config, m.config.seed));
  CHECK(m.history.empty());
  CHECK(m.vocab.size() == m.config.vocab_size);
}

TEST_CASE("training is deterministic per seed") {
  const auto data = generate_synthetic_corpus(StressRule::last_vowel, 120, 2, Language::be);
  const auto dev = generate_synthetic_corpus(StressRule::last_vowel, 30, 3, Language::be);
  for (Head head : {Head::local, Head::global}) {
    const auto a = train(quick_config(head, 2), data, std::span<const Trigram>(dev));
    const auto b = train(quick_config(head, 2), data, std::span<const Trigram>(dev));
    CHECK(a.history == b.history);
    CHECK(a.params == b.params);
    CHECK(checkpoint_bytes(a) == checkpoint_bytes(b));
    REQUIRE(a.history.size() == 2);
    CHECK(a.history[0].dev_accuracy.has_value());
  }
}

TEST_CASE("train rejects unusable input") {
  CHECK_THROWS_AS(train(quick_config(Head::global, 1), std::vector<Trigram>{}), InputError);
  const std::vector<Trigram> long_one = {{"", "тататататататататататататататататататататата", "", 2, Language::ru}};
  CHECK_THROWS_AS(train(quick_config(Head::global, 1), long_one), InputError);
}

TEST_CASE("divergence is reported as a numeric error") {
  auto cfg = quick_config(Head::global, 3);
  cfg.optimizer = OptimizerKind::sgd;
  cfg.learning_rate = 1e300;
  const auto data = generate_synthetic_corpus(StressRule::first_vowel, 40, 1, Language::ru);
  CHECK_THROWS_AS(train(cfg, data), NumericError);
}

TEST_CASE("prediction is constrained to the center word's vowels") {
  const auto data = generate_synthetic_corpus(StressRule::first_vowel, 60, 5, Language::ru);
  Rng rng(1);
  for (Head head : {Head::local, Head::global}) {
    auto m = train(quick_config(head, 0), data);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      m.params = init_params(m.config, seed);
      for (const auto& t : data) {
        const auto p = predict_stress(m, t.prev, t.word, t.next, t.language);
        const auto v = vowel_positions(t.word, t.language);
        CHECK(std::find(v.begin(), v.end(), p) != v.end());
      }
      CHECK(predict_stress(m, "белая", "тит", "летит", Language::ru) == 2);
    }
    CHECK_THROWS_AS(predict_stress(m, "", "в", "", Language::ru), InputError);
  }
}

TEST_CASE("an untrained zero-weight global model picks the leftmost vowel") {
  const auto data = generate_synthetic_corpus(StressRule::first_vowel, 20, 5, Language::ru);
  auto m = train(quick_config(Head::global, 0), data);
  m.params = ModelParams::zeros(m.config);
  CHECK(predict_stress(m, "белая", "ворона", "летит", Language::ru) == 2);
  CHECK(predict_stress(m, "", "молоко", "", Language::ru) == 2);
  CHECK(predict_stress(m, "", "ёлка", "", Language::ru) == 1);
}

TEST_CASE("a model trained on the first-vowel rule stresses the first vowel") {
  const auto data = generate_synthetic_corpus(StressRule::first_vowel, 1500, 8, Language::ru);
  ModelConfig cfg;
  cfg.head = Head::global;
  cfg.epochs = 6;
  cfg.learning_rate = 5e-3;
  cfg.lr_schedule = LrSchedule::cosine;
  cfg.seed = 1;
  const auto m = train(cfg, data);
  CHECK(predict_stress(m, "белая", "ворона", "летит", Language::ru) == 2);
  CHECK(stress_accuracy(m, data) > 0.95);
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  const auto data = generate_synthetic_corpus(StressRule::penultimate_vowel, 80, 6, Language::uk);
  for (Head head : {Head::local, Head::global}) {
    const auto m = train(quick_config(head, 1), data);
    const std::string bytes = checkpoint_bytes(m);
    CHECK(bytes.substr(0, 4) == "WSTR");
    CHECK(static_cast<unsigned char>(bytes[4]) == kCheckpointVersion);

    std::istringstream in(bytes, std::ios::binary);
    const auto back = load_checkpoint(in);
    CHECK(back.params == m.params);
    CHECK(back.config == m.config);
    CHECK(back.vocab == m.vocab);
    for (const auto& t : data) {
      CHECK(predict_stress(back, t.prev, t.word, t.next, t.language) ==
            predict_stress(m, t.prev, t.word, t.next, t.language));
    }

    const auto path = std::filesystem::temp_directory_path() / "stress_ckpt_test.bin";
    save(m, path);
    CHECK(load(path).params == m.params);
    std::filesystem::remove(path);
  }
}

TEST_CASE("corrupt checkpoints are rejected") {
  const auto data = generate_synthetic_corpus(StressRule::first_vowel, 20, 6, Language::ru);
  const std::string bytes = checkpoint_bytes(train(quick_config(Head::global, 0), data));

  std::istringstream truncated(bytes.substr(0, bytes.size() - 5), std::ios::binary);
  CHECK_THROWS_AS(load_checkpoint(truncated), InputError);

  std::string wrong_version = bytes;
  wrong_version[4] = 9;
  std::istringstream v(wrong_version, std::ios::binary);
  CHECK_THROWS_WITH_AS(load_checkpoint(v), doctest::Contains("version"), InputError);

  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  std::istringstream mg(wrong_magic, std::ios::binary);
  CHECK_THROWS_AS(load_checkpoint(mg), InputError);

  std::istringstream trailing(bytes + "x", std::ios::binary);
  CHECK_THROWS_AS(load_checkpoint(trailing), InputError);

  CHECK_THROWS_AS(load("/nonexistent/dir/model.bin"), InputError);
}
