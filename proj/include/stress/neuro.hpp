#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "stress/encoding.hpp"

namespace stress {

// Output layer: per-character two-way softmax (local) or one softmax over
// sequence positions computed from the sequence summary (global).
enum class Head : std::uint8_t { local = 0, global = 1 };
enum class OptimizerKind : std::uint8_t { sgd = 0, adam = 1 };
enum class LrSchedule : std::uint8_t { constant = 0, cosine = 1 };

Head parse_head(std::string_view name);
std::string_view head_name(Head head);
OptimizerKind parse_optimizer(std::string_view name);
std::string_view optimizer_name(OptimizerKind kind);
LrSchedule parse_lr_schedule(std::string_view name);
std::string_view lr_schedule_name(LrSchedule schedule);

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embedding_dim = 32;
  std::size_t hidden_units = 32;
  std::size_t max_len = kDefaultMaxLen;
  Head head = Head::global;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // Learning-rate schedule across training: constant, or cosine decay to zero
  // over all epochs.
  LrSchedule lr_schedule = LrSchedule::constant;

  // Throws InputError on zero dimensions or a non-positive learning rate.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Row-major matrix of doubles.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double* row(std::size_t r) { return values.data() + r * cols; }
  const double* row(std::size_t r) const { return values.data() + r * cols; }
  std::size_t size() const { return values.size(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

// Gate blocks are stacked in this order along the 4*hidden axis.
enum class Gate : std::uint8_t { input = 0, forget = 1, cell = 2, output = 3 };

struct LstmWeights {
  Tensor input;      // 4H x E
  Tensor recurrent;  // 4H x H
  Tensor bias;       // 4H x 1

  friend bool operator==(const LstmWeights&, const LstmWeights&) = default;
};

struct ModelParams {
  static constexpr std::size_t kTensorCount = 9;
  static constexpr std::array<std::string_view, kTensorCount> kTensorNames = {
      "embedding",     "fwd.input", "fwd.recurrent", "fwd.bias",   "bwd.input",
      "bwd.recurrent", "bwd.bias",  "head.weight",   "head.bias"};

  Tensor embedding;    // vocab x E
  LstmWeights forward;
  LstmWeights backward;
  Tensor head_weight;  // local: 2 x 2H; global: max_len x 2H
  Tensor head_bias;    // local: 2 x 1;  global: max_len x 1

  // All-zero tensors shaped for `config`.
  static ModelParams zeros(const ModelConfig& config);

  std::array<Tensor*, kTensorCount> tensors();
  std::array<const Tensor*, kTensorCount> tensors() const;
  std::size_t parameter_count() const;
  bool same_shape(const ModelParams& other) const;
  bool all_finite() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Gradients share the parameter layout.
struct GradientSet : ModelParams {
  GradientSet() = default;
  static GradientSet zeros_like(const ModelParams& params);
  void add(const GradientSet& other);
  void scale(double factor);
};

struct DirectionTrace {
  std::vector<double> gates;      // L x 4H, post-activation (i, f, g, o)
  std::vector<double> cell;       // L x H
  std::vector<double> cell_tanh;  // L x H
  std::vector<double> hidden;     // L x H, indexed by sequence position
};

struct ForwardTrace {
  Head head = Head::global;
  std::size_t length = 0;
  std::size_t hidden_units = 0;
  DirectionTrace fwd;
  DirectionTrace bwd;
  // local: L x 2 logits/probabilities; global: max_len entries with positions
  // >= length masked (logit -inf, probability 0).
  std::vector<double> logits;
  std::vector<double> probs;

  // Probability of stress at sequence position t under either head.
  double stress_probability(std::size_t t) const;
};

ForwardTrace forward(const ModelParams& params, const EncodedExample& example, const ModelConfig& config);

// Cross-entropy: mean over time steps (local) or of the position distribution (global).
double loss(const ForwardTrace& trace, const EncodedExample& example);

// Fault hook for gradient-check mutation tests: drops one gate's gradient.
struct FaultInjection {
  std::optional<Gate> zeroed_gate;
};

GradientSet backward(const ForwardTrace& trace, const EncodedExample& example, const ModelParams& params,
                     const ModelConfig& config, const FaultInjection& fault = {});

struct GradCheckOptions {
  double epsilon = 1e-4;
  std::size_t samples = 200;
  std::uint64_t seed = 0;
  FaultInjection fault;
};

/// Max relative error between backward() and central differences over randomly
/// sampled parameter coordinates.
double grad_check(const ModelParams& params, const EncodedExample& example, const ModelConfig& config,
                  const GradCheckOptions& options = {});

struct OptimizerState {
  ModelParams first_moment;
  ModelParams second_moment;
  std::uint64_t steps = 0;

  static OptimizerState for_params(const ModelParams& params);
};

// Throws NumericError on a non-finite gradient; parameters are unchanged then.
// `lr_scale` multiplies config.learning_rate for this step.
void step(ModelParams& params, const GradientSet& grads, OptimizerState& state, const ModelConfig& config,
          double lr_scale = 1.0);

ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

// Sequence index of the most probable stress position among vowel-mask
// positions, leftmost on ties.
std::size_t predict_position(const ForwardTrace& trace, const EncodedExample& example);

}  // namespace stress
