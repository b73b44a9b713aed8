#include "stress/neuro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stress/rng.hpp"

namespace stress {

Head parse_head(std::string_view name) {
  if (name == "local") return Head::local;
  if (name == "global") return Head::global;
  throw InputError("unknown head '" + std::string(name) + "' (expected local or global)");
}

std::string_view head_name(Head head) { return head == Head::local ? "local" : "global"; }

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw InputError("unknown optimizer '" + std::string(name) + "' (expected sgd or adam)");
}

std::string_view optimizer_name(OptimizerKind kind) { return kind == OptimizerKind::sgd ? "sgd" : "adam"; }

LrSchedule parse_lr_schedule(std::string_view name) {
  if (name == "constant") return LrSchedule::constant;
  if (name == "cosine") return LrSchedule::cosine;
  throw InputError("unknown learning-rate schedule '" + std::string(name) + "' (expected constant or cosine)");
}

std::string_view lr_schedule_name(LrSchedule schedule) {
  return schedule == LrSchedule::constant ? "constant" : "cosine";
}

void ModelConfig::validate() const {
  if (vocab_size < 1 || embedding_dim < 1 || hidden_units < 1 || max_len < 1 || batch_size < 1) {
    throw InputError("model dimensions and batch size must be >= 1");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InputError("learning rate must be positive");
  }
}

// ---------------------------------------------------------------------------
// Parameter containers

ModelParams ModelParams::zeros(const ModelConfig& config) {
  const std::size_t E = config.embedding_dim;
  const std::size_t H = config.hidden_units;
  const std::size_t outputs = config.head == Head::local ? 2 : config.max_len;
  ModelParams p;
  p.embedding = Tensor(config.vocab_size, E);
  for (LstmWeights* w : {&p.forward, &p.backward}) {
    w->input = Tensor(4 * H, E);
    w->recurrent = Tensor(4 * H, H);
    w->bias = Tensor(4 * H, 1);
  }
  p.head_weight = Tensor(outputs, 2 * H);
  p.head_bias = Tensor(outputs, 1);
  return p;
}

std::array<Tensor*, ModelParams::kTensorCount> ModelParams::tensors() {
  return {&embedding,         &forward.input, &forward.recurrent, &forward.bias, &backward.input,
          &backward.recurrent, &backward.bias, &head_weight,       &head_bias};
}

std::array<const Tensor*, ModelParams::kTensorCount> ModelParams::tensors() const {
  return {&embedding,         &forward.input, &forward.recurrent, &forward.bias, &backward.input,
          &backward.recurrent, &backward.bias, &head_weight,       &head_bias};
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* t : tensors()) n += t->size();
  return n;
}

bool ModelParams::same_shape(const ModelParams& other) const {
  const auto a = tensors();
  const auto b = other.tensors();
  for (std::size_t i = 0; i < kTensorCount; ++i) {
    if (!a[i]->same_shape(*b[i])) return false;
  }
  return true;
}

bool ModelParams::all_finite() const {
  for (const Tensor* t : tensors()) {
    for (double v : t->values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

GradientSet GradientSet::zeros_like(const ModelParams& params) {
  GradientSet g;
  auto dst = g.tensors();
  const auto src = params.tensors();
  for (std::size_t i = 0; i < kTensorCount; ++i) *dst[i] = Tensor(src[i]->rows, src[i]->cols);
  return g;
}

void GradientSet::add(const GradientSet& other) {
  auto dst = tensors();
  const auto src = other.tensors();
  for (std::size_t i = 0; i < kTensorCount; ++i) {
    auto& d = dst[i]->values;
    const auto& s = src[i]->values;
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += s[k];
  }
}

void GradientSet::scale(double factor) {
  for (Tensor* t : tensors()) {
    for (double& v : t->values) v *= factor;
  }
}

// ---------------------------------------------------------------------------
// Forward

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// Runs one LSTM direction. `order` lists sequence positions in processing order.
void run_direction(const LstmWeights& w, const Tensor& embedding, std::span<const int> ids,
                   bool reverse, std::size_t H, DirectionTrace& out) {
  const std::size_t L = ids.size();
  const std::size_t E = embedding.cols;
  out.gates.assign(L * 4 * H, 0.0);
  out.cell.assign(L * H, 0.0);
  out.cell_tanh.assign(L * H, 0.0);
  out.hidden.assign(L * H, 0.0);

  std::vector<double> z(4 * H);
  const std::vector<double> zeros(H, 0.0);
  for (std::size_t step = 0; step < L; ++step) {
    const std::size_t t = reverse ? L - 1 - step : step;
    const double* x = embedding.row(static_cast<std::size_t>(ids[t]));
    const double* h_prev = step == 0 ? zeros.data() : &out.hidden[(reverse ? t + 1 : t - 1) * H];
    const double* c_prev = step == 0 ? zeros.data() : &out.cell[(reverse ? t + 1 : t - 1) * H];

    for (std::size_t r = 0; r < 4 * H; ++r) {
      z[r] = w.bias.values[r] + dot(w.input.row(r), x, E) + dot(w.recurrent.row(r), h_prev, H);
    }
    double* g = &out.gates[t * 4 * H];
    double* c = &out.cell[t * H];
    double* ct = &out.cell_tanh[t * H];
    double* h = &out.hidden[t * H];
    for (std::size_t k = 0; k < H; ++k) {
      const double ig = sigmoid(z[k]);
      const double fg = sigmoid(z[H + k]);
      const double cg = std::tanh(z[2 * H + k]);
      const double og = sigmoid(z[3 * H + k]);
      g[k] = ig;
      g[H + k] = fg;
      g[2 * H + k] = cg;
      g[3 * H + k] = og;
      c[k] = fg * c_prev[k] + ig * cg;
      ct[k] = std::tanh(c[k]);
      h[k] = og * ct[k];
    }
  }
}

void softmax_inplace(const double* logits, double* probs, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, logits[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    probs[i] = std::exp(logits[i] - mx);
    sum += probs[i];
  }
  for (std::size_t i = 0; i < n; ++i) probs[i] /= sum;
}

double log_sum_exp(const double* logits, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, logits[i]);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::exp(logits[i] - mx);
  return mx + std::log(sum);
}

}  // namespace

double ForwardTrace::stress_probability(std::size_t t) const {
  return head == Head::local ? probs[2 * t + 1] : probs[t];
}

ForwardTrace forward(const ModelParams& params, const EncodedExample& example, const ModelConfig& config) {
  const std::size_t L = example.length();
  const std::size_t H = config.hidden_units;
  if (L == 0) throw InputError("cannot run the model on an empty sequence");
  if (L > config.max_len) {
    throw InputError("sequence length " + std::to_string(L) + " exceeds max_len " + std::to_string(config.max_len));
  }
  for (int id : example.char_ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= params.embedding.rows) {
      throw InputError("character id " + std::to_string(id) + " outside the embedding table");
    }
  }

  ForwardTrace tr;
  tr.head = config.head;
  tr.length = L;
  tr.hidden_units = H;
  run_direction(params.forward, params.embedding, example.char_ids, false, H, tr.fwd);
  run_direction(params.backward, params.embedding, example.char_ids, true, H, tr.bwd);

  const Tensor& W = params.head_weight;
  const Tensor& b = params.head_bias;
  if (config.head == Head::local) {
    tr.logits.assign(L * 2, 0.0);
    tr.probs.assign(L * 2, 0.0);
    for (std::size_t t = 0; t < L; ++t) {
      for (std::size_t k = 0; k < 2; ++k) {
        tr.logits[2 * t + k] =
            b.values[k] + dot(W.row(k), &tr.fwd.hidden[t * H], H) + dot(W.row(k) + H, &tr.bwd.hidden[t * H], H);
      }
      softmax_inplace(&tr.logits[2 * t], &tr.probs[2 * t], 2);
    }
  } else {
    const double* enc_fwd = &tr.fwd.hidden[(L - 1) * H];
    const double* enc_bwd = &tr.bwd.hidden[0];
    tr.logits.assign(config.max_len, -std::numeric_limits<double>::infinity());
    tr.probs.assign(config.max_len, 0.0);
    for (std::size_t k = 0; k < L; ++k) {
      tr.logits[k] = b.values[k] + dot(W.row(k), enc_fwd, H) + dot(W.row(k) + H, enc_bwd, H);
    }
    softmax_inplace(tr.logits.data(), tr.probs.data(), L);
  }

  for (std::size_t i = 0; i < tr.probs.size(); ++i) {
    if (!std::isfinite(tr.probs[i])) throw NumericError("non-finite activation in forward pass");
  }
  return tr;
}

double loss(const ForwardTrace& trace, const EncodedExample& example) {
  const std::size_t L = trace.length;
  if (trace.head == Head::local) {
    double total = 0.0;
    for (std::size_t t = 0; t < L; ++t) {
      const double* z = &trace.logits[2 * t];
      total += log_sum_exp(z, 2) - z[example.labels[t]];
    }
    return total / static_cast<double>(L);
  }
  const std::size_t target = example.target();
  return log_sum_exp(trace.logits.data(), L) - trace.logits[target];
}

// ---------------------------------------------------------------------------
// Backward

namespace {

void backprop_direction(const DirectionTrace& tr, const LstmWeights& w, const Tensor& embedding,
                        std::span<const int> ids, bool reverse, std::size_t H,
                        const std::vector<double>& dh_external, LstmWeights& dw, Tensor& demb,
                        const FaultInjection& fault) {
  const std::size_t L = ids.size();
  const std::size_t E = embedding.cols;
  std::vector<double> dh(H), dc_next(H, 0.0), dh_next(H, 0.0), dz(4 * H);
  const std::vector<double> zeros(H, 0.0);

  // Walk the processing order backwards.
  for (std::size_t back = 0; back < L; ++back) {
    const std::size_t step = L - 1 - back;
    const std::size_t t = reverse ? L - 1 - step : step;
    const bool first = step == 0;
    const std::size_t prev_t = reverse ? t + 1 : t - 1;
    const double* h_prev = first ? zeros.data() : &tr.hidden[prev_t * H];
    const double* c_prev = first ? zeros.data() : &tr.cell[prev_t * H];
    const double* g = &tr.gates[t * 4 * H];
    const double* ct = &tr.cell_tanh[t * H];

    for (std::size_t k = 0; k < H; ++k) {
      dh[k] = dh_external[t * H + k] + dh_next[k];
      const double ig = g[k], fg = g[H + k], cg = g[2 * H + k], og = g[3 * H + k];
      const double dc = dc_next[k] + dh[k] * og * (1.0 - ct[k] * ct[k]);
      dz[k] = dc * cg * ig * (1.0 - ig);
      dz[H + k] = dc * c_prev[k] * fg * (1.0 - fg);
      dz[2 * H + k] = dc * ig * (1.0 - cg * cg);
      dz[3 * H + k] = dh[k] * ct[k] * og * (1.0 - og);
      dc_next[k] = dc * fg;
    }
    if (fault.zeroed_gate) {
      const std::size_t off = static_cast<std::size_t>(*fault.zeroed_gate) * H;
      std::fill(dz.begin() + static_cast<std::ptrdiff_t>(off), dz.begin() + static_cast<std::ptrdiff_t>(off + H), 0.0);
    }

    const auto id = static_cast<std::size_t>(ids[t]);
    const double* x = embedding.row(id);
    double* dx = demb.row(id);
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t r = 0; r < 4 * H; ++r) {
      const double d = dz[r];
      dw.bias.values[r] += d;
      axpy(d, x, dw.input.row(r), E);
      axpy(d, h_prev, dw.recurrent.row(r), H);
      axpy(d, w.input.row(r), dx, E);
      axpy(d, w.recurrent.row(r), dh_next.data(), H);
    }
  }
}

}  // namespace

GradientSet backward(const ForwardTrace& trace, const EncodedExample& example, const ModelParams& params,
                     const ModelConfig& config, const FaultInjection& fault) {
  const std::size_t L = trace.length;
  const std::size_t H = trace.hidden_units;
  GradientSet grads = GradientSet::zeros_like(params);
  std::vector<double> dh_fwd(L * H, 0.0), dh_bwd(L * H, 0.0);
  const Tensor& W = params.head_weight;

  if (trace.head == Head::local) {
    const double inv_len = 1.0 / static_cast<double>(L);
    for (std::size_t t = 0; t < L; ++t) {
      const double* hf = &trace.fwd.hidden[t * H];
      const double* hb = &trace.bwd.hidden[t * H];
      for (std::size_t k = 0; k < 2; ++k) {
        const double y = example.labels[t] == k ? 1.0 : 0.0;
        const double d = (trace.probs[2 * t + k] - y) * inv_len;
        grads.head_bias.values[k] += d;
        axpy(d, hf, grads.head_weight.row(k), H);
        axpy(d, hb, grads.head_weight.row(k) + H, H);
        axpy(d, W.row(k), &dh_fwd[t * H], H);
        axpy(d, W.row(k) + H, &dh_bwd[t * H], H);
      }
    }
  } else {
    const std::size_t target = example.target();
    const double* hf = &trace.fwd.hidden[(L - 1) * H];
    const double* hb = &trace.bwd.hidden[0];
    for (std::size_t k = 0; k < L; ++k) {
      const double d = trace.probs[k] - (k == target ? 1.0 : 0.0);
      grads.head_bias.values[k] += d;
      axpy(d, hf, grads.head_weight.row(k), H);
      axpy(d, hb, grads.head_weight.row(k) + H, H);
      axpy(d, W.row(k), &dh_fwd[(L - 1) * H], H);
      axpy(d, W.row(k) + H, &dh_bwd[0], H);
    }
  }

  backprop_direction(trace.fwd, params.forward, params.embedding, example.char_ids, false, H, dh_fwd,
                     grads.forward, grads.embedding, fault);
  backprop_direction(trace.bwd, params.backward, params.embedding, example.char_ids, true, H, dh_bwd,
                     grads.backward, grads.embedding, fault);
  (void)config;
  return grads;
}

// ---------------------------------------------------------------------------
// Verification

double grad_check(const ModelParams& params, const EncodedExample& example, const ModelConfig& config,
                  const GradCheckOptions& options) {
  const ForwardTrace trace = forward(params, example, config);
  const GradientSet analytic = backward(trace, example, params, config, options.fault);

  ModelParams probe = params;
  auto probe_tensors = probe.tensors();
  const auto grad_tensors = analytic.tensors();
  const std::size_t total = params.parameter_count();

  Rng rng(options.seed);
  double worst = 0.0;
  for (std::size_t s = 0; s < options.samples; ++s) {
    std::size_t flat = rng.below(total);
    std::size_t ti = 0;
    while (flat >= probe_tensors[ti]->size()) flat -= probe_tensors[ti++]->size();

    double& theta = probe_tensors[ti]->values[flat];
    const double saved = theta;
    theta = saved + options.epsilon;
    const double up = loss(forward(probe, example, config), example);
    theta = saved - options.epsilon;
    const double down = loss(forward(probe, example, config), example);
    theta = saved;

    const double numeric = (up - down) / (2.0 * options.epsilon);
    const double exact = grad_tensors[ti]->values[flat];
    const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-8});
    worst = std::max(worst, std::abs(exact - numeric) / denom);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Optimisation

OptimizerState OptimizerState::for_params(const ModelParams& params) {
  return OptimizerState{GradientSet::zeros_like(params), GradientSet::zeros_like(params), 0};
}

void step(ModelParams& params, const GradientSet& grads, OptimizerState& state, const ModelConfig& config,
          double lr_scale) {
  if (!params.same_shape(grads)) throw InputError("gradient shapes do not match parameters");
  if (!grads.all_finite()) throw NumericError("non-finite gradient");

  auto p = params.tensors();
  const auto g = grads.tensors();
  const double lr = config.learning_rate * lr_scale;

  if (config.optimizer == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < ModelParams::kTensorCount; ++i) {
      auto& pv = p[i]->values;
      const auto& gv = g[i]->values;
      for (std::size_t k = 0; k < pv.size(); ++k) pv[k] -= lr * gv[k];
    }
    ++state.steps;
    return;
  }

  if (!state.first_moment.same_shape(params)) state = OptimizerState::for_params(params);
  ++state.steps;
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.steps));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.steps));
  auto m = state.first_moment.tensors();
  auto v = state.second_moment.tensors();
  for (std::size_t i = 0; i < ModelParams::kTensorCount; ++i) {
    auto& pv = p[i]->values;
    auto& mv = m[i]->values;
    auto& vv = v[i]->values;
    const auto& gv = g[i]->values;
    for (std::size_t k = 0; k < pv.size(); ++k) {
      mv[k] = b1 * mv[k] + (1.0 - b1) * gv[k];
      vv[k] = b2 * vv[k] + (1.0 - b2) * gv[k] * gv[k];
      const double m_hat = mv[k] / correction1;
      const double v_hat = vv[k] / correction2;
      pv[k] -= lr * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
    }
  }
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelParams p = ModelParams::zeros(config);
  Rng rng(seed);
  auto glorot = [&rng](Tensor& t, std::size_t fan_in, std::size_t fan_out) {
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : t.values) v = rng.uniform(-r, r);
  };
  const std::size_t E = config.embedding_dim;
  const std::size_t H = config.hidden_units;
  glorot(p.embedding, config.vocab_size, E);
  for (LstmWeights* w : {&p.forward, &p.backward}) {
    glorot(w->input, E, 4 * H);
    glorot(w->recurrent, H, 4 * H);
    for (std::size_t k = 0; k < H; ++k) w->bias.values[H + k] = 1.0;
  }
  glorot(p.head_weight, 2 * H, p.head_weight.rows);
  return p;
}

std::size_t predict_position(const ForwardTrace& trace, const EncodedExample& example) {
  std::size_t best = trace.length;
  double best_p = -1.0;
  for (std::size_t t = 0; t < trace.length; ++t) {
    if (!example.vowel_mask[t]) continue;
    const double p = trace.stress_probability(t);
    if (p > best_p) {
      best_p = p;
      best = t;
    }
  }
  if (best == trace.length) throw InputError("center word has no vowel");
  return best;
}

}  // namespace stress
