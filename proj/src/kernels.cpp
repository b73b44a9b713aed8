#include "stress/kernels.hpp"

#include <exception>
#include <omp.h>

namespace stress {

namespace {

void finish(BatchGradient& out, double loss_sum, std::size_t n) {
  const double inv = 1.0 / static_cast<double>(n);
  out.gradient.scale(inv);
  out.loss = loss_sum * inv;
}

}  // namespace

BatchGradient batch_gradient_serial(const ModelParams& params, std::span<const EncodedExample* const> batch,
                                    const ModelConfig& config) {
  if (batch.empty()) throw InputError("empty batch");
  BatchGradient out{GradientSet::zeros_like(params), 0.0};
  double loss_sum = 0.0;
  for (const EncodedExample* ex : batch) {
    const ForwardTrace tr = forward(params, *ex, config);
    loss_sum += loss(tr, *ex);
    out.gradient.add(backward(tr, *ex, params, config));
  }
  finish(out, loss_sum, batch.size());
  return out;
}

BatchGradient batch_gradient_parallel(const ModelParams& params, std::span<const EncodedExample* const> batch,
                                      const ModelConfig& config) {
  if (batch.empty()) throw InputError("empty batch");
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
  std::vector<GradientSet> slots(batch.size());
  std::vector<double> losses(batch.size(), 0.0);
  std::exception_ptr error;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const EncodedExample& ex = *batch[static_cast<std::size_t>(i)];
      const ForwardTrace tr = forward(params, ex, config);
      losses[static_cast<std::size_t>(i)] = loss(tr, ex);
      slots[static_cast<std::size_t>(i)] = backward(tr, ex, params, config);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  BatchGradient out{GradientSet::zeros_like(params), 0.0};
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    loss_sum += losses[i];
    out.gradient.add(slots[i]);
  }
  finish(out, loss_sum, batch.size());
  return out;
}

std::vector<std::size_t> predict_positions_serial(const ModelParams& params, std::span<const EncodedExample> examples,
                                                  const ModelConfig& config) {
  std::vector<std::size_t> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(predict_position(forward(params, ex, config), ex));
  return out;
}

std::vector<std::size_t> predict_positions_parallel(const ModelParams& params,
                                                    std::span<const EncodedExample> examples,
                                                    const ModelConfig& config) {
  std::vector<std::size_t> out(examples.size(), 0);
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto& ex = examples[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] = predict_position(forward(params, ex, config), ex);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace stress
