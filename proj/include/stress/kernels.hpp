#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stress/encoding.hpp"
#include "stress/neuro.hpp"

namespace stress {

// Mean loss and mean gradient over a minibatch.
struct BatchGradient {
  GradientSet gradient;
  double loss = 0.0;
};

// Serial reference: per-example gradients summed in batch order.
BatchGradient batch_gradient_serial(const ModelParams& params, std::span<const EncodedExample* const> batch,
                                    const ModelConfig& config);

// Examples are processed in parallel into per-example slots, then reduced in
// batch order, so the result is bitwise identical to the serial reference for
// any thread count.
BatchGradient batch_gradient_parallel(const ModelParams& params, std::span<const EncodedExample* const> batch,
                                      const ModelConfig& config);

// Predicted sequence positions for each example.
std::vector<std::size_t> predict_positions_serial(const ModelParams& params, std::span<const EncodedExample> examples,
                                                  const ModelConfig& config);
std::vector<std::size_t> predict_positions_parallel(const ModelParams& params,
                                                    std::span<const EncodedExample> examples,
                                                    const ModelConfig& config);

}  // namespace stress
