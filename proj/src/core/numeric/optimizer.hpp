#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "numeric/tensor.hpp"

namespace ponlab::nn {

enum class OptimizerKind { kSgd, kAdam };

OptimizerKind parse_optimizer_kind(const std::string& name);
std::string to_string(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  double learning_rate = 1e-5;
  // Coupled L2 ("norm-2") penalty: the update uses grad + l2 * p.
  double l2 = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// p <- p - lr * (grad + l2 * p)
void sgd_step(std::span<Tensor> params, const OptimizerConfig& config);

/// First-order optimizer owning the per-parameter auxiliary buffers
/// (empty for SGD, first/second moments for Adam).
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, std::vector<Tensor> params);

  void step();
  void zero_grad();

  const OptimizerConfig& config() const noexcept { return config_; }
  std::size_t steps_taken() const noexcept { return steps_; }

 private:
  OptimizerConfig config_;
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
  std::size_t steps_ = 0;
};

}  // namespace ponlab::nn
