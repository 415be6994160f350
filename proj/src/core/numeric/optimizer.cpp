#include "numeric/optimizer.hpp"

#include <cmath>

#include "common/error.hpp"

namespace ponlab::nn {

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  fail(ErrorCode::kInvalidArgument, "unknown optimizer '" + name + "' (expected sgd|adam)");
}

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::kSgd ? "sgd" : "adam"; }

void sgd_step(std::span<Tensor> params, const OptimizerConfig& config) {
  for (Tensor& p : params) {
    if (!p.has_grad()) continue;
    auto value = p.data_mut();
    const auto grad = p.grad();
    for (std::size_t i = 0; i < value.size(); ++i)
      value[i] -= config.learning_rate * (grad[i] + config.l2 * value[i]);
  }
}

Optimizer::Optimizer(OptimizerConfig config, std::vector<Tensor> params)
    : config_(config), params_(std::move(params)) {
  require(config_.learning_rate >= 0.0 && std::isfinite(config_.learning_rate), ErrorCode::kInvalidArgument,
          "learning rate must be finite and non-negative");
  require(config_.l2 >= 0.0, ErrorCode::kInvalidArgument, "l2 coefficient must be >= 0");
  if (config_.kind == OptimizerKind::kAdam) {
    for (const Tensor& p : params_) {
      first_moment_.emplace_back(p.numel(), 0.0);
      second_moment_.emplace_back(p.numel(), 0.0);
    }
  }
}

void Optimizer::step() {
  ++steps_;
  if (config_.kind == OptimizerKind::kSgd) {
    sgd_step(params_, config_);
    return;
  }
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = params_[k];
    if (!p.has_grad()) continue;
    auto value = p.data_mut();
    const auto grad = p.grad();
    auto& m = first_moment_[k];
    auto& v = second_moment_[k];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i] + config_.l2 * value[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

void Optimizer::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

}  // namespace ponlab::nn
