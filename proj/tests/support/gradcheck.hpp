#pragma once

// Central finite-difference oracle used by the gradient tests. It only calls
// the forward function, so it shares no code path with backward().

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "numeric/tensor.hpp"

namespace ponlab::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;
};

inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// loss_fn rebuilds the graph from the current parameter values each call.
inline GradCheckResult grad_check(const std::function<nn::Tensor()>& loss_fn, std::vector<nn::Tensor> params,
                                  double eps = 1e-5) {
  for (auto& p : params) p.zero_grad();
  nn::backward(loss_fn());
  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto values = params[k].data_mut();
    const std::vector<double> analytic(params[k].grad().begin(), params[k].grad().end());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = loss_fn().item();
      values[i] = saved - eps;
      const double down = loss_fn().item();
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double err = relative_error(analytic[i], numeric);
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = "param " + std::to_string(k) + "[" + std::to_string(i) + "] analytic=" +
                       std::to_string(analytic[i]) + " numeric=" + std::to_string(numeric);
      }
    }
  }
  return result;
}

}  // namespace ponlab::testing
