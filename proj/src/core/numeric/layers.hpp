#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "numeric/ops.hpp"
#include "numeric/tensor.hpp"

namespace ponlab::nn {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct Conv1dLayer {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_size = 1;
  std::size_t pad = 0;
  PadMode mode = PadMode::kZero;
  Tensor weight;  // [out_channels, in_channels, kernel_size]
  Tensor bias;    // [out_channels]

  // Weights drawn uniform in +-1/sqrt(in_channels * kernel_size).
  static Conv1dLayer create(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_size,
                            std::size_t pad, PadMode mode, Rng& rng);
  // Length-preserving layer: pad = (kernel_size - 1) / 2, kernel must be odd.
  static Conv1dLayer same(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_size,
                          PadMode mode, Rng& rng);

  Tensor forward(const Tensor& x) const { return conv1d(x, weight, bias, pad, mode); }
  std::size_t output_length(std::size_t input_length) const {
    return input_length + 2 * pad - kernel_size + 1;
  }
  void collect(const std::string& prefix, std::vector<NamedTensor>& out) const;
};

struct LinearLayer {
  std::size_t in_dim = 1;
  std::size_t out_dim = 1;
  Tensor weight;  // [out_dim, in_dim]
  Tensor bias;    // [out_dim], undefined when the layer is bias-free

  static LinearLayer create(std::size_t in_dim, std::size_t out_dim, Rng& rng, bool with_bias = true);

  Tensor forward(const Tensor& x) const { return linear(x, weight, bias); }
  void collect(const std::string& prefix, std::vector<NamedTensor>& out) const;
};

void fill_uniform(Tensor& t, double bound, Rng& rng);
void fill_zero(Tensor& t);

}  // namespace ponlab::nn
