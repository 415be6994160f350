#include "numeric/layers.hpp"

#include <cmath>

#include "common/error.hpp"

namespace ponlab::nn {

void fill_uniform(Tensor& t, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.data_mut()) v = dist(rng);
}

void fill_zero(Tensor& t) {
  for (double& v : t.data_mut()) v = 0.0;
}

Conv1dLayer Conv1dLayer::create(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_size,
                                std::size_t pad, PadMode mode, Rng& rng) {
  require(in_channels > 0 && out_channels > 0 && kernel_size > 0, ErrorCode::kInvalidArgument,
          "conv1d layer dimensions must be positive");
  Conv1dLayer layer;
  layer.in_channels = in_channels;
  layer.out_channels = out_channels;
  layer.kernel_size = kernel_size;
  layer.pad = pad;
  layer.mode = mode;
  layer.weight = Tensor::zeros({out_channels, in_channels, kernel_size}, true);
  layer.bias = Tensor::zeros({out_channels}, true);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels * kernel_size));
  fill_uniform(layer.weight, bound, rng);
  fill_uniform(layer.bias, bound, rng);
  return layer;
}

Conv1dLayer Conv1dLayer::same(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_size,
                              PadMode mode, Rng& rng) {
  require(kernel_size % 2 == 1, ErrorCode::kInvalidArgument, "same-length conv needs an odd kernel");
  return create(in_channels, out_channels, kernel_size, (kernel_size - 1) / 2, mode, rng);
}

void Conv1dLayer::collect(const std::string& prefix, std::vector<NamedTensor>& out) const {
  out.push_back({prefix + ".weight", weight});
  out.push_back({prefix + ".bias", bias});
}

LinearLayer LinearLayer::create(std::size_t in_dim, std::size_t out_dim, Rng& rng, bool with_bias) {
  require(in_dim > 0 && out_dim > 0, ErrorCode::kInvalidArgument, "linear layer dimensions must be positive");
  LinearLayer layer;
  layer.in_dim = in_dim;
  layer.out_dim = out_dim;
  layer.weight = Tensor::zeros({out_dim, in_dim}, true);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  fill_uniform(layer.weight, bound, rng);
  if (with_bias) {
    layer.bias = Tensor::zeros({out_dim}, true);
    fill_uniform(layer.bias, bound, rng);
  }
  return layer;
}

void LinearLayer::collect(const std::string& prefix, std::vector<NamedTensor>& out) const {
  out.push_back({prefix + ".weight", weight});
  if (bias.defined()) out.push_back({prefix + ".bias", bias});
}

}  // namespace ponlab::nn
