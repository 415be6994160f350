#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "data/dataset.hpp"
#include "numeric/layers.hpp"
#include "numeric/tensor.hpp"

namespace ponlab::eq {

// A trainable window-to-symbol regressor.
class Model {
 public:
  virtual ~Model() = default;
  // [B, window] -> [B, target_length()]
  virtual nn::Tensor forward(const nn::Tensor& windows) const = 0;
  virtual std::vector<nn::NamedTensor> named_parameters() const = 0;
  virtual data::WindowStyle style() const = 0;
  virtual std::size_t window_length() const = 0;
  // 1 for a centre-symbol estimate; the window length for sequence output.
  virtual std::size_t target_length() const { return 1; }
  // Position of the evaluated symbol within the output row.
  virtual std::size_t output_centre() const { return 0; }
  virtual std::string kind() const = 0;
  virtual nlohmann::json describe() const = 0;

  std::vector<nn::Tensor> parameters() const;
  std::size_t parameter_count() const;
};

enum class Activation { kSigmoid, kRelu };
Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

struct DnnConfig {
  std::vector<std::size_t> hidden{60, 64, 18};
  Activation activation = Activation::kSigmoid;
  std::size_t pre = 16;
  std::size_t post = 16;

  void validate() const;
};

/// (pre + 1 + post) -> hidden... -> 1 affine chain, activation on hidden layers.
class DnnModel final : public Model {
 public:
  DnnModel(DnnConfig config, std::uint64_t seed);

  nn::Tensor forward(const nn::Tensor& windows) const override;
  std::vector<nn::NamedTensor> named_parameters() const override;
  data::WindowStyle style() const override { return data::WindowStyle::kCenteredDnn; }
  std::size_t window_length() const override { return config_.pre + 1 + config_.post; }
  std::string kind() const override { return "dnn"; }
  nlohmann::json describe() const override;

  const DnnConfig& config() const noexcept { return config_; }
  std::vector<nn::LinearLayer>& layers() noexcept { return layers_; }

 private:
  DnnConfig config_;
  std::vector<nn::LinearLayer> layers_;
};

enum class OutputMode { kManyToOne, kManyToMany };
OutputMode parse_output_mode(const std::string& name);
std::string to_string(OutputMode m);

struct FcScinetConfig {
  static constexpr int kMaxLevels = 5;

  std::size_t window = 64;  // p
  int levels = 3;           // L
  std::size_t hidden = 1;   // n_h
  std::size_t conv_kernel = 3;
  std::size_t fc_kernel = 3;
  data::FcMode fc_mode = data::FcMode::kEmphasize;
  OutputMode output_mode = OutputMode::kManyToOne;
  double leaky_slope = 0.01;
  // Bounds every conv stack output with tanh, so each exp factor stays in [1/e, e].
  bool stack_tanh = true;
  // Decomp weights start at the identity when set, otherwise uniform.
  bool decomp_identity_init = true;

  void validate() const;
};

// conv(1 -> n_h) -> leaky ReLU -> conv(n_h -> 1) [-> tanh], both convs
// length-preserving with replicate padding.
struct ConvStack {
  nn::Conv1dLayer first;
  nn::Conv1dLayer second;
  double slope = 0.01;
  bool bounded = true;

  nn::Tensor forward(const nn::Tensor& x) const;
  void collect(const std::string& prefix, std::vector<nn::NamedTensor>& out) const;
};

struct Interactor {
  ConvStack psi;
  ConvStack phi;
  ConvStack eta;
  ConvStack rho;
};

struct InteractorOutput {
  nn::Tensor even;  // x_even'
  nn::Tensor odd;   // x_odd'
};

/// Even/odd split of the last axis followed by the exponential
/// cross-modulation: x_even^s = x_even * exp(psi(x_odd)),
/// x_odd^s = x_odd * exp(phi(x_even)), x_odd' = x_even^s + exp(eta(x_odd^s)),
/// x_even' = x_odd^s - exp(rho(x_even^s)).
InteractorOutput interactor_forward(const nn::Tensor& x, const Interactor& node);

// Applies `node_fn` at every node of a depth-`levels` binary tree (breadth-first
// node numbering, root 0) and interleaves the children back into place.
using NodeFn = std::function<InteractorOutput(const nn::Tensor&, std::size_t node)>;
nn::Tensor sciblock_apply(const nn::Tensor& x, int levels, const NodeFn& node_fn);

struct DecompOutput {
  nn::Tensor smooth;       // x_s
  nn::Tensor fluctuation;  // x_f
};

class FcScinetModel final : public Model {
 public:
  FcScinetModel(FcScinetConfig config, std::uint64_t seed);

  nn::Tensor forward(const nn::Tensor& windows) const override;
  std::vector<nn::NamedTensor> named_parameters() const override;
  data::WindowStyle style() const override { return data::WindowStyle::kScinet; }
  std::size_t window_length() const override { return config_.window; }
  std::size_t target_length() const override;
  std::size_t output_centre() const override;
  std::string kind() const override { return "fc-scinet"; }
  nlohmann::json describe() const override;

  // Stages on [B, 1, p] tensors.
  nn::Tensor preprocess(const nn::Tensor& x) const;
  DecompOutput decomp_forward(const nn::Tensor& x_pre) const;
  nn::Tensor sciblock_forward(const nn::Tensor& x_f) const;

  const FcScinetConfig& config() const noexcept { return config_; }
  nn::LinearLayer& w_smooth() noexcept { return w_s_; }
  nn::LinearLayer& w_fluct() noexcept { return w_f_; }
  std::vector<Interactor>& nodes() noexcept { return nodes_; }
  nn::Conv1dLayer& output_layer() noexcept { return output_; }

 private:
  FcScinetConfig config_;
  nn::LinearLayer w_s_;
  nn::LinearLayer w_f_;
  std::vector<Interactor> nodes_;
  nn::Conv1dLayer output_;
};

}  // namespace ponlab::eq
