#include "equalize/model.hpp"

#include "common/error.hpp"
#include "common/rng.hpp"
#include "numeric/ops.hpp"

namespace ponlab::eq {

using nn::Tensor;

std::vector<Tensor> Model::parameters() const {
  std::vector<Tensor> out;
  for (auto& p : named_parameters()) out.push_back(p.tensor);
  return out;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (auto& p : named_parameters()) n += p.tensor.numel();
  return n;
}

Activation parse_activation(const std::string& name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "relu") return Activation::kRelu;
  fail(ErrorCode::kInvalidArgument, "unknown activation '" + name + "' (expected sigmoid|relu)");
}

std::string to_string(Activation a) { return a == Activation::kSigmoid ? "sigmoid" : "relu"; }

void DnnConfig::validate() const {
  require(!hidden.empty() && hidden.size() <= 16, ErrorCode::kInvalidArgument, "DNN needs 1..16 hidden layers");
  for (std::size_t h : hidden) require(h >= 1, ErrorCode::kInvalidArgument, "hidden layers must be non-empty");
}

DnnModel::DnnModel(DnnConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng = make_rng(seed, "dnn-init");
  std::size_t in = window_length();
  for (std::size_t h : config_.hidden) {
    layers_.push_back(nn::LinearLayer::create(in, h, rng));
    in = h;
  }
  layers_.push_back(nn::LinearLayer::create(in, 1, rng));
}

Tensor DnnModel::forward(const Tensor& windows) const {
  require(windows.shape().size() == 2 && windows.dim(1) == window_length(), ErrorCode::kShapeMismatch,
          "DNN expects [B, " + std::to_string(window_length()) + "] windows, got " +
              nn::shape_to_string(windows.shape()));
  Tensor h = windows;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i].forward(h);
    if (i + 1 < layers_.size()) h = config_.activation == Activation::kSigmoid ? nn::sigmoid(h) : nn::relu(h);
  }
  return h;
}

std::vector<nn::NamedTensor> DnnModel::named_parameters() const {
  std::vector<nn::NamedTensor> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i].collect("dense" + std::to_string(i), out);
  return out;
}

nlohmann::json DnnModel::describe() const {
  return {{"kind", kind()},
          {"hidden", config_.hidden},
          {"activation", to_string(config_.activation)},
          {"pre", config_.pre},
          {"post", config_.post},
          {"parameters", parameter_count()}};
}

OutputMode parse_output_mode(const std::string& name) {
  if (name == "many-to-one") return OutputMode::kManyToOne;
  if (name == "many-to-many") return OutputMode::kManyToMany;
  fail(ErrorCode::kInvalidArgument, "unknown output mode '" + name + "'");
}

std::string to_string(OutputMode m) { return m == OutputMode::kManyToOne ? "many-to-one" : "many-to-many"; }

void FcScinetConfig::validate() const {
  require(levels >= 1 && levels <= kMaxLevels, ErrorCode::kInvalidArgument, "levels must be in [1, 5]");
  require(window >= 2 && window % (std::size_t{1} << levels) == 0, ErrorCode::kInfeasible,
          "window " + std::to_string(window) + " is not divisible by 2^" + std::to_string(levels));
  require(hidden >= 1, ErrorCode::kInvalidArgument, "n_h must be >= 1");
  require(conv_kernel % 2 == 1 && fc_kernel % 2 == 1, ErrorCode::kInvalidArgument, "kernels must be odd");
  require(fc_kernel <= window, ErrorCode::kInvalidArgument, "fc kernel longer than the window");
}

Tensor ConvStack::forward(const Tensor& x) const {
  Tensor h = second.forward(nn::leaky_relu(first.forward(x), slope));
  return bounded ? nn::tanh(h) : h;
}

void ConvStack::collect(const std::string& prefix, std::vector<nn::NamedTensor>& out) const {
  first.collect(prefix + ".a", out);
  second.collect(prefix + ".b", out);
}

InteractorOutput interactor_forward(const Tensor& x, const Interactor& node) {
  const std::size_t n = x.shape().back();
  require(n % 2 == 0 && n >= 2, ErrorCode::kShapeMismatch, "interactor needs an even length, got " + std::to_string(n));
  const Tensor even = nn::take_strided(x, 0, 2);
  const Tensor odd = nn::take_strided(x, 1, 2);
  const Tensor even_s = nn::mul(even, nn::exp_clamped(node.psi.forward(odd)));
  const Tensor odd_s = nn::mul(odd, nn::exp_clamped(node.phi.forward(even)));
  InteractorOutput out;
  out.odd = nn::add(even_s, nn::exp_clamped(node.eta.forward(odd_s)));
  out.even = nn::sub(odd_s, nn::exp_clamped(node.rho.forward(even_s)));
  return out;
}

namespace {

Tensor tree(const Tensor& x, int depth, std::size_t node, const NodeFn& fn) {
  if (depth == 0) return x;
  InteractorOutput o = fn(x, node);
  return nn::interleave(tree(o.even, depth - 1, 2 * node + 1, fn), tree(o.odd, depth - 1, 2 * node + 2, fn));
}

ConvStack make_stack(const FcScinetConfig& c, Rng& rng) {
  ConvStack s;
  s.first = nn::Conv1dLayer::same(1, c.hidden, c.conv_kernel, nn::PadMode::kReplicate, rng);
  s.second = nn::Conv1dLayer::same(c.hidden, 1, c.conv_kernel, nn::PadMode::kReplicate, rng);
  s.slope = c.leaky_slope;
  s.bounded = c.stack_tanh;
  return s;
}

}  // namespace

Tensor sciblock_apply(const Tensor& x, int levels, const NodeFn& node_fn) {
  require(levels >= 0 && x.shape().back() % (std::size_t{1} << levels) == 0, ErrorCode::kInfeasible,
          "sequence length not divisible by 2^L");
  return tree(x, levels, 0, node_fn);
}

FcScinetModel::FcScinetModel(FcScinetConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng = make_rng(seed, "fc-scinet-init");
  const std::size_t p = config_.window;
  w_s_ = nn::LinearLayer::create(p, p, rng, false);
  w_f_ = nn::LinearLayer::create(p, p, rng, false);
  if (config_.decomp_identity_init) {
    for (nn::LinearLayer* w : {&w_s_, &w_f_}) {
      nn::fill_zero(w->weight);
      for (std::size_t i = 0; i < p; ++i) w->weight.data_mut()[i * p + i] = 1.0;
    }
  }
  const std::size_t count = (std::size_t{1} << config_.levels) - 1;
  for (std::size_t i = 0; i < count; ++i)
    nodes_.push_back({make_stack(config_, rng), make_stack(config_, rng), make_stack(config_, rng),
                      make_stack(config_, rng)});
  if (config_.output_mode == OutputMode::kManyToOne)
    output_ = nn::Conv1dLayer::create(1, 1, p, 0, nn::PadMode::kZero, rng);
  else
    output_ = nn::Conv1dLayer::same(1, 1, 3, nn::PadMode::kReplicate, rng);
}

std::size_t FcScinetModel::target_length() const {
  return config_.output_mode == OutputMode::kManyToOne ? 1 : config_.window;
}

std::size_t FcScinetModel::output_centre() const {
  return config_.output_mode == OutputMode::kManyToOne ? 0 : config_.window / 2;
}

Tensor FcScinetModel::preprocess(const Tensor& x) const {
  return data::frequency_calibrate(x, config_.fc_kernel, config_.fc_mode);
}

DecompOutput FcScinetModel::decomp_forward(const Tensor& x_pre) const {
  const nn::Shape shape = x_pre.shape();
  const std::size_t p = config_.window;
  require(shape.back() == p, ErrorCode::kShapeMismatch, "decomp: window length mismatch");
  const std::size_t rows = x_pre.numel() / p;
  const Tensor smooth = nn::avg_pool_smooth(x_pre, config_.fc_kernel);
  const Tensor fluct = nn::sub(x_pre, smooth);
  const Tensor mixed = nn::add(w_s_.forward(nn::reshape(smooth, {rows, p})), w_f_.forward(nn::reshape(fluct, {rows, p})));
  const Tensor x_hat = nn::reshape(mixed, shape);
  DecompOutput out;
  out.smooth = nn::avg_pool_smooth(x_hat, config_.fc_kernel);
  out.fluctuation = nn::sub(x_hat, out.smooth);
  return out;
}

Tensor FcScinetModel::sciblock_forward(const Tensor& x_f) const {
  return sciblock_apply(x_f, config_.levels,
                        [this](const Tensor& x, std::size_t node) { return interactor_forward(x, nodes_[node]); });
}

Tensor FcScinetModel::forward(const Tensor& windows) const {
  require(windows.shape().size() == 2 && windows.dim(1) == config_.window, ErrorCode::kShapeMismatch,
          "FC-SCINet expects [B, " + std::to_string(config_.window) + "] windows, got " +
              nn::shape_to_string(windows.shape()));
  const std::size_t b = windows.dim(0);
  const Tensor x = nn::reshape(windows, {b, 1, config_.window});
  const DecompOutput d = decomp_forward(preprocess(x));
  const Tensor z = nn::add(sciblock_forward(d.fluctuation), d.smooth);
  return nn::reshape(output_.forward(z), {b, target_length()});
}

std::vector<nn::NamedTensor> FcScinetModel::named_parameters() const {
  std::vector<nn::NamedTensor> out;
  w_s_.collect("decomp.w_s", out);
  w_f_.collect("decomp.w_f", out);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const std::string n = "node" + std::to_string(i);
    nodes_[i].psi.collect(n + ".psi", out);
    nodes_[i].phi.collect(n + ".phi", out);
    nodes_[i].eta.collect(n + ".eta", out);
    nodes_[i].rho.collect(n + ".rho", out);
  }
  output_.collect("output", out);
  return out;
}

nlohmann::json FcScinetModel::describe() const {
  return {{"kind", kind()},
          {"window", config_.window},
          {"levels", config_.levels},
          {"hidden", config_.hidden},
          {"conv_kernel", config_.conv_kernel},
          {"fc_kernel", config_.fc_kernel},
          {"fc_mode", data::to_string(config_.fc_mode)},
          {"output_mode", to_string(config_.output_mode)},
          {"stack_tanh", config_.stack_tanh},
          {"parameters", parameter_count()}};
}

}  // namespace ponlab::eq
