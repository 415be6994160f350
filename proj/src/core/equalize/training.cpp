#include "equalize/training.hpp"

#include <cmath>
#include <sstream>

#include "common/binary_io.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "numeric/ops.hpp"

namespace ponlab::eq {
namespace {

// Inputs [B, window] and targets [B, target_length] for a slice of refs.
std::pair<nn::Tensor, nn::Tensor> make_batch(const Model& model, const data::Dataset& d,
                                             std::span<const data::WindowRef> refs) {
  data::WindowConfig wc;
  wc.window_len = model.window_length();
  if (model.style() == data::WindowStyle::kCenteredDnn) {
    wc.dnn_pre = (model.window_length() - 1) / 2;
    wc.dnn_post = model.window_length() - 1 - wc.dnn_pre;
  }
  const std::size_t b = refs.size();
  const std::size_t len = model.window_length();
  std::vector<double> x(b * len);
  std::vector<double> y(b * model.target_length());
  if (model.target_length() == 1) {
    d.gather(refs, wc, model.style(), x.data(), y.data());
  } else {
    d.gather(refs, wc, model.style(), x.data(), nullptr);
    const std::size_t offset = wc.target_offset(model.style());
    for (std::size_t r = 0; r < b; ++r) {
      const auto& t = d.targets[refs[r].capture];
      for (std::size_t i = 0; i < len; ++i) y[r * len + i] = t[refs[r].target - offset + i];
    }
  }
  return {nn::Tensor({b, len}, std::move(x)), nn::Tensor({b, model.target_length()}, std::move(y))};
}

std::vector<std::vector<double>> snapshot(const Model& model) {
  std::vector<std::vector<double>> out;
  for (auto& p : model.named_parameters()) out.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
  return out;
}

void restore(Model& model, const std::vector<std::vector<double>>& values) {
  auto params = model.named_parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto dst = params[i].tensor.data_mut();
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

}  // namespace

void TrainConfig::validate() const {
  require(batch_size >= 1, ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  require(optimizer.learning_rate >= 0.0 && optimizer.l2 >= 0.0, ErrorCode::kInvalidArgument,
          "learning rate and l2 must be >= 0");
}

std::vector<double> predict(const Model& model, const data::Dataset& d, std::span<const data::WindowRef> refs,
                            std::size_t batch) {
  nn::NoGradGuard no_grad;
  std::vector<double> out;
  out.reserve(refs.size());
  const std::size_t stride = model.target_length();
  for (std::size_t start = 0; start < refs.size(); start += batch) {
    const auto chunk = refs.subspan(start, std::min(batch, refs.size() - start));
    const auto [x, y] = make_batch(model, d, chunk);
    const nn::Tensor pred = model.forward(x);
    const auto v = pred.data();
    for (std::size_t r = 0; r < chunk.size(); ++r) out.push_back(v[r * stride + model.output_centre()]);
  }
  return out;
}

double evaluate_mse(const Model& model, const data::Dataset& d, std::span<const data::WindowRef> refs) {
  nn::NoGradGuard no_grad;
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start < refs.size(); start += 512) {
    const auto chunk = refs.subspan(start, std::min<std::size_t>(512, refs.size() - start));
    const auto [x, y] = make_batch(model, d, chunk);
    const nn::Tensor pred = model.forward(x);
    const auto p = pred.data();
    const auto t = y.data();
    for (std::size_t i = 0; i < p.size(); ++i) total += (p[i] - t[i]) * (p[i] - t[i]);
    count += p.size();
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

TrainResult train_model(Model& model, const data::Dataset& d, const TrainConfig& cfg) {
  cfg.validate();
  require(!d.train.empty() && !d.validation.empty(), ErrorCode::kInvalidArgument,
          "dataset needs training and validation windows");
  nn::Optimizer opt(cfg.optimizer, model.parameters());
  Rng rng = make_rng(cfg.seed, "train-shuffle");
  std::vector<data::WindowRef> order = d.train;

  TrainResult result;
  result.initial_val_mse = evaluate_mse(model, d, d.validation);
  result.best_val_mse = result.initial_val_mse;
  auto best = snapshot(model);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
    const std::size_t visit = cfg.max_train_windows ? std::min(cfg.max_train_windows, order.size()) : order.size();
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < visit; start += cfg.batch_size) {
      const auto chunk = std::span(order).subspan(start, std::min(cfg.batch_size, visit - start));
      const auto [x, y] = make_batch(model, d, chunk);
      opt.zero_grad();
      const nn::Tensor loss = nn::mse_loss(model.forward(x), y);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "non-finite training loss at epoch " << epoch << ", batch " << batches << " (" << model.kind()
            << ", lr " << cfg.optimizer.learning_rate << ")";
        fail(ErrorCode::kNumerical, msg.str());
      }
      nn::backward(loss);
      opt.step();
      loss_sum += value;
      ++batches;
    }
    EpochRecord rec{epoch, batches ? loss_sum / static_cast<double>(batches) : 0.0, evaluate_mse(model, d, d.validation)};
    require(std::isfinite(rec.val_mse), ErrorCode::kNumerical,
            "non-finite validation loss at epoch " + std::to_string(epoch));
    result.history.push_back(rec);
    if (rec.val_mse < result.best_val_mse) {
      result.best_val_mse = rec.val_mse;
      result.best_epoch = epoch;
      best = snapshot(model);
    }
  }
  restore(model, best);
  return result;
}

std::string format_training_log(const TrainResult& r, const std::string& comment) {
  std::ostringstream os;
  if (!comment.empty()) os << "# " << comment << '\n';
  os << "epoch,train_mse,val_mse\n";
  os.precision(10);
  os << 0 << ",," << r.initial_val_mse << '\n';
  for (const auto& e : r.history) os << e.epoch << ',' << e.train_mse << ',' << e.val_mse << '\n';
  return os.str();
}

void write_training_log(const std::filesystem::path& path, const TrainResult& r, const std::string& comment) {
  io::write_text_file(path, format_training_log(r, comment));
}

}  // namespace ponlab::eq
