#include "numeric/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "common/error.hpp"

namespace ponlab::nn {

std::size_t shape_numel(const Shape& shape) noexcept {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  require(shape_numel(shape) == values.size(), ErrorCode::kShapeMismatch,
          "tensor shape " + shape_to_string(shape) + " does not match " +
              std::to_string(values.size()) + " values");
  node_ = std::make_shared<detail::Node>();
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return Tensor({1}, {value}, requires_grad); }

const Shape& Tensor::shape() const {
  require(defined(), ErrorCode::kInvalidArgument, "undefined tensor");
  return node_->shape;
}

std::size_t Tensor::dim(std::size_t axis) const {
  const Shape& s = shape();
  require(axis < s.size(), ErrorCode::kShapeMismatch, "axis out of range");
  return s[axis];
}

std::size_t Tensor::numel() const { return defined() ? node_->value.size() : 0; }

std::span<const double> Tensor::data() const {
  require(defined(), ErrorCode::kInvalidArgument, "undefined tensor");
  return node_->value;
}

std::span<double> Tensor::data_mut() {
  require(defined(), ErrorCode::kInvalidArgument, "undefined tensor");
  return node_->value;
}

double Tensor::item() const {
  require(numel() == 1, ErrorCode::kShapeMismatch, "item() on non-scalar " + shape_to_string(shape()));
  return node_->value[0];
}

bool Tensor::requires_grad() const { return defined() && node_->requires_grad; }

void Tensor::set_requires_grad(bool flag) {
  require(defined(), ErrorCode::kInvalidArgument, "undefined tensor");
  node_->requires_grad = flag;
}

bool Tensor::has_grad() const { return defined() && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  require(defined(), ErrorCode::kInvalidArgument, "undefined tensor");
  return node_->grad;
}

std::span<double> Tensor::grad_mut() {
  require(defined(), ErrorCode::kInvalidArgument, "undefined tensor");
  if (node_->grad.size() != node_->value.size()) node_->grad.assign(node_->value.size(), 0.0);
  return node_->grad;
}

void Tensor::zero_grad() {
  if (!defined()) return;
  node_->grad.assign(node_->value.size(), 0.0);
}

Tensor Tensor::clone() const {
  return Tensor(shape(), node_->value, false);
}

namespace {
thread_local bool t_grad_enabled = true;
}  // namespace

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }
bool grad_enabled() noexcept { return t_grad_enabled; }

void backward(const Tensor& loss) {
  require(loss.defined(), ErrorCode::kInvalidArgument, "backward on undefined tensor");
  require(loss.numel() == 1, ErrorCode::kShapeMismatch,
          "backward requires a scalar loss, got " + shape_to_string(loss.shape()));
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological tape (parents before children).
  std::vector<detail::Node*> tape;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent && parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      tape.push_back(node);
      stack.pop_back();
    }
  }

  for (detail::Node* node : tape) {
    if (node->backward) {
      node->grad.assign(node->value.size(), 0.0);
    } else if (node->grad.size() != node->value.size()) {
      node->grad.assign(node->value.size(), 0.0);
    }
  }
  loss.node()->grad[0] += 1.0;
  for (auto it = tape.rbegin(); it != tape.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

}  // namespace ponlab::nn
