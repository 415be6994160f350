#include "numeric/ops.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace ponlab::nn {
namespace {

using detail::Node;
using BackwardFn = std::function<void(Node&)>;

Tensor make_result(Shape shape, std::vector<double> value, std::initializer_list<const Tensor*> inputs,
                   BackwardFn backward_fn) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool any = false;
  for (const Tensor* t : inputs) any = any || (t->defined() && t->requires_grad());
  if (any && grad_enabled()) {
    node->requires_grad = true;
    for (const Tensor* t : inputs) node->parents.push_back(t->defined() ? t->node() : nullptr);
    node->backward = std::move(backward_fn);
  }
  return Tensor(std::move(node));
}

bool wants_grad(const std::shared_ptr<Node>& n) { return n && n->requires_grad; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), ErrorCode::kShapeMismatch,
          std::string(op) + ": shape " + shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
}

template <typename Forward, typename Derivative>
Tensor unary(const Tensor& x, Forward f, Derivative df) {
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return make_result(x.shape(), std::move(out), {&x}, [df](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * df(p.value[i], self.value[i]);
  });
}

// Splits a shape into (leading rows, last axis length).
std::pair<std::size_t, std::size_t> rows_and_len(const Shape& s) {
  require(!s.empty(), ErrorCode::kShapeMismatch, "rank-0 tensor");
  const std::size_t len = s.back();
  return {len == 0 ? 0 : shape_numel(s) / len, len};
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto x = a.data();
  const auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return make_result(a.shape(), std::move(out), {&a, &b}, [](Node& self) {
    for (int k = 0; k < 2; ++k) {
      if (!wants_grad(self.parents[k])) continue;
      auto& g = self.parents[k]->grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  const auto x = a.data();
  const auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return make_result(a.shape(), std::move(out), {&a, &b}, [](Node& self) {
    if (wants_grad(self.parents[0])) {
      auto& g = self.parents[0]->grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants_grad(self.parents[1])) {
      auto& g = self.parents[1]->grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const auto x = a.data();
  const auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return make_result(a.shape(), std::move(out), {&a, &b}, [](Node& self) {
    Node* pa = self.parents[0].get();
    Node* pb = self.parents[1].get();
    if (wants_grad(self.parents[0]))
      for (std::size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i] * pb->value[i];
    if (wants_grad(self.parents[1]))
      for (std::size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] += self.grad[i] * pa->value[i];
  });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double offset) {
  return unary(a, [offset](double v) { return v + offset; }, [](double, double) { return 1.0; });
}

Tensor exp_clamped(const Tensor& x, double lo, double hi) {
  return unary(
      x, [lo, hi](double v) { return std::exp(std::clamp(v, lo, hi)); },
      [lo, hi](double in, double out) { return (in < lo || in > hi) ? 0.0 : out; });
}

Tensor relu(const Tensor& x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary(
      x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double in, double) { return in > 0.0 ? 1.0 : slope; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double out) { return out * (1.0 - out); });
}

Tensor tanh(const Tensor& x) {
  return unary(x, [](double v) { return std::tanh(v); }, [](double, double out) { return 1.0 - out * out; });
}

Tensor reshape(const Tensor& x, Shape shape) {
  require(shape_numel(shape) == x.numel(), ErrorCode::kShapeMismatch,
          "reshape " + shape_to_string(x.shape()) + " -> " + shape_to_string(shape));
  std::vector<double> out(x.data().begin(), x.data().end());
  return make_result(std::move(shape), std::move(out), {&x}, [](Node& self) {
    auto& g = self.parents[0]->grad;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t pad, PadMode mode) {
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  require(xs.size() == 2 || xs.size() == 3, ErrorCode::kShapeMismatch,
          "conv1d: input must be [C,N] or [B,C,N], got " + shape_to_string(xs));
  require(ws.size() == 3, ErrorCode::kShapeMismatch, "conv1d: weight must be [C_out,C_in,K]");
  const bool batched = xs.size() == 3;
  const std::size_t batch = batched ? xs[0] : 1;
  const std::size_t cin = xs[batched ? 1 : 0];
  const std::size_t n = xs.back();
  const std::size_t cout = ws[0];
  const std::size_t k = ws[2];
  require(ws[1] == cin, ErrorCode::kShapeMismatch,
          "conv1d: input has " + std::to_string(cin) + " channels, layer expects " + std::to_string(ws[1]));
  require(!bias.defined() || bias.shape() == Shape{cout}, ErrorCode::kShapeMismatch, "conv1d: bias shape");
  require(n + 2 * pad >= k, ErrorCode::kShapeMismatch, "conv1d: input shorter than kernel");
  const std::size_t npad = n + 2 * pad;
  const std::size_t nout = npad - k + 1;

  auto source_index = [n, pad, mode](std::size_t j) -> std::ptrdiff_t {
    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(pad);
    if (src >= 0 && src < static_cast<std::ptrdiff_t>(n)) return src;
    if (mode == PadMode::kZero) return -1;
    return src < 0 ? 0 : static_cast<std::ptrdiff_t>(n) - 1;
  };
  auto padded = [=](std::span<const double> xv) {
    std::vector<double> xp(batch * cin * npad, 0.0);
    for (std::size_t r = 0; r < batch * cin; ++r)
      for (std::size_t j = 0; j < npad; ++j) {
        const std::ptrdiff_t s = source_index(j);
        if (s >= 0) xp[r * npad + j] = xv[r * n + static_cast<std::size_t>(s)];
      }
    return xp;
  };

  const std::vector<double> xp = padded(x.data());
  const auto w = weight.data();
  std::vector<double> out(batch * cout * nout, 0.0);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t co = 0; co < cout; ++co) {
      double* o = out.data() + (b * cout + co) * nout;
      const double b0 = bias.defined() ? bias.data()[co] : 0.0;
      std::fill(o, o + nout, b0);
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* in = xp.data() + (b * cin + ci) * npad;
        const double* wk = w.data() + (co * cin + ci) * k;
        for (std::size_t t = 0; t < k; ++t) {
          const double wt = wk[t];
          const double* src = in + t;
          for (std::size_t j = 0; j < nout; ++j) o[j] += wt * src[j];
        }
      }
    }

  Shape out_shape = batched ? Shape{batch, cout, nout} : Shape{cout, nout};
  return make_result(std::move(out_shape), std::move(out), {&x, &weight, &bias},
                     [=](Node& self) {
                       Node& xn = *self.parents[0];
                       Node& wn = *self.parents[1];
                       const std::vector<double> xpad = padded(xn.value);
                       const double* g = self.grad.data();
                       if (wants_grad(self.parents[2])) {
                         auto& gb = self.parents[2]->grad;
                         for (std::size_t b = 0; b < batch; ++b)
                           for (std::size_t co = 0; co < cout; ++co) {
                             const double* go = g + (b * cout + co) * nout;
                             double acc = 0.0;
                             for (std::size_t j = 0; j < nout; ++j) acc += go[j];
                             gb[co] += acc;
                           }
                       }
                       if (wants_grad(self.parents[1])) {
                         for (std::size_t b = 0; b < batch; ++b)
                           for (std::size_t co = 0; co < cout; ++co) {
                             const double* go = g + (b * cout + co) * nout;
                             for (std::size_t ci = 0; ci < cin; ++ci) {
                               const double* in = xpad.data() + (b * cin + ci) * npad;
                               double* gw = wn.grad.data() + (co * cin + ci) * k;
                               for (std::size_t t = 0; t < k; ++t) {
                                 double acc = 0.0;
                                 for (std::size_t j = 0; j < nout; ++j) acc += go[j] * in[t + j];
                                 gw[t] += acc;
                               }
                             }
                           }
                       }
                       if (wants_grad(self.parents[0])) {
                         std::vector<double> gpad(batch * cin * npad, 0.0);
                         for (std::size_t b = 0; b < batch; ++b)
                           for (std::size_t co = 0; co < cout; ++co) {
                             const double* go = g + (b * cout + co) * nout;
                             for (std::size_t ci = 0; ci < cin; ++ci) {
                               double* gp = gpad.data() + (b * cin + ci) * npad;
                               const double* wk = wn.value.data() + (co * cin + ci) * k;
                               for (std::size_t t = 0; t < k; ++t) {
                                 const double wt = wk[t];
                                 for (std::size_t j = 0; j < nout; ++j) gp[t + j] += wt * go[j];
                               }
                             }
                           }
                         for (std::size_t r = 0; r < batch * cin; ++r)
                           for (std::size_t j = 0; j < npad; ++j) {
                             const std::ptrdiff_t s = source_index(j);
                             if (s >= 0) xn.grad[r * n + static_cast<std::size_t>(s)] += gpad[r * npad + j];
                           }
                       }
                     });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  require(xs.size() == 1 || xs.size() == 2, ErrorCode::kShapeMismatch,
          "linear: input must be [in] or [B,in], got " + shape_to_string(xs));
  require(ws.size() == 2, ErrorCode::kShapeMismatch, "linear: weight must be [out,in]");
  const std::size_t in_dim = xs.back();
  const std::size_t batch = xs.size() == 2 ? xs[0] : 1;
  const std::size_t out_dim = ws[0];
  require(ws[1] == in_dim, ErrorCode::kShapeMismatch,
          "linear: input dim " + std::to_string(in_dim) + " vs weight " + shape_to_string(ws));
  require(!bias.defined() || bias.shape() == Shape{out_dim}, ErrorCode::kShapeMismatch, "linear: bias shape");

  const auto xv = x.data();
  const auto w = weight.data();
  std::vector<double> out(batch * out_dim);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* xr = xv.data() + b * in_dim;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* wr = w.data() + o * in_dim;
      double acc = bias.defined() ? bias.data()[o] : 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) acc += wr[i] * xr[i];
      out[b * out_dim + o] = acc;
    }
  }
  Shape out_shape = xs.size() == 2 ? Shape{batch, out_dim} : Shape{out_dim};
  return make_result(std::move(out_shape), std::move(out), {&x, &weight, &bias}, [=](Node& self) {
    Node& xn = *self.parents[0];
    Node& wn = *self.parents[1];
    const double* g = self.grad.data();
    if (wants_grad(self.parents[2])) {
      auto& gb = self.parents[2]->grad;
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t o = 0; o < out_dim; ++o) gb[o] += g[b * out_dim + o];
    }
    if (wants_grad(self.parents[1])) {
      for (std::size_t b = 0; b < batch; ++b) {
        const double* xr = xn.value.data() + b * in_dim;
        for (std::size_t o = 0; o < out_dim; ++o) {
          const double go = g[b * out_dim + o];
          double* gw = wn.grad.data() + o * in_dim;
          for (std::size_t i = 0; i < in_dim; ++i) gw[i] += go * xr[i];
        }
      }
    }
    if (wants_grad(self.parents[0])) {
      for (std::size_t b = 0; b < batch; ++b) {
        double* gx = xn.grad.data() + b * in_dim;
        for (std::size_t o = 0; o < out_dim; ++o) {
          const double go = g[b * out_dim + o];
          const double* wr = wn.value.data() + o * in_dim;
          for (std::size_t i = 0; i < in_dim; ++i) gx[i] += go * wr[i];
        }
      }
    }
  });
}

Tensor avg_pool_smooth(const Tensor& x, std::size_t kernel) {
  const auto [rows, len] = rows_and_len(x.shape());
  require(kernel % 2 == 1, ErrorCode::kInvalidArgument,
          "avg_pool_smooth: kernel must be odd, got " + std::to_string(kernel));
  require(kernel <= len, ErrorCode::kInvalidArgument, "avg_pool_smooth: kernel longer than sequence");
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kernel / 2);
  const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(len) - 1;
  const double inv = 1.0 / static_cast<double>(kernel);
  const auto xv = x.data();
  std::vector<double> out(xv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * len;
    for (std::ptrdiff_t i = 0; i <= last; ++i) {
      double acc = 0.0;
      for (std::ptrdiff_t j = -half; j <= half; ++j) acc += xr[std::clamp(i + j, std::ptrdiff_t{0}, last)];
      out[r * len + static_cast<std::size_t>(i)] = acc * inv;
    }
  }
  return make_result(x.shape(), std::move(out), {&x}, [=](Node& self) {
    auto& gx = self.parents[0]->grad;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::ptrdiff_t i = 0; i <= last; ++i) {
        const double g = self.grad[r * len + static_cast<std::size_t>(i)] * inv;
        for (std::ptrdiff_t j = -half; j <= half; ++j)
          gx[r * len + static_cast<std::size_t>(std::clamp(i + j, std::ptrdiff_t{0}, last))] += g;
      }
  });
}

Tensor take_strided(const Tensor& x, std::size_t start, std::size_t step) {
  const auto [rows, len] = rows_and_len(x.shape());
  require(step > 0 && start < len, ErrorCode::kInvalidArgument, "take_strided: bad start/step");
  const std::size_t out_len = (len - start + step - 1) / step;
  const auto xv = x.data();
  std::vector<double> out(rows * out_len);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < out_len; ++i) out[r * out_len + i] = xv[r * len + start + i * step];
  Shape shape = x.shape();
  shape.back() = out_len;
  return make_result(std::move(shape), std::move(out), {&x}, [=](Node& self) {
    auto& gx = self.parents[0]->grad;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t i = 0; i < out_len; ++i) gx[r * len + start + i * step] += self.grad[r * out_len + i];
  });
}

Tensor interleave(const Tensor& even, const Tensor& odd) {
  require_same_shape(even, odd, "interleave");
  const auto [rows, half] = rows_and_len(even.shape());
  const auto ev = even.data();
  const auto od = odd.data();
  std::vector<double> out(2 * ev.size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < half; ++i) {
      out[r * 2 * half + 2 * i] = ev[r * half + i];
      out[r * 2 * half + 2 * i + 1] = od[r * half + i];
    }
  Shape shape = even.shape();
  shape.back() = 2 * half;
  return make_result(std::move(shape), std::move(out), {&even, &odd}, [=](Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (!wants_grad(self.parents[k])) continue;
      auto& g = self.parents[k]->grad;
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < half; ++i) g[r * half + i] += self.grad[r * 2 * half + 2 * i + k];
    }
  });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return make_result({1}, {acc}, {&x}, [](Node& self) {
    auto& g = self.parents[0]->grad;
    for (double& v : g) v += self.grad[0];
  });
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  require(pred.numel() == target.numel() && pred.numel() > 0, ErrorCode::kShapeMismatch,
          "mse_loss: pred " + shape_to_string(pred.shape()) + " vs target " + shape_to_string(target.shape()));
  const auto p = pred.data();
  const auto t = target.data();
  const double inv_n = 1.0 / static_cast<double>(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - t[i];
    acc += d * d;
  }
  return make_result({1}, {acc * inv_n}, {&pred, &target}, [inv_n](Node& self) {
    Node& pn = *self.parents[0];
    Node& tn = *self.parents[1];
    const double g = 2.0 * inv_n * self.grad[0];
    for (std::size_t i = 0; i < pn.value.size(); ++i) {
      const double d = pn.value[i] - tn.value[i];
      if (pn.requires_grad) pn.grad[i] += g * d;
      if (tn.requires_grad) tn.grad[i] -= g * d;
    }
  });
}

}  // namespace ponlab::nn
