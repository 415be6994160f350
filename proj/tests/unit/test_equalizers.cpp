#include <doctest.h>

#include <cmath>
#include <random>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "equalize/ffe.hpp"
#include "equalize/model.hpp"
#include "equalize/training.hpp"
#include "link/transmitter.hpp"
#include "numeric/ops.hpp"
#include "support/gradcheck.hpp"

using namespace ponlab;
using namespace ponlab::eq;
using nn::Tensor;

namespace {

constexpr int kTrials = 20;

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

Tensor random_tensor(nn::Shape shape, Rng& rng, bool requires_grad = false, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape), requires_grad);
  std::uniform_real_distribution<double> u(lo, hi);
  for (double& v : t.data_mut()) v = u(rng);
  return t;
}

void zero_all(const std::vector<nn::NamedTensor>& params) {
  for (auto p : params) nn::fill_zero(p.tensor);
}

void randomize(const std::vector<nn::NamedTensor>& params, Rng& rng, double bound = 0.5) {
  for (auto p : params) nn::fill_uniform(p.tensor, bound, rng);
}

std::vector<double> pam4_normalized(std::size_t n, std::uint64_t seed) {
  std::vector<double> out;
  for (auto s : link::generate_rns_pam4(n, seed)) out.push_back(link::symbol_amplitude(s) / std::sqrt(5.0));
  return out;
}

std::vector<double> convolve_same(const std::vector<double>& x, const std::vector<double>& h) {
  const auto half = static_cast<std::ptrdiff_t>(h.size() / 2);
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(x.size()); ++i)
    for (std::ptrdiff_t j = -half; j <= half; ++j) {
      const std::ptrdiff_t k = i - j;
      if (k >= 0 && k < static_cast<std::ptrdiff_t>(x.size()))
        y[static_cast<std::size_t>(i)] += h[static_cast<std::size_t>(j + half)] * x[static_cast<std::size_t>(k)];
    }
  return y;
}

// Zero-conv interactor tree evaluated with plain index arithmetic.
std::vector<double> zero_tree_oracle(const std::vector<double>& x, int depth) {
  if (depth == 0) return x;
  std::vector<double> even, odd;
  for (std::size_t i = 0; i < x.size(); i += 2) {
    even.push_back(x[i + 1] - 1.0);
    odd.push_back(x[i] + 1.0);
  }
  even = zero_tree_oracle(even, depth - 1);
  odd = zero_tree_oracle(odd, depth - 1);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < even.size(); ++i) {
    out[2 * i] = even[i];
    out[2 * i + 1] = odd[i];
  }
  return out;
}

data::Dataset toy_dataset(std::size_t n, std::uint64_t seed) {
  data::Dataset d;
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = g(rng);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.5 * x[i];
  d.inputs = {x};
  d.targets = {y};
  d.symbols = {std::vector<data::Symbol>(n, 0)};
  d.margin_before = 32;
  d.margin_after = 31;
  const std::size_t split = n * 4 / 5;
  d.split = {std::vector<data::SplitLabel>(n, data::SplitLabel::kTrain)};
  for (std::size_t i = split; i < n; ++i) d.split[0][i] = data::SplitLabel::kValidation;
  for (std::size_t t = 32; t + 31 < split; ++t) d.train.push_back({0, static_cast<std::uint32_t>(t)});
  for (std::size_t t = split + 32; t + 31 < n; ++t) d.validation.push_back({0, static_cast<std::uint32_t>(t)});
  d.test = d.validation;
  return d;
}

FcScinetConfig small_scinet(std::size_t p, int levels) {
  FcScinetConfig c;
  c.window = p;
  c.levels = levels;
  c.hidden = 2;
  return c;
}

}  // namespace

TEST_CASE("FFE on an ISI-free channel keeps the centre spike") {
  const auto x = pam4_normalized(20000, 1);
  FfeConfig cfg;
  const FfeResult r = ffe_equalize(x, x, cfg, {0.0, std::sqrt(5.0)});
  for (std::size_t t = 0; t < cfg.n_taps; ++t)
    CHECK(r.taps[t] == doctest::Approx(t == cfg.n_taps / 2 ? 1.0 : 0.0).epsilon(1e-3).scale(1.0));
  double mse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mse += (r.output[i] - x[i]) * (r.output[i] - x[i]);
  CHECK(mse / x.size() < 1e-3);
}

TEST_CASE("FFE inverts a known 3-tap channel") {
  const auto x = pam4_normalized(60000, 2);
  const std::vector<double> h{0.1, 1.0, 0.1};
  const auto rx = convolve_same(x, h);
  FfeConfig cfg;
  cfg.n_taps = 21;
  cfg.mu = 2e-3;
  cfg.training_symbols = 60000;
  const FfeResult r = ffe_equalize(rx, x, cfg, {0.0, std::sqrt(5.0)});
  // Combined response of channel and final taps.
  std::vector<double> combined(r.taps.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < r.taps.size(); ++i)
    for (std::size_t j = 0; j < h.size(); ++j) combined[i + j] += r.taps[i] * h[j];
  std::size_t peak = 0;
  for (std::size_t i = 0; i < combined.size(); ++i)
    if (std::abs(combined[i]) > std::abs(combined[peak])) peak = i;
  double isi = 0.0;
  for (std::size_t i = 0; i < combined.size(); ++i)
    if (i != peak) isi += combined[i] * combined[i];
  CHECK(10.0 * std::log10(isi / (combined[peak] * combined[peak])) < -20.0);
  // The zero-forcing inverse of [0.1, 1, 0.1] has taps with alternating sign.
  CHECK(r.taps[10] > 1.0);
  CHECK(r.taps[9] < 0.0);
  CHECK(r.taps[11] < 0.0);
}

TEST_CASE("FFE with zero step size is a fixed filter") {
  const auto x = pam4_normalized(500, 3);
  FfeConfig cfg;
  cfg.mu = 0.0;
  const FfeResult r = ffe_equalize(x, x, cfg);
  CHECK(r.output == x);
  for (std::size_t t = 0; t < cfg.n_taps; ++t) CHECK(r.taps[t] == (t == cfg.n_taps / 2 ? 1.0 : 0.0));
}

TEST_CASE("FFE divergence and configuration errors") {
  const auto target = pam4_normalized(2000, 4);
  auto x = target;
  for (double& v : x) v *= 50.0;
  FfeConfig cfg;
  cfg.mu = 10.0;
  try {
    ffe_equalize(x, target, cfg);
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDiverged);
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
  cfg.n_taps = 4;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("decision-directed slicer maps to the nearest level with low ties") {
  const data::NormStats s{0.0, 1.0};
  CHECK(slice_normalized(0.0, s) == -1.0);
  CHECK(slice_normalized(2.0, s) == 1.0);
  CHECK(slice_normalized(2.01, s) == 3.0);
  CHECK(slice_normalized(-5.0, s) == -3.0);
}

TEST_CASE("DNN forward examples") {
  DnnModel zero({}, 1);
  zero_all(zero.named_parameters());
  zero.layers().back().bias.data_mut()[0] = 0.75;
  Rng rng(3);
  const Tensor in = random_tensor({4, 33}, rng);
  for (double v : values(zero.forward(in))) CHECK(v == 0.75);

  DnnConfig tiny;
  tiny.hidden = {1};
  tiny.activation = Activation::kRelu;
  tiny.pre = tiny.post = 1;
  DnnModel m(tiny, 2);
  auto& l = m.layers();
  l[0].weight.data_mut()[0] = 1.0;
  l[0].weight.data_mut()[1] = -2.0;
  l[0].weight.data_mut()[2] = 0.5;
  l[0].bias.data_mut()[0] = 0.25;
  l[1].weight.data_mut()[0] = 3.0;
  l[1].bias.data_mut()[0] = -1.0;
  const Tensor x({2, 3}, {1.0, 0.0, 2.0, 0.0, 1.0, 0.0});
  // relu(1 + 1 + 0.25) * 3 - 1 = 5.75 ; relu(-2 + 0.25) * 3 - 1 = -1
  const auto y = values(m.forward(x));
  CHECK(y[0] == doctest::Approx(5.75));
  CHECK(y[1] == doctest::Approx(-1.0));
  CHECK_THROWS_AS(m.forward(Tensor::zeros({2, 4})), Error);
  CHECK(parse_activation("relu") == Activation::kRelu);
}

TEST_CASE("gradient check: DNN") {
  Rng rng(31);
  for (int trial = 0; trial < kTrials; ++trial) {
    DnnConfig c;
    c.hidden = {3 + static_cast<std::size_t>(trial % 4), 4};
    c.pre = c.post = 2;
    c.activation = trial % 2 ? Activation::kSigmoid : Activation::kRelu;
    DnnModel m(c, 100 + trial);
    const Tensor x = random_tensor({3, 5}, rng);
    const Tensor target = random_tensor({3, 1}, rng);
    auto r = testing::grad_check([&] { return nn::mse_loss(m.forward(x), target); }, m.parameters());
    CHECK_MESSAGE(r.max_rel_error < 1e-4, r.worst);
  }
}

TEST_CASE("decomp examples") {
  FcScinetModel m(small_scinet(8, 1), 1);
  const Tensor c = Tensor::full({1, 1, 8}, 1.5);
  DecompOutput d = m.decomp_forward(c);
  for (double v : values(d.smooth)) CHECK(v == doctest::Approx(1.5));
  for (double v : values(d.fluctuation)) CHECK(std::abs(v) < 1e-12);

  Rng rng(4);
  const Tensor x = random_tensor({2, 1, 8}, rng);
  d = m.decomp_forward(x);
  const auto s = values(d.smooth);
  const auto f = values(d.fluctuation);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] + f[i] == doctest::Approx(x.data()[i]));

  // W_f = 0 suppresses the fluctuation path: x_hat = W_s x_s.
  nn::fill_zero(m.w_fluct().weight);
  d = m.decomp_forward(x);
  const auto x_s = values(nn::avg_pool_smooth(x, 3));
  const auto hat = values(nn::add(d.smooth, d.fluctuation));
  for (std::size_t i = 0; i < hat.size(); ++i) CHECK(hat[i] == doctest::Approx(x_s[i]));
}

TEST_CASE("interactor with zero convolutions") {
  FcScinetModel m(small_scinet(8, 1), 2);
  zero_all(m.named_parameters());
  const Tensor x({1, 1, 8}, {1, 2, 3, 4, 5, 6, 7, 8});
  const InteractorOutput o = interactor_forward(x, m.nodes()[0]);
  CHECK(values(o.odd) == std::vector<double>{2, 4, 6, 8});
  CHECK(values(o.even) == std::vector<double>{1, 3, 5, 7});
  const InteractorOutput z = interactor_forward(Tensor::zeros({1, 1, 6}), m.nodes()[0]);
  CHECK(values(z.odd) == std::vector<double>(3, 1.0));
  CHECK(values(z.even) == std::vector<double>(3, -1.0));
  CHECK(o.even.shape().back() == 4);
  CHECK_THROWS_AS(interactor_forward(Tensor::zeros({1, 1, 5}), m.nodes()[0]), Error);
}

TEST_CASE("split and realign is the identity permutation") {
  for (std::size_t p : {4u, 8u, 16u, 32u, 64u}) {
    for (int levels = 0; (std::size_t{1} << levels) <= p; ++levels) {
      std::vector<double> v(p);
      for (std::size_t i = 0; i < p; ++i) v[i] = static_cast<double>(i);
      const Tensor x({2, 1, p}, [&] {
        std::vector<double> two = v;
        two.insert(two.end(), v.begin(), v.end());
        return two;
      }());
      std::size_t leaves = 0;
      std::size_t leaf_total = 0;
      const Tensor y = sciblock_apply(x, levels, [&](const Tensor& t, std::size_t) {
        InteractorOutput o{nn::take_strided(t, 0, 2), nn::take_strided(t, 1, 2)};
        CHECK(o.even.shape().back() * 2 == t.shape().back());
        return o;
      });
      (void)leaves;
      (void)leaf_total;
      CHECK(values(y) == values(x));
    }
  }
}

TEST_CASE("zero-weight SCIBlock matches the closed-form offset pattern") {
  for (std::size_t p : {4u, 8u, 16u, 32u, 64u}) {
    for (int levels = 1; levels <= 5 && (std::size_t{1} << levels) <= p; ++levels) {
      FcScinetConfig c = small_scinet(p, levels);
      FcScinetModel m(c, 5);
      zero_all(m.named_parameters());
      Rng rng(p + levels);
      const Tensor x = random_tensor({1, 1, p}, rng);
      CHECK(values(m.sciblock_forward(x)) == zero_tree_oracle(values(x), levels));
    }
  }
}

TEST_CASE("FC-SCINet constant-input hand trace") {
  FcScinetConfig c = small_scinet(8, 1);
  FcScinetModel m(c, 6);
  for (auto p : m.named_parameters())
    if (p.name.rfind("node", 0) == 0) nn::fill_zero(p.tensor);
  auto& out = m.output_layer();
  for (std::size_t k = 0; k < 8; ++k) out.weight.data_mut()[k] = 0.1 * static_cast<double>(k + 1);
  out.bias.data_mut()[0] = 0.2;
  // FC and identity decomp keep a constant: x_s = c, x_f = 0. The zero tree
  // turns x_f into -1 at even and +1 at odd positions, so z = c -+ 1.
  const double cval = 0.7;
  const double expected = [&] {
    double acc = 0.2;
    for (std::size_t k = 0; k < 8; ++k) acc += 0.1 * static_cast<double>(k + 1) * (cval + (k % 2 ? 1.0 : -1.0));
    return acc;
  }();
  const auto y = values(m.forward(Tensor::full({3, 8}, cval)));
  for (double v : y) CHECK(v == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("FC-SCINet is stateless across a batch") {
  FcScinetModel m(small_scinet(16, 2), 7);
  Rng rng(8);
  const Tensor one = random_tensor({1, 16}, rng);
  std::vector<double> rows;
  for (int r = 0; r < 5; ++r) rows.insert(rows.end(), one.data().begin(), one.data().end());
  const auto y = values(m.forward(Tensor({5, 16}, rows)));
  const double single = m.forward(one).item();
  for (double v : y) CHECK(v == single);
  CHECK_THROWS_AS(FcScinetModel(small_scinet(24, 4), 1), Error);
}

TEST_CASE("gradient check: interactor") {
  Rng rng(41);
  for (int trial = 0; trial < kTrials; ++trial) {
    FcScinetModel m(small_scinet(8, 1), 200 + trial);
    randomize(m.named_parameters(), rng);
    Tensor x = random_tensor({2, 1, 4 + 2 * static_cast<std::size_t>(trial % 3)}, rng, true);
    const Tensor probe_e = random_tensor({2, 1, x.shape().back() / 2}, rng);
    const Tensor probe_o = random_tensor({2, 1, x.shape().back() / 2}, rng);
    std::vector<Tensor> params = m.parameters();
    params.push_back(x);
    auto r = testing::grad_check(
        [&] {
          InteractorOutput o = interactor_forward(x, m.nodes()[0]);
          return nn::add(nn::sum(nn::mul(o.even, probe_e)), nn::sum(nn::mul(o.odd, probe_o)));
        },
        params);
    CHECK_MESSAGE(r.max_rel_error < 1e-4, r.worst);
  }
}

TEST_CASE("gradient check: decomp") {
  Rng rng(42);
  for (int trial = 0; trial < kTrials; ++trial) {
    FcScinetModel m(small_scinet(8, 1), 300 + trial);
    randomize({{"w_s", m.w_smooth().weight}, {"w_f", m.w_fluct().weight}}, rng);
    Tensor x = random_tensor({2, 1, 8}, rng, true);
    const Tensor probe_s = random_tensor({2, 1, 8}, rng);
    const Tensor probe_f = random_tensor({2, 1, 8}, rng);
    auto r = testing::grad_check(
        [&] {
          DecompOutput d = m.decomp_forward(x);
          return nn::add(nn::sum(nn::mul(d.smooth, probe_s)), nn::sum(nn::mul(d.fluctuation, probe_f)));
        },
        {m.w_smooth().weight, m.w_fluct().weight, x});
    CHECK_MESSAGE(r.max_rel_error < 1e-4, r.worst);
  }
}

TEST_CASE("gradient check: full FC-SCINet, p = 8, L = 1") {
  Rng rng(43);
  for (int trial = 0; trial < kTrials; ++trial) {
    FcScinetConfig c = small_scinet(8, 1);
    c.output_mode = trial % 4 == 3 ? OutputMode::kManyToMany : OutputMode::kManyToOne;
    FcScinetModel m(c, 400 + trial);
    randomize(m.named_parameters(), rng);
    const Tensor x = random_tensor({3, 8}, rng);
    const Tensor target = random_tensor({3, m.target_length()}, rng);
    auto r = testing::grad_check([&] { return nn::mse_loss(m.forward(x), target); }, m.parameters());
    CHECK_MESSAGE(r.max_rel_error < 1e-3, r.worst);
  }
}

TEST_CASE("training with a zero learning rate leaves parameters unchanged") {
  const data::Dataset d = toy_dataset(600, 1);
  FcScinetModel m(small_scinet(16, 2), 9);
  const auto before = m.named_parameters();
  std::vector<std::vector<double>> saved;
  for (auto& p : before) saved.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
  TrainConfig tc;
  tc.epochs = 3;
  tc.optimizer.learning_rate = 0.0;
  train_model(m, d, tc);
  const auto after = m.named_parameters();
  for (std::size_t i = 0; i < after.size(); ++i) CHECK(values(after[i].tensor) == saved[i]);
}

TEST_CASE("both models learn a linear toy task") {
  const data::Dataset d = toy_dataset(1600, 2);
  TrainConfig tc;
  tc.epochs = 200;
  tc.optimizer.kind = nn::OptimizerKind::kAdam;
  tc.optimizer.learning_rate = 3e-3;
  tc.seed = 3;
  DnnModel dnn({}, 4);
  const TrainResult rd = train_model(dnn, d, tc);
  CHECK(rd.history.back().train_mse < 1e-2);
  CHECK(rd.best_val_mse < 1e-2);

  tc.epochs = 60;
  FcScinetModel sci(small_scinet(16, 2), 5);
  const TrainResult rs = train_model(sci, d, tc);
  CHECK(rs.history.back().train_mse < 1e-2);
  CHECK(rs.best_val_mse < 1e-2);
  for (const auto& e : rs.history) CHECK(rs.best_val_mse <= e.val_mse);
  CHECK(rs.best_val_mse == doctest::Approx(evaluate_mse(sci, d, d.validation)).epsilon(1e-12));
}

TEST_CASE("seeded training is reproducible") {
  const data::Dataset d = toy_dataset(800, 3);
  TrainConfig tc;
  tc.epochs = 4;
  tc.optimizer.kind = nn::OptimizerKind::kAdam;
  tc.optimizer.learning_rate = 1e-3;
  tc.seed = 11;
  auto run = [&] {
    FcScinetModel m(small_scinet(16, 2), 12);
    const TrainResult r = train_model(m, d, tc);
    std::vector<double> curve;
    for (const auto& e : r.history) {
      curve.push_back(e.train_mse);
      curve.push_back(e.val_mse);
    }
    return curve;
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite loss aborts training") {
  data::Dataset d = toy_dataset(600, 4);
  d.inputs[0][100] = std::nan("");
  DnnModel m({}, 1);
  TrainConfig tc;
  tc.epochs = 1;
  try {
    train_model(m, d, tc);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumerical);
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
}
