#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <set>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "data/dataset.hpp"
#include "link/transmitter.hpp"
#include "numeric/ops.hpp"

using namespace ponlab;
using namespace ponlab::data;

namespace {

std::vector<double> values(const nn::Tensor& t) { return {t.data().begin(), t.data().end()}; }

nn::Tensor row(std::vector<double> v) {
  const std::size_t n = v.size();
  return nn::Tensor({n}, std::move(v));
}

link::SymbolFrame random_frame(std::size_t n, std::uint64_t seed) {
  link::SymbolFrame f;
  f.symbols = link::generate_rns_pam4(n, seed);
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 0.1);
  for (auto s : f.symbols) f.soft.push_back(2.0 + link::symbol_amplitude(s) + g(rng));
  return f;
}

}  // namespace

TEST_CASE("normalize examples") {
  const std::vector<double> a{-1.0, 1.0};
  auto n = normalize(a);
  CHECK(n.values == a);
  CHECK(n.stats.mean == 0.0);
  CHECK(n.stats.std == 1.0);
  const std::vector<double> b{0.0, 2.0};
  n = normalize(b);
  CHECK(n.values == std::vector<double>{-1.0, 1.0});
  CHECK(n.stats.mean == 1.0);
  CHECK(n.stats.std == 1.0);
  const std::vector<double> flat(8, 3.0);
  CHECK_THROWS_AS(normalize(flat), Error);
  CHECK_THROWS_AS(normalize(std::vector<double>{1.0}), Error);
}

TEST_CASE("normalize gives zero mean and unit std") {
  Rng rng(5);
  std::uniform_real_distribution<double> u(-7.0, 19.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(100 + trial * 37);
    for (double& v : x) v = u(rng);
    const auto n = normalize(x);
    const auto s = compute_stats(n.values);
    CHECK(std::abs(s.mean) < 1e-12);
    CHECK(std::abs(s.std - 1.0) < 1e-12);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(n.stats.invert(n.values[i]) == doctest::Approx(x[i]));
  }
}

TEST_CASE("make_windows enumeration") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  WindowConfig cfg;
  cfg.dnn_pre = 1;
  cfg.dnn_post = 1;
  const auto b = make_windows(x, x, cfg, WindowStyle::kCenteredDnn);
  CHECK(b.rows == 3);
  CHECK(b.inputs == std::vector<double>{1, 2, 3, 2, 3, 4, 3, 4, 5});
  CHECK(b.targets == std::vector<double>{2, 3, 4});
}

TEST_CASE("make_windows row count, constant rows and errors") {
  std::vector<double> x(100);
  std::iota(x.begin(), x.end(), 0.0);
  WindowConfig cfg;
  for (std::size_t p : {2u, 8u, 64u, 100u}) {
    cfg.window_len = p;
    const auto b = make_windows(x, x, cfg, WindowStyle::kScinet);
    CHECK(b.rows == x.size() - p + 1);
    for (std::size_t r = 0; r < b.rows; ++r) CHECK(b.targets[r] == x[r + p / 2]);
  }
  const auto dnn = make_windows(x, x, WindowConfig{}, WindowStyle::kCenteredDnn);
  CHECK(dnn.rows == x.size() - 33 + 1);
  // Centre samples stitched at stride 1 reproduce the sequence.
  for (std::size_t r = 0; r < dnn.rows; ++r) CHECK(dnn.inputs[r * 33 + 16] == x[r + 16]);

  const std::vector<double> c(40, 2.5);
  cfg.window_len = 16;
  for (double v : make_windows(c, c, cfg, WindowStyle::kScinet).inputs) CHECK(v == 2.5);
  cfg.window_len = 101;
  CHECK_THROWS_AS(make_windows(x, x, cfg, WindowStyle::kScinet), Error);
  CHECK_THROWS_AS(make_windows(x, std::vector<double>(99), WindowConfig{}, WindowStyle::kScinet), Error);
  cfg.window_len = 48;
  CHECK_THROWS_AS(cfg.validate(WindowStyle::kScinet, 5), Error);
  CHECK_NOTHROW(cfg.validate(WindowStyle::kScinet, 4));
}

TEST_CASE("frequency calibration examples") {
  CHECK(values(frequency_calibrate(row({4, 4, 4, 4}), 3)) == std::vector<double>{4, 4, 4, 4});
  const auto pre = values(frequency_calibrate(row({0, 3, 0}), 3));
  CHECK(pre[0] == doctest::Approx(-1.0));
  CHECK(pre[1] == doctest::Approx(5.0));
  CHECK(pre[2] == doctest::Approx(-1.0));
  const auto rec = values(frequency_calibrate(row({0, 3, 0}), 3, FcMode::kReconstruct));
  CHECK(rec[1] == doctest::Approx(3.0));
  CHECK(parse_fc_mode("emphasize") == FcMode::kEmphasize);
  CHECK_THROWS_AS(parse_fc_mode("other"), Error);
}

TEST_CASE("frequency calibration is linear and preserves the mean identity") {
  Rng rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 16 + 3 * trial;
    const std::size_t k = 1 + 2 * (trial % 4);
    std::vector<double> xv(n), zv(n);
    for (std::size_t i = 0; i < n; ++i) {
      xv[i] = g(rng);
      zv[i] = g(rng);
    }
    const double a = g(rng);
    const double b = g(rng);
    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = a * xv[i] + b * zv[i];
    const auto fx = values(frequency_calibrate(row(xv), k));
    const auto fz = values(frequency_calibrate(row(zv), k));
    const auto fm = values(frequency_calibrate(row(mix), k));
    for (std::size_t i = 0; i < n; ++i) CHECK(fm[i] == doctest::Approx(a * fx[i] + b * fz[i]).epsilon(1e-10));

    const auto smooth = values(nn::avg_pool_smooth(row(xv), k));
    auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
    CHECK(mean(fx) == doctest::Approx(2.0 * mean(xv) - mean(smooth)).epsilon(1e-12));
  }
}

TEST_CASE("split proportions are exact and deterministic") {
  SplitConfig cfg;
  cfg.seed = 11;
  auto counts = [](const std::vector<SplitLabel>& labels) {
    std::array<std::size_t, 3> c{};
    for (auto l : labels) ++c[static_cast<int>(l)];
    return c;
  };
  auto c = counts(assign_splits(60000, cfg));
  CHECK(c[static_cast<int>(SplitLabel::kTrain)] == 45000);
  CHECK(c[static_cast<int>(SplitLabel::kTest)] == 9000);
  CHECK(c[static_cast<int>(SplitLabel::kValidation)] == 6000);
  const std::size_t n = 1 << 16;
  const auto labels = assign_splits(n, cfg);
  c = counts(labels);
  CHECK(std::abs(static_cast<double>(c[static_cast<int>(SplitLabel::kTrain)]) - 0.75 * n) <= 20.0);
  CHECK(std::abs(static_cast<double>(c[static_cast<int>(SplitLabel::kTest)]) - 0.15 * n) <= 20.0);
  CHECK(assign_splits(n, cfg) == labels);
  cfg.seed = 12;
  CHECK(assign_splits(n, cfg) != labels);
  cfg.train_blocks = 14;
  CHECK_THROWS_AS(assign_splits(n, cfg), Error);
}

TEST_CASE("dataset windows never cross split boundaries") {
  std::vector<link::SymbolFrame> frames{random_frame(20000, 1), random_frame(20000, 2)};
  SplitConfig cfg;
  cfg.seed = 4;
  const Dataset d = build_dataset(frames, cfg, 32, 31);
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (SplitLabel label : {SplitLabel::kTrain, SplitLabel::kValidation, SplitLabel::kTest}) {
    for (const auto& r : d.refs(label)) {
      CHECK(seen.insert({r.capture, r.target}).second);
      for (std::size_t i = r.target - 32; i <= r.target + 31; ++i) REQUIRE(d.split[r.capture][i] == label);
    }
  }
  const double total = static_cast<double>(d.train.size() + d.validation.size() + d.test.size());
  CHECK(d.train.size() / total == doctest::Approx(0.75).epsilon(0.02));
  CHECK(d.test.size() / total == doctest::Approx(0.15).epsilon(0.05));
  CHECK(d.validation.size() / total == doctest::Approx(0.10).epsilon(0.05));

  // Statistics come from the training split only.
  std::vector<double> train_soft;
  for (std::size_t c = 0; c < frames.size(); ++c)
    for (std::size_t i = 0; i < frames[c].size(); ++i)
      if (d.split[c][i] == SplitLabel::kTrain) train_soft.push_back(frames[c].soft[i]);
  const NormStats s = compute_stats(train_soft);
  CHECK(d.input_stats.mean == doctest::Approx(s.mean).epsilon(1e-14));
  CHECK(d.input_stats.std == doctest::Approx(s.std).epsilon(1e-14));

  WindowConfig wc;
  std::vector<double> x(64 * 2), y(2);
  d.gather(std::span(d.test).first(2), wc, WindowStyle::kScinet, x.data(), y.data());
  CHECK(x[32] == d.inputs[d.test[0].capture][d.test[0].target]);
  CHECK(y[1] == d.targets[d.test[1].capture][d.test[1].target]);
  CHECK(d.target_stats.invert(y[0]) == link::symbol_amplitude(d.symbols[d.test[0].capture][d.test[0].target]));
  wc.window_len = 128;
  CHECK_THROWS_AS(d.gather(std::span(d.test).first(1), wc, WindowStyle::kScinet, x.data(), y.data()), Error);
}

TEST_CASE("dataset cache round trip") {
  std::vector<link::SymbolFrame> frames{random_frame(4000, 3)};
  const Dataset d = build_dataset(frames, SplitConfig{}, 16, 16);
  const auto path = std::filesystem::temp_directory_path() / "ponlab_test_data" / "cache.bin";
  write_dataset_cache(path, d, {{"config_hash", "00ff"}});
  nlohmann::json header;
  const Dataset e = read_dataset_cache(path, &header);
  CHECK(header.at("config_hash") == "00ff");
  CHECK(e.inputs == d.inputs);
  CHECK(e.symbols == d.symbols);
  CHECK(e.split == d.split);
  CHECK(e.targets == d.targets);
  CHECK(e.test.size() == d.test.size());
  std::filesystem::remove_all(path.parent_path());
}
