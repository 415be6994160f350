#include <doctest.h>

#include <random>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "link/transmitter.hpp"
#include "metrics/ber.hpp"
#include "metrics/complexity.hpp"

using namespace ponlab;
using namespace ponlab::metrics;

namespace {

// Level relabeling that XORs every Gray word with `mask`; it preserves Hamming
// distances between levels.
Symbol gray_xor(Symbol s, unsigned mask) {
  const unsigned word = link::kGrayBits[s] ^ mask;
  for (Symbol l = 0; l < 4; ++l)
    if (link::kGrayBits[l] == word) return l;
  return 0;
}

}  // namespace

TEST_CASE("slicer thresholds and ties") {
  CHECK(slice_level(-3.5) == 0);
  CHECK(slice_level(-2.0) == 0);
  CHECK(slice_level(-1.999) == 1);
  CHECK(slice_level(0.0) == 1);
  CHECK(slice_level(1e-12) == 2);
  CHECK(slice_level(2.0) == 2);
  CHECK(slice_level(2.5) == 3);
}

TEST_CASE("count_ber examples") {
  const auto truth = link::generate_rns_pam4(1 << 10, 3);
  CHECK(count_ber(truth, truth).ber == 0.0);

  auto one_off = truth;
  one_off[100] = one_off[100] == 3 ? 2 : one_off[100] + 1;
  const BerReport r = count_ber(one_off, truth);
  CHECK(r.bit_errors == 1);
  CHECK(r.bits_counted == 1u << 11);
  CHECK(r.ber == doctest::Approx(std::ldexp(1.0, -11)));
  CHECK(r.symbol_errors == 1);
  CHECK(r.errors_by_level[truth[100]] == 1);

  // Mirroring the constellation (0<->3, 1<->2) flips exactly one Gray bit.
  std::vector<Symbol> mirrored;
  for (Symbol s : truth) mirrored.push_back(3 - s);
  CHECK(count_ber(mirrored, truth).ber == 0.5);
  // Complementing both Gray bits (00<->11, 01<->10) is the map 0<->2, 1<->3.
  std::vector<Symbol> complemented;
  for (Symbol s : truth) complemented.push_back(gray_xor(s, 0b11));
  CHECK(count_ber(complemented, truth).ber == 1.0);

  CHECK_THROWS_AS(count_ber(std::vector<Symbol>(3), std::vector<Symbol>(4)), Error);
}

TEST_CASE("count_ber symmetry and bounds") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto truth = link::generate_rns_pam4(500, 100 + trial);
    const auto decisions = link::generate_rns_pam4(500, 200 + trial);
    const BerReport r = count_ber(decisions, truth);
    CHECK(r.ber >= 0.0);
    CHECK(r.ber <= 1.0);
    CHECK(r.ber == static_cast<double>(r.bit_errors) / r.bits_counted);
    CHECK(count_ber(truth, decisions).bit_errors == r.bit_errors);
    const unsigned mask = static_cast<unsigned>(rng() % 4);
    std::vector<Symbol> t2, d2;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      t2.push_back(gray_xor(truth[i], mask));
      d2.push_back(gray_xor(decisions[i], mask));
    }
    CHECK(count_ber(d2, t2).bit_errors == r.bit_errors);
  }
}

TEST_CASE("median BER uses the lower median") {
  CHECK(median_ber(std::vector<double>{0.1}) == 0.1);
  CHECK(median_ber(std::vector<double>{0.2, 0.0, 0.1}) == 0.1);
  CHECK(median_ber(std::vector<double>{0.3, 0.1}) == 0.1);
  CHECK_THROWS_AS(median_ber(std::vector<double>{}), Error);
}

TEST_CASE("DNN multiplications per symbol") {
  ComplexityParams p;
  p.n_e = 30;
  p.n_s = 33;
  CHECK(rmps_dnn(p) == 209700);
  p.n_e = 60;
  CHECK(rmps_dnn(p) == 2 * 209700);
  ComplexityParams ones;
  ones.n_e = ones.n_s = ones.n_c = ones.n_o = 1;
  ones.n_layers = {1, 1, 1};
  CHECK(rmps_dnn(ones) == 4);
}

TEST_CASE("FC-SCINet multiplications per symbol") {
  ComplexityParams p;
  p.n_s = 64;
  p.n_e = 1;
  p.n_h = 1;
  p.levels = 3;
  CHECK(rmps_scinet(p) == 184704);
  p.levels = 0;
  CHECK(rmps_scinet(p) == 64 * (64 + 64 + 30));
  p.levels = 7;
  CHECK_THROWS_AS(rmps_scinet(p), Error);
  // Odd bracket halves stay exact because n_s is even whenever L >= 1.
  p.n_s = 2;
  p.levels = 1;
  p.n_h = 1;
  CHECK(rmps_scinet(p) == 2 * (2 + 2 + 30) + 1800 + 1);
}

TEST_CASE("published RMpS value has no exact instantiation at n_s = 64") {
  const auto best = search_scinet_instantiations(187520, 3, 64, 3);
  REQUIRE(!best.empty());
  for (const auto& m : best) {
    CHECK(m.value == rmps_scinet(m.params));
    CHECK(m.residual == m.value - 187520);
    CHECK(m.residual != 0);
  }
  CHECK(std::llabs(best.front().residual) <= std::llabs(best.back().residual));
}

TEST_CASE("PRB products") {
  CHECK(prb(209700, 0.089912) == doctest::Approx(18854.55).epsilon(1e-3));
  CHECK(prb(209700, 0.087272) == doctest::Approx(18300.94).epsilon(1e-3));
  CHECK(prb(187520, 0.000071) == doctest::Approx(13.31).epsilon(1e-3));
  CHECK(prb(187520, 0.009414) == doctest::Approx(1765.31).epsilon(1e-3));
  CHECK(std::abs(prb(209700, 0.089912) - 18854.55) < 0.5);
  CHECK(std::abs(prb(187520, 0.000071) - 13.31) < 0.01);
  CHECK(prb(1000, 0.0) == 0.0);
  CHECK_THROWS_AS(prb(1000, 1.5), Error);
  CHECK(complexity_reduction_percent(209700, 187520) == doctest::Approx(10.577).epsilon(1e-4));
}
