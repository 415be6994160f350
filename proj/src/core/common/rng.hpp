#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace ponlab {

using Rng = std::mt19937_64;

// Every stochastic stage draws from its own substream, keyed by the master seed,
// a stage name and optional integer ids (capture index, grid cell, ...).
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage,
                          std::initializer_list<std::uint64_t> ids = {});

inline Rng make_rng(std::uint64_t master, std::string_view stage,
                    std::initializer_list<std::uint64_t> ids = {}) {
  return Rng(derive_seed(master, stage, ids));
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

}  // namespace ponlab
