#pragma once

#include <cstdint>
#include <random>

namespace oamp {

using Rng = std::mt19937_64;

/// Independent sub-streams drawn from one root seed. Each sampled object
/// gets its own generator so that, e.g., changing the number of layers does
/// not perturb the covariate draw.
enum class Stream : std::uint64_t {
  labels = 1,
  layer = 2,
  covariates = 3,
  surrogate = 4,
  revelation = 5,
  spectral = 6,
  se_init = 7,
  replicate = 8,
};

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for sub-stream `stream`, item `index`, under `root`:
/// mix64(mix64(root) ^ mix64(stream * 2^32 + index)).
std::uint64_t derive_seed(std::uint64_t root, Stream stream, std::uint64_t index = 0) noexcept;

inline Rng make_rng(std::uint64_t root, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(root, stream, index));
}

}  // namespace oamp
