#include "oamp/rng.hpp"

namespace oamp {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, Stream stream, std::uint64_t index) noexcept {
  const auto tag = (static_cast<std::uint64_t>(stream) << 32) + index;
  return mix64(mix64(root) ^ mix64(tag));
}

}  // namespace oamp
