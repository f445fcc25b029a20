#include "uavnoma/rng.hpp"

#include <stdexcept>

namespace uavnoma {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
  // 2^64 mod n; zero means every 64-bit draw maps evenly.
  const std::uint64_t rem = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = engine_();
    if (rem == 0 || x < 0 - rem) return x % n;
  }
}

Rng Rng::stream(std::uint64_t root, std::string_view name) {
  return Rng(derive_seed(root, name));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view name) {
  return splitmix64(root ^ fnv1a64(name));
}

}  // namespace uavnoma
