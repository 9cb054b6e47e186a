#include "doef/rng.hpp"

#include <cassert>
#include <numeric>

namespace doef {

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) noexcept {
  // FNV-1a over the stream name, then mixed with the master seed.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return mix64(master ^ mix64(h));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) noexcept {
  return mix64(master ^ mix64(salt ^ 0xD1B54A32D192ED03ULL));
}

std::uint64_t Rng::below(std::uint64_t n) {
  assert(n > 0);
  // Lemire's nearly-divisionless bounded draw.
  __extension__ using u128 = unsigned __int128;
  u128 m = static_cast<u128>(next()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = -n % n;
    while (low < threshold) {
      m = static_cast<u128>(next()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::size_t pick_weighted(Rng& rng, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  const double target = rng.unit() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

}  // namespace doef
