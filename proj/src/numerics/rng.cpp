//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/numerics/rng.h"

#include <cmath>
#include <numbers>

namespace dualretro {
namespace {
// Murmur3 finalizer.
constexpr std::uint64_t fmix64(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}
}  // namespace

std::uint64_t Rng::next_u64() {
  const std::uint64_t key = fmix64(seed_ ^ 0x9e3779b97f4a7c15ULL)
                            ^ fmix64(stream_ + 0x632be59bd9b4e019ULL);
  const std::uint64_t x = fmix64(key + (counter_++) * 0x9e3779b97f4a7c15ULL);
  return fmix64(x ^ key);
}

double Rng::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

int Rng::uniform_int(int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next_u64() % span);
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform(), u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Rng Rng::fork(std::uint64_t index) const {
  return Rng(seed_, fmix64(stream_ * 0x100000001b3ULL + index + 1));
}

Tensor gaussian(Rng &rng, std::vector<int> shape) {
  Tensor out(std::move(shape));
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = rng.gaussian();
  return out;
}

std::uint64_t hash_string(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c: text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace dualretro
