//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef DUALRETRO_NUMERICS_RNG_H_
#define DUALRETRO_NUMERICS_RNG_H_

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "dualretro/numerics/tensor.h"

namespace dualretro {

// Counter-based generator: the n-th draw of stream s under seed k is a pure
// function of (k, s, n), so streams can be split for independent sampling
// chains and still reproduce exactly.
class Rng {
public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) { }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1).
  double uniform();

  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);

  double gaussian();

  // Independent generator for sub-stream `index`.
  Rng fork(std::uint64_t index) const;

  template <class T>
  void shuffle(std::vector<T> &items) {
    for (int i = static_cast<int>(items.size()) - 1; i > 0; --i) {
      const int j = uniform_int(0, i);
      std::swap(items[i], items[j]);
    }
  }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Tensor of i.i.d. standard normal draws.
Tensor gaussian(Rng &rng, std::vector<int> shape);

// 64-bit FNV-1a; used to derive stream ids from strings.
std::uint64_t hash_string(std::string_view text);

}  // namespace dualretro

#endif  // DUALRETRO_NUMERICS_RNG_H_
