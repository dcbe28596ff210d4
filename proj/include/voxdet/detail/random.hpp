// Copyright 2026 The voxdet Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef VOXDET_DETAIL_RANDOM_HPP
#define VOXDET_DETAIL_RANDOM_HPP

#include <cstdint>
#include <random>

namespace voxdet::detail {

// std::mt19937_64 output is fixed by the standard; the distributions are not,
// so the few we need are spelled out here to keep results identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n > 0. Uses rejection to avoid modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace voxdet::detail

#endif  // VOXDET_DETAIL_RANDOM_HPP
