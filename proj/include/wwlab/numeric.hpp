#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace wwlab {

using Complex = std::complex<double>;

/// Streaming pairwise (tree) summation.
///
/// Terms are folded naively inside blocks of `BlockSize`; finished blocks are
/// merged like a binary counter, so the rounding error of any prefix sum grows
/// as O(log n) ulp instead of O(n). The reduction order depends only on the
/// number of terms added, which makes prefix sums reproducible bit-for-bit.
template <typename Scalar, std::size_t BlockSize = 256>
class PairwiseSum {
 public:
  void add(const Scalar& term) {
    block_ += term;
    if (++in_block_ == BlockSize) {
      push(block_);
      block_ = Scalar(0);
      in_block_ = 0;
    }
  }

  /// Sum of every term added so far.
  Scalar total() const {
    Scalar sum = block_;
    for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) sum += it->sum;
    return sum;
  }

  std::size_t count() const { return merged_ + in_block_; }

 private:
  struct Node {
    std::size_t level;
    Scalar sum;
  };

  void push(Scalar sum) {
    std::size_t level = 0;
    while (!levels_.empty() && levels_.back().level == level) {
      sum = levels_.back().sum + sum;
      levels_.pop_back();
      ++level;
    }
    levels_.push_back({level, sum});
    merged_ += BlockSize;
  }

  std::vector<Node> levels_;
  Scalar block_ = Scalar(0);
  std::size_t in_block_ = 0;
  std::size_t merged_ = 0;
};

/// Pairwise sum of a finite range.
template <typename Scalar, typename Range>
Scalar pairwise_sum(const Range& range) {
  PairwiseSum<Scalar> acc;
  for (const auto& x : range) acc.add(Scalar(x));
  return acc.total();
}

/// x mod 1 in [0, 1).
inline double frac(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

/// Fractional part of k*theta, using the exact two-product so the result is
/// accurate to a few ulp even for k ~ 1e9.
inline double phase_of_multiple(std::int64_t k, double theta) {
  const double kd = static_cast<double>(k);
  const double p = kd * theta;
  const double err = std::fma(kd, theta, -p);
  return frac(frac(p) + err);
}

/// e^{2 pi i t}, with t first reduced to [-1/2, 1/2).
inline Complex unit_phase(double turns) {
  double t = turns - std::floor(turns + 0.5);
  const double angle = 2.0 * std::numbers::pi * t;
  return {std::cos(angle), std::sin(angle)};
}

/// Uniform double in [0, 1) built from the top 53 bits of one 64-bit draw.
/// Unlike std::uniform_real_distribution the result is identical across
/// standard library implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [lo, hi] (inclusive), by rejection; portable.
inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(rng());
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return lo + static_cast<std::int64_t>(draw % span);
}

}  // namespace wwlab
