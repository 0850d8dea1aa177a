#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "falq/types.hpp"

namespace falq {

/// Unnormalized 1D complex DFT of a fixed length. Power-of-two lengths use
/// an iterative radix-2 kernel; other lengths go through Bluestein's chirp-z
/// convolution. Immutable after construction, so one plan can be shared
/// across threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }

  /// X[k] = sum_j x[j] exp(-2 pi i jk/n)
  void forward(std::span<Complex> data) const;
  /// x[j] = sum_k X[k] exp(+2 pi i jk/n), no 1/n factor.
  void backward(std::span<Complex> data) const;

 private:
  void radix2(std::span<Complex> data, std::span<const Complex> twiddles) const;
  void bluestein(std::span<Complex> data) const;

  std::size_t n_;
  std::size_t conv_size_ = 0;
  std::vector<Complex> twiddles_;       // radix-2 table, length n_/2 (or conv_size_/2)
  std::vector<Complex> chirp_;          // exp(-i pi k^2 / n)
  std::vector<Complex> chirp_filter_;   // transformed conjugate chirp
};

bool is_power_of_two(std::size_t n);

}  // namespace falq
