#include "falq/fft.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "falq/error.hpp"

namespace falq {

namespace {

std::vector<Complex> make_twiddles(std::size_t n) {
  std::vector<Complex> tw(n / 2);
  for (std::size_t k = 0; k < tw.size(); ++k) {
    tw[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
  }
  return tw;
}

std::size_t next_power_of_two(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw ParamError("FFT length must be positive");
  if (is_power_of_two(n)) {
    twiddles_ = make_twiddles(n);
    return;
  }
  conv_size_ = next_power_of_two(2 * n - 1);
  twiddles_ = make_twiddles(conv_size_);
  chirp_.resize(n);
  const std::size_t period = 2 * n;
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the angle small and exact.
    const std::size_t sq = (k * k) % period;
    chirp_[k] = std::polar(1.0, -std::numbers::pi * static_cast<double>(sq) / static_cast<double>(n));
  }
  chirp_filter_.assign(conv_size_, Complex(0.0, 0.0));
  chirp_filter_[0] = std::conj(chirp_[0]);
  for (std::size_t k = 1; k < n; ++k) {
    chirp_filter_[k] = std::conj(chirp_[k]);
    chirp_filter_[conv_size_ - k] = std::conj(chirp_[k]);
  }
  radix2(chirp_filter_, twiddles_);
}

void FftPlan::radix2(std::span<Complex> a, std::span<const Complex> tw) const {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex t = a[start + k + half] * tw[k * stride];
        const Complex u = a[start + k];
        a[start + k] = u + t;
        a[start + k + half] = u - t;
      }
    }
  }
}

void FftPlan::bluestein(std::span<Complex> data) const {
  std::vector<Complex> work(conv_size_, Complex(0.0, 0.0));
  for (std::size_t k = 0; k < n_; ++k) work[k] = data[k] * chirp_[k];
  radix2(work, twiddles_);
  for (std::size_t k = 0; k < conv_size_; ++k) work[k] *= chirp_filter_[k];
  // inverse transform via conjugation
  for (auto& z : work) z = std::conj(z);
  radix2(work, twiddles_);
  const double scale = 1.0 / static_cast<double>(conv_size_);
  for (std::size_t k = 0; k < n_; ++k) data[k] = std::conj(work[k]) * scale * chirp_[k];
}

void FftPlan::forward(std::span<Complex> data) const {
  if (data.size() != n_) throw ParamError("FFT input length does not match plan");
  if (n_ == 1) return;
  if (conv_size_ == 0) {
    radix2(data, twiddles_);
  } else {
    bluestein(data);
  }
}

void FftPlan::backward(std::span<Complex> data) const {
  for (auto& z : data) z = std::conj(z);
  forward(data);
  for (auto& z : data) z = std::conj(z);
}

}  // namespace falq
