#pragma once

// Slow, independent reference computations used only by the tests.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "falq/types.hpp"

namespace oracle {

using falq::Complex;
using falq::ComplexMatrix;
using falq::Index;
using falq::RealMatrix;
using falq::RealVector;

// Direct double sum, O(M^2 N^2). Unnormalized, e^{-2 pi i (um/M + vn/N)}.
inline ComplexMatrix naive_dft2(const ComplexMatrix& x) {
  const Index m = x.rows();
  const Index n = x.cols();
  ComplexMatrix out(m, n);
  for (Index u = 0; u < m; ++u) {
    for (Index v = 0; v < n; ++v) {
      Complex acc(0.0, 0.0);
      for (Index a = 0; a < m; ++a) {
        for (Index b = 0; b < n; ++b) {
          // reduce the exponent mod 1 in integer arithmetic to keep the angle small
          const std::int64_t num = static_cast<std::int64_t>((u * a) % m) * n +
                                   static_cast<std::int64_t>((v * b) % n) * m;
          const double angle = -2.0 * std::numbers::pi * static_cast<double>(num % (m * n)) /
                               static_cast<double>(m * n);
          acc += x(a, b) * Complex(std::cos(angle), std::sin(angle));
        }
      }
      out(u, v) = acc;
    }
  }
  return out;
}

inline ComplexMatrix naive_idft2(const ComplexMatrix& x) {
  ComplexMatrix out = naive_dft2(x.conjugate()).conjugate();
  return out / static_cast<double>(x.rows() * x.cols());
}

// Descending singular values from the Hermitian eigenproblem of R^H R.
inline RealVector gram_singular_values(const ComplexMatrix& r) {
  const ComplexMatrix g = r.rows() >= r.cols() ? ComplexMatrix(r.adjoint() * r)
                                               : ComplexMatrix(r * r.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g);
  const RealVector ev = es.eigenvalues();
  RealVector s(ev.size());
  for (Index i = 0; i < ev.size(); ++i) s(i) = std::sqrt(std::max(0.0, ev(ev.size() - 1 - i)));
  return s;
}

// Element-by-element residual norm; C may be empty for the unweighted case.
inline double loop_weighted_error(const ComplexMatrix& w, const ComplexMatrix& q,
                                  const ComplexMatrix& l1, const ComplexMatrix& l2,
                                  const RealMatrix& c) {
  long double acc = 0.0L;
  for (Index i = 0; i < w.rows(); ++i) {
    for (Index j = 0; j < w.cols(); ++j) {
      Complex lr(0.0, 0.0);
      for (Index k = 0; k < l1.cols(); ++k) lr += l1(i, k) * l2(k, j);
      const Complex e = w(i, j) - q(i, j) - lr;
      const double weight = c.size() == 0 ? 1.0 : c(i, j);
      acc += static_cast<long double>(weight) * std::norm(e);
    }
  }
  return std::sqrt(static_cast<double>(acc));
}

// Scalar polar quantize/dequantize of one entry.
struct PolarScalar {
  std::uint32_t qr;
  std::uint32_t qt;
  Complex value;
};

inline PolarScalar polar_scalar(Complex z, double r_max, int br, int bt) {
  const double levels_r = std::pow(2.0, br) - 1.0;
  const double levels_t = std::pow(2.0, bt);
  const double dr = r_max / levels_r;
  const double dt = 2.0 * std::numbers::pi / levels_t;
  const double r = std::abs(z);
  const double theta = (z == Complex(0.0, 0.0)) ? 0.0 : std::atan2(z.imag(), z.real());
  double qr = dr > 0.0 ? std::round(r / dr) : 0.0;
  qr = std::min(std::max(qr, 0.0), levels_r);
  double qt = std::fmod(std::round((theta + std::numbers::pi) / dt), levels_t);
  if (qt < 0) qt += levels_t;
  const double rr = qr * dr;
  const double tt = qt * dt - std::numbers::pi;
  return {static_cast<std::uint32_t>(qr), static_cast<std::uint32_t>(qt),
          Complex(rr * std::cos(tt), rr * std::sin(tt))};
}

// Seeded generators.
inline RealMatrix random_real(Index rows, Index cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, scale);
  RealMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = nd(rng);
  return m;
}

inline ComplexMatrix random_complex(Index rows, Index cols, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, scale);
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(nd(rng), nd(rng));
  return m;
}

inline ComplexMatrix random_low_rank(Index rows, Index cols, Index rank, std::uint64_t seed) {
  return random_complex(rows, rank, seed) * random_complex(rank, cols, seed + 7919);
}

inline Index random_index(std::mt19937_64& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

}  // namespace oracle
