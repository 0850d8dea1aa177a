#include "falq/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "falq/error.hpp"
#include "falq/fft.hpp"

namespace falq {

namespace {

constexpr double kSymmetryTolerance = 1e-8;

// Transforms every column of `x` in place (length x.rows()).
void transform_columns(ComplexMatrix& x, Index first, Index count, bool inverse) {
  const FftPlan plan(static_cast<std::size_t>(x.rows()));
  std::vector<Complex> buf(static_cast<std::size_t>(x.rows()));
  for (Index j = first; j < first + count; ++j) {
    for (Index i = 0; i < x.rows(); ++i) buf[static_cast<std::size_t>(i)] = x(i, j);
    inverse ? plan.backward(buf) : plan.forward(buf);
    for (Index i = 0; i < x.rows(); ++i) x(i, j) = buf[static_cast<std::size_t>(i)];
  }
}

void transform_rows(ComplexMatrix& x, bool inverse) {
  const FftPlan plan(static_cast<std::size_t>(x.cols()));
  std::vector<Complex> buf(static_cast<std::size_t>(x.cols()));
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) buf[static_cast<std::size_t>(j)] = x(i, j);
    inverse ? plan.backward(buf) : plan.forward(buf);
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = buf[static_cast<std::size_t>(j)];
  }
}

template <typename Visit>
void for_each_constrained_pair(Index rows, Index half_cols, Visit&& visit) {
  const Index special[2] = {0, half_cols - 1};
  for (Index v : special) {
    for (Index u = 0; u < rows; ++u) {
      const Index mirror = (rows - u) % rows;
      if (mirror < u) continue;
      visit(u, mirror, v);
    }
  }
}

void validate(const HalfSpectrum& s) {
  if (s.rows < 1 || s.cols < 2 || s.cols % 2 != 0) {
    throw ParamError("half spectrum needs rows >= 1 and an even width >= 2");
  }
  if (s.data.rows() != s.rows || s.data.cols() != s.half_cols()) {
    throw ParamError("half spectrum data has shape " + std::to_string(s.data.rows()) + "x" +
                     std::to_string(s.data.cols()) + ", expected " + std::to_string(s.rows) +
                     "x" + std::to_string(s.half_cols()));
  }
  if (s.original_cols != s.cols && s.original_cols + 1 != s.cols) {
    throw ParamError("half spectrum original width inconsistent with transform width");
  }
}

}  // namespace

HalfSpectrum forward_dft2(const RealMatrix& w, WidthPolicy policy) {
  if (w.rows() < 1 || w.cols() < 1) throw ParamError("forward_dft2: empty matrix");
  if (!w.allFinite()) throw NumericError("forward_dft2: non-finite input");
  HalfSpectrum s;
  s.rows = w.rows();
  s.original_cols = w.cols();
  s.cols = w.cols();
  if (s.cols % 2 != 0) {
    if (policy == WidthPolicy::strict) {
      throw ParamError("forward_dft2: odd column count " + std::to_string(w.cols()) +
                       " (strict mode requires even width)");
    }
    s.cols += 1;
  }
  const Index half = s.half_cols();

  // Row transforms of the real input, keeping the non-redundant half.
  const FftPlan row_plan(static_cast<std::size_t>(s.cols));
  std::vector<Complex> buf(static_cast<std::size_t>(s.cols));
  s.data.resize(s.rows, half);
  for (Index i = 0; i < s.rows; ++i) {
    std::fill(buf.begin(), buf.end(), Complex(0.0, 0.0));
    for (Index j = 0; j < w.cols(); ++j) buf[static_cast<std::size_t>(j)] = Complex(w(i, j), 0.0);
    row_plan.forward(buf);
    for (Index j = 0; j < half; ++j) s.data(i, j) = buf[static_cast<std::size_t>(j)];
  }
  transform_columns(s.data, 0, half, false);
  return s;
}

double real_column_deviation(const HalfSpectrum& s) {
  double dev = 0.0;
  for_each_constrained_pair(s.rows, s.half_cols(), [&](Index u, Index mirror, Index v) {
    dev = std::max(dev, std::abs(s.data(u, v) - std::conj(s.data(mirror, v))));
  });
  return dev;
}

void project_real_columns(HalfSpectrum& s) {
  for_each_constrained_pair(s.rows, s.half_cols(), [&](Index u, Index mirror, Index v) {
    if (u == mirror) {
      s.data(u, v) = Complex(s.data(u, v).real(), 0.0);
      return;
    }
    const Complex avg = 0.5 * (s.data(u, v) + std::conj(s.data(mirror, v)));
    s.data(u, v) = avg;
    s.data(mirror, v) = std::conj(avg);
  });
}

ComplexMatrix expand_full(const HalfSpectrum& s) {
  validate(s);
  HalfSpectrum sym = s;
  project_real_columns(sym);
  const Index half = s.half_cols();
  ComplexMatrix full(s.rows, s.cols);
  full.leftCols(half) = sym.data;
  for (Index v = half; v < s.cols; ++v) {
    for (Index u = 0; u < s.rows; ++u) {
      full(u, v) = std::conj(sym.data((s.rows - u) % s.rows, s.cols - v));
    }
  }
  return full;
}

double check_conjugate_symmetry(const ComplexMatrix& f) {
  const Index m = f.rows();
  const Index n = f.cols();
  double dev = 0.0;
  for (Index u = 0; u < m; ++u) {
    for (Index v = 0; v < n; ++v) {
      dev = std::max(dev, std::abs(f(u, v) - std::conj(f((m - u) % m, (n - v) % n))));
    }
  }
  return dev;
}

ComplexMatrix dft2(const ComplexMatrix& x) {
  ComplexMatrix out = x;
  transform_rows(out, false);
  transform_columns(out, 0, out.cols(), false);
  return out;
}

ComplexMatrix idft2(const ComplexMatrix& x) {
  ComplexMatrix out = x;
  transform_rows(out, true);
  transform_columns(out, 0, out.cols(), true);
  out /= static_cast<double>(x.rows() * x.cols());
  return out;
}

InverseResult inverse_dft2_detailed(const HalfSpectrum& s) {
  validate(s);
  const double norm = s.data.norm();
  const double dev = real_column_deviation(s);
  if (dev > kSymmetryTolerance * norm) {
    throw NumericError("inverse_dft2: DC/Nyquist symmetry violated (deviation " +
                       std::to_string(dev) + ", spectrum norm " + std::to_string(norm) + ")");
  }
  const ComplexMatrix spatial = idft2(expand_full(s));
  InverseResult result;
  result.values = spatial.real().leftCols(s.original_cols);
  result.imag_residual = spatial.imag().norm();
  return result;
}

RealMatrix inverse_dft2(const HalfSpectrum& s) { return inverse_dft2_detailed(s).values; }

}  // namespace falq
