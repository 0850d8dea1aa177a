#include "falq/polarquant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "falq/error.hpp"

namespace falq {

namespace {

constexpr double kPi = std::numbers::pi;

void check_bits(int bits, const char* what) {
  if (bits < 1 || bits > 16) {
    throw ParamError(std::string(what) + " bit-width must be in 1..16, got " + std::to_string(bits));
  }
}

double dequantized_phase(const PolarCode& code, std::size_t k) {
  return static_cast<double>(code.phase_index[k]) * code.phase_step() - kPi;
}

}  // namespace

double PolarCode::amp_step() const {
  return r_max / static_cast<double>((1u << amp_bits) - 1u);
}

double PolarCode::phase_step() const {
  return 2.0 * kPi / static_cast<double>(1u << phase_bits);
}

double wrap_phase(double theta) {
  double t = std::fmod(theta + kPi, 2.0 * kPi);
  if (t < 0.0) t += 2.0 * kPi;
  return t - kPi;
}

double phase_of(Complex z) {
  if (z.real() == 0.0 && z.imag() == 0.0) return 0.0;
  return std::atan2(z.imag(), z.real());
}

double phase_bound_coefficient(int phase_bits) {
  return kPi * kPi / (3.0 * std::ldexp(1.0, 2 * phase_bits));
}

PolarCode polar_quantize(const ComplexMatrix& r, int amp_bits, int phase_bits) {
  check_bits(amp_bits, "amplitude");
  check_bits(phase_bits, "phase");
  if (!r.allFinite()) throw NumericError("polar_quantize: non-finite entries");

  PolarCode code;
  code.rows = r.rows();
  code.cols = r.cols();
  code.amp_bits = amp_bits;
  code.phase_bits = phase_bits;
  const auto n = static_cast<std::size_t>(r.size());
  code.amp_index.resize(n);
  code.phase_index.resize(n);

  double r_max = 0.0;
  for (Index i = 0; i < r.rows(); ++i) {
    for (Index j = 0; j < r.cols(); ++j) r_max = std::max(r_max, std::abs(r(i, j)));
  }
  code.r_max = r_max;

  const double amp_step = code.amp_step();
  const double phase_step = code.phase_step();
  const std::uint32_t amp_top = code.amp_levels() - 1u;
  const std::uint32_t phase_mask = code.phase_levels() - 1u;
  std::size_t k = 0;
  for (Index i = 0; i < r.rows(); ++i) {
    for (Index j = 0; j < r.cols(); ++j, ++k) {
      const Complex z = r(i, j);
      if (amp_step > 0.0) {
        const double q = std::round(std::abs(z) / amp_step);
        code.amp_index[k] = static_cast<std::uint32_t>(std::clamp(q, 0.0, static_cast<double>(amp_top)));
      } else {
        code.amp_index[k] = 0;
      }
      const double q = std::round((phase_of(z) + kPi) / phase_step);
      // q can reach 2^b at theta -> pi; the lattice is circular.
      code.phase_index[k] = static_cast<std::uint32_t>(q) & phase_mask;
    }
  }
  return code;
}

ComplexMatrix polar_dequantize(const PolarCode& code) {
  const auto n = static_cast<std::size_t>(code.rows * code.cols);
  if (code.amp_index.size() != n || code.phase_index.size() != n) {
    throw ParamError("polar_dequantize: index arrays do not match the code shape");
  }
  ComplexMatrix out(code.rows, code.cols);
  const double amp_step = code.amp_step();
  std::size_t k = 0;
  for (Index i = 0; i < code.rows; ++i) {
    for (Index j = 0; j < code.cols; ++j, ++k) {
      const double amp = static_cast<double>(code.amp_index[k]) * amp_step;
      out(i, j) = std::polar(amp, dequantized_phase(code, k));
    }
  }
  return out;
}

ComplexMatrix qim_quantize(const ComplexMatrix& r, int re_bits, int im_bits) {
  check_bits(re_bits, "real-part");
  check_bits(im_bits, "imaginary-part");
  if (!r.allFinite()) throw NumericError("qim_quantize: non-finite entries");

  const double m_re = r.size() > 0 ? r.real().cwiseAbs().maxCoeff() : 0.0;
  const double m_im = r.size() > 0 ? r.imag().cwiseAbs().maxCoeff() : 0.0;
  auto grid = [](double x, double m, int bits) {
    if (m == 0.0) return 0.0;
    const double top = std::ldexp(1.0, bits) - 1.0;
    const double step = 2.0 * m / top;
    const double q = std::clamp(std::round((x + m) / step), 0.0, top);
    // land endpoints exactly on +-m
    return q == top ? m : q * step - m;
  };
  ComplexMatrix out(r.rows(), r.cols());
  for (Index i = 0; i < r.rows(); ++i) {
    for (Index j = 0; j < r.cols(); ++j) {
      out(i, j) = Complex(grid(r(i, j).real(), m_re, re_bits), grid(r(i, j).imag(), m_im, im_bits));
    }
  }
  return out;
}

PhaseErrorStats phase_error_stats(const ComplexMatrix& r, const PolarCode& code) {
  if (code.rows != r.rows() || code.cols != r.cols()) {
    throw ParamError("phase_error_stats: code shape does not match the matrix");
  }
  PhaseErrorStats st;
  const ComplexMatrix q = polar_dequantize(code);
  const double n = static_cast<double>(r.size());
  if (r.size() == 0) return st;
  std::size_t k = 0;
  for (Index i = 0; i < r.rows(); ++i) {
    for (Index j = 0; j < r.cols(); ++j, ++k) {
      const Complex w = r(i, j);
      const double amp = std::abs(w);
      const double theta_hat = dequantized_phase(code, k);
      const double err = std::abs(wrap_phase(phase_of(w) - theta_hat));
      st.mean_abs_phase_err += err;
      st.max_abs_phase_err = std::max(st.max_abs_phase_err, err);
      st.mean_sq_amplitude += amp * amp;
      st.mean_sq_complex_err += std::norm(w - std::polar(amp, theta_hat));
      st.mean_sq_total_err += std::norm(w - q(i, j));
    }
  }
  st.mean_abs_phase_err /= n;
  st.mean_sq_amplitude /= n;
  st.mean_sq_complex_err /= n;
  st.mean_sq_total_err /= n;
  st.bound = st.mean_sq_amplitude * phase_bound_coefficient(code.phase_bits);
  st.within_bound = st.mean_sq_complex_err <= st.bound * 1.05;
  return st;
}

}  // namespace falq
