#pragma once

#include <cstdint>
#include <vector>

#include "falq/types.hpp"

namespace falq {

/// Polar-coordinate code of a complex matrix: per-matrix amplitude scale
/// r_max, uniform amplitude lattice on [0, r_max] and uniform phase lattice
/// on [-pi, pi). Index vectors are row-major.
struct PolarCode {
  Index rows = 0;
  Index cols = 0;
  int amp_bits = 4;
  int phase_bits = 4;
  double r_max = 0.0;
  std::vector<std::uint32_t> amp_index;
  std::vector<std::uint32_t> phase_index;

  double amp_step() const;
  double phase_step() const;
  std::uint32_t amp_levels() const { return 1u << amp_bits; }
  std::uint32_t phase_levels() const { return 1u << phase_bits; }

  bool operator==(const PolarCode&) const = default;
};

PolarCode polar_quantize(const ComplexMatrix& r, int amp_bits, int phase_bits);
ComplexMatrix polar_dequantize(const PolarCode& code);

/// Baseline: independent uniform quantization of real and imaginary parts,
/// each on 2^bits levels spanning [-m, m] with m the largest magnitude of
/// that part. Returns the reconstruction.
ComplexMatrix qim_quantize(const ComplexMatrix& r, int re_bits, int im_bits);

/// Wraps an angle to [-pi, pi).
double wrap_phase(double theta);

/// Phase of a complex value with atan2(0, 0) := 0 (also for signed zeros).
double phase_of(Complex z);

/// pi^2 / (3 * 2^(2 b)): the phase-only error bound coefficient on E[r^2].
double phase_bound_coefficient(int phase_bits);

struct PhaseErrorStats {
  double mean_abs_phase_err = 0.0;
  double max_abs_phase_err = 0.0;
  double mean_sq_amplitude = 0.0;     // E[r^2]
  double mean_sq_complex_err = 0.0;   // phase-only: |w - r e^{i theta_hat}|^2
  double mean_sq_total_err = 0.0;     // |w - w_hat|^2 with both lattices
  double bound = 0.0;                 // E[r^2] * phase_bound_coefficient
  bool within_bound = false;          // phase-only error <= bound * 1.05
};

PhaseErrorStats phase_error_stats(const ComplexMatrix& r, const PolarCode& code);

}  // namespace falq
