#pragma once

#include "falq/types.hpp"

namespace falq {

enum class WidthPolicy {
  strict,   // odd widths are rejected
  pad_odd,  // odd widths get one zero column appended before the transform
};

/// The d1 x (d2/2 + 1) block of the unnormalized 2D DFT of a real matrix.
/// Columns 0 (DC) and half_cols()-1 (Nyquist) are self-conjugate along rows.
struct HalfSpectrum {
  Index rows = 0;
  Index cols = 0;           // transform width, always even
  Index original_cols = 0;  // width of the real input before padding
  ComplexMatrix data;

  Index half_cols() const { return cols / 2 + 1; }
  bool padded() const { return original_cols != cols; }
};

HalfSpectrum forward_dft2(const RealMatrix& w, WidthPolicy policy = WidthPolicy::strict);

/// Real matrix of size rows x original_cols. Throws NumericError when the
/// DC/Nyquist columns break conjugate symmetry by more than 1e-8 relative to
/// the spectrum's Frobenius norm.
RealMatrix inverse_dft2(const HalfSpectrum& s);

struct InverseResult {
  RealMatrix values;
  double imag_residual = 0.0;  // Frobenius norm of the discarded imaginary part
};
InverseResult inverse_dft2_detailed(const HalfSpectrum& s);

ComplexMatrix expand_full(const HalfSpectrum& s);

/// max |F[u,v] - conj(F[(M-u)%M, (N-v)%N])|
double check_conjugate_symmetry(const ComplexMatrix& f);

/// Largest conjugate-symmetry violation inside the DC and Nyquist columns.
double real_column_deviation(const HalfSpectrum& s);

/// Replaces the DC and Nyquist columns by the nearest (Frobenius) spectrum
/// that satisfies their self-conjugacy constraints.
void project_real_columns(HalfSpectrum& s);

/// Unnormalized full 2D DFT / inverse (inverse includes the 1/(M N) factor).
ComplexMatrix dft2(const ComplexMatrix& x);
ComplexMatrix idft2(const ComplexMatrix& x);

}  // namespace falq
