#pragma once

#include <optional>
#include <string>
#include <vector>

#include "falq/csvd.hpp"
#include "falq/polarquant.hpp"
#include "falq/spectral.hpp"
#include "falq/tensorio.hpp"
#include "falq/types.hpp"

namespace falq {

/// Non-negative calibration weights C in half-spectrum shape, with the
/// diagonal row/column scales derived from sqrt(C).
struct CalibrationMatrix {
  RealMatrix weights;       // C
  RealMatrix sqrt_weights;  // sqrt(C), element-wise
  RealVector row_scale;     // D_row: row means of sqrt(C)
  RealVector col_scale;     // D_col: column means of sqrt(C)
  std::optional<double> epsilon;  // diagonal dominance, square C only
  bool invertible = true;         // all row/column means > 0
};

/// Above this diagonal-dominance ratio the diagonal approximation is
/// considered unreliable; decomposition warns but proceeds.
inline constexpr double kDominanceGuardRail = 0.35;

CalibrationMatrix build_calibration(const RealMatrix& weights);

/// Rank-1 calibration C = outer(row_moments, col_moments) from per-row and
/// per-column second moments.
CalibrationMatrix calibration_from_moments(const RealVector& row_moments,
                                           const RealVector& col_moments);

/// ||offdiag(C)||_F / ||diag(C)||_F for square C.
double epsilon_dominance(const RealMatrix& c);

/// Rank-r factors of `residual`. Without calibration: truncated SVD. With
/// calibration: truncated SVD of D_row R D_col, unscaled afterwards.
LowRankFactors odc_decompose(const ComplexMatrix& residual, Index rank);
LowRankFactors odc_decompose(const ComplexMatrix& residual, const CalibrationMatrix& calib,
                             Index rank);

/// ||sqrt(C) .* |W - (Q + L1 L2)| ||_F, or the plain Frobenius norm of the
/// residual when `calib` is null.
double weighted_error(const ComplexMatrix& target, const ComplexMatrix& quantized,
                      const ComplexMatrix& l1, const ComplexMatrix& l2,
                      const CalibrationMatrix* calib = nullptr);

enum class FactorPrecision {
  float32,  // factors rounded to what the container stores
  float64,
};

struct FAConfig {
  Index rank = 0;  // 0 selects default_rank()
  int amp_bits = 4;
  int phase_bits = 4;
  int max_iters = 8;  // T: the loop runs max(T - 1, 1) rounds
  FactorPrecision factor_precision = FactorPrecision::float32;
  WidthPolicy width_policy = WidthPolicy::strict;
};

/// min(256, max(1, min(rows, half_cols) / 4))
Index default_rank(Index rows, Index half_cols);

struct FADecomposition {
  PolarCode code;
  LowRankFactors factors;
  FAConfig config;
  bool calibrated = false;
  std::vector<double> error_trace;
  double final_error = 0.0;
  int retained_round = 0;  // 1-based round whose iterate was kept
  bool stopped_early = false;
  Index rows = 0;
  Index cols = 0;  // transform width
  Index original_cols = 0;
  std::vector<std::string> warnings;

  Index half_cols() const { return cols / 2 + 1; }
};

FADecomposition fa_decompose(const RealMatrix& w, const FAConfig& config,
                             const std::optional<CalibrationMatrix>& calib = std::nullopt);

/// Same loop on an already-transformed spectrum.
FADecomposition fa_decompose_spectrum(const HalfSpectrum& spectrum, const FAConfig& config,
                                      const std::optional<CalibrationMatrix>& calib = std::nullopt);

/// Q + L1 L2 as a half spectrum with DC/Nyquist columns projected onto their
/// self-conjugacy constraints.
HalfSpectrum assemble_spectrum(const FADecomposition& dec);

RealMatrix reconstruct_spatial(const FADecomposition& dec);

/// Container holding the factors (as float32), packed index streams, and
/// a JSON metadata block with the error trace.
CompressedContainer to_container(const FADecomposition& dec, const std::string& source_name = "");

/// Rebuilds a decomposition from a container. The error trace comes from
/// the metadata block when present.
FADecomposition from_container(const CompressedContainer& c);

}  // namespace falq
