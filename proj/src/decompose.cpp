#include "falq/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "falq/error.hpp"

namespace falq {

namespace {

RealVector mean_rows(const RealMatrix& m) { return m.rowwise().mean(); }
RealVector mean_cols(const RealMatrix& m) { return m.colwise().mean().transpose(); }

ComplexMatrix round_to_float(const ComplexMatrix& m) {
  // scalar lambda: Eigen 3.4 packet casts leave the vector tail unrounded
  return m.unaryExpr([](const Complex& z) {
    return Complex(static_cast<float>(z.real()), static_cast<float>(z.imag()));
  });
}

void warn(FADecomposition& dec, std::string message) {
  spdlog::warn("{}", message);
  dec.warnings.push_back(std::move(message));
}

}  // namespace

CalibrationMatrix build_calibration(const RealMatrix& weights) {
  if (weights.size() == 0) throw ParamError("calibration matrix is empty");
  if (!weights.allFinite()) throw NumericError("calibration matrix has non-finite entries");
  if ((weights.array() < 0.0).any()) throw ParamError("calibration matrix has negative entries");
  CalibrationMatrix c;
  c.weights = weights;
  c.sqrt_weights = weights.cwiseSqrt();
  c.row_scale = mean_rows(c.sqrt_weights);
  c.col_scale = mean_cols(c.sqrt_weights);
  c.invertible = (c.row_scale.array() > 0.0).all() && (c.col_scale.array() > 0.0).all();
  if (weights.rows() == weights.cols() && weights.diagonal().norm() > 0.0) {
    c.epsilon = epsilon_dominance(weights);
  }
  return c;
}

CalibrationMatrix calibration_from_moments(const RealVector& row_moments,
                                           const RealVector& col_moments) {
  return build_calibration(row_moments * col_moments.transpose());
}

double epsilon_dominance(const RealMatrix& c) {
  if (c.rows() != c.cols()) throw ParamError("epsilon_dominance: matrix must be square");
  const double diag = c.diagonal().norm();
  if (diag == 0.0) throw NumericError("epsilon_dominance: zero diagonal norm");
  // summed directly; total minus diagonal cancels badly when C is near diagonal
  double off_sq = 0.0;
  for (Index j = 0; j < c.cols(); ++j) {
    for (Index i = 0; i < c.rows(); ++i) {
      if (i != j) off_sq += c(i, j) * c(i, j);
    }
  }
  return std::sqrt(off_sq) / diag;
}

LowRankFactors odc_decompose(const ComplexMatrix& residual, Index rank) {
  return truncate_factors(complex_svd(residual), rank);
}

LowRankFactors odc_decompose(const ComplexMatrix& residual, const CalibrationMatrix& calib,
                             Index rank) {
  if (calib.row_scale.size() != residual.rows() || calib.col_scale.size() != residual.cols()) {
    throw ParamError("odc_decompose: calibration shape does not match the residual");
  }
  if (!calib.invertible) throw NumericError("odc_decompose: calibration diagonal is singular");
  const auto d_row = calib.row_scale.cast<Complex>().asDiagonal();
  const auto d_col = calib.col_scale.cast<Complex>().asDiagonal();
  const ComplexMatrix scaled = d_row * residual * d_col;
  LowRankFactors f = truncate_factors(complex_svd(scaled), rank);
  f.l1 = calib.row_scale.cwiseInverse().cast<Complex>().asDiagonal() * f.l1;
  f.l2 = f.l2 * calib.col_scale.cwiseInverse().cast<Complex>().asDiagonal();
  return f;
}

double weighted_error(const ComplexMatrix& target, const ComplexMatrix& quantized,
                      const ComplexMatrix& l1, const ComplexMatrix& l2,
                      const CalibrationMatrix* calib) {
  if (quantized.rows() != target.rows() || quantized.cols() != target.cols() ||
      l1.rows() != target.rows() || l2.cols() != target.cols() || l1.cols() != l2.rows()) {
    throw ParamError("weighted_error: shape mismatch");
  }
  if (calib && (calib->weights.rows() != target.rows() || calib->weights.cols() != target.cols())) {
    throw ParamError("weighted_error: calibration shape mismatch");
  }
  const ComplexMatrix approx = quantized + l1 * l2;
  // fixed summation order keeps error traces bit-stable
  double acc = 0.0;
  for (Index i = 0; i < target.rows(); ++i) {
    for (Index j = 0; j < target.cols(); ++j) {
      const double e = std::norm(target(i, j) - approx(i, j));
      acc += calib ? calib->weights(i, j) * e : e;
    }
  }
  return std::sqrt(acc);
}

Index default_rank(Index rows, Index half_cols) {
  return std::min<Index>(256, std::max<Index>(1, std::min(rows, half_cols) / 4));
}

FADecomposition fa_decompose(const RealMatrix& w, const FAConfig& config,
                             const std::optional<CalibrationMatrix>& calib) {
  return fa_decompose_spectrum(forward_dft2(w, config.width_policy), config, calib);
}

FADecomposition fa_decompose_spectrum(const HalfSpectrum& spectrum, const FAConfig& config,
                                      const std::optional<CalibrationMatrix>& calib) {
  FADecomposition dec;
  dec.rows = spectrum.rows;
  dec.cols = spectrum.cols;
  dec.original_cols = spectrum.original_cols;
  dec.config = config;

  const Index half = spectrum.half_cols();
  const Index max_rank = std::min(spectrum.rows, half);
  if (dec.config.rank == 0) dec.config.rank = default_rank(spectrum.rows, half);
  if (dec.config.rank < 1 || dec.config.rank > max_rank) {
    throw ParamError("rank " + std::to_string(dec.config.rank) + " outside 1.." +
                     std::to_string(max_rank) + " for a " + std::to_string(spectrum.rows) + "x" +
                     std::to_string(half) + " half spectrum");
  }
  if (config.max_iters < 1) throw ParamError("max_iters must be >= 1");
  if (config.amp_bits < 1 || config.amp_bits > 16 || config.phase_bits < 1 ||
      config.phase_bits > 16) {
    throw ParamError("bit-widths must be in 1..16");
  }

  const CalibrationMatrix* active = nullptr;
  if (calib) {
    if (calib->weights.rows() != spectrum.rows || calib->weights.cols() != half) {
      throw ParamError("calibration shape " + std::to_string(calib->weights.rows()) + "x" +
                       std::to_string(calib->weights.cols()) + " does not match half spectrum " +
                       std::to_string(spectrum.rows) + "x" + std::to_string(half));
    }
    if (!calib->invertible) {
      warn(dec, "calibration has a zero row or column mean; falling back to uncalibrated mode");
    } else {
      active = &*calib;
      if (calib->epsilon && *calib->epsilon > kDominanceGuardRail) {
        warn(dec, "calibration diagonal dominance epsilon = " + std::to_string(*calib->epsilon) +
                      " exceeds guard-rail " + std::to_string(kDominanceGuardRail) +
                      "; diagonal approximation may be loose");
      }
    }
  }
  dec.calibrated = active != nullptr;

  const ComplexMatrix& target = spectrum.data;
  ComplexMatrix quantized = ComplexMatrix::Zero(target.rows(), target.cols());
  double previous = std::numeric_limits<double>::infinity();
  const int rounds = std::max(config.max_iters - 1, 1);

  for (int t = 1; t <= rounds; ++t) {
    const ComplexMatrix residual = target - quantized;
    LowRankFactors factors = active ? odc_decompose(residual, *active, dec.config.rank)
                                    : odc_decompose(residual, dec.config.rank);
    if (config.factor_precision == FactorPrecision::float32) {
      factors.l1 = round_to_float(factors.l1);
      factors.l2 = round_to_float(factors.l2);
    }
    PolarCode code = polar_quantize(target - factors.product(), config.amp_bits, config.phase_bits);
    quantized = polar_dequantize(code);
    const double err = weighted_error(target, quantized, factors.l1, factors.l2, active);
    dec.error_trace.push_back(err);
    spdlog::debug("round {}: error {}", t, err);
    if (err > previous) {
      dec.stopped_early = true;
      break;
    }
    previous = err;
    dec.code = std::move(code);
    dec.factors = std::move(factors);
    dec.final_error = err;
    dec.retained_round = t;
  }
  return dec;
}

HalfSpectrum assemble_spectrum(const FADecomposition& dec) {
  HalfSpectrum s;
  s.rows = dec.rows;
  s.cols = dec.cols;
  s.original_cols = dec.original_cols;
  s.data = polar_dequantize(dec.code) + dec.factors.product();
  project_real_columns(s);
  return s;
}

RealMatrix reconstruct_spatial(const FADecomposition& dec) {
  return inverse_dft2(assemble_spectrum(dec));
}

CompressedContainer to_container(const FADecomposition& dec, const std::string& source_name) {
  CompressedContainer c;
  c.rows = static_cast<std::uint64_t>(dec.rows);
  c.cols = static_cast<std::uint64_t>(dec.cols);
  c.original_cols = static_cast<std::uint64_t>(dec.original_cols);
  c.half_cols = static_cast<std::uint64_t>(dec.half_cols());
  c.rank = static_cast<std::uint64_t>(dec.factors.rank());
  c.amp_bits = static_cast<std::uint8_t>(dec.code.amp_bits);
  c.phase_bits = static_cast<std::uint8_t>(dec.code.phase_bits);
  c.r_max = dec.code.r_max;
  if (dec.calibrated) c.flags |= container_flags::calibrated;
  if (dec.original_cols != dec.cols) c.flags |= container_flags::padded_width;

  c.left.reserve(static_cast<std::size_t>(dec.factors.l1.size()));
  for (Index i = 0; i < dec.factors.l1.rows(); ++i) {
    for (Index k = 0; k < dec.factors.l1.cols(); ++k) {
      c.left.emplace_back(static_cast<std::complex<float>>(dec.factors.l1(i, k)));
    }
  }
  c.right.reserve(static_cast<std::size_t>(dec.factors.l2.size()));
  for (Index k = 0; k < dec.factors.l2.rows(); ++k) {
    for (Index j = 0; j < dec.factors.l2.cols(); ++j) {
      c.right.emplace_back(static_cast<std::complex<float>>(dec.factors.l2(k, j)));
    }
  }
  c.amp_stream = pack_bits(dec.code.amp_index, dec.code.amp_bits);
  c.phase_stream = pack_bits(dec.code.phase_index, dec.code.phase_bits);

  nlohmann::json meta;
  meta["source"] = source_name;
  meta["error_trace"] = dec.error_trace;
  meta["final_error"] = dec.final_error;
  meta["retained_round"] = dec.retained_round;
  meta["stopped_early"] = dec.stopped_early;
  meta["max_iters"] = dec.config.max_iters;
  c.metadata = meta.dump();
  return c;
}

FADecomposition from_container(const CompressedContainer& c) {
  FADecomposition dec;
  dec.rows = static_cast<Index>(c.rows);
  dec.cols = static_cast<Index>(c.cols);
  dec.original_cols = static_cast<Index>(c.original_cols);
  dec.calibrated = (c.flags & container_flags::calibrated) != 0;
  const Index rank = static_cast<Index>(c.rank);
  const Index half = static_cast<Index>(c.half_cols);

  dec.factors.l1.resize(dec.rows, rank);
  std::size_t k = 0;
  for (Index i = 0; i < dec.rows; ++i) {
    for (Index j = 0; j < rank; ++j) dec.factors.l1(i, j) = Complex(c.left[k++]);
  }
  dec.factors.l2.resize(rank, half);
  k = 0;
  for (Index i = 0; i < rank; ++i) {
    for (Index j = 0; j < half; ++j) dec.factors.l2(i, j) = Complex(c.right[k++]);
  }

  const auto cells = static_cast<std::size_t>(dec.rows * half);
  dec.code.rows = dec.rows;
  dec.code.cols = half;
  dec.code.amp_bits = c.amp_bits;
  dec.code.phase_bits = c.phase_bits;
  dec.code.r_max = c.r_max;
  dec.code.amp_index = unpack_bits(c.amp_stream, c.amp_bits, cells);
  dec.code.phase_index = unpack_bits(c.phase_stream, c.phase_bits, cells);

  dec.config.rank = rank;
  dec.config.amp_bits = c.amp_bits;
  dec.config.phase_bits = c.phase_bits;
  dec.config.width_policy =
      dec.original_cols != dec.cols ? WidthPolicy::pad_odd : WidthPolicy::strict;

  if (c.metadata) {
    try {
      const auto meta = nlohmann::json::parse(*c.metadata);
      dec.error_trace = meta.value("error_trace", std::vector<double>{});
      dec.final_error = meta.value("final_error", 0.0);
      dec.retained_round = meta.value("retained_round", 0);
      dec.stopped_early = meta.value("stopped_early", false);
      dec.config.max_iters = meta.value("max_iters", dec.config.max_iters);
    } catch (const nlohmann::json::exception&) {
      // metadata never feeds the numeric path
      dec.warnings.emplace_back("container metadata is not valid JSON; ignored");
    }
  }
  return dec;
}

}  // namespace falq
