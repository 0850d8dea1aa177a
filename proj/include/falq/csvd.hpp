#pragma once

#include "falq/types.hpp"

namespace falq {

/// Thin SVD R = U diag(S) Vh with k = min(rows, cols). The phase of each
/// singular pair is fixed so the largest-modulus entry of the right
/// singular vector is real and positive.
struct ComplexSVD {
  ComplexMatrix u;   // rows x k, orthonormal columns
  RealVector s;      // k, descending, >= 0
  ComplexMatrix vh;  // k x cols, orthonormal rows
};

/// L1 = U_r sqrt(S_r), L2 = sqrt(S_r) Vh_r.
struct LowRankFactors {
  ComplexMatrix l1;
  ComplexMatrix l2;
  RealVector kept_singular_values;

  Index rank() const { return l1.cols(); }
  ComplexMatrix product() const { return l1 * l2; }
};

/// Singular values below this fraction of the largest are set to zero.
inline constexpr double kSingularFloor = 1e-12;

ComplexSVD complex_svd(const ComplexMatrix& r);

LowRankFactors truncate_factors(const ComplexSVD& svd, Index rank);

/// sqrt(sum_{k >= rank} s_k^2); zero when rank >= s.size().
double truncation_error(const RealVector& s, Index rank);

/// Smallest rank >= 1 whose relative truncation error is <= target_rel.
Index min_rank_for_error(const RealVector& s, double target_rel);

/// Number of singular values above the numerical floor.
Index numerical_rank(const RealVector& s);

}  // namespace falq
