#include "falq/csvd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "falq/error.hpp"

namespace falq {

ComplexSVD complex_svd(const ComplexMatrix& r) {
  if (r.rows() < 1 || r.cols() < 1) throw ParamError("complex_svd: empty matrix");
  if (!r.allFinite()) throw NumericError("complex_svd: non-finite entries");

  Eigen::BDCSVD<ComplexMatrix> solver(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw NumericError("complex_svd: no convergence on " + std::to_string(r.rows()) + "x" +
                       std::to_string(r.cols()) + " matrix");
  }
  const Index k = std::min(r.rows(), r.cols());
  const RealVector& raw_s = solver.singularValues();

  // Stable ordering keeps equal singular values in the solver's index order.
  std::vector<Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return raw_s(a) > raw_s(b); });

  ComplexSVD out;
  out.u.resize(r.rows(), k);
  out.s.resize(k);
  out.vh.resize(k, r.cols());
  const double floor = k > 0 ? kSingularFloor * raw_s(order[0]) : 0.0;
  for (Index j = 0; j < k; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    auto u = solver.matrixU().col(src);
    auto v = solver.matrixV().col(src);

    Index pivot = 0;
    double best = -1.0;
    for (Index i = 0; i < v.size(); ++i) {
      const double mag = std::abs(v(i));
      if (mag > best) {
        best = mag;
        pivot = i;
      }
    }
    const Complex phase = best > 0.0 ? std::conj(v(pivot)) / best : Complex(1.0, 0.0);
    out.u.col(j) = u * phase;
    out.vh.row(j) = (v * phase).adjoint();
    out.vh(j, pivot) = Complex(out.vh(j, pivot).real(), 0.0);
    out.s(j) = raw_s(src) < floor ? 0.0 : raw_s(src);
  }
  return out;
}

LowRankFactors truncate_factors(const ComplexSVD& svd, Index rank) {
  const Index k = svd.s.size();
  if (rank < 1 || rank > k) {
    throw ParamError("truncate_factors: rank " + std::to_string(rank) + " outside 1.." +
                     std::to_string(k));
  }
  const RealVector root = svd.s.head(rank).cwiseSqrt();
  LowRankFactors f;
  f.l1 = svd.u.leftCols(rank) * root.cast<Complex>().asDiagonal();
  f.l2 = root.cast<Complex>().asDiagonal() * svd.vh.topRows(rank);
  f.kept_singular_values = svd.s.head(rank);
  return f;
}

double truncation_error(const RealVector& s, Index rank) {
  double tail = 0.0;
  // smallest terms first
  for (Index k = s.size() - 1; k >= std::max<Index>(rank, 0); --k) tail += s(k) * s(k);
  return std::sqrt(tail);
}

Index min_rank_for_error(const RealVector& s, double target_rel) {
  if (!(target_rel > 0.0 && target_rel < 1.0)) {
    throw ParamError("min_rank_for_error: target must lie in (0, 1)");
  }
  const double total = s.norm();
  if (total == 0.0 || s.size() == 0) return 1;
  // suffix sums, accumulated from the small end
  std::vector<double> tail(static_cast<std::size_t>(s.size()) + 1, 0.0);
  for (Index k = s.size() - 1; k >= 0; --k) {
    tail[static_cast<std::size_t>(k)] = tail[static_cast<std::size_t>(k) + 1] + s(k) * s(k);
  }
  for (Index r = 1; r <= s.size(); ++r) {
    if (std::sqrt(tail[static_cast<std::size_t>(r)]) / total <= target_rel) return r;
  }
  return s.size();
}

Index numerical_rank(const RealVector& s) {
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double floor = kSingularFloor * s(0);
  Index n = 0;
  for (Index k = 0; k < s.size(); ++k) n += s(k) >= floor && s(k) > 0.0 ? 1 : 0;
  return n;
}

}  // namespace falq
