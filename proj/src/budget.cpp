#include "falq/budget.hpp"

#include "falq/error.hpp"

namespace falq {

namespace {

struct DimSums {
  double area = 0.0;       // sum d1 d2
  double perimeter = 0.0;  // sum (d1 + d2)
};

DimSums sums(const LayerDims& dims) {
  if (dims.empty()) throw ParamError("layer dims are empty");
  DimSums s;
  for (const auto& d : dims) {
    if (d.rows < 1 || d.cols < 1) throw ParamError("layer dims must be >= 1");
    s.area += static_cast<double>(d.rows) * static_cast<double>(d.cols);
    s.perimeter += static_cast<double>(d.rows) + static_cast<double>(d.cols);
  }
  return s;
}

}  // namespace

LayerDims llama3_8b_block() {
  return {
      {4096, 4096},   // query
      {4096, 1024},   // key
      {4096, 1024},   // value
      {4096, 4096},   // output
      {14336, 4096},  // gate
      {14336, 4096},  // up
      {4096, 14336},  // down
  };
}

double average_bits(const LayerDims& dims, const BudgetConfig& cfg) {
  if (!(cfg.backbone_bits > 0.0 && cfg.backbone_bits < cfg.factor_bits) || cfg.rank < 0.0) {
    throw ParamError("budget config needs 0 < B_Q < B_L and k >= 0");
  }
  const DimSums s = sums(dims);
  return (cfg.backbone_bits * s.area + cfg.rank * cfg.factor_bits * s.perimeter) / s.area;
}

double rank_threshold(const LayerDims& dims, double backbone_bits, double factor_bits) {
  if (!(backbone_bits > 0.0 && backbone_bits < factor_bits)) {
    throw ParamError("rank_threshold needs 0 < B_Q < B_L");
  }
  const DimSums s = sums(dims);
  return (1.0 - backbone_bits / factor_bits) * s.area / s.perimeter;
}

double break_even_rank(std::uint64_t rows, std::uint64_t original_cols, std::uint64_t half_cols,
                       int amp_bits, int phase_bits, int original_bits_per_scalar,
                       bool include_header) {
  const double index_bits = 8.0 * static_cast<double>(packed_size(rows * half_cols, amp_bits) +
                                                      packed_size(rows * half_cols, phase_bits));
  const double overhead = include_header ? 8.0 * CompressedContainer::kHeaderBytes : 0.0;
  const double original = static_cast<double>(rows * original_cols) * original_bits_per_scalar;
  const double per_rank = 64.0 * static_cast<double>(rows + half_cols);
  return (original - index_bits - overhead) / per_rank;
}

ContainerCost container_ratio(const CompressedContainer& c, int original_bits_per_scalar,
                              bool include_header) {
  if (original_bits_per_scalar < 1) throw ParamError("original bits per scalar must be >= 1");
  ContainerCost cost;
  cost.factor_bits = 64u * (c.rows * c.rank + c.rank * c.half_cols);
  cost.index_bits = 8u * (c.amp_stream.size() + c.phase_stream.size());
  cost.overhead_bits = include_header ? 8u * CompressedContainer::kHeaderBytes : 0u;
  cost.compressed_bits = cost.factor_bits + cost.index_bits + cost.overhead_bits;
  cost.original_bits =
      c.rows * c.original_cols * static_cast<std::uint64_t>(original_bits_per_scalar);
  cost.ratio = static_cast<double>(cost.original_bits) / static_cast<double>(cost.compressed_bits);
  const double area = static_cast<double>(c.rows) * static_cast<double>(c.original_cols);
  cost.complex_coefficient_fraction = static_cast<double>(c.rows * c.half_cols) / area;
  cost.stored_scalar_fraction = 2.0 * cost.complex_coefficient_fraction;
  cost.break_even_rank = break_even_rank(c.rows, c.original_cols, c.half_cols, c.amp_bits,
                                         c.phase_bits, original_bits_per_scalar, include_header);
  return cost;
}

}  // namespace falq
