#pragma once

#include <cstdint>
#include <vector>

#include "falq/tensorio.hpp"

namespace falq {

struct MatrixShape {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
};

/// Weight matrices of one block (e.g. q, k, v, o, gate, up, down).
using LayerDims = std::vector<MatrixShape>;

struct BudgetConfig {
  double backbone_bits = 2.0;  // B_Q
  double factor_bits = 16.0;   // B_L
  double rank = 0.0;           // k
};

/// The seven projections of one LLaMA-3-8B transformer block.
LayerDims llama3_8b_block();

/// sum_i (B_Q d1 d2 + k B_L (d1 + d2)) / sum_i d1 d2
double average_bits(const LayerDims& dims, const BudgetConfig& cfg);

/// (1 - B_Q / B_L) sum d1 d2 / sum (d1 + d2): average_bits < B_L iff k is
/// below this value.
double rank_threshold(const LayerDims& dims, double backbone_bits, double factor_bits);

struct ContainerCost {
  std::uint64_t factor_bits = 0;
  std::uint64_t index_bits = 0;
  std::uint64_t overhead_bits = 0;
  std::uint64_t compressed_bits = 0;
  std::uint64_t original_bits = 0;
  double ratio = 0.0;
  double stored_scalar_fraction = 0.0;        // 2 * rows * half_cols / (rows * cols)
  double complex_coefficient_fraction = 0.0;  // rows * half_cols / (rows * cols)
  double break_even_rank = 0.0;
};

/// True stored cost of a container: complex float32 factors (64 bits per
/// entry), the two packed index streams, and the fixed header when
/// `include_header` is set. The optional metadata block is not counted.
ContainerCost container_ratio(const CompressedContainer& c, int original_bits_per_scalar,
                              bool include_header = true);

/// Rank below which the container is smaller than the original matrix.
double break_even_rank(std::uint64_t rows, std::uint64_t original_cols, std::uint64_t half_cols,
                       int amp_bits, int phase_bits, int original_bits_per_scalar,
                       bool include_header = true);

}  // namespace falq
