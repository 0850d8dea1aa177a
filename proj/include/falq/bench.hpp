#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "falq/types.hpp"

namespace falq {

/// Zero-mean Gaussian field with covariance rho^(|m - m'| + |n - n'|).
struct StationaryFieldSpec {
  Index rows = 64;
  Index cols = 64;
  double rho = 0.9;
  std::uint64_t seed = 0;
};

/// A G B^T with G i.i.d. N(0, 1) (filled row-major from a seeded
/// mt19937_64) and A, B the Cholesky factors of the 1D Toeplitz
/// correlation matrices [rho^|i - j|].
RealMatrix gen_stationary_field(const StationaryFieldSpec& spec);

struct DomainReport {
  Index rank = 0;
  double spatial_err = 0.0;  // relative Frobenius error at `rank`
  double freq_err = 0.0;
  Index spatial_min_rank = 1;
  Index freq_min_rank = 1;
  bool fair_params = false;
  std::vector<std::uint64_t> seeds;
};

/// Rank-r relative truncation errors and minimum ranks for `target_rel` of
/// W (spatial) and of its half spectrum. With `fair_params` a complex rank
/// is charged as two real ranks: the spectrum is truncated at max(1, r/2)
/// and its minimum rank is reported doubled.
DomainReport compare_domains(const RealMatrix& w, Index rank, double target_rel,
                             bool fair_params = false);

struct TailRatioResult {
  double mean_ratio = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  bool passed = false;  // mean_ratio <= bound + 2 std_error
  std::vector<double> ratios;
  std::vector<std::uint64_t> seeds;
};

/// rho^2 / (1 - rho^2)^2
double tail_ratio_bound(double rho);

/// Tail-energy ratio sum_{k>r} s_k^2(spectrum) / sum_{k>r} s_k^2(W) over
/// seeds spec.seed .. spec.seed + n_seeds - 1. The spectrum is scaled by
/// 1/sqrt(rows * cols) so both sides carry the same total energy.
TailRatioResult tail_ratio_check(const StationaryFieldSpec& spec, Index rank, int n_seeds,
                                 int jobs = 1);

struct AblationRow {
  std::uint64_t seed = 0;
  std::string scheme;  // "polar" or "qim"
  int bits_a = 4;      // amplitude or real-part bits
  int bits_b = 4;      // phase or imaginary-part bits
  double mean_abs_phase_err = 0.0;
  double max_abs_phase_err = 0.0;
  double reconstruction_rel_err = 0.0;
};

/// Quantizes the rank-r residual of W's half spectrum with PolarQuant and
/// the QIM baseline at the same bit budget.
std::vector<AblationRow> quantizer_ablation(const RealMatrix& w, Index rank, int bits_a,
                                            int bits_b);
std::vector<AblationRow> quantizer_ablation_residual(const ComplexMatrix& residual, int bits_a,
                                                     int bits_b);

enum class Experiment { domains, tail_ratio, ablation };

struct BenchSpec {
  Experiment experiment = Experiment::domains;
  StationaryFieldSpec field{};
  int n_seeds = 10;
  Index rank = 8;
  double target_rel = 0.01;
  bool fair_params = false;
  int bits_a = 4;
  int bits_b = 4;
};

/// Parses a bench spec from JSON text; absent keys keep their defaults.
BenchSpec parse_bench_spec(const std::string& json_text);

struct BenchResult {
  std::string csv;
  std::string summary_json;
  bool passed = true;
};

BenchResult run_bench(const BenchSpec& spec, int jobs = 1);

void write_domain_csv(std::ostream& out, const std::vector<DomainReport>& rows,
                      const BenchSpec& spec);
void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows);

}  // namespace falq
