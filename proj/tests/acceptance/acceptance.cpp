// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "falq/bench.hpp"
#include "falq/budget.hpp"
#include "falq/csvd.hpp"
#include "falq/decompose.hpp"
#include "falq/polarquant.hpp"
#include "falq/spectral.hpp"
#include "falq/tensorio.hpp"
#include "oracles.hpp"

using namespace falq;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

class Detail {
 public:
  template <typename T>
  Detail& operator<<(const T& v) {
    ss_ << v;
    return *this;
  }
  std::string str() const { return ss_.str(); }

 private:
  std::ostringstream ss_;
};

struct Criterion {
  const char* id;
  const char* title;
  double limit_seconds;
  std::function<Outcome()> run;
};

Outcome ac1_dft() {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = oracle::random_index(rng, 1, 16);
    const Index n = 2 * oracle::random_index(rng, 1, 8);
    const RealMatrix w = oracle::random_real(m, n, rng());
    const ComplexMatrix got = expand_full(forward_dft2(w));
    const ComplexMatrix ref = oracle::naive_dft2(w.cast<Complex>());
    worst = std::max(worst, (got - ref).cwiseAbs().maxCoeff());
  }
  const RealMatrix big = oracle::random_real(64, 64, 2);
  const InverseResult back = inverse_dft2_detailed(forward_dft2(big));
  const double rt = (back.values - big).norm() / big.norm();
  Detail d;
  d << "max |dev| vs double sum " << worst << " (< 1e-9), 64x64 round-trip " << rt << " (< 1e-10)";
  return {worst < 1e-9 && rt < 1e-10 && back.imag_residual < 1e-10 * big.norm(), d.str()};
}

Outcome ac2_symmetry() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index m = oracle::random_index(rng, 1, 64);
    const Index n = oracle::random_index(rng, 1, 64);
    const RealMatrix w = oracle::random_real(m, n, rng());
    const ComplexMatrix f = dft2(w.cast<Complex>());
    worst = std::max(worst, check_conjugate_symmetry(f) / f.cwiseAbs().maxCoeff());
  }
  Detail d;
  d << "max deviation / ||F||_max over 1000 spectra " << worst << " (< 1e-9)";
  return {worst < 1e-9, d.str()};
}

Outcome ac3_eckart_young() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  int checks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Index m = oracle::random_index(rng, 1, 24);
    const Index n = oracle::random_index(rng, 1, 24);
    const ComplexMatrix r = oracle::random_complex(m, n, rng());
    const ComplexSVD svd = complex_svd(r);
    for (Index k = 1; k <= svd.s.size(); ++k) {
      const double got = (r - truncate_factors(svd, k).product()).norm();
      const double want = truncation_error(svd.s, k);
      // at full rank the tail is empty; compare against the matrix scale instead
      const double rel = want > 0.0 ? std::abs(got - want) / want : got / r.norm();
      worst = std::max(worst, rel);
      ++checks;
    }
  }
  Detail d;
  d << checks << " (matrix, rank) pairs, max rel dev " << worst << " (< 1e-8)";
  return {worst < 1e-8, d.str()};
}

Outcome ac4_polarquant() {
  const double pi = std::numbers::pi;
  bool ok = true;
  Detail d;
  for (int bt : {2, 4, 6}) {
    std::mt19937_64 rng(40 + static_cast<std::uint64_t>(bt));
    std::uniform_real_distribution<double> amp(0.0, 1.0);
    std::uniform_real_distribution<double> phase(-pi, pi);
    ComplexMatrix r(100, 1000);
    for (Index i = 0; i < r.rows(); ++i)
      for (Index j = 0; j < r.cols(); ++j) r(i, j) = std::polar(amp(rng), phase(rng));
    const int br = 4;
    const PolarCode code = polar_quantize(r, br, bt);
    const double dt = code.phase_step();
    const double dr = code.amp_step();
    double max_phase = 0.0;
    double max_amp = 0.0;
    std::size_t k = 0;
    for (Index i = 0; i < r.rows(); ++i) {
      for (Index j = 0; j < r.cols(); ++j, ++k) {
        const double th_hat = code.phase_index[k] * dt - pi;
        max_phase = std::max(max_phase, std::abs(wrap_phase(phase_of(r(i, j)) - th_hat)));
        max_amp = std::max(max_amp, std::abs(std::abs(r(i, j)) - code.amp_index[k] * dr));
      }
    }
    const PhaseErrorStats st = phase_error_stats(r, code);
    // half-step bounds hold up to the rounding of the step products themselves
    const bool phase_ok = max_phase <= dt / 2.0 * (1.0 + 1e-12);
    const bool amp_ok = max_amp <= dr / 2.0 * (1.0 + 1e-12);
    const bool mse_ok = st.mean_sq_complex_err <= st.bound * 1.05;
    ok = ok && phase_ok && amp_ok && mse_ok;
    d << (bt == 2 ? "" : "; ") << "b=" << bt << ": phase " << max_phase / dt << " step, amp " << max_amp / dr
      << " step, mse/bound " << st.mean_sq_complex_err / st.bound;
  }
  return {ok, d.str()};
}

Outcome ac5_loop() {
  int violations = 0;
  int early_stops = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const RealMatrix w = oracle::random_real(32, 32, 5000 + seed);
    FAConfig cfg;
    cfg.rank = 4;
    const FADecomposition dec = fa_decompose(w, cfg);
    FAConfig single = cfg;
    single.max_iters = 1;
    const FADecomposition one = fa_decompose(w, single);

    const auto& tr = dec.error_trace;
    const auto retained = static_cast<std::size_t>(dec.retained_round);
    bool ok = retained >= 1 && retained <= tr.size();
    for (std::size_t t = 1; ok && t < retained; ++t) ok = tr[t] <= tr[t - 1];
    ok = ok && dec.final_error == tr[retained - 1] && dec.final_error <= one.final_error;
    // an increase ends the loop immediately, and nothing else does before the cap
    for (std::size_t t = 1; ok && t < tr.size(); ++t) {
      if (tr[t] > tr[t - 1]) ok = t + 1 == tr.size();
    }
    const bool increased = tr.size() >= 2 && tr.back() > tr[tr.size() - 2];
    ok = ok && dec.stopped_early == increased;
    ok = ok && (dec.stopped_early || tr.size() == static_cast<std::size_t>(cfg.max_iters - 1));
    if (dec.stopped_early) ++early_stops;
    if (!ok) ++violations;
  }
  Detail d;
  d << "50 instances, " << violations << " violations, " << early_stops << " early stops";
  return {violations == 0, d.str()};
}

bool bit_identical(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(Complex) * static_cast<std::size_t>(a.size())) == 0;
}

Outcome ac6_odc() {
  bool identical = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RealMatrix w = oracle::random_real(16, 16, 600 + seed);
    FAConfig cfg;
    cfg.rank = 3;
    const FADecomposition plain = fa_decompose(w, cfg);
    const FADecomposition ones = fa_decompose(w, cfg, build_calibration(RealMatrix::Ones(16, 9)));
    identical = identical && bit_identical(plain.factors.l1, ones.factors.l1) &&
                bit_identical(plain.factors.l2, ones.factors.l2) &&
                plain.error_trace == ones.error_trace && plain.code == ones.code;
  }
  double worst = 0.0;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> pos(0.2, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = oracle::random_index(rng, 2, 16);
    const Index n = oracle::random_index(rng, 2, 16);
    const Index r = oracle::random_index(rng, 1, std::min(m, n));
    RealVector u(m), v(n);
    for (Index i = 0; i < m; ++i) u(i) = pos(rng);
    for (Index j = 0; j < n; ++j) v(j) = pos(rng);
    const CalibrationMatrix c = calibration_from_moments(u.cwiseAbs2(), v.cwiseAbs2());
    const ComplexMatrix res = oracle::random_complex(m, n, rng());
    const LowRankFactors f = odc_decompose(res, c, r);
    const ComplexMatrix dr = c.row_scale.cast<Complex>().asDiagonal();
    const ComplexMatrix dc = c.col_scale.cast<Complex>().asDiagonal();
    const double oracle_tail = truncation_error(oracle::gram_singular_values(dr * res * dc), r);
    const double objective = (dr * (res - f.product()) * dc).norm();
    if (oracle_tail > 1e-9 * (dr * res * dc).norm()) {
      worst = std::max(worst, std::abs(objective - oracle_tail) / oracle_tail);
    }
  }
  Detail d;
  d << "all-ones calibration bit-identical: " << (identical ? "yes" : "no")
    << "; scaled objective vs tail oracle max rel dev " << worst << " (< 1e-8)";
  return {identical && worst < 1e-8, d.str()};
}

Outcome ac7_budget() {
  const LayerDims dims = llama3_8b_block();
  const double area = 218103808.0;
  const double perim = 81920.0;
  const double thr = rank_threshold(dims, 2.0, 16.0);
  const double avg = average_bits(dims, {2.0, 16.0, 256.0});
  const double thr_direct = (1.0 - 2.0 / 16.0) * area / perim;
  const double avg_direct = (2.0 * area + 256.0 * 16.0 * perim) / area;
  bool ok = std::abs(thr - thr_direct) < 1e-6 && std::abs(avg - avg_direct) < 1e-6 &&
            std::abs(thr - 2329.6) < 1e-3 && std::abs(avg - 3.538) < 1e-3;

  std::mt19937_64 rng(7);
  int crossing_failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    LayerDims d(static_cast<std::size_t>(oracle::random_index(rng, 1, 7)));
    for (auto& s : d) {
      s.rows = static_cast<std::uint64_t>(oracle::random_index(rng, 1, 16384));
      s.cols = static_cast<std::uint64_t>(oracle::random_index(rng, 1, 16384));
    }
    const double bq = static_cast<double>(oracle::random_index(rng, 1, 8));
    const double bl = bq + static_cast<double>(oracle::random_index(rng, 1, 24));
    const double t = rank_threshold(d, bq, bl);
    // largest integer strictly below t; equals floor(t) unless t is an integer
    const double lo = std::ceil(t) - 1.0;
    const double hi = std::ceil(t) + 1.0;
    const bool below = lo < 0.0 || average_bits(d, {bq, bl, lo}) < bl;
    const bool above = bl <= average_bits(d, {bq, bl, hi});
    if (!(below && above)) ++crossing_failures;
  }
  ok = ok && crossing_failures == 0;
  Detail det;
  det << thr << " threshold, B_avg(256) " << avg << ", crossing failures "
      << crossing_failures << "/100";
  return {ok, det.str()};
}

Outcome ac8_compaction() {
  BenchSpec spec;
  spec.field = {128, 128, 0.9, 0};
  spec.n_seeds = 50;
  spec.rank = 8;
  spec.target_rel = 0.01;
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    StationaryFieldSpec s = spec.field;
    s.seed = seed;
    const DomainReport r = compare_domains(gen_stationary_field(s), spec.rank, spec.target_rel);
    wins += r.freq_min_rank <= r.spatial_min_rank ? 1 : 0;
  }
  const double frac = wins / 50.0;
  bool ok = frac >= 0.9;
  Detail d;
  d << "min-rank wins " << wins << "/50; tail ratio:";
  for (double rho : {0.3, 0.5, 0.7}) {
    const TailRatioResult t = tail_ratio_check({64, 64, rho, 0}, 8, 50);
    ok = ok && t.passed;
    d << (rho == 0.3 ? " " : ", ") << "rho=" << rho << " " << t.mean_ratio << " +- " << t.std_error << " vs " << t.bound
      << (t.passed ? " ok" : " EXCEEDS");
  }
  return {ok, d.str()};
}

Outcome ac9_container() {
  bool deterministic = true;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RealMatrix w = oracle::random_real(24, 20, 900 + seed);
    FAConfig cfg;
    cfg.rank = 3;
    std::optional<CalibrationMatrix> calib;
    RealMatrix cw;
    if (seed % 2 == 1) {
      cw = oracle::random_real(24, 11, seed).cwiseAbs();
      calib = build_calibration(cw);
    }
    const Bytes a = serialize_container(to_container(fa_decompose(w, cfg, calib), "w"));
    const Bytes b = serialize_container(to_container(fa_decompose(w, cfg, calib), "w"));
    deterministic = deterministic && a == b;

    const FADecomposition back = from_container(parse_container(a));
    const RealMatrix r1 = reconstruct_spatial(back);
    const RealMatrix r2 = reconstruct_spatial(from_container(parse_container(b)));
    deterministic = deterministic &&
                    std::memcmp(r1.data(), r2.data(), sizeof(double) * static_cast<std::size_t>(r1.size())) == 0;

    // recompute the objective from the stored bits alone
    const ComplexMatrix target = oracle::naive_dft2(w.cast<Complex>()).leftCols(11);
    const double recomputed = oracle::loop_weighted_error(target, polar_dequantize(back.code),
                                                          back.factors.l1, back.factors.l2, cw);
    worst = std::max(worst, std::abs(recomputed - back.final_error) / std::max(recomputed, 1e-300));
  }
  Detail d;
  d << "bit-deterministic: " << (deterministic ? "yes" : "no")
    << "; reported vs recomputed error max rel dev " << worst << " (< 1e-12)";
  return {deterministic && worst < 1e-12, d.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"AC1", "DFT matches double-sum oracle; round trip", 10.0, ac1_dft},
      {"AC2", "conjugate symmetry of real spectra", 30.0, ac2_symmetry},
      {"AC3", "Eckart-Young truncation error", 60.0, ac3_eckart_young},
      {"AC4", "PolarQuant step and phase-error bounds", 30.0, ac4_polarquant},
      {"AC5", "alternating loop trace and stopping rule", 300.0, ac5_loop},
      {"AC6", "ODC identity and scaled-SVD optimality", 300.0, ac6_odc},
      {"AC7", "bit-budget formulas and threshold crossing", 10.0, ac7_budget},
      {"AC8", "spectral compaction on stationary fields", 300.0, ac8_compaction},
      {"AC9", "container round trip and reported error", 300.0, ac9_container},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = o.ok && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %s  %s  [%.2f s / %.0f s%s]  %s\n", c.id, pass ? "PASS" : "FAIL", c.title, secs,
                c.limit_seconds, in_time ? "" : " EXCEEDED", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
