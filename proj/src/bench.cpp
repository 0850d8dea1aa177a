#include "falq/bench.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "falq/csvd.hpp"
#include "falq/error.hpp"
#include "falq/parallel.hpp"
#include "falq/polarquant.hpp"
#include "falq/spectral.hpp"

namespace falq {

namespace {

RealMatrix toeplitz_cholesky(Index n, double rho) {
  RealMatrix t(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) t(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  }
  Eigen::LLT<RealMatrix> llt(t);
  if (llt.info() != Eigen::Success) {
    throw NumericError("Cholesky of the correlation matrix failed (rho = " + std::to_string(rho) + ")");
  }
  return llt.matrixL();
}

double relative_tail(const RealVector& s, Index rank) {
  const double total = s.norm();
  return total > 0.0 ? truncation_error(s, rank) / total : 0.0;
}

double mean_abs_phase_diff(const ComplexMatrix& a, const ComplexMatrix& b, double* max_out) {
  double sum = 0.0;
  double max_err = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      const double e = std::abs(wrap_phase(phase_of(a(i, j)) - phase_of(b(i, j))));
      sum += e;
      max_err = std::max(max_err, e);
    }
  }
  *max_out = max_err;
  return a.size() > 0 ? sum / static_cast<double>(a.size()) : 0.0;
}

double rel_err(const ComplexMatrix& ref, const ComplexMatrix& approx) {
  const double n = ref.norm();
  return n > 0.0 ? (ref - approx).norm() / n : (approx.norm() > 0.0 ? 1.0 : 0.0);
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::domains: return "domains";
    case Experiment::tail_ratio: return "tail_ratio";
    case Experiment::ablation: return "ablation";
  }
  return "unknown";
}

}  // namespace

RealMatrix gen_stationary_field(const StationaryFieldSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) throw ParamError("field dims must be >= 1");
  if (!(spec.rho > 0.0 && spec.rho < 1.0)) throw ParamError("rho must lie in (0, 1)");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RealMatrix g(spec.rows, spec.cols);
  for (Index i = 0; i < spec.rows; ++i) {
    for (Index j = 0; j < spec.cols; ++j) g(i, j) = normal(rng);
  }
  const RealMatrix a = toeplitz_cholesky(spec.rows, spec.rho);
  const RealMatrix b = spec.cols == spec.rows ? a : toeplitz_cholesky(spec.cols, spec.rho);
  return a * g * b.transpose();
}

DomainReport compare_domains(const RealMatrix& w, Index rank, double target_rel, bool fair_params) {
  if (rank < 1) throw ParamError("compare_domains: rank must be >= 1");
  const RealVector spatial = complex_svd(w.cast<Complex>()).s;
  const RealVector freq = complex_svd(forward_dft2(w).data).s;

  DomainReport r;
  r.rank = rank;
  r.fair_params = fair_params;
  r.spatial_err = relative_tail(spatial, rank);
  r.spatial_min_rank = min_rank_for_error(spatial, target_rel);
  const Index freq_rank = fair_params ? std::max<Index>(1, rank / 2) : rank;
  r.freq_err = relative_tail(freq, freq_rank);
  r.freq_min_rank = min_rank_for_error(freq, target_rel) * (fair_params ? 2 : 1);
  return r;
}

double tail_ratio_bound(double rho) {
  const double q = 1.0 - rho * rho;
  return rho * rho / (q * q);
}

TailRatioResult tail_ratio_check(const StationaryFieldSpec& spec, Index rank, int n_seeds, int jobs) {
  if (n_seeds < 2) throw ParamError("tail_ratio_check needs at least two seeds");
  TailRatioResult out;
  out.bound = tail_ratio_bound(spec.rho);
  out.ratios.resize(static_cast<std::size_t>(n_seeds));
  out.seeds.resize(static_cast<std::size_t>(n_seeds));
  parallel_for(static_cast<std::size_t>(n_seeds), jobs, [&](std::size_t i) {
    StationaryFieldSpec s = spec;
    s.seed = spec.seed + i;
    const RealMatrix w = gen_stationary_field(s);
    const RealVector spatial = complex_svd(w.cast<Complex>()).s;
    const double scale = 1.0 / std::sqrt(static_cast<double>(w.rows() * w.cols()));
    const RealVector freq = complex_svd(forward_dft2(w).data * scale).s;
    const double num = truncation_error(freq, rank);
    const double den = truncation_error(spatial, rank);
    out.ratios[i] = den > 0.0 ? (num * num) / (den * den) : 0.0;
    out.seeds[i] = s.seed;
  });
  double sum = 0.0;
  for (double v : out.ratios) sum += v;
  out.mean_ratio = sum / n_seeds;
  double var = 0.0;
  for (double v : out.ratios) var += (v - out.mean_ratio) * (v - out.mean_ratio);
  var /= (n_seeds - 1);
  out.std_error = std::sqrt(var / n_seeds);
  out.passed = out.mean_ratio <= out.bound + 2.0 * out.std_error;
  return out;
}

std::vector<AblationRow> quantizer_ablation_residual(const ComplexMatrix& residual, int bits_a,
                                                     int bits_b) {
  std::vector<AblationRow> rows;

  AblationRow polar;
  polar.scheme = "polar";
  polar.bits_a = bits_a;
  polar.bits_b = bits_b;
  const ComplexMatrix pq = polar_dequantize(polar_quantize(residual, bits_a, bits_b));
  polar.mean_abs_phase_err = mean_abs_phase_diff(residual, pq, &polar.max_abs_phase_err);
  polar.reconstruction_rel_err = rel_err(residual, pq);
  rows.push_back(polar);

  AblationRow qim;
  qim.scheme = "qim";
  qim.bits_a = bits_a;
  qim.bits_b = bits_b;
  const ComplexMatrix qq = qim_quantize(residual, bits_a, bits_b);
  qim.mean_abs_phase_err = mean_abs_phase_diff(residual, qq, &qim.max_abs_phase_err);
  qim.reconstruction_rel_err = rel_err(residual, qq);
  rows.push_back(qim);
  return rows;
}

std::vector<AblationRow> quantizer_ablation(const RealMatrix& w, Index rank, int bits_a, int bits_b) {
  const ComplexMatrix spectrum = forward_dft2(w).data;
  const LowRankFactors f = truncate_factors(complex_svd(spectrum), rank);
  return quantizer_ablation_residual(spectrum - f.product(), bits_a, bits_b);
}

BenchSpec parse_bench_spec(const std::string& json_text) {
  BenchSpec spec;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bench spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("bench spec must be a JSON object");
  try {
    const std::string exp = j.value("experiment", std::string("domains"));
    if (exp == "domains") {
      spec.experiment = Experiment::domains;
    } else if (exp == "tail_ratio") {
      spec.experiment = Experiment::tail_ratio;
    } else if (exp == "ablation") {
      spec.experiment = Experiment::ablation;
    } else {
      throw ParamError("unknown bench experiment '" + exp + "'");
    }
    spec.field.rows = j.value("rows", spec.field.rows);
    spec.field.cols = j.value("cols", spec.field.cols);
    spec.field.rho = j.value("rho", spec.field.rho);
    spec.field.seed = j.value("seed", spec.field.seed);
    spec.n_seeds = j.value("n_seeds", spec.n_seeds);
    spec.rank = j.value("rank", spec.rank);
    spec.target_rel = j.value("target_rel", spec.target_rel);
    spec.fair_params = j.value("fair_params", spec.fair_params);
    spec.bits_a = j.value("bits_a", spec.bits_a);
    spec.bits_b = j.value("bits_b", spec.bits_b);
  } catch (const nlohmann::json::type_error& e) {
    throw FormatError(std::string("bench spec has a mistyped field: ") + e.what());
  }
  if (spec.n_seeds < 1) throw ParamError("n_seeds must be >= 1");
  return spec;
}

void write_domain_csv(std::ostream& out, const std::vector<DomainReport>& rows, const BenchSpec& spec) {
  out << "seed,rows,cols,rho,rank,spatial_err,freq_err,spatial_min_rank,freq_min_rank,fair_params\n";
  out << std::setprecision(12);
  for (const auto& r : rows) {
    out << (r.seeds.empty() ? 0 : r.seeds.front()) << ',' << spec.field.rows << ',' << spec.field.cols
        << ',' << spec.field.rho << ',' << r.rank << ',' << r.spatial_err << ',' << r.freq_err << ','
        << r.spatial_min_rank << ',' << r.freq_min_rank << ',' << (r.fair_params ? 1 : 0) << '\n';
  }
}

void write_ablation_csv(std::ostream& out, const std::vector<AblationRow>& rows) {
  out << "seed,scheme,bits_a,bits_b,mean_abs_phase_err,max_abs_phase_err,reconstruction_rel_err\n";
  out << std::setprecision(12);
  for (const auto& r : rows) {
    out << r.seed << ',' << r.scheme << ',' << r.bits_a << ',' << r.bits_b << ','
        << r.mean_abs_phase_err << ',' << r.max_abs_phase_err << ',' << r.reconstruction_rel_err << '\n';
  }
}

BenchResult run_bench(const BenchSpec& spec, int jobs) {
  const auto n = static_cast<std::size_t>(spec.n_seeds);
  BenchResult result;
  nlohmann::json summary;
  summary["experiment"] = experiment_name(spec.experiment);
  summary["n_seeds"] = spec.n_seeds;
  summary["rows"] = spec.field.rows;
  summary["cols"] = spec.field.cols;
  summary["rho"] = spec.field.rho;
  summary["rank"] = spec.rank;
  std::ostringstream csv;

  switch (spec.experiment) {
    case Experiment::domains: {
      std::vector<DomainReport> reports(n);
      parallel_for(n, jobs, [&](std::size_t i) {
        StationaryFieldSpec s = spec.field;
        s.seed = spec.field.seed + i;
        reports[i] = compare_domains(gen_stationary_field(s), spec.rank, spec.target_rel, spec.fair_params);
        reports[i].seeds = {s.seed};
      });
      write_domain_csv(csv, reports, spec);
      std::size_t freq_wins = 0;
      std::size_t lower_err = 0;
      for (const auto& r : reports) {
        freq_wins += r.freq_min_rank <= r.spatial_min_rank ? 1 : 0;
        lower_err += r.freq_err < r.spatial_err ? 1 : 0;
      }
      const double frac = static_cast<double>(freq_wins) / static_cast<double>(n);
      summary["target_rel"] = spec.target_rel;
      summary["fair_params"] = spec.fair_params;
      summary["freq_min_rank_le_spatial_fraction"] = frac;
      summary["freq_err_lt_spatial_fraction"] = static_cast<double>(lower_err) / static_cast<double>(n);
      summary["properties"] = {{"freq_min_rank_le_spatial_in_90pct", frac >= 0.9}};
      result.passed = frac >= 0.9;
      break;
    }
    case Experiment::tail_ratio: {
      const TailRatioResult t = tail_ratio_check(spec.field, spec.rank, spec.n_seeds, jobs);
      csv << "seed,rho,rank,ratio,bound\n" << std::setprecision(12);
      for (std::size_t i = 0; i < n; ++i) {
        csv << t.seeds[i] << ',' << spec.field.rho << ',' << spec.rank << ',' << t.ratios[i] << ','
            << t.bound << '\n';
      }
      summary["mean_ratio"] = t.mean_ratio;
      summary["std_error"] = t.std_error;
      summary["bound"] = t.bound;
      summary["properties"] = {{"mean_ratio_within_bound", t.passed}};
      result.passed = t.passed;
      break;
    }
    case Experiment::ablation: {
      std::vector<std::vector<AblationRow>> per_seed(n);
      parallel_for(n, jobs, [&](std::size_t i) {
        StationaryFieldSpec s = spec.field;
        s.seed = spec.field.seed + i;
        per_seed[i] = quantizer_ablation(gen_stationary_field(s), spec.rank, spec.bits_a, spec.bits_b);
        for (auto& row : per_seed[i]) row.seed = s.seed;
      });
      std::vector<AblationRow> rows;
      for (auto& v : per_seed) rows.insert(rows.end(), v.begin(), v.end());
      write_ablation_csv(csv, rows);
      // reported, not asserted
      summary["properties"] = nlohmann::json::object();
      result.passed = true;
      break;
    }
  }
  summary["passed"] = result.passed;
  result.csv = csv.str();
  result.summary_json = summary.dump(2);
  return result;
}

}  // namespace falq
