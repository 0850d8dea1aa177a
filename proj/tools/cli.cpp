#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "falq/bench.hpp"
#include "falq/budget.hpp"
#include "falq/csvd.hpp"
#include "falq/decompose.hpp"
#include "falq/error.hpp"
#include "falq/parallel.hpp"
#include "falq/spectral.hpp"
#include "falq/tensorio.hpp"

namespace falq::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void configure_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_logger_mt("falq");
    spdlog::set_default_logger(logger);
  });
  const char* env = std::getenv("FALQ_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

struct CompressOptions {
  std::vector<std::string> inputs;
  std::string output;
  Index rank = 0;
  int amp_bits = 4;
  int phase_bits = 4;
  int iters = 8;
  std::string calib;
  bool allow_odd = false;
  int jobs = 1;
  std::string json_out;
};

struct ReconstructOptions {
  std::string input;
  std::string output;
  std::string dtype = "f64";
};

struct AnalyzeOptions {
  std::string input;
  std::string output;
  double target = 0.01;
  bool allow_odd = false;
};

struct BudgetOptions {
  std::string dims;
  std::string preset = "llama3-8b";
  double bq = 2.0;
  double bl = 16.0;
  double rank = 256.0;
  std::string container;
  int orig_bits = 32;
  bool exclude_header = false;
  std::string json_out;
};

struct BenchOptions {
  std::string spec;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool fair_params = false;
  std::string output;
  std::string json_out;
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

int original_bits_of(DType dtype) { return dtype == DType::float32 ? 32 : 64; }

json cost_json(const ContainerCost& c) {
  return {{"factor_bits", c.factor_bits},
          {"index_bits", c.index_bits},
          {"overhead_bits", c.overhead_bits},
          {"compressed_bits", c.compressed_bits},
          {"original_bits", c.original_bits},
          {"ratio", c.ratio},
          {"stored_scalar_fraction", c.stored_scalar_fraction},
          {"complex_coefficient_fraction", c.complex_coefficient_fraction},
          {"break_even_rank", c.break_even_rank}};
}

json compress_one(const fs::path& in, const fs::path& out, const CompressOptions& opt,
                  const std::optional<CalibrationMatrix>& calib) {
  const Tensor tensor = read_tensor(in);
  if (tensor.dims.size() != 2 || !tensor.holds_real()) {
    throw FormatError(in.string() + ": compress needs a 2D real tensor");
  }
  const RealMatrix& w = tensor.real();

  FAConfig cfg;
  cfg.rank = opt.rank;
  cfg.amp_bits = opt.amp_bits;
  cfg.phase_bits = opt.phase_bits;
  cfg.max_iters = opt.iters;
  cfg.width_policy = opt.allow_odd ? WidthPolicy::pad_odd : WidthPolicy::strict;

  const HalfSpectrum spectrum = forward_dft2(w, cfg.width_policy);
  const FADecomposition dec = fa_decompose_spectrum(spectrum, cfg, calib);
  const CompressedContainer container = to_container(dec, in.filename().string());
  write_container(out, container);

  const RealMatrix rebuilt = reconstruct_spatial(dec);
  const double w_norm = w.norm();
  const double spatial_rel = w_norm > 0.0 ? (w - rebuilt).norm() / w_norm : rebuilt.norm();
  double ref_norm = spectrum.data.norm();
  if (dec.calibrated) ref_norm = (calib->sqrt_weights.array() * spectrum.data.array().abs()).matrix().norm();

  const int orig_bits = original_bits_of(tensor.dtype);
  BudgetConfig budget;
  budget.backbone_bits = 0.5 * (opt.amp_bits + opt.phase_bits);
  budget.factor_bits = 32.0;
  budget.rank = static_cast<double>(dec.config.rank);
  const LayerDims dims = {{static_cast<std::uint64_t>(w.rows()), static_cast<std::uint64_t>(w.cols())}};

  json report;
  report["input"] = in.string();
  report["output"] = out.string();
  report["rows"] = dec.rows;
  report["cols"] = dec.original_cols;
  report["transform_cols"] = dec.cols;
  report["half_cols"] = dec.half_cols();
  report["rank"] = dec.config.rank;
  report["amp_bits"] = opt.amp_bits;
  report["phase_bits"] = opt.phase_bits;
  report["max_iters"] = opt.iters;
  report["calibrated"] = dec.calibrated;
  report["rounds_run"] = dec.error_trace.size();
  report["retained_round"] = dec.retained_round;
  report["stopped_early"] = dec.stopped_early;
  report["error_trace"] = dec.error_trace;
  report["final_error"] = dec.final_error;
  report["relative_error"] = ref_norm > 0.0 ? dec.final_error / ref_norm : 0.0;
  report["spatial_relative_error"] = spatial_rel;
  report["container"] = cost_json(container_ratio(container, orig_bits));
  report["budget"] = {{"backbone_bits", budget.backbone_bits},
                      {"factor_bits", budget.factor_bits},
                      {"rank", budget.rank},
                      {"average_bits", average_bits(dims, budget)},
                      {"rank_threshold", rank_threshold(dims, budget.backbone_bits, budget.factor_bits)}};
  report["warnings"] = dec.warnings;
  return report;
}

int cmd_compress(const CompressOptions& opt, std::ostream& out) {
  if (opt.rank < 0) throw ParamError("--rank must be >= 0 (0 selects the default)");
  if (opt.iters < 1) throw ParamError("--iters must be >= 1");
  if (opt.jobs < 1) throw ParamError("--jobs must be >= 1");
  for (const auto& in : opt.inputs) {
    if (!fs::exists(in)) throw IoError("input not found: " + in);
  }
  std::optional<CalibrationMatrix> calib;
  if (!opt.calib.empty()) {
    if (!fs::exists(opt.calib)) throw IoError("calibration file not found: " + opt.calib);
    calib = build_calibration(read_real_matrix(opt.calib));
  }

  std::vector<fs::path> outputs;
  if (opt.inputs.size() == 1) {
    outputs.emplace_back(opt.output);
  } else {
    fs::create_directories(opt.output);
    for (const auto& in : opt.inputs) {
      outputs.push_back(fs::path(opt.output) / (fs::path(in).stem().string() + ".falq"));
    }
  }

  std::vector<json> reports(opt.inputs.size());
  parallel_for(opt.inputs.size(), opt.jobs, [&](std::size_t i) {
    reports[i] = compress_one(opt.inputs[i], outputs[i], opt, calib);
  });
  json doc;
  doc["command"] = "compress";
  doc["results"] = reports;
  emit(doc.dump(2) + "\n", opt.json_out, out);
  return 0;
}

int cmd_reconstruct(const ReconstructOptions& opt) {
  if (opt.dtype != "f64" && opt.dtype != "f32") throw ParamError("--dtype must be f64 or f32");
  const CompressedContainer c = read_container(opt.input);
  const RealMatrix w = reconstruct_spatial(from_container(c));
  write_tensor(opt.output, w, opt.dtype == "f32" ? DType::float32 : DType::float64);
  return 0;
}

int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out) {
  const RealMatrix w = read_real_matrix(opt.input);
  const RealVector spatial = complex_svd(w.cast<Complex>()).s;
  const HalfSpectrum spec = forward_dft2(w, opt.allow_odd ? WidthPolicy::pad_odd : WidthPolicy::strict);
  const RealVector freq = complex_svd(spec.data).s;
  const double sn = spatial.norm();
  const double fn = freq.norm();

  std::ostringstream csv;
  csv << "index,spatial_sigma,freq_sigma,spatial_rel_tail,freq_rel_tail\n" << std::setprecision(17);
  const Index n = std::max(spatial.size(), freq.size());
  for (Index k = 0; k < n; ++k) {
    csv << k << ',';
    if (k < spatial.size()) csv << spatial(k);
    csv << ',';
    if (k < freq.size()) csv << freq(k);
    csv << ',';
    if (k < spatial.size()) csv << (sn > 0.0 ? truncation_error(spatial, k + 1) / sn : 0.0);
    csv << ',';
    if (k < freq.size()) csv << (fn > 0.0 ? truncation_error(freq, k + 1) / fn : 0.0);
    csv << '\n';
  }
  emit(csv.str(), opt.output, out);
  spdlog::info("min rank for {}: spatial {}, frequency {}", opt.target,
               min_rank_for_error(spatial, opt.target), min_rank_for_error(freq, opt.target));
  return 0;
}

LayerDims parse_dims(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open dims file " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw FormatError("dims file is not valid JSON: " + std::string(e.what()));
  }
  if (j.is_object() && j.contains("dims")) j = j["dims"];
  if (!j.is_array() || j.empty()) throw FormatError("dims must be a non-empty JSON array");
  LayerDims dims;
  try {
    for (const auto& e : j) {
      if (e.is_array() && e.size() == 2) {
        dims.push_back({e[0].get<std::uint64_t>(), e[1].get<std::uint64_t>()});
      } else if (e.is_object()) {
        dims.push_back({e.at("rows").get<std::uint64_t>(), e.at("cols").get<std::uint64_t>()});
      } else {
        throw FormatError("each dims entry must be [rows, cols] or {\"rows\", \"cols\"}");
      }
    }
  } catch (const json::exception& e) {
    throw FormatError("malformed dims entry: " + std::string(e.what()));
  }
  return dims;
}

int cmd_budget(const BudgetOptions& opt, std::ostream& out) {
  LayerDims dims;
  if (!opt.dims.empty()) {
    dims = parse_dims(opt.dims);
  } else if (opt.preset == "llama3-8b") {
    dims = llama3_8b_block();
  } else {
    throw ParamError("unknown preset '" + opt.preset + "'");
  }
  double area = 0.0;
  double perimeter = 0.0;
  for (const auto& d : dims) {
    area += static_cast<double>(d.rows) * static_cast<double>(d.cols);
    perimeter += static_cast<double>(d.rows + d.cols);
  }
  const BudgetConfig cfg{opt.bq, opt.bl, opt.rank};
  json report;
  report["command"] = "budget";
  report["backbone_bits"] = opt.bq;
  report["factor_bits"] = opt.bl;
  report["rank"] = opt.rank;
  report["sum_area"] = area;
  report["sum_perimeter"] = perimeter;
  report["average_bits"] = average_bits(dims, cfg);
  report["rank_threshold"] = rank_threshold(dims, opt.bq, opt.bl);
  if (!opt.container.empty()) {
    report["container"] = cost_json(container_ratio(read_container(opt.container), opt.orig_bits,
                                                    !opt.exclude_header));
  }
  emit(report.dump(2) + "\n", opt.json_out, out);
  return 0;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cmd_bench(const BenchOptions& opt, std::ostream& out) {
  if (opt.jobs < 1) throw ParamError("--jobs must be >= 1");
  BenchSpec spec = opt.spec.empty() ? BenchSpec{} : parse_bench_spec(slurp(opt.spec));
  if (opt.seed) spec.field.seed = *opt.seed;
  if (opt.fair_params) spec.fair_params = true;
  const BenchResult r = run_bench(spec, opt.jobs);
  emit(r.csv, opt.output, out);
  if (!opt.json_out.empty()) emit(r.summary_json + "\n", opt.json_out, out);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  configure_logging();

  CLI::App app{"Fourier-domain low-rank plus polar quantization of weight matrices", "falq"};
  app.require_subcommand(1);

  CompressOptions copt;
  auto* compress = app.add_subcommand("compress", "Compress FATF matrices into FALQ containers");
  compress->add_option("inputs", copt.inputs, "Input FATF files")->required();
  compress->add_option("-o,--output", copt.output, "Output container (directory for several inputs)")
      ->required();
  compress->add_option("--rank", copt.rank, "Factor rank (0 = min(256, min(d1, c)/4))")->capture_default_str();
  compress->add_option("--bits-amp", copt.amp_bits, "Amplitude bit-width")->capture_default_str();
  compress->add_option("--bits-phase", copt.phase_bits, "Phase bit-width")->capture_default_str();
  compress->add_option("--iters", copt.iters, "Iteration cap T (runs T-1 rounds, at least one)")->capture_default_str();
  compress->add_option("--calib", copt.calib, "FATF calibration matrix in half-spectrum shape");
  compress->add_flag("--allow-odd", copt.allow_odd, "Zero-pad odd widths instead of rejecting them");
  compress->add_option("--jobs", copt.jobs, "Matrices compressed concurrently")->capture_default_str();
  compress->add_option("--json", copt.json_out, "Write the JSON report here instead of stdout");

  ReconstructOptions ropt;
  auto* reconstruct = app.add_subcommand("reconstruct", "Rebuild a real matrix from a FALQ container");
  reconstruct->add_option("input", ropt.input, "Input FALQ file")->required();
  reconstruct->add_option("output", ropt.output, "Output FATF file")->required();
  reconstruct->add_option("--dtype", ropt.dtype, "Output dtype: f64 or f32")->capture_default_str();

  AnalyzeOptions aopt;
  auto* analyze = app.add_subcommand("analyze", "Singular spectra of a matrix and its half spectrum");
  analyze->add_option("input", aopt.input, "Input FATF file")->required();
  analyze->add_option("-o,--output", aopt.output, "CSV output (default stdout)");
  analyze->add_option("--target", aopt.target, "Relative error target for the logged min ranks")->capture_default_str();
  analyze->add_flag("--allow-odd", aopt.allow_odd, "Zero-pad odd widths");

  BudgetOptions bopt;
  auto* budget = app.add_subcommand("budget", "Bit-budget arithmetic");
  budget->add_option("--dims", bopt.dims, "JSON file: [[rows, cols], ...]");
  budget->add_option("--preset", bopt.preset, "Built-in dims when --dims is absent (llama3-8b)")->capture_default_str();
  budget->add_option("--bq", bopt.bq, "Backbone bits B_Q")->capture_default_str();
  budget->add_option("--bl", bopt.bl, "Factor bits B_L")->capture_default_str();
  budget->add_option("--rank", bopt.rank, "Rank k")->capture_default_str();
  budget->add_option("--container", bopt.container, "Also report the true cost of this FALQ file");
  budget->add_option("--orig-bits", bopt.orig_bits, "Bits per original scalar for --container")->capture_default_str();
  budget->add_flag("--exclude-header", bopt.exclude_header, "Leave the header out of the ratio");
  budget->add_option("--json", bopt.json_out, "Write the JSON report here instead of stdout");

  BenchOptions xopt;
  auto* bench = app.add_subcommand("bench", "Synthetic stationary-field experiments (CSV)");
  bench->add_option("--spec", xopt.spec, "JSON bench spec (defaults when absent)");
  bench->add_option("--seed", xopt.seed, "Base seed (overrides the bench spec)");
  bench->add_option("--jobs", xopt.jobs, "Concurrent trials")->capture_default_str();
  bench->add_flag("--fair-params", xopt.fair_params, "Charge a complex rank as two real ranks");
  bench->add_option("-o,--output", xopt.output, "CSV output (default stdout)");
  bench->add_option("--json", xopt.json_out, "JSON summary output");

  auto fail = [&err](ErrorCategory cat, const char* what) {
    static constexpr const char* names[] = {"io", "format", "numeric", "param"};
    err << "error[" << names[static_cast<int>(cat) - 2] << "]: " << what << "\n";
    return static_cast<int>(cat);
  };

  std::vector<std::string> rev;
  if (!args.empty()) rev.assign(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::Success& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail(ErrorCategory::param, e.what());
  }

  try {
    if (compress->parsed()) return cmd_compress(copt, out);
    if (reconstruct->parsed()) return cmd_reconstruct(ropt);
    if (analyze->parsed()) return cmd_analyze(aopt, out);
    if (budget->parsed()) return cmd_budget(bopt, out);
    if (bench->parsed()) return cmd_bench(xopt, out);
  } catch (const Error& e) {
    return fail(e.category(), e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(ErrorCategory::io, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(ErrorCategory::format, e.what());
  }
  return static_cast<int>(ErrorCategory::param);
}

}  // namespace falq::cli
