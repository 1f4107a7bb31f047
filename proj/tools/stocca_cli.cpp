// stocca: exact CCA, the stochastic solvers and the benchmark driver.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stocca/errors.hpp"
#include "stocca/experiment.hpp"
#include "stocca/io.hpp"
#include "stocca/metrics.hpp"
#include "stocca/reference.hpp"

namespace {

using namespace stocca;

struct DatasetArgs {
  std::string x_csv, y_csv, libsvm_x, libsvm_y, mnist, synthetic;
  double gamma_x = 0.0;
  double gamma_y = 0.0;
};

void add_dataset_options(CLI::App* cmd, DatasetArgs& a) {
  cmd->add_option("--x-csv", a.x_csv, "x view, one sample per row");
  cmd->add_option("--y-csv", a.y_csv, "y view, one sample per row");
  cmd->add_option("--libsvm-x", a.libsvm_x, "x view in 'label index:value' format");
  cmd->add_option("--libsvm-y", a.libsvm_y, "y view in 'label index:value' format");
  cmd->add_option("--mnist", a.mnist, "idx3 image file split into left/right halves");
  cmd->add_option("--synthetic", a.synthetic, "JSON synthetic spec");
  cmd->add_option("--gamma-x", a.gamma_x, "ridge on the x view")->check(CLI::NonNegativeNumber);
  cmd->add_option("--gamma-y", a.gamma_y, "ridge on the y view")->check(CLI::NonNegativeNumber);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CcaDataset load_from_args(const DatasetArgs& a) {
  const int sources = int(!a.x_csv.empty() || !a.y_csv.empty()) + int(!a.libsvm_x.empty() || !a.libsvm_y.empty()) +
                      int(!a.mnist.empty()) + int(!a.synthetic.empty());
  if (sources != 1)
    throw ConfigError("give exactly one dataset: --x-csv/--y-csv, --libsvm-x/--libsvm-y, --mnist or --synthetic");
  if (!a.x_csv.empty() || !a.y_csv.empty()) {
    if (a.x_csv.empty() || a.y_csv.empty()) throw ConfigError("--x-csv and --y-csv go together");
    return load_csv_pair(a.x_csv, a.y_csv, a.gamma_x, a.gamma_y);
  }
  if (!a.libsvm_x.empty() || !a.libsvm_y.empty()) {
    if (a.libsvm_x.empty() || a.libsvm_y.empty()) throw ConfigError("--libsvm-x and --libsvm-y go together");
    return load_libsvm_pair(a.libsvm_x, a.libsvm_y, a.gamma_x, a.gamma_y);
  }
  if (!a.mnist.empty()) return load_mnist_idx_split(a.mnist, a.gamma_x, a.gamma_y);
  return generate_synthetic(parse_synthetic_spec(read_file(a.synthetic)), a.gamma_x, a.gamma_y);
}

int cmd_exact(const DatasetArgs& a) {
  const CcaDataset ds = load_from_args(a);
  const ReferenceSolution ref = exact_solution(ds);
  const ConditionNumbers k = condition_numbers(ds, ref);
  std::printf("N        %td\n", ds.n());
  std::printf("dx, dy   %td, %td\n", ds.dx(), ds.dy());
  std::printf("rho1     %.12g\n", ref.rho1());
  std::printf("rho2     %.12g\n", ref.rho2());
  std::printf("gap      %.12g\n", ref.gap);
  std::printf("kappa~   %.6g\n", k.kappa_tilde);
  std::printf("kappa'   %.6g\n", k.kappa_prime);
  std::printf("kappa    %.6g\n", k.kappa);
  if (k.delta_factor)
    std::printf("delta    %.6g\n", *k.delta_factor);
  else
    std::printf("delta    inf (no gap)\n");
  return 0;
}

struct SolveArgs {
  std::string alg = "als-vr";
  double eta = 0.1;
  double passes_max = 50.0;
  std::uint64_t seed = 0;
  std::string csv, plot;
  AlgorithmSpec spec;
  double delta_tilde = 0.0;
};

int cmd_solve(const DatasetArgs& a, SolveArgs& s) {
  const CcaDataset ds = load_from_args(a);
  std::optional<ReferenceSolution> ref;
  try {
    ref = exact_solution(ds);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "warning: no reference solution (%s); suboptimality not reported\n", e.what());
  }
  s.spec.name = s.alg;
  s.spec.label = s.alg;
  if (s.delta_tilde > 0.0) s.spec.delta_tilde = s.delta_tilde;
  const InitialVectors init = random_initialization(ds, s.seed);
  const RunTrace trace = run_algorithm(ds, s.spec, s.passes_max, s.eta, s.seed, init.u, init.v, ref ? &*ref : nullptr);

  if (!s.csv.empty()) {
    std::ofstream out(s.csv, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + s.csv + "'");
    write_trace_csv(out, trace);
  }
  if (!s.plot.empty()) {
    if (s.csv.empty()) throw ConfigError("--plot needs --csv for the data file");
    CellResult cell;
    cell.gamma_x = ds.gamma_x();
    cell.gamma_y = ds.gamma_y();
    cell.label = s.alg;
    cell.path = s.csv;
    cell.trace = trace;
    std::ofstream out(s.plot, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + s.plot + "'");
    out << plot_script({cell});
  }
  if (trace.rows.empty()) throw NumericError(s.alg + ": " + trace.message);
  const TraceRow& last = trace.rows.back();
  std::printf("algorithm      %s\n", s.alg.c_str());
  std::printf("status         %s\n", trace.status.c_str());
  std::printf("passes         %s\n", format_double(last.passes).c_str());
  std::printf("objective      %.12g\n", last.objective);
  if (ref) {
    std::printf("rho1           %.12g\n", ref->rho1());
    std::printf("suboptimality  %.6g\n", last.suboptimality);
    std::printf("alignment      %.12g\n", std::min(last.align_u, last.align_v));
  }
  if (trace.status == "numeric_error") {
    std::fprintf(stderr, "error: %s\n", trace.message.c_str());
    return 3;
  }
  if (trace.status != "ok") std::fprintf(stderr, "warning: %s\n", trace.message.c_str());
  return 0;
}

int cmd_gen(const std::string& spec_path, const std::string& out_dir) {
  const SyntheticSpec spec = parse_synthetic_spec(read_file(spec_path));
  const SamplePair s = sample_synthetic(spec);
  std::filesystem::create_directories(out_dir);
  const auto x = (std::filesystem::path(out_dir) / "x.csv").string();
  const auto y = (std::filesystem::path(out_dir) / "y.csv").string();
  write_csv_matrix(x, s.x);
  write_csv_matrix(y, s.y);
  std::printf("wrote %s and %s (%td samples)\n", x.c_str(), y.c_str(), spec.n);
  return 0;
}

int cmd_bench(const std::string& config_path, std::string out_dir) {
  const ExperimentConfig config = load_experiment_config(config_path);
  if (out_dir.empty()) out_dir = config.output;
  if (out_dir.empty()) throw ConfigError("no output directory: pass --out or set 'output' in the config");
  const ExperimentResult r = run_experiment(config, out_dir);
  for (const CellResult& c : r.cells) {
    const TraceRow* last = c.trace.rows.empty() ? nullptr : &c.trace.rows.back();
    std::printf("gamma=(%s,%s) %-12s %-14s passes=%s subopt=%s\n", format_double(c.gamma_x).c_str(),
                format_double(c.gamma_y).c_str(), c.label.c_str(), c.trace.status.c_str(),
                last ? format_double(last->passes).c_str() : "-", last ? format_double(last->suboptimality).c_str() : "-");
  }
  for (const std::string& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("combined: %s\nplot:     %s\n", r.combined_path.c_str(), r.plot_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic canonical correlation analysis"};
  app.require_subcommand(1);

  DatasetArgs exact_args;
  auto* exact = app.add_subcommand("exact", "exact CCA by SVD: print rho1, rho2, gap and condition numbers");
  add_dataset_options(exact, exact_args);

  DatasetArgs solve_args;
  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "run one solver and report its final iterate");
  add_dataset_options(solve_cmd, solve_args);
  solve_cmd->add_option("--alg", solve.alg, "algorithm")
      ->check(CLI::IsMember({"als-vr", "als-avr", "als-agd", "als-gd", "si-vr", "si-avr", "appgrad", "s-appgrad"}));
  solve_cmd->add_option("--eta", solve.eta, "target accuracy in (0, 1)");
  solve_cmd->add_option("--passes-max", solve.passes_max, "pass budget")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--seed", solve.seed, "random seed");
  solve_cmd->add_option("--csv", solve.csv, "write the trace here");
  solve_cmd->add_option("--plot", solve.plot, "write a gnuplot script here (needs --csv)");
  solve_cmd->add_option("--epochs", solve.spec.epochs, "epochs per inner solve");
  solve_cmd->add_option("--step-size", solve.spec.step_size, "inner step size (0 = automatic)");
  solve_cmd->add_option("--batch-size", solve.spec.batch_size, "s-appgrad minibatch size");
  solve_cmd->add_option("--delta-tilde", solve.delta_tilde, "SI gap estimate (default: exact gap)");

  std::string gen_spec, gen_out;
  auto* gen = app.add_subcommand("gen", "sample a synthetic dataset to x.csv and y.csv");
  gen->add_option("--spec", gen_spec, "JSON synthetic spec")->required();
  gen->add_option("--out", gen_out, "output directory")->required();

  std::string bench_config, bench_out;
  auto* bench = app.add_subcommand("bench", "run a benchmark config and write traces and a plot script");
  bench->add_option("--config", bench_config, "JSON experiment config")->required();
  bench->add_option("--out", bench_out, "output directory (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*exact) return cmd_exact(exact_args);
    if (*solve_cmd) return cmd_solve(solve_args, solve);
    if (*gen) return cmd_gen(gen_spec, gen_out);
    if (*bench) return cmd_bench(bench_config, bench_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  }
  return 2;
}
