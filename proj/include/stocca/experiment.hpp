#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stocca/reference.hpp"
#include "stocca/synthetic.hpp"
#include "stocca/trace.hpp"

namespace stocca {

enum class DatasetKind { synthetic, planted, csv, libsvm, mnist };

struct DatasetSource {
  DatasetKind kind = DatasetKind::synthetic;
  SyntheticSpec synthetic;
  PlantedSpec planted;  // gamma is taken from each gamma cell
  std::string path_x;   // csv / libsvm x view, or the mnist image file
  std::string path_y;
};

/// One benchmarked algorithm. Fields left at their defaults fall back to
/// the per-algorithm settings described in the README.
struct AlgorithmSpec {
  std::string name;   // als-vr, als-avr, als-agd, als-gd, si-vr, si-avr, appgrad, s-appgrad
  std::string label;  // trace/file name; defaults to name
  int epochs = 0;        // ALS: epochs per inner solve; SI: per shrink-loop solve
  int fixed_epochs = 0;  // SI: epochs per solve at λ_(f)
  double step_size = 0.0;
  Index batch_size = 100;
  std::optional<double> delta_tilde;
  std::optional<double> exit_threshold;
  int m1 = 0;
  int m2 = 0;
  std::optional<double> epsilon;   // ALS: fixed ε instead of fixed epochs
  std::optional<double> epsilon0;  // ALS: geometric ε0·decay^(t−1)
  double decay = 0.5;
};

struct ExperimentConfig {
  DatasetSource dataset;
  std::vector<std::pair<double, double>> gammas;
  std::vector<AlgorithmSpec> algorithms;
  double passes_max = 100.0;
  double eta = 0.1;
  std::uint64_t seed = 0;
  bool include_wall_time = false;
  std::string output;  // directory; the CLI's --out overrides it
};

/// Parses the JSON config text. Relative data paths are resolved against
/// `base_dir`. Unknown keys are errors.
ExperimentConfig parse_experiment_config(const std::string& json_text, const std::string& base_dir = ".");
ExperimentConfig load_experiment_config(const std::string& path);

/// JSON object with dx, dy, n, correlations, noise_scale, seed.
SyntheticSpec parse_synthetic_spec(const std::string& json_text);

/// The dataset of one gamma cell.
CcaDataset load_dataset(const DatasetSource& source, double gamma_x, double gamma_y);

/// Runs one algorithm from (u0, v0) until `passes_max`. Solver failures are
/// reported in the trace status rather than thrown.
RunTrace run_algorithm(const CcaDataset& ds, const AlgorithmSpec& spec, double passes_max, double eta,
                       std::uint64_t seed, const VectorXd& u0, const VectorXd& v0,
                       const ReferenceSolution* reference);

struct CellResult {
  double gamma_x = 0.0;
  double gamma_y = 0.0;
  std::string label;
  std::string path;  // file the trace was written to
  RunTrace trace;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  std::string combined_path;
  std::string plot_path;
  std::vector<std::string> warnings;
};

/// One CSV per (gamma, algorithm), combined.csv and plot.gp in `out_dir`.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir);

/// gnuplot script: one panel per gamma, one curve per algorithm,
/// suboptimality against passes on a log y-axis. Panels whose traces have
/// no positive suboptimality are left out with a comment saying so.
std::string plot_script(const std::vector<CellResult>& cells, const std::string& image_name = "figure.png");

}  // namespace stocca
