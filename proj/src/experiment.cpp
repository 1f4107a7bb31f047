#include "stocca/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stocca/als.hpp"
#include "stocca/baselines.hpp"
#include "stocca/errors.hpp"
#include "stocca/io.hpp"
#include "stocca/random.hpp"
#include "stocca/si.hpp"

namespace stocca {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  return get_or<T>(obj, key, T{}, where);
}

std::string resolve(const std::string& base, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? path : (fs::path(base) / p).lexically_normal().string();
}

SyntheticSpec synthetic_from_json(const json& j, const std::string& where) {
  SyntheticSpec s;
  s.dx = get_or<Index>(j, "dx", s.dx, where);
  s.dy = get_or<Index>(j, "dy", s.dy, where);
  s.n = get_or<Index>(j, "n", s.n, where);
  s.correlations = get_or<std::vector<double>>(j, "correlations", {}, where);
  s.noise_scale = get_or<double>(j, "noise_scale", s.noise_scale, where);
  s.seed = get_or<std::uint64_t>(j, "seed", s.seed, where);
  return s;
}

DatasetSource dataset_from_json(const json& j, const std::string& base) {
  const std::string where = "dataset";
  const std::string type = require<std::string>(j, "type", where);
  DatasetSource d;
  if (type == "synthetic") {
    check_keys(j, where, {"type", "dx", "dy", "n", "correlations", "noise_scale", "seed"});
    d.kind = DatasetKind::synthetic;
    d.synthetic = synthetic_from_json(j, where);
  } else if (type == "planted") {
    check_keys(j, where, {"type", "dx", "dy", "n", "correlations", "sigma_min", "sigma_max", "seed"});
    d.kind = DatasetKind::planted;
    PlantedSpec& p = d.planted;
    p.dx = get_or<Index>(j, "dx", p.dx, where);
    p.dy = get_or<Index>(j, "dy", p.dy, where);
    p.n = get_or<Index>(j, "n", p.n, where);
    p.correlations = get_or<std::vector<double>>(j, "correlations", {}, where);
    p.sigma_min = get_or<double>(j, "sigma_min", p.sigma_min, where);
    p.sigma_max = get_or<double>(j, "sigma_max", p.sigma_max, where);
    p.seed = get_or<std::uint64_t>(j, "seed", p.seed, where);
  } else if (type == "csv" || type == "libsvm") {
    check_keys(j, where, {"type", "x", "y"});
    d.kind = type == "csv" ? DatasetKind::csv : DatasetKind::libsvm;
    d.path_x = resolve(base, require<std::string>(j, "x", where));
    d.path_y = resolve(base, require<std::string>(j, "y", where));
  } else if (type == "mnist") {
    check_keys(j, where, {"type", "images"});
    d.kind = DatasetKind::mnist;
    d.path_x = resolve(base, require<std::string>(j, "images", where));
  } else {
    throw ConfigError("dataset.type: unknown '" + type + "' (expected synthetic, planted, csv, libsvm or mnist)");
  }
  return d;
}

const std::set<std::string>& algorithm_names() {
  static const std::set<std::string> names{"als-vr", "als-avr", "als-agd", "als-gd",
                                           "si-vr",  "si-avr",  "appgrad", "s-appgrad"};
  return names;
}

AlgorithmSpec algorithm_from_json(const json& j, std::size_t index) {
  const std::string where = "algorithms[" + std::to_string(index) + "]";
  AlgorithmSpec a;
  if (j.is_string()) {
    a.name = j.get<std::string>();
  } else {
    check_keys(j, where,
               {"name", "label", "epochs", "fixed_epochs", "step_size", "batch_size", "delta_tilde", "exit_threshold",
                "m1", "m2", "epsilon", "epsilon0", "decay"});
    a.name = require<std::string>(j, "name", where);
    a.label = get_or<std::string>(j, "label", "", where);
    a.epochs = get_or<int>(j, "epochs", 0, where);
    a.fixed_epochs = get_or<int>(j, "fixed_epochs", 0, where);
    a.step_size = get_or<double>(j, "step_size", 0.0, where);
    a.batch_size = get_or<Index>(j, "batch_size", a.batch_size, where);
    if (j.contains("delta_tilde")) a.delta_tilde = get_or<double>(j, "delta_tilde", 0.0, where);
    if (j.contains("exit_threshold")) a.exit_threshold = get_or<double>(j, "exit_threshold", 0.0, where);
    a.m1 = get_or<int>(j, "m1", 0, where);
    a.m2 = get_or<int>(j, "m2", 0, where);
    if (j.contains("epsilon")) a.epsilon = get_or<double>(j, "epsilon", 0.0, where);
    if (j.contains("epsilon0")) a.epsilon0 = get_or<double>(j, "epsilon0", 0.0, where);
    a.decay = get_or<double>(j, "decay", a.decay, where);
  }
  if (!algorithm_names().count(a.name)) throw ConfigError(where + ": unknown algorithm '" + a.name + "'");
  if (a.label.empty()) a.label = a.name;
  if (a.epochs < 0 || a.fixed_epochs < 0 || a.m1 < 0 || a.m2 < 0) throw ConfigError(where + ": counts must be >= 0");
  if (a.step_size < 0.0) throw ConfigError(where + ": step_size must be >= 0");
  return a;
}

std::string gamma_tag(double gx, double gy) { return "gx" + format_double(gx) + "_gy" + format_double(gy); }

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config",
             {"dataset", "gammas", "algorithms", "passes_max", "eta", "seed", "include_wall_time", "output"});
  ExperimentConfig c;
  if (!j.contains("dataset")) throw ConfigError("config: missing key 'dataset'");
  c.dataset = dataset_from_json(j.at("dataset"), base_dir);

  if (!j.contains("gammas") || !j.at("gammas").is_array() || j.at("gammas").empty())
    throw ConfigError("config.gammas: expected a nonempty list");
  for (const json& g : j.at("gammas")) {
    double gx = 0.0, gy = 0.0;
    if (g.is_number()) {
      gx = gy = g.get<double>();
    } else if (g.is_array() && g.size() == 2 && g[0].is_number() && g[1].is_number()) {
      gx = g[0].get<double>();
      gy = g[1].get<double>();
    } else {
      throw ConfigError("config.gammas: each entry is a number or a [gamma_x, gamma_y] pair");
    }
    if (!(gx >= 0.0) || !(gy >= 0.0)) throw ConfigError("config.gammas: values must be >= 0");
    c.gammas.emplace_back(gx, gy);
  }

  if (!j.contains("algorithms") || !j.at("algorithms").is_array() || j.at("algorithms").empty())
    throw ConfigError("config.algorithms: expected a nonempty list");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < j.at("algorithms").size(); ++i) {
    c.algorithms.push_back(algorithm_from_json(j.at("algorithms")[i], i));
    if (!labels.insert(c.algorithms.back().label).second)
      throw ConfigError("config.algorithms: duplicate label '" + c.algorithms.back().label + "'");
  }
  c.passes_max = get_or<double>(j, "passes_max", c.passes_max, "config");
  c.eta = get_or<double>(j, "eta", c.eta, "config");
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "config");
  c.include_wall_time = get_or<bool>(j, "include_wall_time", c.include_wall_time, "config");
  c.output = get_or<std::string>(j, "output", "", "config");
  if (!c.output.empty()) c.output = resolve(base_dir, c.output);
  if (!(c.passes_max > 0.0) || !std::isfinite(c.passes_max)) throw ConfigError("config.passes_max must be positive");
  if (!(c.eta > 0.0) || !(c.eta < 1.0)) throw ConfigError("config.eta must lie in (0, 1)");
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), fs::path(path).parent_path().string().empty()
                                               ? std::string(".")
                                               : fs::path(path).parent_path().string());
}

SyntheticSpec parse_synthetic_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("spec is not valid JSON: ") + e.what());
  }
  check_keys(j, "spec", {"dx", "dy", "n", "correlations", "noise_scale", "seed"});
  return synthetic_from_json(j, "spec");
}

CcaDataset load_dataset(const DatasetSource& source, double gamma_x, double gamma_y) {
  switch (source.kind) {
    case DatasetKind::synthetic: return generate_synthetic(source.synthetic, gamma_x, gamma_y);
    case DatasetKind::planted: {
      if (gamma_x != gamma_y) throw ConfigError("planted datasets need gamma_x == gamma_y");
      PlantedSpec p = source.planted;
      p.gamma = gamma_x;
      return planted_instance(p);
    }
    case DatasetKind::csv: return load_csv_pair(source.path_x, source.path_y, gamma_x, gamma_y);
    case DatasetKind::libsvm: return load_libsvm_pair(source.path_x, source.path_y, gamma_x, gamma_y);
    case DatasetKind::mnist: return load_mnist_idx_split(source.path_x, gamma_x, gamma_y);
  }
  throw ConfigError("unknown dataset kind");
}

RunTrace run_algorithm(const CcaDataset& ds, const AlgorithmSpec& spec, double passes_max, double eta,
                       std::uint64_t seed, const VectorXd& u0, const VectorXd& v0,
                       const ReferenceSolution* reference) {
  const std::string& name = spec.name;
  if (name.rfind("als-", 0) == 0) {
    AlsConfig c;
    c.inner = name == "als-vr" ? InnerSolver::svrg
              : name == "als-avr" ? InnerSolver::asvrg
              : name == "als-agd" ? InnerSolver::agd
                                  : InnerSolver::gd;
    c.eta = eta;
    if (spec.epsilon) {
      c.epsilon_mode = EpsilonMode::fixed;
      c.epsilon = *spec.epsilon;
    } else if (spec.epsilon0) {
      c.epsilon_mode = EpsilonMode::geometric;
      c.epsilon0 = *spec.epsilon0;
      c.decay = spec.decay;
    } else {
      c.epsilon_mode = EpsilonMode::fixed_epochs;
      // M = 2 epochs for SVRG/ASVRG, 10 iterations for GD/AGD.
      const bool stochastic = c.inner == InnerSolver::svrg || c.inner == InnerSolver::asvrg;
      c.inner_epochs = spec.epochs > 0 ? spec.epochs : (stochastic ? 2 : 10);
    }
    c.passes_max = passes_max;
    c.step_size = spec.step_size;
    c.seed = seed;
    c.u0 = u0;
    c.v0 = v0;
    return run_als(ds, c, reference, spec.label).trace;
  }
  if (name.rfind("si-", 0) == 0) {
    SiConfig c;
    c.mode = SiMode::practical;
    c.inner = name == "si-vr" ? InnerSolver::svrg : InnerSolver::asvrg;
    if (spec.delta_tilde) {
      c.delta_tilde = *spec.delta_tilde;
    } else {
      if (!reference) throw ConfigError(spec.label + ": needs delta_tilde when no reference solution is available");
      c.delta_tilde = reference->gap;
    }
    if (!(c.delta_tilde > 0.0)) throw ConfigError(spec.label + ": delta_tilde must be positive");
    c.eta = eta;
    c.m1 = spec.m1 > 0 ? spec.m1 : 2;
    c.m2 = spec.m2;
    c.exit_threshold = spec.exit_threshold.value_or(0.06);
    c.shrink_epochs = spec.epochs > 0 ? spec.epochs : 2;
    c.fixed_epochs = spec.fixed_epochs > 0 ? spec.fixed_epochs : 4;
    c.run_to_budget = true;
    c.passes_max = passes_max;
    c.step_size = spec.step_size;
    c.seed = seed;
    c.u0 = u0;
    c.v0 = v0;
    return run_si_phase1(ds, c, reference, spec.label).trace;
  }
  if (name == "appgrad") {
    AppGradConfig c;
    c.step_size = spec.step_size;
    c.passes_max = passes_max;
    c.seed = seed;
    c.u0 = u0;
    c.v0 = v0;
    return run_appgrad(ds, c, reference, spec.label).trace;
  }
  if (name == "s-appgrad") {
    MinibatchConfig mb;
    mb.batch_size = std::min(spec.batch_size, ds.n());
    mb.step_size = spec.step_size;
    mb.seed = seed;
    return run_s_appgrad(ds, mb, passes_max, reference, spec.label, u0, v0).trace;
  }
  throw ConfigError("unknown algorithm '" + name + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
  if (config.algorithms.empty()) throw ConfigError("no algorithms configured");
  if (config.gammas.empty()) throw ConfigError("no gamma values configured");
  fs::create_directories(out_dir);
  ExperimentResult result;

  for (std::size_t gi = 0; gi < config.gammas.size(); ++gi) {
    const auto [gx, gy] = config.gammas[gi];
    std::optional<CcaDataset> ds;
    std::string load_error;
    try {
      ds = load_dataset(config.dataset, gx, gy);
    } catch (const std::exception& e) {
      load_error = e.what();
      result.warnings.push_back("gamma (" + format_double(gx) + ", " + format_double(gy) + "): " + load_error);
    }
    std::optional<ReferenceSolution> ref;
    VectorXd u0, v0;
    if (ds) {
      try {
        ref = exact_solution(*ds);
      } catch (const std::exception& e) {
        result.warnings.push_back("gamma (" + format_double(gx) + ", " + format_double(gy) +
                                  "): no reference solution: " + e.what());
      }
      const InitialVectors init = random_initialization(*ds, derive_seed(config.seed, gi, 0));
      u0 = init.u;
      v0 = init.v;
    }

    for (std::size_t ai = 0; ai < config.algorithms.size(); ++ai) {
      const AlgorithmSpec& alg = config.algorithms[ai];
      CellResult cell;
      cell.gamma_x = gx;
      cell.gamma_y = gy;
      cell.label = alg.label;
      if (!ds) {
        cell.trace.status = "load_error";
        cell.trace.message = load_error;
      } else {
        try {
          cell.trace = run_algorithm(*ds, alg, config.passes_max, config.eta, derive_seed(config.seed, gi + 1, ai + 1),
                                     u0, v0, ref ? &*ref : nullptr);
        } catch (const ConfigError& e) {
          cell.trace.status = "config_error";
          cell.trace.message = e.what();
        } catch (const NumericError& e) {
          cell.trace.status = "numeric_error";
          cell.trace.message = e.what();
        }
      }
      if (cell.trace.status != "ok")
        result.warnings.push_back(alg.label + " at gamma (" + format_double(gx) + ", " + format_double(gy) +
                                  "): " + cell.trace.status + ": " + cell.trace.message);

      const std::string file = gamma_tag(gx, gy) + "_" + alg.label + ".csv";
      cell.path = (fs::path(out_dir) / file).string();
      std::ofstream out(cell.path, std::ios::binary);
      if (!out) throw ConfigError("cannot write '" + cell.path + "'");
      CsvOptions opt;
      opt.include_wall_time = config.include_wall_time;
      write_trace_csv(out, cell.trace, opt);
      result.cells.push_back(std::move(cell));
    }
  }

  result.combined_path = (fs::path(out_dir) / "combined.csv").string();
  {
    std::ofstream out(result.combined_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + result.combined_path + "'");
    bool header = true;
    for (const CellResult& cell : result.cells) {
      CsvOptions opt;
      opt.include_wall_time = config.include_wall_time;
      opt.header = header;
      opt.leading = {{"gamma_x", format_double(cell.gamma_x)}, {"gamma_y", format_double(cell.gamma_y)}};
      write_trace_csv(out, cell.trace, opt);
      header = false;
    }
  }
  result.plot_path = (fs::path(out_dir) / "plot.gp").string();
  {
    std::ofstream out(result.plot_path, std::ios::binary);
    out << plot_script(result.cells);
  }
  return result;
}

std::string plot_script(const std::vector<CellResult>& cells, const std::string& image_name) {
  if (cells.empty()) throw ConfigError("plot_script: no traces");
  // Panels in order of first appearance.
  std::vector<std::pair<double, double>> gammas;
  std::map<std::pair<double, double>, std::vector<const CellResult*>> by_gamma;
  for (const CellResult& c : cells) {
    const auto key = std::make_pair(c.gamma_x, c.gamma_y);
    if (!by_gamma.count(key)) gammas.push_back(key);
    by_gamma[key].push_back(&c);
  }
  auto has_data = [](const CellResult* c) {
    for (const TraceRow& r : c->trace.rows)
      if (r.suboptimality > 0.0 && std::isfinite(r.suboptimality)) return true;
    return false;
  };

  std::ostringstream s;
  std::ostringstream body;
  int panels = 0;
  for (const auto& g : gammas) {
    const auto& group = by_gamma[g];
    bool any = false;
    for (const CellResult* c : group) any = any || has_data(c);
    const std::string title = "gamma_x = " + format_double(g.first) + ", gamma_y = " + format_double(g.second);
    if (!any) {
      body << "# warning: panel '" << title << "' omitted, no suboptimality data (reference unavailable)\n";
      continue;
    }
    ++panels;
    body << "set title '" << title << "'\n";
    body << "plot ";
    bool first = true;
    for (const CellResult* c : group) {
      if (!has_data(c)) {
        body << (first ? "" : ", \\\n     ") << "NaN notitle";  // keeps the line well formed
        first = false;
        continue;
      }
      const std::string file = fs::path(c->path).filename().string();
      body << (first ? "" : ", \\\n     ") << "'" << file
           << "' every ::1 using 3:($5 > 0 ? $5 : NaN) with lines title '" << c->label << "'";
      first = false;
    }
    body << "\n";
  }

  s << "# Suboptimality against passes over the data, one panel per gamma.\n";
  s << "# Run from the directory holding the CSV files: gnuplot plot.gp\n";
  s << "set datafile separator ','\n";
  s << "set terminal pngcairo size " << 480 * std::max(panels, 1) << ",420\n";
  s << "set output '" << image_name << "'\n";
  s << "set logscale y\n";
  s << "set format y '10^{%L}'\n";
  s << "set xlabel '# passes'\n";
  s << "set ylabel 'suboptimality'\n";
  s << "set key top right\n";
  s << "set multiplot layout 1," << std::max(panels, 1) << "\n";
  s << body.str();
  s << "unset multiplot\n";
  return s.str();
}

}  // namespace stocca
