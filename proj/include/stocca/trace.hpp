#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "stocca/metrics.hpp"

namespace stocca {

/// One sample of a solver's progress. Quantities that need the reference
/// solution are NaN when it is unavailable.
struct TraceRow {
  std::string algorithm;
  int step = 0;
  double passes = 0.0;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double suboptimality = std::numeric_limits<double>::quiet_NaN();
  double align_u = std::numeric_limits<double>::quiet_NaN();
  double align_v = std::numeric_limits<double>::quiet_NaN();
  double constraint_u = std::numeric_limits<double>::quiet_NaN();
  double constraint_v = std::numeric_limits<double>::quiet_NaN();
  double wall_time = 0.0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  /// "ok", or the failure category when the run stopped early.
  std::string status = "ok";
  std::string message;
};

/// Metrics of (u, v); without a reference only the objective and the
/// constraints are filled. With `rescale` each view is first scaled to unit
/// Σ-norm, which is how jointly normalised iterates are reported.
TraceRow make_row(const std::string& algorithm, int step, double passes, const CcaDataset& ds, const VectorXd& u,
                  const VectorXd& v, const ReferenceSolution* reference, bool rescale = false);

struct CsvOptions {
  bool include_wall_time = false;
  bool header = true;
  /// Constant (name, value) columns placed before the trace columns.
  std::vector<std::pair<std::string, std::string>> leading;
};

void write_trace_csv(std::ostream& out, const RunTrace& trace, const CsvOptions& options = {});

/// Shortest decimal form that parses back to the same double; "nan" and
/// "inf" for non-finite values.
std::string format_double(double x);

}  // namespace stocca
