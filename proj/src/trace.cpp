#include "stocca/trace.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "stocca/covariance.hpp"

namespace stocca {

TraceRow make_row(const std::string& algorithm, int step, double passes, const CcaDataset& ds, const VectorXd& u,
                  const VectorXd& v, const ReferenceSolution* reference, bool rescale) {
  TraceRow row;
  row.algorithm = algorithm;
  row.step = step;
  row.passes = passes;

  VectorXd uu = u;
  VectorXd vv = v;
  if (rescale) {
    uu = sigma_normalize(CovarianceOperator::xx(ds), u).w;
    vv = sigma_normalize(CovarianceOperator::yy(ds), v).w;
  }
  if (reference) {
    const MetricReport m = evaluate_metrics(ds, uu, vv, *reference);
    row.objective = m.objective;
    row.suboptimality = m.suboptimality;
    row.align_u = m.align_u;
    row.align_v = m.align_v;
    row.constraint_u = m.constraint_u;
    row.constraint_v = m.constraint_v;
    return row;
  }
  const VectorXd p = ds.x().project(uu);
  const VectorXd q = ds.y().project(vv);
  row.objective = p.dot(q) / static_cast<double>(ds.n());
  row.constraint_u = quadratic_form_from_projection(p, uu, ds.gamma_x());
  row.constraint_v = quadratic_form_from_projection(q, vv, ds.gamma_y());
  return row;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& out, const RunTrace& trace, const CsvOptions& options) {
  if (options.header) {
    for (const auto& [name, value] : options.leading) out << name << ',';
    out << "algorithm,step,passes,objective,suboptimality,align_u,align_v,constraint_u,constraint_v,status";
    if (options.include_wall_time) out << ",wall_time";
    out << '\n';
  }
  for (const TraceRow& r : trace.rows) {
    for (const auto& [name, value] : options.leading) out << value << ',';
    out << r.algorithm << ',' << r.step << ',' << format_double(r.passes) << ',' << format_double(r.objective) << ','
        << format_double(r.suboptimality) << ',' << format_double(r.align_u) << ',' << format_double(r.align_v) << ','
        << format_double(r.constraint_u) << ',' << format_double(r.constraint_v) << ',' << trace.status;
    if (options.include_wall_time) out << ',' << format_double(r.wall_time);
    out << '\n';
  }
}

}  // namespace stocca
