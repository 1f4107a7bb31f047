#include "stocca/metrics.hpp"

#include <algorithm>
#include <limits>

#include "stocca/errors.hpp"

namespace stocca {

MetricReport evaluate_metrics(const CcaDataset& ds, const VectorXd& u, const VectorXd& v,
                              const ReferenceSolution& reference) {
  if (u.size() != ds.dx() || v.size() != ds.dy()) throw DimensionError("evaluate_metrics: iterate sizes");
  const DenseBlocks& b = ds.dense_blocks();
  MetricReport m;
  m.objective = u.dot(b.sxy * v);
  m.constraint_u = u.dot(b.sxx * u);
  m.constraint_v = v.dot(b.syy * v);
  const double au = u.dot(reference.sigma_u_star);
  const double av = v.dot(reference.sigma_v_star);
  m.align_u = au * au;
  m.align_v = av * av;
  m.suboptimality = reference.rho1() - m.objective;
  return m;
}

double joint_alignment(const VectorXd& u, const VectorXd& v, const ReferenceSolution& reference) {
  const double s = u.dot(reference.sigma_u_star) + v.dot(reference.sigma_v_star);
  return 0.25 * s * s;
}

ConditionNumbers condition_numbers(const CcaDataset& ds, const ReferenceSolution& reference) {
  const SpectralInfo& s = reference.spectrum;
  const double inf = std::numeric_limits<double>::infinity();
  auto ratio = [inf](double num, double den) { return den > 0.0 ? num / den : inf; };
  (void)ds;

  ConditionNumbers c;
  const double min_sigma = std::min(s.sigma_min_x, s.sigma_min_y);
  c.kappa_tilde = ratio(std::max(s.max_sq_norm_x, s.max_sq_norm_y), min_sigma);
  c.kappa_prime = std::max(ratio(s.sigma_max_x, s.sigma_min_x), ratio(s.sigma_max_y, s.sigma_min_y));
  c.kappa = std::max(ratio(s.max_sq_norm_x, s.sigma_min_x), ratio(s.max_sq_norm_y, s.sigma_min_y));

  const double r1 = reference.rho1();
  const double r2 = reference.rho2();
  if (r1 - r2 > kGapTolerance) c.delta_factor = r1 * r1 / (r1 * r1 - r2 * r2);
  return c;
}

}  // namespace stocca
