#include "stocca/covariance.hpp"

#include <cmath>

#include "stocca/errors.hpp"

namespace stocca {

CovarianceOperator CovarianceOperator::auto_cov(const DataMatrix& a, double gamma) {
  if (!(gamma >= 0.0)) throw ConfigError("covariance ridge must be nonnegative");
  CovarianceOperator op;
  op.left_ = &a;
  op.right_ = &a;
  op.gamma_ = gamma;
  op.kind_ = CovarianceKind::auto_covariance;
  return op;
}

CovarianceOperator CovarianceOperator::cross_cov(const DataMatrix& left, const DataMatrix& right) {
  if (left.cols() != right.cols()) throw DimensionError("cross covariance views have different sample counts");
  CovarianceOperator op;
  op.left_ = &left;
  op.right_ = &right;
  op.kind_ = CovarianceKind::cross_covariance;
  return op;
}

VectorXd cov_matvec(const CovarianceOperator& op, const VectorXd& w) {
  if (w.size() != op.cols()) throw DimensionError("cov_matvec: vector length does not match operator");
  const double inv_n = 1.0 / static_cast<double>(op.left().cols());
  VectorXd out = op.left().accumulate(op.right().project(w)) * inv_n;
  if (op.kind() == CovarianceKind::auto_covariance && op.gamma() != 0.0) out += op.gamma() * w;
  return out;
}

VectorXd cov_matvec_transpose(const CovarianceOperator& op, const VectorXd& w) {
  if (op.kind() == CovarianceKind::auto_covariance) return cov_matvec(op, w);
  if (w.size() != op.rows()) throw DimensionError("cov_matvec_transpose: vector length does not match operator");
  const double inv_n = 1.0 / static_cast<double>(op.left().cols());
  return op.right().accumulate(op.left().project(w)) * inv_n;
}

QuadraticForm cov_quadratic_form(const CovarianceOperator& op, const VectorXd& w) {
  if (op.kind() != CovarianceKind::auto_covariance)
    throw ConfigError("cov_quadratic_form needs an auto-covariance operator");
  if (w.size() != op.rows()) throw DimensionError("cov_quadratic_form: vector length does not match operator");
  QuadraticForm q;
  q.projection = op.left().project(w);
  q.value = quadratic_form_from_projection(q.projection, w, op.gamma());
  return q;
}

double quadratic_form_from_projection(const VectorXd& projection, const VectorXd& w, double gamma) {
  return projection.squaredNorm() / static_cast<double>(projection.size()) + gamma * w.squaredNorm();
}

Normalized sigma_normalize(const CovarianceOperator& op, const VectorXd& w) {
  if (op.kind() != CovarianceKind::auto_covariance) throw ConfigError("sigma_normalize needs an auto-covariance");
  if (w.size() != op.rows()) throw DimensionError("sigma_normalize: vector length does not match operator");
  return sigma_normalize(w, op.left().project(w), op.gamma());
}

Normalized sigma_normalize(const VectorXd& w, const VectorXd& projection, double gamma) {
  const double q = quadratic_form_from_projection(projection, w, gamma);
  if (!(q > 0.0) || !std::isfinite(q)) throw NumericError("cannot normalise a vector with zero or non-finite Σ-norm");
  const double scale = 1.0 / std::sqrt(q);
  return {w * scale, projection * scale, q};
}

}  // namespace stocca
