#pragma once

#include "stocca/dataset.hpp"

namespace stocca {

enum class CovarianceKind { auto_covariance, cross_covariance };

/// Implicit covariance Σ = (1/N)AAᵀ + γI (auto) or Σ = (1/N)ABᵀ (cross),
/// applied through the data without ever forming Σ.
///
/// Holds non-owning references to the views; they must outlive the operator.
class CovarianceOperator {
 public:
  static CovarianceOperator auto_cov(const DataMatrix& a, double gamma);
  static CovarianceOperator cross_cov(const DataMatrix& left, const DataMatrix& right);

  static CovarianceOperator xx(const CcaDataset& ds) { return auto_cov(ds.x(), ds.gamma_x()); }
  static CovarianceOperator yy(const CcaDataset& ds) { return auto_cov(ds.y(), ds.gamma_y()); }
  static CovarianceOperator xy(const CcaDataset& ds) { return cross_cov(ds.x(), ds.y()); }

  CovarianceKind kind() const { return kind_; }
  Index rows() const { return left_->rows(); }
  Index cols() const { return right_->rows(); }
  double gamma() const { return gamma_; }
  const DataMatrix& left() const { return *left_; }
  const DataMatrix& right() const { return *right_; }

 private:
  const DataMatrix* left_ = nullptr;
  const DataMatrix* right_ = nullptr;
  double gamma_ = 0.0;
  CovarianceKind kind_ = CovarianceKind::auto_covariance;
};

/// Σw evaluated as (1/N)·A(Bᵀw) + γw.
VectorXd cov_matvec(const CovarianceOperator& op, const VectorXd& w);
/// Σᵀw for the cross kind; identical to cov_matvec for the auto kind.
VectorXd cov_matvec_transpose(const CovarianceOperator& op, const VectorXd& w);

struct QuadraticForm {
  double value = 0.0;
  /// Aᵀw, kept so callers can reuse it for a batch gradient.
  VectorXd projection;
};

/// wᵀΣw = ‖Aᵀw‖²/N + γ‖w‖² for an auto-covariance operator.
QuadraticForm cov_quadratic_form(const CovarianceOperator& op, const VectorXd& w);

/// Same value from a precomputed projection p = Aᵀw.
double quadratic_form_from_projection(const VectorXd& projection, const VectorXd& w, double gamma);

struct Normalized {
  VectorXd w;
  VectorXd projection;
  /// wᵀΣw before rescaling.
  double norm_sq = 0.0;
};

/// w / √(wᵀΣw) together with its projection Aᵀ(w/√(wᵀΣw)). Throws
/// NumericError when the Σ-norm is zero or not finite.
Normalized sigma_normalize(const CovarianceOperator& op, const VectorXd& w);

/// Same, reusing a projection p = Aᵀw that the caller already has.
Normalized sigma_normalize(const VectorXd& w, const VectorXd& projection, double gamma);

}  // namespace stocca
