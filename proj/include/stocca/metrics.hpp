#pragma once

#include <optional>

#include "stocca/reference.hpp"

namespace stocca {

struct MetricReport {
  double objective = 0.0;     // uᵀΣxy v
  double align_u = 0.0;       // (uᵀΣxx u*)²
  double align_v = 0.0;       // (vᵀΣyy v*)²
  double constraint_u = 0.0;  // uᵀΣxx u
  double constraint_v = 0.0;  // vᵀΣyy v
  double suboptimality = 0.0; // ρ1 − objective

  double min_alignment() const { return std::min(align_u, align_v); }
};

MetricReport evaluate_metrics(const CcaDataset& ds, const VectorXd& u, const VectorXd& v,
                              const ReferenceSolution& reference);

/// −1 when uᵀΣxy v < 0, else 1, from the projections Xᵀu and Yᵀv.
/// The constraints leave the relative sign of u and v free and alternating
/// updates keep whatever sign the start had, so reported pairs use sign·v.
inline double relative_sign(const VectorXd& xu, const VectorXd& yv) { return xu.dot(yv) < 0.0 ? -1.0 : 1.0; }

/// ¼(uᵀΣxx u* + vᵀΣyy v*)², the alignment of the concatenated whitened
/// iterate with the top eigenvector of the shifted system.
double joint_alignment(const VectorXd& u, const VectorXd& v, const ReferenceSolution& reference);

struct ConditionNumbers {
  double kappa_tilde = 0.0;  // max_i max(‖x_i‖²,‖y_i‖²) / min(σmin(Σxx), σmin(Σyy))
  double kappa_prime = 0.0;  // max(σmax/σmin) over the two views
  double kappa = 0.0;        // max(max_i‖x_i‖²/σmin(Σxx), max_i‖y_i‖²/σmin(Σyy))
  std::optional<double> delta_factor;  // ρ1²/(ρ1²−ρ2²); absent without a gap
};

/// Condition numbers of the regularised covariances (γ included).
ConditionNumbers condition_numbers(const CcaDataset& ds, const ReferenceSolution& reference);

/// Singular values closer than this are treated as a missing gap.
inline constexpr double kGapTolerance = 1e-12;

}  // namespace stocca
