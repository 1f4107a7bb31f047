#pragma once

#include <memory>

#include "stocca/data_matrix.hpp"

namespace stocca {

/// Dense covariance blocks, ridge included on the diagonal blocks:
/// sxx = XXᵀ/N + γx I, syy = YYᵀ/N + γy I, sxy = XYᵀ/N.
struct DenseBlocks {
  MatrixXd sxx;
  MatrixXd syy;
  MatrixXd sxy;
};

/// Extreme eigenvalues of the regularised auto-covariances and the largest
/// per-sample squared norms; these drive step sizes and condition numbers.
struct SpectralInfo {
  double sigma_max_x = 0.0;
  double sigma_min_x = 0.0;
  double sigma_max_y = 0.0;
  double sigma_min_y = 0.0;
  double max_sq_norm_x = 0.0;
  double max_sq_norm_y = 0.0;
};

enum class Centering { apply, assume_centered, none };

/// Paired views X (dx × N) and Y (dy × N) with ridge parameters.
///
/// Immutable after construction. The dense blocks and spectral info are
/// computed lazily on first use and shared between copies; both caches are
/// safe to populate from concurrent readers.
class CcaDataset {
 public:
  CcaDataset() = default;

  /// Validates shapes and ridges. With Centering::apply the views are
  /// centred; Centering::assume_centered checks that they already are.
  static CcaDataset make(DataMatrix x, DataMatrix y, double gamma_x, double gamma_y,
                         Centering centering = Centering::apply);

  const DataMatrix& x() const { return x_; }
  const DataMatrix& y() const { return y_; }
  double gamma_x() const { return gamma_x_; }
  double gamma_y() const { return gamma_y_; }
  bool centered() const { return centered_; }

  Index n() const { return x_.cols(); }
  Index dx() const { return x_.rows(); }
  Index dy() const { return y_.rows(); }
  Index d() const { return dx() + dy(); }

  /// Same views, different ridges; the cache is not shared.
  CcaDataset with_gammas(double gamma_x, double gamma_y) const;

  /// Throws ConfigError above `max_dim` total dimensions.
  const DenseBlocks& dense_blocks(Index max_dim = 10000) const;
  const SpectralInfo& spectral_info() const;

 private:
  struct Cache;

  DataMatrix x_;
  DataMatrix y_;
  double gamma_x_ = 0.0;
  double gamma_y_ = 0.0;
  bool centered_ = false;
  std::shared_ptr<Cache> cache_;
};

/// True when every row of `view` sums to zero within 1e-9·N·(row max-abs).
bool rows_centered(const DataMatrix& view);

}  // namespace stocca
