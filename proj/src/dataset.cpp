#include "stocca/dataset.hpp"

#include <Eigen/Eigenvalues>
#include <mutex>

#include "stocca/errors.hpp"

namespace stocca {

struct CcaDataset::Cache {
  std::once_flag blocks_once;
  DenseBlocks blocks;
  std::once_flag spectral_once;
  SpectralInfo spectral;
};

CcaDataset CcaDataset::make(DataMatrix x, DataMatrix y, double gamma_x, double gamma_y, Centering centering) {
  if (x.cols() != y.cols())
    throw DimensionError("views have different sample counts: " + std::to_string(x.cols()) + " vs " +
                         std::to_string(y.cols()));
  if (x.cols() < 1) throw ConfigError("dataset needs at least one sample");
  if (x.rows() < 1 || y.rows() < 1) throw ConfigError("each view needs at least one feature");
  if (!(gamma_x >= 0.0) || !(gamma_y >= 0.0)) throw ConfigError("ridge parameters must be nonnegative");

  CcaDataset ds;
  switch (centering) {
    case Centering::apply:
      ds.x_ = x.centered();
      ds.y_ = y.centered();
      ds.centered_ = true;
      break;
    case Centering::assume_centered:
      if (!rows_centered(x) || !rows_centered(y)) throw ConfigError("views are not centred");
      ds.x_ = std::move(x);
      ds.y_ = std::move(y);
      ds.centered_ = true;
      break;
    case Centering::none:
      ds.x_ = std::move(x);
      ds.y_ = std::move(y);
      ds.centered_ = rows_centered(ds.x_) && rows_centered(ds.y_);
      break;
  }
  ds.gamma_x_ = gamma_x;
  ds.gamma_y_ = gamma_y;
  ds.cache_ = std::make_shared<Cache>();
  return ds;
}

CcaDataset CcaDataset::with_gammas(double gamma_x, double gamma_y) const {
  if (!(gamma_x >= 0.0) || !(gamma_y >= 0.0)) throw ConfigError("ridge parameters must be nonnegative");
  CcaDataset ds = *this;
  ds.gamma_x_ = gamma_x;
  ds.gamma_y_ = gamma_y;
  ds.cache_ = std::make_shared<Cache>();
  return ds;
}

const DenseBlocks& CcaDataset::dense_blocks(Index max_dim) const {
  if (d() > max_dim)
    throw ConfigError("dense covariance needs d <= " + std::to_string(max_dim) + ", got " + std::to_string(d()));
  std::call_once(cache_->blocks_once, [this] {
    const double inv_n = 1.0 / static_cast<double>(n());
    DenseBlocks& b = cache_->blocks;
    b.sxx = x_.gram() * inv_n;
    b.sxx.diagonal().array() += gamma_x_;
    b.syy = y_.gram() * inv_n;
    b.syy.diagonal().array() += gamma_y_;
    b.sxy = x_.cross_gram(y_) * inv_n;
  });
  return cache_->blocks;
}

const SpectralInfo& CcaDataset::spectral_info() const {
  std::call_once(cache_->spectral_once, [this] {
    const DenseBlocks& b = dense_blocks();
    Eigen::SelfAdjointEigenSolver<MatrixXd> ex(b.sxx, Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<MatrixXd> ey(b.syy, Eigen::EigenvaluesOnly);
    SpectralInfo& s = cache_->spectral;
    s.sigma_min_x = std::max(ex.eigenvalues().minCoeff(), 0.0);
    s.sigma_max_x = ex.eigenvalues().maxCoeff();
    s.sigma_min_y = std::max(ey.eigenvalues().minCoeff(), 0.0);
    s.sigma_max_y = ey.eigenvalues().maxCoeff();
    s.max_sq_norm_x = x_.max_col_sq_norm();
    s.max_sq_norm_y = y_.max_col_sq_norm();
  });
  return cache_->spectral;
}

bool rows_centered(const DataMatrix& view) {
  const double n = static_cast<double>(view.cols());
  const VectorXd sums = view.accumulate(VectorXd::Ones(view.cols()));
  const VectorXd row_max = view.row_max_abs();
  for (Index r = 0; r < view.rows(); ++r)
    if (std::abs(sums[r]) > 1e-9 * n * row_max[r]) return false;
  return true;
}

}  // namespace stocca
