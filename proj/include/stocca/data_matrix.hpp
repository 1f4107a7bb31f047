#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "stocca/kernels.hpp"

namespace stocca {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// One view of the data: `rows()` features by `cols()` samples, one sample
/// per column.
///
/// Dense views store their (already centred) columns directly. Sparse views
/// keep the raw compressed columns plus an `offset` vector; the logical
/// column i is `s_i - offset`, so centring never densifies the storage.
/// All access goes through the logical columns.
class DataMatrix {
 public:
  DataMatrix() = default;

  static DataMatrix dense(MatrixXd values);
  static DataMatrix sparse(SparseMatrix values, VectorXd offset = {});

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  bool is_sparse() const { return sparse_; }
  const VectorXd& offset() const { return offset_; }

  /// p = Aᵀw, one entry per sample.
  VectorXd project(const VectorXd& w) const;
  /// A·r = Σ_i r_i a_i.
  VectorXd accumulate(const VectorXd& r) const;

  double col_dot(Index i, Eigen::Ref<const VectorXd> w) const;
  /// y += alpha · a_i
  void col_axpy(Index i, double alpha, Eigen::Ref<VectorXd> y) const;
  VectorXd col_sq_norms() const;
  double max_col_sq_norm() const;

  /// A·Aᵀ (unnormalised, dense).
  MatrixXd gram() const;
  /// A·Bᵀ for two views with the same number of samples.
  MatrixXd cross_gram(const DataMatrix& other) const;
  /// Logical columns as a dense matrix.
  MatrixXd to_dense() const;
  /// Largest absolute entry of each logical row.
  VectorXd row_max_abs() const;
  /// Mean of the logical columns.
  VectorXd column_mean() const;

  /// A copy whose logical columns have zero mean. Dense views are
  /// centred in place; sparse views absorb the mean into `offset`.
  DataMatrix centered() const;

  kernels::DenseView dense_view() const;
  kernels::CscView csc_view() const;

 private:
  MatrixXd dense_;
  SparseMatrix sparse_values_;
  VectorXd offset_;
  Index rows_ = 0;
  Index cols_ = 0;
  bool sparse_ = false;
  bool has_offset_ = false;
};

/// Subtracts the mean column from every column, leaving each row with zero
/// mean.
MatrixXd center_columns(const MatrixXd& view);

}  // namespace stocca
