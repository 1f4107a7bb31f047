#include "stocca/data_matrix.hpp"

#include <algorithm>
#include <cmath>

#include "stocca/errors.hpp"

namespace stocca {

DataMatrix DataMatrix::dense(MatrixXd values) {
  DataMatrix m;
  m.rows_ = values.rows();
  m.cols_ = values.cols();
  m.dense_ = std::move(values);
  m.offset_ = VectorXd::Zero(m.rows_);
  return m;
}

DataMatrix DataMatrix::sparse(SparseMatrix values, VectorXd offset) {
  DataMatrix m;
  values.makeCompressed();
  m.rows_ = values.rows();
  m.cols_ = values.cols();
  m.sparse_ = true;
  if (offset.size() == 0) offset = VectorXd::Zero(m.rows_);
  if (offset.size() != m.rows_) throw DimensionError("sparse offset length does not match row count");
  m.has_offset_ = offset.cwiseAbs().maxCoeff() > 0.0;
  m.offset_ = std::move(offset);
  m.sparse_values_ = std::move(values);
  return m;
}

kernels::DenseView DataMatrix::dense_view() const { return {dense_.data(), rows_, cols_}; }

kernels::CscView DataMatrix::csc_view() const {
  return {sparse_values_.outerIndexPtr(), sparse_values_.innerIndexPtr(), sparse_values_.valuePtr(), rows_,
          cols_};
}

VectorXd DataMatrix::project(const VectorXd& w) const {
  if (w.size() != rows_) throw DimensionError("project: vector length does not match view dimension");
  VectorXd out(cols_);
  if (!sparse_) {
    kernels::omp::project(dense_view(), w.data(), out.data());
  } else {
    kernels::omp::project(csc_view(), w.data(), out.data());
    if (has_offset_) out.array() -= offset_.dot(w);
  }
  return out;
}

VectorXd DataMatrix::accumulate(const VectorXd& r) const {
  if (r.size() != cols_) throw DimensionError("accumulate: weight length does not match sample count");
  VectorXd out(rows_);
  if (!sparse_) {
    kernels::omp::accumulate(dense_view(), r.data(), out.data());
  } else {
    kernels::omp::accumulate(csc_view(), r.data(), out.data());
    if (has_offset_) out -= r.sum() * offset_;
  }
  return out;
}

double DataMatrix::col_dot(Index i, Eigen::Ref<const VectorXd> w) const {
  if (!sparse_) return dense_.col(i).dot(w);
  double s = 0.0;
  for (SparseMatrix::InnerIterator it(sparse_values_, i); it; ++it) s += it.value() * w[it.index()];
  if (has_offset_) s -= offset_.dot(w);
  return s;
}

void DataMatrix::col_axpy(Index i, double alpha, Eigen::Ref<VectorXd> y) const {
  if (!sparse_) {
    y.noalias() += alpha * dense_.col(i);
    return;
  }
  for (SparseMatrix::InnerIterator it(sparse_values_, i); it; ++it) y[it.index()] += alpha * it.value();
  if (has_offset_) y.noalias() -= alpha * offset_;
}

VectorXd DataMatrix::col_sq_norms() const {
  VectorXd out(cols_);
  if (!sparse_) {
    kernels::omp::column_sq_norms(dense_view(), out.data());
    return out;
  }
  if (!has_offset_) {
    kernels::omp::column_sq_norms(csc_view(), out.data());
    return out;
  }
  // ‖s - m‖² = ‖s‖² - 2 sᵀm + ‖m‖²
  kernels::omp::column_sq_norms(csc_view(), out.data());
  VectorXd cross(cols_);
  kernels::omp::project(csc_view(), offset_.data(), cross.data());
  out += offset_.squaredNorm() * VectorXd::Ones(cols_) - 2.0 * cross;
  return out.cwiseMax(0.0);
}

double DataMatrix::max_col_sq_norm() const { return cols_ == 0 ? 0.0 : col_sq_norms().maxCoeff(); }

MatrixXd DataMatrix::to_dense() const {
  if (!sparse_) return dense_;
  MatrixXd out = MatrixXd(sparse_values_);
  if (has_offset_) out.colwise() -= offset_;
  return out;
}

VectorXd DataMatrix::row_max_abs() const {
  if (cols_ == 0) return VectorXd::Zero(rows_);
  if (!sparse_) return dense_.cwiseAbs().rowwise().maxCoeff();
  // Implicit zeros contribute |offset_r|; stored entries contribute |v - offset_r|.
  VectorXd out = offset_.cwiseAbs();
  VectorXd nnz_per_row = VectorXd::Zero(rows_);
  for (Index j = 0; j < cols_; ++j)
    for (SparseMatrix::InnerIterator it(sparse_values_, j); it; ++it) {
      out[it.index()] = std::max(out[it.index()], std::abs(it.value() - offset_[it.index()]));
      nnz_per_row[it.index()] += 1.0;
    }
  // A fully dense row never takes the implicit-zero value.
  for (Index r = 0; r < rows_; ++r)
    if (nnz_per_row[r] == static_cast<double>(cols_)) {
      double m = 0.0;
      for (Index j = 0; j < cols_; ++j) m = std::max(m, std::abs(sparse_values_.coeff(r, j) - offset_[r]));
      out[r] = m;
    }
  return out;
}

VectorXd DataMatrix::column_mean() const {
  if (cols_ == 0) return VectorXd::Zero(rows_);
  if (!sparse_) return dense_.rowwise().mean();
  VectorXd raw = accumulate(VectorXd::Ones(cols_));
  return raw / static_cast<double>(cols_);
}

MatrixXd DataMatrix::gram() const {
  if (!sparse_) {
    MatrixXd g = MatrixXd::Zero(rows_, rows_);
    g.selfadjointView<Eigen::Lower>().rankUpdate(dense_);
    return g.selfadjointView<Eigen::Lower>();
  }
  // Σ (s_i - m)(s_i - m)ᵀ = SSᵀ - m(S1)ᵀ - (S1)mᵀ + N mmᵀ
  MatrixXd g = MatrixXd(sparse_values_ * sparse_values_.transpose());
  if (has_offset_) {
    VectorXd col_sum = sparse_values_ * VectorXd::Ones(cols_);
    g -= offset_ * col_sum.transpose() + col_sum * offset_.transpose();
    g += static_cast<double>(cols_) * offset_ * offset_.transpose();
  }
  return g;
}

MatrixXd DataMatrix::cross_gram(const DataMatrix& other) const {
  if (other.cols_ != cols_) throw DimensionError("cross_gram: views have different sample counts");
  if (!sparse_ && !other.sparse_) return dense_ * other.dense_.transpose();
  if (sparse_ && other.sparse_) {
    MatrixXd g = MatrixXd(sparse_values_ * other.sparse_values_.transpose());
    if (has_offset_ || other.has_offset_) {
      VectorXd sa = sparse_values_ * VectorXd::Ones(cols_);
      VectorXd sb = other.sparse_values_ * VectorXd::Ones(cols_);
      g -= offset_ * sb.transpose() + sa * other.offset_.transpose();
      g += static_cast<double>(cols_) * offset_ * other.offset_.transpose();
    }
    return g;
  }
  return to_dense() * other.to_dense().transpose();
}

DataMatrix DataMatrix::centered() const {
  if (!sparse_) return dense(center_columns(dense_));
  return sparse(sparse_values_, offset_ + column_mean());
}

MatrixXd center_columns(const MatrixXd& view) {
  if (view.cols() == 0) return view;
  MatrixXd out = view;
  out.colwise() -= view.rowwise().mean();
  return out;
}

}  // namespace stocca
