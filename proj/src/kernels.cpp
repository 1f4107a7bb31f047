#include "stocca/kernels.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stocca::kernels {

namespace {

using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using Vec = Eigen::Map<Eigen::VectorXd>;

inline double dense_dot(const double* a, const double* w, Index n) {
  return ConstVec(a, n).dot(ConstVec(w, n));
}

inline double sparse_dot(const CscView& a, Index i, const double* w) {
  double s = 0.0;
  for (int k = a.outer[i]; k < a.outer[i + 1]; ++k) s += a.values[k] * w[a.inner[k]];
  return s;
}

inline void dense_axpy(double alpha, const double* x, double* y, Index n) {
  Vec(y, n).noalias() += alpha * ConstVec(x, n);
}

inline void sparse_axpy(const CscView& a, Index i, double alpha, double* y) {
  for (int k = a.outer[i]; k < a.outer[i + 1]; ++k) y[a.inner[k]] += alpha * a.values[k];
}

Index block_count(Index n) { return (n + kBlock - 1) / kBlock; }

// Accumulates each block into its own partial vector, then sums the
// partials in block order.
template <typename Axpy>
void blocked_accumulate(Index rows, Index cols, const double* r, double* out, Axpy axpy) {
  const Index nblocks = block_count(cols);
  Vec result(out, rows);
  if (nblocks <= 1) {
    result.setZero();
    for (Index i = 0; i < cols; ++i) axpy(i, r[i], out);
    return;
  }
  std::vector<double> partial(static_cast<std::size_t>(nblocks * rows), 0.0);
#pragma omp parallel for schedule(static)
  for (Index b = 0; b < nblocks; ++b) {
    double* acc = partial.data() + b * rows;
    const Index end = std::min(cols, (b + 1) * kBlock);
    for (Index i = b * kBlock; i < end; ++i) axpy(i, r[i], acc);
  }
  result.setZero();
  for (Index b = 0; b < nblocks; ++b) result += ConstVec(partial.data() + b * rows, rows);
}

}  // namespace

namespace serial {

void project(const DenseView& a, const double* w, double* out) {
  for (Index i = 0; i < a.cols; ++i) {
    const double* col = a.col(i);
    double s = 0.0;
    for (Index k = 0; k < a.rows; ++k) s += col[k] * w[k];
    out[i] = s;
  }
}

void project(const CscView& a, const double* w, double* out) {
  for (Index i = 0; i < a.cols; ++i) out[i] = sparse_dot(a, i, w);
}

void accumulate(const DenseView& a, const double* r, double* out) {
  std::fill(out, out + a.rows, 0.0);
  for (Index i = 0; i < a.cols; ++i) {
    const double* col = a.col(i);
    for (Index k = 0; k < a.rows; ++k) out[k] += r[i] * col[k];
  }
}

void accumulate(const CscView& a, const double* r, double* out) {
  std::fill(out, out + a.rows, 0.0);
  for (Index i = 0; i < a.cols; ++i) sparse_axpy(a, i, r[i], out);
}

void column_sq_norms(const DenseView& a, double* out) {
  for (Index i = 0; i < a.cols; ++i) {
    const double* col = a.col(i);
    double s = 0.0;
    for (Index k = 0; k < a.rows; ++k) s += col[k] * col[k];
    out[i] = s;
  }
}

void column_sq_norms(const CscView& a, double* out) {
  for (Index i = 0; i < a.cols; ++i) {
    double s = 0.0;
    for (int k = a.outer[i]; k < a.outer[i + 1]; ++k) s += a.values[k] * a.values[k];
    out[i] = s;
  }
}

}  // namespace serial

namespace omp {

void project(const DenseView& a, const double* w, double* out) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < a.cols; ++i) out[i] = dense_dot(a.col(i), w, a.rows);
}

void project(const CscView& a, const double* w, double* out) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < a.cols; ++i) out[i] = sparse_dot(a, i, w);
}

void accumulate(const DenseView& a, const double* r, double* out) {
  blocked_accumulate(a.rows, a.cols, r, out,
                     [&](Index i, double alpha, double* y) { dense_axpy(alpha, a.col(i), y, a.rows); });
}

void accumulate(const CscView& a, const double* r, double* out) {
  blocked_accumulate(a.rows, a.cols, r, out,
                     [&](Index i, double alpha, double* y) { sparse_axpy(a, i, alpha, y); });
}

void column_sq_norms(const DenseView& a, double* out) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < a.cols; ++i) out[i] = ConstVec(a.col(i), a.rows).squaredNorm();
}

void column_sq_norms(const CscView& a, double* out) {
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < a.cols; ++i) {
    double s = 0.0;
    for (int k = a.outer[i]; k < a.outer[i + 1]; ++k) s += a.values[k] * a.values[k];
    out[i] = s;
  }
}

}  // namespace omp

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace stocca::kernels
