#pragma once

// Data-parallel kernels over sample columns.
//
// Every kernel comes in two flavours: `serial` is the straightforward loop and
// serves as the reference in tests; `omp` is the OpenMP version used by the
// library. The OpenMP reductions sum fixed-size sample blocks and then combine
// the block partials in block order, so their results do not depend on the
// number of threads.

#include <cstddef>
#include <cstdint>

namespace stocca::kernels {

using Index = std::ptrdiff_t;

/// Samples per reduction block in the OpenMP kernels.
inline constexpr Index kBlock = 1024;

/// Column-major dense matrix, one sample per column.
struct DenseView {
  const double* data = nullptr;
  Index rows = 0;
  Index cols = 0;
  const double* col(Index i) const { return data + i * rows; }
};

/// Compressed sparse column matrix (Eigen's compressed layout).
struct CscView {
  const int* outer = nullptr;  // cols + 1 entries
  const int* inner = nullptr;
  const double* values = nullptr;
  Index rows = 0;
  Index cols = 0;
};

namespace serial {
// out[i] = a_iᵀ w
void project(const DenseView& a, const double* w, double* out);
void project(const CscView& a, const double* w, double* out);
// out = Σ_i r[i] a_i   (out has a.rows entries; overwritten)
void accumulate(const DenseView& a, const double* r, double* out);
void accumulate(const CscView& a, const double* r, double* out);
// out[i] = ‖a_i‖²
void column_sq_norms(const DenseView& a, double* out);
void column_sq_norms(const CscView& a, double* out);
}  // namespace serial

namespace omp {
void project(const DenseView& a, const double* w, double* out);
void project(const CscView& a, const double* w, double* out);
void accumulate(const DenseView& a, const double* r, double* out);
void accumulate(const CscView& a, const double* r, double* out);
void column_sq_norms(const DenseView& a, double* out);
void column_sq_norms(const CscView& a, double* out);
}  // namespace omp

/// Number of OpenMP threads the parallel kernels will use.
int max_threads();

}  // namespace stocca::kernels
