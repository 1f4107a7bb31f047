#include <doctest.h>
#include <omp.h>

#include <random>

#include "stocca/data_matrix.hpp"
#include "stocca/kernels.hpp"
#include "test_support.hpp"

using namespace stocca;
namespace ts = testing_support;

namespace {

SparseMatrix random_sparse(Index rows, Index cols, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<Eigen::Triplet<double, int>> t;
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      if (unif(rng) < 2.0 * density - 1.0) t.emplace_back(int(i), int(j), unif(rng));
  SparseMatrix s(rows, cols);
  s.setFromTriplets(t.begin(), t.end());
  s.makeCompressed();
  return s;
}

template <class View>
void check_against_serial(const View& view, Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const VectorXd w = ts::gaussian_vector(rows, rng);
  const VectorXd r = ts::gaussian_vector(cols, rng);
  VectorXd p_serial(cols), p_omp(cols), a_serial(rows), a_omp(rows), n_serial(cols), n_omp(cols);
  kernels::serial::project(view, w.data(), p_serial.data());
  kernels::omp::project(view, w.data(), p_omp.data());
  kernels::serial::accumulate(view, r.data(), a_serial.data());
  kernels::omp::accumulate(view, r.data(), a_omp.data());
  kernels::serial::column_sq_norms(view, n_serial.data());
  kernels::omp::column_sq_norms(view, n_omp.data());
  // The dense omp path sums with SIMD lanes, so agreement is to rounding only.
  CHECK((p_serial - p_omp).cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + p_serial.cwiseAbs().maxCoeff()));
  CHECK((n_serial - n_omp).cwiseAbs().maxCoeff() <= 1e-13 * (1.0 + n_serial.cwiseAbs().maxCoeff()));
  CHECK((a_serial - a_omp).norm() <= 1e-12 * (1.0 + a_serial.norm()));
}

}  // namespace

TEST_CASE("omp kernels agree with the serial loops on dense views") {
  for (Index n : {1, 7, 1023, 1024, 1025, 5000}) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(n));
    const DataMatrix a = DataMatrix::dense(ts::gaussian(13, n, rng));
    check_against_serial(a.dense_view(), 13, n, 100 + n);
  }
}

TEST_CASE("omp kernels agree with the serial loops on sparse views") {
  for (Index n : {1, 9, 1024, 3001}) {
    const DataMatrix a = DataMatrix::sparse(random_sparse(40, n, 0.1, 7 + n));
    check_against_serial(a.csc_view(), 40, n, 200 + n);
  }
}

TEST_CASE("omp accumulate is independent of the thread count") {
  std::mt19937_64 rng(3);
  const DataMatrix a = DataMatrix::dense(ts::gaussian(11, 9000, rng));
  const VectorXd r = ts::gaussian_vector(9000, rng);
  const int saved = omp_get_max_threads();
  VectorXd ref(11);
  omp_set_num_threads(1);
  kernels::omp::accumulate(a.dense_view(), r.data(), ref.data());
  for (int threads : {2, 3, 8}) {
    omp_set_num_threads(threads);
    VectorXd out(11);
    kernels::omp::accumulate(a.dense_view(), r.data(), out.data());
    CHECK((out - ref).cwiseAbs().maxCoeff() == 0.0);
  }
  omp_set_num_threads(saved);
}

TEST_CASE("DataMatrix projections match the dense product") {
  std::mt19937_64 rng(5);
  const MatrixXd m = ts::gaussian(6, 50, rng);
  const DataMatrix a = DataMatrix::dense(m);
  const VectorXd w = ts::gaussian_vector(6, rng);
  const VectorXd r = ts::gaussian_vector(50, rng);
  CHECK((a.project(w) - m.transpose() * w).norm() <= 1e-12 * (1.0 + w.norm()));
  CHECK((a.accumulate(r) - m * r).norm() <= 1e-12 * (1.0 + (m * r).norm()));
}

TEST_CASE("sparse centring keeps storage sparse and matches dense centring") {
  const SparseMatrix s = random_sparse(8, 60, 0.2, 42);
  const DataMatrix sparse = DataMatrix::sparse(s).centered();
  const MatrixXd dense = center_columns(MatrixXd(s));
  CHECK(sparse.is_sparse());
  CHECK((sparse.to_dense() - dense).cwiseAbs().maxCoeff() <= 1e-14);
  std::mt19937_64 rng(1);
  const VectorXd w = ts::gaussian_vector(8, rng);
  const VectorXd r = ts::gaussian_vector(60, rng);
  CHECK((sparse.project(w) - dense.transpose() * w).norm() <= 1e-12);
  CHECK((sparse.accumulate(r) - dense * r).norm() <= 1e-12);
  CHECK((sparse.col_sq_norms() - dense.colwise().squaredNorm().transpose()).norm() <= 1e-12);
  for (Index i : {0, 17, 59}) CHECK(sparse.col_dot(i, w) == doctest::Approx(dense.col(i).dot(w)).epsilon(1e-12));
}
