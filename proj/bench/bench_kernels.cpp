// Serial vs OpenMP sample kernels on dense and sparse views.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "stocca/data_matrix.hpp"
#include "stocca/kernels.hpp"

namespace {

using stocca::DataMatrix;
using stocca::MatrixXd;
using stocca::SparseMatrix;
using stocca::VectorXd;

MatrixXd random_dense(long rows, long cols) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  MatrixXd m(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

SparseMatrix random_sparse(long rows, long cols, double density) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif;
  std::vector<Eigen::Triplet<double, int>> t;
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i)
      if (unif(rng) < density) t.emplace_back(int(i), int(j), unif(rng));
  SparseMatrix s(rows, cols);
  s.setFromTriplets(t.begin(), t.end());
  s.makeCompressed();
  return s;
}

struct DenseFixture {
  DataMatrix a;
  VectorXd w, r, out_n, out_d;
  explicit DenseFixture(long n)
      : a(DataMatrix::dense(random_dense(100, n))),
        w(VectorXd::Ones(100)),
        r(VectorXd::Ones(n)),
        out_n(n),
        out_d(100) {}
};

struct SparseFixture {
  DataMatrix a;
  VectorXd w, r, out_n, out_d;
  explicit SparseFixture(long n)
      : a(DataMatrix::sparse(random_sparse(2000, n, 0.01))),
        w(VectorXd::Ones(2000)),
        r(VectorXd::Ones(n)),
        out_n(n),
        out_d(2000) {}
};

template <bool Parallel>
void BM_DenseProject(benchmark::State& st) {
  DenseFixture f(st.range(0));
  const auto v = f.a.dense_view();
  for (auto _ : st) {
    if constexpr (Parallel)
      stocca::kernels::omp::project(v, f.w.data(), f.out_n.data());
    else
      stocca::kernels::serial::project(v, f.w.data(), f.out_n.data());
    benchmark::DoNotOptimize(f.out_n.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_DenseAccumulate(benchmark::State& st) {
  DenseFixture f(st.range(0));
  const auto v = f.a.dense_view();
  for (auto _ : st) {
    if constexpr (Parallel)
      stocca::kernels::omp::accumulate(v, f.r.data(), f.out_d.data());
    else
      stocca::kernels::serial::accumulate(v, f.r.data(), f.out_d.data());
    benchmark::DoNotOptimize(f.out_d.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_SparseProject(benchmark::State& st) {
  SparseFixture f(st.range(0));
  const auto v = f.a.csc_view();
  for (auto _ : st) {
    if constexpr (Parallel)
      stocca::kernels::omp::project(v, f.w.data(), f.out_n.data());
    else
      stocca::kernels::serial::project(v, f.w.data(), f.out_n.data());
    benchmark::DoNotOptimize(f.out_n.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_SparseAccumulate(benchmark::State& st) {
  SparseFixture f(st.range(0));
  const auto v = f.a.csc_view();
  for (auto _ : st) {
    if constexpr (Parallel)
      stocca::kernels::omp::accumulate(v, f.r.data(), f.out_d.data());
    else
      stocca::kernels::serial::accumulate(v, f.r.data(), f.out_d.data());
    benchmark::DoNotOptimize(f.out_d.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void BM_ColumnNorms(benchmark::State& st) {
  DenseFixture f(st.range(0));
  const auto v = f.a.dense_view();
  for (auto _ : st) {
    if constexpr (Parallel)
      stocca::kernels::omp::column_sq_norms(v, f.out_n.data());
    else
      stocca::kernels::serial::column_sq_norms(v, f.out_n.data());
    benchmark::DoNotOptimize(f.out_n.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

}  // namespace

BENCHMARK(BM_DenseProject<false>)->Arg(10000)->Arg(100000)->Name("dense_project/serial");
BENCHMARK(BM_DenseProject<true>)->Arg(10000)->Arg(100000)->Name("dense_project/omp");
BENCHMARK(BM_DenseAccumulate<false>)->Arg(10000)->Arg(100000)->Name("dense_accumulate/serial");
BENCHMARK(BM_DenseAccumulate<true>)->Arg(10000)->Arg(100000)->Name("dense_accumulate/omp");
BENCHMARK(BM_SparseProject<false>)->Arg(10000)->Arg(100000)->Name("sparse_project/serial");
BENCHMARK(BM_SparseProject<true>)->Arg(10000)->Arg(100000)->Name("sparse_project/omp");
BENCHMARK(BM_SparseAccumulate<false>)->Arg(10000)->Arg(100000)->Name("sparse_accumulate/serial");
BENCHMARK(BM_SparseAccumulate<true>)->Arg(10000)->Arg(100000)->Name("sparse_accumulate/omp");
BENCHMARK(BM_ColumnNorms<false>)->Arg(10000)->Arg(100000)->Name("column_sq_norms/serial");
BENCHMARK(BM_ColumnNorms<true>)->Arg(10000)->Arg(100000)->Name("column_sq_norms/omp");

BENCHMARK_MAIN();
