#include <doctest.h>

#include <Eigen/SVD>
#include <random>

#include "stocca/errors.hpp"
#include "stocca/metrics.hpp"
#include "stocca/reference.hpp"
#include "test_support.hpp"

using namespace stocca;
namespace ts = testing_support;

namespace {

CcaDataset pm_one(double gamma) {
  MatrixXd a(1, 2);
  a << 1, -1;
  return CcaDataset::make(DataMatrix::dense(a), DataMatrix::dense(a), gamma, gamma);
}

// Start vectors whose whitened images are (a1 + a2)/√2 and (b1 + b2)/√2.
struct DiagonalStart {
  VectorXd u0, v0;
};

DiagonalStart diagonal_start(const ReferenceSolution& ref, const DenseBlocks& b) {
  const MatrixXd t = ref.whiten_x * b.sxy * ref.whiten_y;
  Eigen::JacobiSVD<MatrixXd> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd phi0 = (svd.matrixU().col(0) + svd.matrixU().col(1)) / std::sqrt(2.0);
  const VectorXd psi0 = (svd.matrixV().col(0) + svd.matrixV().col(1)) / std::sqrt(2.0);
  return {ref.whiten_x * phi0, ref.whiten_y * psi0};
}

std::vector<double> descending_correlations(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  std::vector<double> c(static_cast<std::size_t>(k));
  for (double& x : c) x = unif(rng);
  std::sort(c.rbegin(), c.rend());
  c[1] = std::min(c[1], c[0] - 0.1);  // keep a visible gap
  for (std::size_t i = 2; i < c.size(); ++i) c[i] = std::min(c[i], c[i - 1]);
  for (double& x : c) x = std::max(x, 0.0);
  return c;
}

}  // namespace

TEST_CASE("symmetric_root examples") {
  const SymmetricRoot id = symmetric_root(MatrixXd::Identity(3, 3));
  CHECK((id.root - MatrixXd::Identity(3, 3)).norm() <= 1e-14);
  CHECK((id.inverse_root - MatrixXd::Identity(3, 3)).norm() <= 1e-14);

  MatrixXd d = MatrixXd::Zero(2, 2);
  d.diagonal() << 4, 9;
  const SymmetricRoot r = symmetric_root(d);
  CHECK(r.root(0, 0) == doctest::Approx(2.0));
  CHECK(r.root(1, 1) == doctest::Approx(3.0));
  CHECK(r.inverse_root(0, 0) == doctest::Approx(0.5));
  CHECK(r.inverse_root(1, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(r.root(0, 1)) <= 1e-14);

  std::mt19937_64 rng(5);
  const MatrixXd g = ts::gaussian(5, 5, rng);
  const MatrixXd spd = g * g.transpose() + 0.1 * MatrixXd::Identity(5, 5);
  const SymmetricRoot s = symmetric_root(spd);
  CHECK((s.root * s.root - spd).norm() <= 1e-8);
  CHECK((s.inverse_root * spd * s.inverse_root - MatrixXd::Identity(5, 5)).norm() <= 1e-8);

  MatrixXd nonsym = MatrixXd::Identity(2, 2);
  nonsym(0, 1) = 0.5;
  CHECK_THROWS_AS(symmetric_root(nonsym), ConfigError);
}

TEST_CASE("symmetric_root clamps small eigenvalues to the floor") {
  MatrixXd d = MatrixXd::Zero(2, 2);
  d.diagonal() << 1.0, 0.0;
  const SymmetricRoot r = symmetric_root(d, 1e-4);
  CHECK(r.inverse_root(1, 1) == doctest::Approx(100.0));
  CHECK(r.eigenvalues(0) == 0.0);
}

TEST_CASE("exact_solution examples") {
  const ReferenceSolution r0 = exact_solution(pm_one(0.0));
  CHECK(r0.rho1() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r0.u_star[0]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r0.v_star[0]) == doctest::Approx(1.0).epsilon(1e-12));
  const ReferenceSolution r1 = exact_solution(pm_one(1.0));
  CHECK(r1.rho1() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("planted spectrum (0.9, 0.5) is recovered exactly") {
  const CcaDataset ds = ts::planted(6, 5, 300, {0.9, 0.5}, 1e-3, 11);
  const ReferenceSolution ref = exact_solution(ds);
  CHECK(ref.rho1() == doctest::Approx(0.9).epsilon(1e-10));
  CHECK(ref.rho2() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(ref.gap == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(ref.rank == 2);
  CHECK(ref.rho_r() == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("reference invariants on random instances") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const CcaDataset ds = ts::random_dataset(8, 6, 150, 1e-3, 1e-3, seed);
    const ReferenceSolution ref = exact_solution(ds);
    const DenseBlocks& b = ds.dense_blocks();
    CHECK(ref.u_star.dot(b.sxx * ref.u_star) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ref.v_star.dot(b.syy * ref.v_star) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ref.phi.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ref.psi.norm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(ref.rho1() < 1.0);
    for (Index i = 1; i < ref.rho.size(); ++i) CHECK(ref.rho[i] <= ref.rho[i - 1]);
    CHECK(ref.u_star.dot(b.sxy * ref.v_star) == doctest::Approx(ref.rho1()).epsilon(1e-8));
    Index k;
    ref.phi.cwiseAbs().maxCoeff(&k);
    CHECK(ref.phi[k] > 0.0);

    const ts::BruteForce bf = ts::brute_force_cca(ds);
    CHECK(std::abs(bf.rho[0] - ref.rho1()) <= 1e-8);
  }
}

TEST_CASE("exact ALS examples on the whitened diagonal instance") {
  const CcaDataset ds = ts::planted(2, 2, 50, {0.9, 0.5}, 0.0, 23, 1.0, 1.0);
  const ReferenceSolution ref = exact_solution(ds);
  const DiagonalStart s = diagonal_start(ref, ds.dense_blocks());

  const ExactAlsRun one = run_exact_als(ds, s.u0, s.v0, 1, &ref);
  CHECK(one.trace[0].align_u == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(one.trace[1].align_u == doctest::Approx(0.81 / 1.06).epsilon(1e-10));
  CHECK(one.trace[1].align_v == doctest::Approx(0.81 / 1.06).epsilon(1e-10));

  const double mu = initial_alignment(ds, s.u0, s.v0, ref);
  CHECK(mu == doctest::Approx(0.5).epsilon(1e-10));
  const int bound = exact_als_bound_steps(0.9, 0.5, mu, 0.01);
  CHECK(bound == 8);
  const ExactAlsRun run = run_exact_als(ds, s.u0, s.v0, bound, &ref);
  CHECK(run.trace.back().min_alignment() >= 0.99);

  const ExactAlsRun far = run_exact_als(ds, s.u0, s.v0, 200, &ref);
  CHECK(far.trace.back().min_alignment() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact ALS from the optimum stays there") {
  const CcaDataset ds = ts::random_dataset(6, 5, 100, 0.01, 0.01, 3);
  const ReferenceSolution ref = exact_solution(ds);
  const ExactAlsRun run = run_exact_als(ds, ref.u_star, ref.v_star, 5, &ref);
  for (const MetricReport& m : run.trace) CHECK(m.min_alignment() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("exact ALS step solves the normal equations and normalises") {
  const CcaDataset ds = ts::random_dataset(9, 7, 120, 1e-2, 1e-2, 14);
  const InitialVectors init = random_initialization(ds, 1);
  const ExactAlsSolver solver(ds);
  ExactAlsState s = exact_als_init(ds, init.u, init.v);
  const DenseBlocks& b = ds.dense_blocks();
  for (int t = 0; t < 10; ++t) {
    const ExactAlsState next = exact_als_step(s, ds, solver);
    CHECK((b.sxx * next.u_tilde - b.sxy * s.v).norm() <= 1e-10 * (1.0 + (b.sxy * s.v).norm()));
    CHECK((b.syy * next.v_tilde - b.sxy.transpose() * s.u).norm() <= 1e-10 * (1.0 + (b.sxy.transpose() * s.u).norm()));
    CHECK(std::abs(next.u.dot(b.sxx * next.u) - 1.0) <= 1e-10);
    CHECK(std::abs(next.v.dot(b.syy * next.v) - 1.0) <= 1e-10);
    CHECK(next.step == t + 1);
    s = next;
  }
}

TEST_CASE("exact ALS alignment is monotone along even and odd steps") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const CcaDataset ds = ts::random_dataset(10, 8, 200, 1e-3, 1e-3, 30 + seed);
    const ReferenceSolution ref = exact_solution(ds);
    const InitialVectors init = random_initialization(ds, seed);
    const ExactAlsRun run = run_exact_als(ds, init.u, init.v, 30, &ref);
    for (std::size_t t = 2; t < run.trace.size(); ++t) {
      CHECK(run.trace[t].align_u >= run.trace[t - 2].align_u - 1e-12);
      CHECK(run.trace[t].align_v >= run.trace[t - 2].align_v - 1e-12);
    }
  }
}

TEST_CASE("alignment bound of exact ALS on planted gap instances") {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 20; ++k) {
    const Index dx = 3 + k % 8, dy = 3 + (k * 3) % 7;
    const std::vector<double> c = descending_correlations(rng, static_cast<int>(std::min(dx, dy)));
    const CcaDataset ds = ts::planted(dx, dy, 100, c, 0.0, 500 + k, 0.05, 1.0);
    const ReferenceSolution ref = exact_solution(ds);
    const InitialVectors init = random_initialization(ds, 600 + k);
    const double mu = initial_alignment(ds, init.u, init.v, ref);
    for (double eta : {0.1, 0.01}) {
      const int t = exact_als_bound_steps(ref.rho1(), ref.rho2(), mu, eta);
      const ExactAlsRun run = run_exact_als(ds, init.u, init.v, t, &ref);
      CHECK(run.trace.back().min_alignment() >= 1.0 - eta);
      CHECK(run.trace.back().objective >= ref.rho1() * (1.0 - 2.0 * eta));
    }
  }
}

TEST_CASE("bound step count formula") {
  CHECK(exact_als_bound_steps(0.9, 0.5, 0.5, 0.01) == 8);
  CHECK(exact_als_bound_steps(0.9, 0.5, 1.0, 1.0) == 0);
  CHECK_THROWS_AS(exact_als_bound_steps(0.5, 0.5, 0.5, 0.1), ConfigError);
}

TEST_CASE("normalisation invariant after every exact ALS step") {
  const CcaDataset ds = ts::planted(12, 10, 400, {0.95, 0.7, 0.3}, 1e-5, 8, 0.001, 1.0);
  const ReferenceSolution ref = exact_solution(ds);
  const InitialVectors init = random_initialization(ds, 77);
  const ExactAlsRun run = run_exact_als(ds, init.u, init.v, 40, &ref);
  for (const MetricReport& m : run.trace) {
    CHECK(std::abs(m.constraint_u - 1.0) <= 1e-10);
    CHECK(std::abs(m.constraint_v - 1.0) <= 1e-10);
  }
}

TEST_CASE("guards") {
  CHECK_THROWS_AS(run_exact_als(pm_one(1.0), VectorXd::Ones(1), VectorXd::Ones(1), -1), ConfigError);
  CHECK_THROWS_AS(exact_als_init(pm_one(1.0), VectorXd::Ones(2), VectorXd::Ones(1)), DimensionError);
  const ExactAlsRun zero = run_exact_als(pm_one(1.0), VectorXd::Constant(1, 3.0), VectorXd::Ones(1), 0);
  CHECK(zero.state.u[0] == doctest::Approx(1.0 / std::sqrt(2.0)));
}
