#include "stocca/reference.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <random>

#include "stocca/covariance.hpp"
#include "stocca/errors.hpp"
#include "stocca/metrics.hpp"

namespace stocca {

SymmetricRoot symmetric_root(const MatrixXd& sigma, double floor) {
  if (sigma.rows() != sigma.cols()) throw DimensionError("symmetric_root: matrix is not square");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ConfigError("symmetric_root: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sigma);
  if (es.info() != Eigen::Success) throw NumericError("symmetric_root: eigendecomposition failed");
  const VectorXd& lam = es.eigenvalues();
  const MatrixXd& q = es.eigenvectors();
  if (!(floor > 0.0)) floor = 1e-12 * std::max(lam.maxCoeff(), 0.0);
  if (!(floor > 0.0)) floor = 1e-300;

  const VectorXd clamped = lam.cwiseMax(floor);
  SymmetricRoot r;
  r.eigenvalues = lam;
  r.root = q * clamped.cwiseSqrt().asDiagonal() * q.transpose();
  r.inverse_root = q * clamped.cwiseSqrt().cwiseInverse().asDiagonal() * q.transpose();
  return r;
}

ReferenceSolution exact_solution(const CcaDataset& ds) {
  const DenseBlocks& b = ds.dense_blocks(10000);
  SymmetricRoot rx = symmetric_root(b.sxx);
  SymmetricRoot ry = symmetric_root(b.syy);
  const MatrixXd t = rx.inverse_root * b.sxy * ry.inverse_root;

  Eigen::BDCSVD<MatrixXd> svd(t, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ReferenceSolution ref;
  ref.rho = svd.singularValues();
  ref.phi = svd.matrixU().col(0);
  ref.psi = svd.matrixV().col(0);

  Index k;
  ref.phi.cwiseAbs().maxCoeff(&k);
  if (ref.phi[k] < 0.0) {
    ref.phi = -ref.phi;
    ref.psi = -ref.psi;
  }

  ref.gap = ref.rho1() - ref.rho2();
  const double tol = 1e-10 * ref.rho1();
  ref.rank = 0;
  if (ref.rho1() > 0.0)
    while (ref.rank < ref.rho.size() && ref.rho[ref.rank] > tol) ++ref.rank;

  ref.u_star = rx.inverse_root * ref.phi;
  ref.v_star = ry.inverse_root * ref.psi;
  ref.sigma_u_star = b.sxx * ref.u_star;
  ref.sigma_v_star = b.syy * ref.v_star;
  ref.whiten_x = std::move(rx.inverse_root);
  ref.root_x = std::move(rx.root);
  ref.whiten_y = std::move(ry.inverse_root);
  ref.root_y = std::move(ry.root);
  ref.spectrum = ds.spectral_info();
  return ref;
}

namespace {

Eigen::LDLT<MatrixXd> factor(const MatrixXd& s, const char* name) {
  Eigen::LDLT<MatrixXd> f(s);
  const double top = std::max(s.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  if (f.info() != Eigen::Success || !(f.vectorD().minCoeff() > 1e-14 * top))
    throw NumericError(std::string("covariance ") + name + " is singular; use a positive ridge");
  return f;
}

VectorXd dense_normalize(const VectorXd& w, const MatrixXd& s) {
  const double q = w.dot(s * w);
  if (!(q > 0.0) || !std::isfinite(q)) throw NumericError("cannot normalise a vector with zero Σ-norm");
  return w / std::sqrt(q);
}

}  // namespace

ExactAlsSolver::ExactAlsSolver(const CcaDataset& ds)
    : blocks_(&ds.dense_blocks()), xx_(factor(blocks_->sxx, "Sxx")), yy_(factor(blocks_->syy, "Syy")) {}

VectorXd ExactAlsSolver::solve_x(const VectorXd& rhs) const { return xx_.solve(rhs); }
VectorXd ExactAlsSolver::solve_y(const VectorXd& rhs) const { return yy_.solve(rhs); }

ExactAlsState exact_als_init(const CcaDataset& ds, const VectorXd& u0, const VectorXd& v0) {
  if (u0.size() != ds.dx() || v0.size() != ds.dy()) throw DimensionError("exact_als_init: start vector sizes");
  const DenseBlocks& b = ds.dense_blocks();
  ExactAlsState s;
  s.u_tilde = dense_normalize(u0, b.sxx);
  s.v_tilde = dense_normalize(v0, b.syy);
  s.u = s.u_tilde;
  s.v = s.v_tilde;
  return s;
}

ExactAlsState exact_als_step(const ExactAlsState& state, const CcaDataset& ds, const ExactAlsSolver& solver) {
  (void)ds;
  const DenseBlocks& b = solver.blocks();
  ExactAlsState next;
  next.u_tilde = solver.solve_x(b.sxy * state.v);
  next.v_tilde = solver.solve_y(b.sxy.transpose() * state.u);
  next.u = dense_normalize(next.u_tilde, b.sxx);
  next.v = dense_normalize(next.v_tilde, b.syy);
  next.step = state.step + 1;
  return next;
}

ExactAlsRun run_exact_als(const CcaDataset& ds, const VectorXd& u0, const VectorXd& v0, int steps,
                          const ReferenceSolution* reference) {
  if (steps < 0) throw ConfigError("run_exact_als: negative step count");
  ExactAlsRun run;
  run.state = exact_als_init(ds, u0, v0);
  auto record = [&] {
    if (!reference) return;
    const DenseBlocks& b = ds.dense_blocks();
    const double sign = run.state.u.dot(b.sxy * run.state.v) < 0.0 ? -1.0 : 1.0;
    run.trace.push_back(evaluate_metrics(ds, run.state.u, sign * run.state.v, *reference));
  };
  record();
  if (steps == 0) return run;
  ExactAlsSolver solver(ds);
  for (int t = 0; t < steps; ++t) {
    run.state = exact_als_step(run.state, ds, solver);
    record();
  }
  return run;
}

int exact_als_bound_steps(double rho1, double rho2, double mu, double eta) {
  if (!(rho1 > rho2)) throw ConfigError("exact_als_bound_steps: needs a positive gap");
  if (!(mu > 0.0) || !(eta > 0.0)) throw ConfigError("exact_als_bound_steps: mu and eta must be positive");
  const double delta = rho1 * rho1 / (rho1 * rho1 - rho2 * rho2);
  const double t = std::ceil(delta * std::log(1.0 / (mu * eta)));
  return t > 0.0 ? static_cast<int>(t) : 0;
}

double initial_alignment(const CcaDataset& ds, const VectorXd& u0, const VectorXd& v0,
                         const ReferenceSolution& reference) {
  const ExactAlsState s = exact_als_init(ds, u0, v0);
  const double a = s.u.dot(reference.sigma_u_star);
  const double c = s.v.dot(reference.sigma_v_star);
  return std::min(a * a, c * c);
}

double initial_joint_alignment(const CcaDataset& ds, const VectorXd& u0, const VectorXd& v0,
                               const ReferenceSolution& reference) {
  const ExactAlsState s = exact_als_init(ds, u0, v0);
  return joint_alignment(s.u, s.v, reference);
}

InitialVectors random_initialization(const CcaDataset& ds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd u(ds.dx());
  VectorXd v(ds.dy());
  for (Index i = 0; i < u.size(); ++i) u[i] = normal(rng);
  for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  return {sigma_normalize(CovarianceOperator::xx(ds), u).w, sigma_normalize(CovarianceOperator::yy(ds), v).w};
}

}  // namespace stocca
