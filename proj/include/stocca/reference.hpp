#pragma once

#include <Eigen/Cholesky>
#include <cstdint>
#include <vector>

#include "stocca/dataset.hpp"

namespace stocca {

struct SymmetricRoot {
  MatrixXd root;
  MatrixXd inverse_root;
  /// Eigenvalues of the input, ascending, before flooring.
  VectorXd eigenvalues;
};

/// Σ^{1/2} and Σ^{-1/2} of a symmetric PSD matrix via its eigendecomposition.
/// Eigenvalues below `floor` are clamped to `floor` before inversion;
/// `floor <= 0` selects 1e-12 times the largest eigenvalue.
SymmetricRoot symmetric_root(const MatrixXd& sigma, double floor = 0.0);

/// Exact CCA by whitening and a dense SVD of T = Σxx^{-1/2} Σxy Σyy^{-1/2}.
struct ReferenceSolution {
  VectorXd rho;  // singular values of T, descending
  VectorXd phi;  // top left singular vector of T
  VectorXd psi;  // top right singular vector of T
  VectorXd u_star;
  VectorXd v_star;
  VectorXd sigma_u_star;  // Σxx u*, for cheap alignments
  VectorXd sigma_v_star;
  double gap = 0.0;
  Index rank = 0;  // singular values above 1e-10·ρ1
  MatrixXd whiten_x;  // Σxx^{-1/2}
  MatrixXd root_x;    // Σxx^{1/2}
  MatrixXd whiten_y;
  MatrixXd root_y;
  SpectralInfo spectrum;

  double rho1() const { return rho.size() > 0 ? rho[0] : 0.0; }
  double rho2() const { return rho.size() > 1 ? rho[1] : 0.0; }
  /// Smallest singular value counted in `rank`.
  double rho_r() const { return rank > 0 ? rho[rank - 1] : 0.0; }
};

/// Requires d = dx + dy <= 10000.
ReferenceSolution exact_solution(const CcaDataset& ds);

/// Iterates of exact alternating least squares.
struct ExactAlsState {
  VectorXd u;
  VectorXd v;
  VectorXd u_tilde;
  VectorXd v_tilde;
  int step = 0;
};

/// Factorisations of Σxx and Σyy reused across exact ALS steps.
class ExactAlsSolver {
 public:
  explicit ExactAlsSolver(const CcaDataset& ds);
  VectorXd solve_x(const VectorXd& rhs) const;
  VectorXd solve_y(const VectorXd& rhs) const;
  const DenseBlocks& blocks() const { return *blocks_; }

 private:
  const DenseBlocks* blocks_;
  Eigen::LDLT<MatrixXd> xx_;
  Eigen::LDLT<MatrixXd> yy_;
};

/// Σ-normalises the starting vectors (ũ0 = u0, ṽ0 = v0).
ExactAlsState exact_als_init(const CcaDataset& ds, const VectorXd& u0, const VectorXd& v0);

/// ũ ← Σxx⁻¹Σxy v, ṽ ← Σyy⁻¹Σxyᵀu, then per-view Σ-normalisation.
ExactAlsState exact_als_step(const ExactAlsState& state, const CcaDataset& ds, const ExactAlsSolver& solver);

struct MetricReport;

struct ExactAlsRun {
  ExactAlsState state;
  std::vector<MetricReport> trace;  // index t holds the metrics after step t
};

/// Runs `steps` exact ALS steps. Records metrics when `reference` is given.
ExactAlsRun run_exact_als(const CcaDataset& ds, const VectorXd& u0, const VectorXd& v0, int steps,
                          const ReferenceSolution* reference = nullptr);

/// ⌈ρ1²/(ρ1²−ρ2²)·ln(1/(μη))⌉, clamped at zero.
int exact_als_bound_steps(double rho1, double rho2, double mu, double eta);

/// min((u0ᵀΣxx u*)², (v0ᵀΣyy v*)²) after Σ-normalising u0 and v0.
double initial_alignment(const CcaDataset& ds, const VectorXd& u0, const VectorXd& v0,
                         const ReferenceSolution& reference);

/// ¼(u0ᵀΣxx u* + v0ᵀΣyy v*)² after per-view Σ-normalisation (signed).
double initial_joint_alignment(const CcaDataset& ds, const VectorXd& u0, const VectorXd& v0,
                               const ReferenceSolution& reference);

struct InitialVectors {
  VectorXd u;
  VectorXd v;
};

/// Standard normal entries from mt19937_64(seed), then Σ-normalised.
InitialVectors random_initialization(const CcaDataset& ds, std::uint64_t seed);

}  // namespace stocca
