#pragma once

#include <cstdint>
#include <vector>

#include "stocca/dataset.hpp"

namespace stocca {

/// Gaussian samples whose population canonical correlations are `correlations`.
struct SyntheticSpec {
  Index dx = 10;
  Index dy = 10;
  Index n = 1000;
  std::vector<double> correlations;  // descending, in [0, 1)
  double noise_scale = 1.0;          // isotropic part of each view's covariance
  std::uint64_t seed = 0;
};

/// Σxx = LxLxᵀ/dx + noise²I (Lx standard normal), Σyy likewise, and
/// Σxy = Σxx^{1/2} Ux diag(c) Uyᵀ Σyy^{1/2} with random orthonormal Ux, Uy.
/// Samples of [x; y] are drawn from N(0, [[Σxx, Σxy], [Σyx, Σyy]]).
CcaDataset generate_synthetic(const SyntheticSpec& spec, double gamma_x, double gamma_y);

/// The raw (uncentred) sample matrices behind generate_synthetic.
struct SamplePair {
  MatrixXd x;
  MatrixXd y;
};
SamplePair sample_synthetic(const SyntheticSpec& spec);

/// An instance whose regularised empirical covariances equal a prescribed
/// target exactly, so the canonical correlations are known in advance.
struct PlantedSpec {
  Index dx = 10;
  Index dy = 10;
  Index n = 1000;
  std::vector<double> correlations;  // descending, in [0, 1)
  /// Eigenvalues of Σxx and Σyy, log-spaced between these (ridge included).
  double sigma_min = 0.1;
  double sigma_max = 1.0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
};

/// Random centred W is whitened to WWᵀ/N = I and mapped through
/// (C − blockdiag(γI))^{1/2}, where C is the target joint covariance.
/// Needs n ≥ dx + dy + 1 and γ ≤ (1 − ρ1)·sigma_min.
CcaDataset planted_instance(const PlantedSpec& spec);

/// Haar-distributed orthonormal columns (rows × cols).
MatrixXd random_orthonormal(Index rows, Index cols, std::uint64_t seed);

}  // namespace stocca
