#include "stocca/synthetic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

#include "stocca/errors.hpp"
#include "stocca/random.hpp"
#include "stocca/reference.hpp"

namespace stocca {

namespace {

MatrixXd gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

void check_correlations(const std::vector<double>& c, Index dx, Index dy) {
  if (static_cast<Index>(c.size()) > std::min(dx, dy))
    throw ConfigError("more canonical correlations than min(dx, dy)");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i] >= 0.0) || !(c[i] < 1.0)) throw ConfigError("canonical correlations must lie in [0, 1)");
    if (i > 0 && c[i] > c[i - 1]) throw ConfigError("canonical correlations must be descending");
  }
}

// Σxy = Σxx^{1/2} Ux diag(c) Uyᵀ Σyy^{1/2}
MatrixXd cross_block(const MatrixXd& root_x, const MatrixXd& root_y, const std::vector<double>& c,
                     std::uint64_t seed) {
  const Index k = static_cast<Index>(c.size());
  if (k == 0) return MatrixXd::Zero(root_x.rows(), root_y.rows());
  const MatrixXd ux = random_orthonormal(root_x.rows(), k, derive_seed(seed, 1, 0));
  const MatrixXd uy = random_orthonormal(root_y.rows(), k, derive_seed(seed, 1, 1));
  const VectorXd cv = Eigen::Map<const VectorXd>(c.data(), k);
  return root_x * ux * cv.asDiagonal() * uy.transpose() * root_y;
}

MatrixXd psd_root(const MatrixXd& c) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(c);
  const VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

MatrixXd random_orthonormal(Index rows, Index cols, std::uint64_t seed) {
  if (cols > rows) throw ConfigError("random_orthonormal: more columns than rows");
  std::mt19937_64 rng(seed);
  const MatrixXd g = gaussian_matrix(rows, cols, rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(rows, cols);
  const MatrixXd r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Index j = 0; j < cols; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

SamplePair sample_synthetic(const SyntheticSpec& spec) {
  if (spec.dx < 1 || spec.dy < 1 || spec.n < 1) throw ConfigError("synthetic spec needs positive dx, dy and N");
  if (!(spec.noise_scale > 0.0)) throw ConfigError("noise_scale must be positive");
  check_correlations(spec.correlations, spec.dx, spec.dy);

  std::mt19937_64 rng_x(derive_seed(spec.seed, 0, 0));
  std::mt19937_64 rng_y(derive_seed(spec.seed, 0, 1));
  const MatrixXd lx = gaussian_matrix(spec.dx, spec.dx, rng_x);
  const MatrixXd ly = gaussian_matrix(spec.dy, spec.dy, rng_y);
  const double noise2 = spec.noise_scale * spec.noise_scale;
  MatrixXd sxx = lx * lx.transpose() / static_cast<double>(spec.dx);
  sxx.diagonal().array() += noise2;
  MatrixXd syy = ly * ly.transpose() / static_cast<double>(spec.dy);
  syy.diagonal().array() += noise2;

  const Index d = spec.dx + spec.dy;
  MatrixXd c(d, d);
  c.topLeftCorner(spec.dx, spec.dx) = sxx;
  c.bottomRightCorner(spec.dy, spec.dy) = syy;
  const MatrixXd sxy = cross_block(psd_root(sxx), psd_root(syy), spec.correlations, spec.seed);
  c.topRightCorner(spec.dx, spec.dy) = sxy;
  c.bottomLeftCorner(spec.dy, spec.dx) = sxy.transpose();

  const MatrixXd root = psd_root(c);
  std::mt19937_64 rng_s(derive_seed(spec.seed, 2, 0));
  const MatrixXd z = root * gaussian_matrix(d, spec.n, rng_s);
  return {z.topRows(spec.dx), z.bottomRows(spec.dy)};
}

CcaDataset generate_synthetic(const SyntheticSpec& spec, double gamma_x, double gamma_y) {
  SamplePair s = sample_synthetic(spec);
  return CcaDataset::make(DataMatrix::dense(std::move(s.x)), DataMatrix::dense(std::move(s.y)), gamma_x, gamma_y,
                          Centering::apply);
}

CcaDataset planted_instance(const PlantedSpec& spec) {
  const Index d = spec.dx + spec.dy;
  if (spec.dx < 1 || spec.dy < 1) throw ConfigError("planted spec needs positive dx and dy");
  if (spec.n < d + 1) throw ConfigError("planted instance needs N >= dx + dy + 1");
  if (!(spec.sigma_min > 0.0) || !(spec.sigma_max >= spec.sigma_min))
    throw ConfigError("planted spectrum needs 0 < sigma_min <= sigma_max");
  check_correlations(spec.correlations, spec.dx, spec.dy);
  const double rho1 = spec.correlations.empty() ? 0.0 : spec.correlations.front();
  if (!(spec.gamma >= 0.0) || spec.gamma > (1.0 - rho1) * spec.sigma_min * (1.0 - 1e-12))
    throw ConfigError("planted instance needs 0 <= gamma <= (1 - rho1) * sigma_min");

  auto spectrum = [&](Index k) {
    VectorXd lam(k);
    const double lo = std::log(spec.sigma_min);
    const double hi = std::log(spec.sigma_max);
    for (Index i = 0; i < k; ++i) lam[i] = std::exp(k == 1 ? hi : hi + (lo - hi) * double(i) / double(k - 1));
    return lam;
  };
  const MatrixXd qx = random_orthonormal(spec.dx, spec.dx, derive_seed(spec.seed, 3, 0));
  const MatrixXd qy = random_orthonormal(spec.dy, spec.dy, derive_seed(spec.seed, 3, 1));
  const VectorXd lx = spectrum(spec.dx);
  const VectorXd ly = spectrum(spec.dy);
  const MatrixXd root_x = qx * lx.cwiseSqrt().asDiagonal() * qx.transpose();
  const MatrixXd root_y = qy * ly.cwiseSqrt().asDiagonal() * qy.transpose();

  MatrixXd c(d, d);
  c.topLeftCorner(spec.dx, spec.dx) = root_x * root_x;
  c.bottomRightCorner(spec.dy, spec.dy) = root_y * root_y;
  const MatrixXd sxy = cross_block(root_x, root_y, spec.correlations, spec.seed);
  c.topRightCorner(spec.dx, spec.dy) = sxy;
  c.bottomLeftCorner(spec.dy, spec.dx) = sxy.transpose();
  c.diagonal().array() -= spec.gamma;

  std::mt19937_64 rng(derive_seed(spec.seed, 4, 0));
  MatrixXd w = gaussian_matrix(d, spec.n, rng);
  w = center_columns(w);
  const MatrixXd cov = w * w.transpose() / static_cast<double>(spec.n);
  const SymmetricRoot wr = symmetric_root(0.5 * (cov + cov.transpose()));
  const MatrixXd z = psd_root(c) * (wr.inverse_root * w);
  return CcaDataset::make(DataMatrix::dense(z.topRows(spec.dx)), DataMatrix::dense(z.bottomRows(spec.dy)),
                          spec.gamma, spec.gamma, Centering::none);
}

}  // namespace stocca
