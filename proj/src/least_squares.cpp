#include "stocca/least_squares.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <optional>
#include <random>

#include "stocca/errors.hpp"

namespace stocca {

namespace {

// Curvature of (1/N)AAᵀ + γI without a dataset cache.
Curvature view_curvature(const DataMatrix& a, double gamma) {
  Curvature c;
  c.sample_smoothness = a.max_col_sq_norm() + gamma;
  const double inv_n = 1.0 / static_cast<double>(a.cols());
  if (a.rows() <= 2000) {
    MatrixXd h = a.gram() * inv_n;
    h.diagonal().array() += gamma;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(h, Eigen::EigenvaluesOnly);
    c.smoothness = es.eigenvalues().maxCoeff();
    c.strong_convexity = std::max(es.eigenvalues().minCoeff(), 0.0);
    return c;
  }
  VectorXd w = VectorXd::Ones(a.rows()).normalized();
  double est = 0.0;
  for (int k = 0; k < 100; ++k) {
    VectorXd hw = a.accumulate(a.project(w)) * inv_n + gamma * w;
    est = hw.norm();
    if (!(est > 0.0)) break;
    w = hw / est;
  }
  c.smoothness = 1.02 * est;
  c.strong_convexity = gamma;
  return c;
}

bool blocks_available(const CcaDataset& ds) { return ds.d() <= 10000; }

Curvature dataset_view_curvature(const CcaDataset& ds, bool x_side) {
  if (!blocks_available(ds)) return x_side ? view_curvature(ds.x(), ds.gamma_x()) : view_curvature(ds.y(), ds.gamma_y());
  const SpectralInfo& s = ds.spectral_info();
  Curvature c;
  c.smoothness = x_side ? s.sigma_max_x : s.sigma_max_y;
  c.strong_convexity = x_side ? s.sigma_min_x : s.sigma_min_y;
  c.sample_smoothness = x_side ? s.max_sq_norm_x + ds.gamma_x() : s.max_sq_norm_y + ds.gamma_y();
  return c;
}

}  // namespace

LeastSquaresProblem LeastSquaresProblem::per_view(const DataMatrix& a, double gamma, VectorXd target,
                                                  Curvature curvature) {
  if (target.size() != a.cols()) throw DimensionError("per_view problem: target length must equal N");
  if (!(gamma >= 0.0)) throw ConfigError("per_view problem: ridge must be nonnegative");
  LeastSquaresProblem p;
  p.kind_ = ProblemKind::per_view;
  p.a_ = &a;
  p.gamma_a_ = gamma;
  p.target_ = std::move(target);
  p.curvature_ = curvature.smoothness > 0.0 ? curvature : view_curvature(a, gamma);
  return p;
}

LeastSquaresProblem LeastSquaresProblem::for_x_view(const CcaDataset& ds, const VectorXd& v,
                                                    const VectorXd* y_projection) {
  if (v.size() != ds.dy()) throw DimensionError("for_x_view: v has the wrong length");
  LeastSquaresProblem p;
  p.kind_ = ProblemKind::per_view;
  p.a_ = &ds.x();
  p.gamma_a_ = ds.gamma_x();
  p.target_ = y_projection ? *y_projection : ds.y().project(v);
  p.curvature_ = dataset_view_curvature(ds, true);
  if (blocks_available(ds)) p.blocks_ = &ds.dense_blocks();
  p.x_side_ = true;
  return p;
}

LeastSquaresProblem LeastSquaresProblem::for_y_view(const CcaDataset& ds, const VectorXd& u,
                                                    const VectorXd* x_projection) {
  if (u.size() != ds.dx()) throw DimensionError("for_y_view: u has the wrong length");
  LeastSquaresProblem p;
  p.kind_ = ProblemKind::per_view;
  p.a_ = &ds.y();
  p.gamma_a_ = ds.gamma_y();
  p.target_ = x_projection ? *x_projection : ds.x().project(u);
  p.curvature_ = dataset_view_curvature(ds, false);
  if (blocks_available(ds)) p.blocks_ = &ds.dense_blocks();
  p.x_side_ = false;
  return p;
}

LeastSquaresProblem LeastSquaresProblem::joint_shifted(const CcaDataset& ds, double lambda, const VectorXd& u_ref,
                                                       const VectorXd& v_ref, double mu_hint,
                                                       const Projection* ref_projection) {
  if (u_ref.size() != ds.dx() || v_ref.size() != ds.dy()) throw DimensionError("joint_shifted: reference sizes");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("joint_shifted: shift must be positive");
  LeastSquaresProblem p;
  p.kind_ = ProblemKind::joint_shifted;
  p.a_ = &ds.x();
  p.b_ = &ds.y();
  p.gamma_a_ = ds.gamma_x();
  p.gamma_b_ = ds.gamma_y();
  p.lambda_ = lambda;
  p.u_ref_ = u_ref;
  p.v_ref_ = v_ref;
  if (ref_projection) {
    p.ref_proj_ = *ref_projection;
  } else {
    p.ref_proj_.p = ds.x().project(u_ref);
    p.ref_proj_.q = ds.y().project(v_ref);
  }

  const Curvature cx = dataset_view_curvature(ds, true);
  const Curvature cy = dataset_view_curvature(ds, false);
  Curvature c;
  // ‖Σxy‖ ≤ √(σmax(Σxx)σmax(Σyy)), so ‖Q_λ‖ ≤ (λ+1)·max σmax.
  c.smoothness = (lambda + 1.0) * std::max(cx.smoothness, cy.smoothness);
  const double max_sq = std::max(cx.sample_smoothness - ds.gamma_x(), cy.sample_smoothness - ds.gamma_y());
  c.sample_smoothness = (lambda + 1.0) * max_sq + lambda * std::max(ds.gamma_x(), ds.gamma_y());
  // Q_λ ⪰ (λ − ρ1)·min σmin and ρ1 ≤ 1.
  const double min_sigma = std::min(cx.strong_convexity, cy.strong_convexity);
  if (mu_hint > 0.0)
    c.strong_convexity = mu_hint;
  else if (lambda > 1.0)
    c.strong_convexity = (lambda - 1.0) * min_sigma;
  p.curvature_ = c;
  if (blocks_available(ds)) p.blocks_ = &ds.dense_blocks();
  return p;
}

Index LeastSquaresProblem::dim() const {
  return kind_ == ProblemKind::per_view ? a_->rows() : a_->rows() + b_->rows();
}

LeastSquaresProblem::Projection LeastSquaresProblem::project(const VectorXd& w) const {
  if (w.size() != dim()) throw DimensionError("problem: vector has the wrong length");
  Projection pr;
  if (kind_ == ProblemKind::per_view) {
    pr.p = a_->project(w);
  } else {
    pr.p = a_->project(w.head(a_->rows()));
    pr.q = b_->project(w.tail(b_->rows()));
  }
  return pr;
}

double LeastSquaresProblem::value(const VectorXd& w) const { return value(w, project(w)); }

double LeastSquaresProblem::value(const VectorXd& w, const Projection& pr) const {
  const double inv_n = 1.0 / static_cast<double>(n());
  if (kind_ == ProblemKind::per_view)
    return 0.5 * (pr.p - target_).squaredNorm() * inv_n + 0.5 * gamma_a_ * w.squaredNorm();
  const auto u = w.head(a_->rows());
  const auto v = w.tail(b_->rows());
  const double quad = lambda_ * (pr.p.squaredNorm() * inv_n + gamma_a_ * u.squaredNorm()) +
                      lambda_ * (pr.q.squaredNorm() * inv_n + gamma_b_ * v.squaredNorm()) -
                      2.0 * pr.p.dot(pr.q) * inv_n;
  return 0.5 * quad - linear_term_dot(w, pr);
}

double LeastSquaresProblem::linear_term_dot(const VectorXd& w, const Projection& pr) const {
  const double inv_n = 1.0 / static_cast<double>(n());
  if (kind_ == ProblemKind::per_view) return pr.p.dot(target_) * inv_n;
  const auto u = w.head(a_->rows());
  const auto v = w.tail(b_->rows());
  return pr.p.dot(ref_proj_.p) * inv_n + gamma_a_ * u.dot(u_ref_) + pr.q.dot(ref_proj_.q) * inv_n +
         gamma_b_ * v.dot(v_ref_);
}

VectorXd LeastSquaresProblem::gradient(const VectorXd& w) const { return gradient(w, project(w)); }

VectorXd LeastSquaresProblem::gradient(const VectorXd& w, const Projection& pr) const {
  if (w.size() != dim()) throw DimensionError("problem: vector has the wrong length");
  const double inv_n = 1.0 / static_cast<double>(n());
  if (kind_ == ProblemKind::per_view) {
    VectorXd g = a_->accumulate(pr.p - target_) * inv_n;
    g.noalias() += gamma_a_ * w;
    return g;
  }
  const Index dx = a_->rows();
  const Index dy = b_->rows();
  VectorXd g(dim());
  g.head(dx) = a_->accumulate(lambda_ * pr.p - pr.q - ref_proj_.p) * inv_n +
               gamma_a_ * (lambda_ * w.head(dx) - u_ref_);
  g.tail(dy) = b_->accumulate(lambda_ * pr.q - pr.p - ref_proj_.q) * inv_n +
               gamma_b_ * (lambda_ * w.tail(dy) - v_ref_);
  return g;
}

VectorXd LeastSquaresProblem::sample_direction(Index i, const VectorXd& w, const VectorXd& w0,
                                               const VectorXd& g0) const {
  if (i < 0 || i >= n()) throw ConfigError("sample index out of range");
  if (w.size() != dim() || w0.size() != dim() || g0.size() != dim())
    throw DimensionError("sample_direction: vector lengths");
  const VectorXd delta = w - w0;
  VectorXd dir = g0;
  if (kind_ == ProblemKind::per_view) {
    a_->col_axpy(i, a_->col_dot(i, delta), dir);
    dir.noalias() += gamma_a_ * delta;
    return dir;
  }
  const Index dx = a_->rows();
  const Index dy = b_->rows();
  const double a = a_->col_dot(i, delta.head(dx));
  const double b = b_->col_dot(i, delta.tail(dy));
  a_->col_axpy(i, lambda_ * a - b, dir.head(dx));
  b_->col_axpy(i, lambda_ * b - a, dir.tail(dy));
  dir.head(dx).noalias() += lambda_ * gamma_a_ * delta.head(dx);
  dir.tail(dy).noalias() += lambda_ * gamma_b_ * delta.tail(dy);
  return dir;
}

void LeastSquaresProblem::sample_update(Index i, VectorXd& delta, const VectorXd& g0, double xi,
                                        double extra_ridge) const {
  if (kind_ == ProblemKind::per_view) {
    const double s = a_->col_dot(i, delta);
    delta *= 1.0 - xi * (gamma_a_ + extra_ridge);
    delta.noalias() -= xi * g0;
    a_->col_axpy(i, -xi * s, delta);
    return;
  }
  const Index dx = a_->rows();
  const Index dy = b_->rows();
  auto du = delta.head(dx);
  auto dv = delta.tail(dy);
  const double a = a_->col_dot(i, du);
  const double b = b_->col_dot(i, dv);
  du *= 1.0 - xi * (lambda_ * gamma_a_ + extra_ridge);
  dv *= 1.0 - xi * (lambda_ * gamma_b_ + extra_ridge);
  delta.noalias() -= xi * g0;
  a_->col_axpy(i, -xi * (lambda_ * a - b), du);
  b_->col_axpy(i, -xi * (lambda_ * b - a), dv);
}

MatrixXd LeastSquaresProblem::dense_hessian(Index max_dim) const {
  if (dim() > max_dim) throw ConfigError("dense_hessian: dimension " + std::to_string(dim()) + " too large");
  const double inv_n = 1.0 / static_cast<double>(n());
  if (kind_ == ProblemKind::per_view) {
    if (blocks_) return x_side_ ? blocks_->sxx : blocks_->syy;
    MatrixXd h = a_->gram() * inv_n;
    h.diagonal().array() += gamma_a_;
    return h;
  }
  const Index dx = a_->rows();
  const Index dy = b_->rows();
  MatrixXd sxx, syy, sxy;
  if (blocks_) {
    sxx = blocks_->sxx;
    syy = blocks_->syy;
    sxy = blocks_->sxy;
  } else {
    sxx = a_->gram() * inv_n;
    sxx.diagonal().array() += gamma_a_;
    syy = b_->gram() * inv_n;
    syy.diagonal().array() += gamma_b_;
    sxy = a_->cross_gram(*b_) * inv_n;
  }
  MatrixXd h(dx + dy, dx + dy);
  h.topLeftCorner(dx, dx) = lambda_ * sxx;
  h.bottomRightCorner(dy, dy) = lambda_ * syy;
  h.topRightCorner(dx, dy) = -sxy;
  h.bottomLeftCorner(dy, dx) = -sxy.transpose();
  return h;
}

VectorXd LeastSquaresProblem::dense_linear_term() const {
  const double inv_n = 1.0 / static_cast<double>(n());
  if (kind_ == ProblemKind::per_view) return a_->accumulate(target_) * inv_n;
  const Index dx = a_->rows();
  const Index dy = b_->rows();
  VectorXd b(dim());
  b.head(dx) = a_->accumulate(ref_proj_.p) * inv_n + gamma_a_ * u_ref_;
  b.tail(dy) = b_->accumulate(ref_proj_.q) * inv_n + gamma_b_ * v_ref_;
  return b;
}

MatrixXd LeastSquaresProblem::dense_sample_hessian(Index i) const {
  if (i < 0 || i >= n()) throw ConfigError("sample index out of range");
  VectorXd x = VectorXd::Zero(a_->rows());
  a_->col_axpy(i, 1.0, x);
  if (kind_ == ProblemKind::per_view) {
    MatrixXd h = x * x.transpose();
    h.diagonal().array() += gamma_a_;
    return h;
  }
  VectorXd y = VectorXd::Zero(b_->rows());
  b_->col_axpy(i, 1.0, y);
  const Index dx = x.size();
  const Index dy = y.size();
  MatrixXd h(dx + dy, dx + dy);
  h.topLeftCorner(dx, dx) = lambda_ * x * x.transpose();
  h.topLeftCorner(dx, dx).diagonal().array() += lambda_ * gamma_a_;
  h.bottomRightCorner(dy, dy) = lambda_ * y * y.transpose();
  h.bottomRightCorner(dy, dy).diagonal().array() += lambda_ * gamma_b_;
  h.topRightCorner(dx, dy) = -x * y.transpose();
  h.bottomLeftCorner(dy, dx) = -y * x.transpose();
  return h;
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::completed: return "completed";
    case SolveStatus::converged: return "converged";
    case SolveStatus::budget_exhausted: return "budget_exhausted";
    case SolveStatus::diverged: return "diverged";
  }
  return "unknown";
}

VectorXd full_gradient(const LeastSquaresProblem& problem, const VectorXd& w) { return problem.gradient(w); }

VectorXd stochastic_gradient_step(const LeastSquaresProblem& problem, const VectorXd& w, const VectorXd& w0,
                                  const VectorXd& anchor_grad, Index i, double xi) {
  return w - xi * problem.sample_direction(i, w, w0, anchor_grad);
}

namespace {

struct DenseOracle {
  MatrixXd h;
  VectorXd w_bar;
  double scale = 0.0;  // w̄ᵀHw̄
};

DenseOracle make_dense_oracle(const LeastSquaresProblem& problem) {
  DenseOracle o;
  o.h = problem.dense_hessian(kDenseOracleMaxDim);
  const VectorXd b = problem.dense_linear_term();
  Eigen::LLT<MatrixXd> llt(o.h);
  if (llt.info() != Eigen::Success) throw NumericError("least-squares Hessian is not positive definite");
  o.w_bar = llt.solve(b);
  o.w_bar += llt.solve(b - o.h * o.w_bar);
  o.scale = std::abs(o.w_bar.dot(b));
  return o;
}

double half_energy(const MatrixXd& h, const VectorXd& e) { return 0.5 * e.dot(h * e); }

// Certifies f(w) − min f ≤ ε, either exactly against the dense minimiser or
// through the bound ‖∇f‖²/(2μ).
class Meter {
 public:
  Meter(const LeastSquaresProblem& problem, double epsilon) : epsilon_(epsilon) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon target must be positive");
    if (problem.dim() <= kDenseOracleMaxDim) {
      oracle_ = make_dense_oracle(problem);
    } else {
      mu_ = problem.curvature().strong_convexity;
      if (!(mu_ > 0.0)) throw ConfigError("epsilon target needs a strong-convexity bound for large problems");
    }
  }

  bool dense() const { return oracle_.has_value(); }

  double measure_dense(const VectorXd& w) const { return half_energy(oracle_->h, w - oracle_->w_bar); }
  double measure_proxy(const VectorXd& grad) const { return grad.squaredNorm() / (2.0 * mu_); }

  double threshold_dense() const { return std::max(epsilon_, kSuboptimalityFloor * oracle_->scale); }
  double threshold_proxy(double btw) const { return std::max(epsilon_, kSuboptimalityFloor * std::abs(btw)); }

 private:
  double epsilon_;
  std::optional<DenseOracle> oracle_;
  double mu_ = 0.0;
};

void validate(const SolveBudget& b, const VectorXd& w0, const LeastSquaresProblem& problem) {
  if (w0.size() != problem.dim()) throw DimensionError("solver start has the wrong length");
  if (b.mode == BudgetMode::epsilon_target && !(b.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (b.mode == BudgetMode::fixed_epochs && b.epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (b.inner_steps < 0) throw ConfigError("inner steps must be nonnegative");
  if (b.step_size < 0.0 || !std::isfinite(b.step_size)) throw ConfigError("step size must be nonnegative");
}

bool finite(const VectorXd& w) { return w.allFinite(); }

LeastSquaresProblem::Projection first_projection(const LeastSquaresProblem& problem, const VectorXd& w,
                                                 const LeastSquaresProblem::Projection* given) {
  return given ? *given : problem.project(w);
}

}  // namespace

double auto_gd_step(const LeastSquaresProblem& problem) {
  const double l = problem.curvature().smoothness;
  if (!(l > 0.0)) throw NumericError("cannot choose a step size: zero smoothness");
  return 1.0 / l;
}

double auto_svrg_step(const LeastSquaresProblem& problem) {
  const double l = problem.curvature().sample_smoothness;
  if (!(l > 0.0)) throw NumericError("cannot choose a step size: zero per-sample smoothness");
  return 1.0 / l;
}

SolveResult solve_gd(const LeastSquaresProblem& problem, const VectorXd& w0, const SolveBudget& budget,
                     const LeastSquaresProblem::Projection* w0_projection) {
  validate(budget, w0, problem);
  const bool eps = budget.mode == BudgetMode::epsilon_target;
  const double xi = budget.step_size > 0.0 ? budget.step_size : auto_gd_step(problem);
  std::optional<Meter> meter;
  if (eps) meter.emplace(problem, budget.epsilon);

  SolveResult r;
  r.w = w0;
  double prev = std::numeric_limits<double>::infinity();
  int increases = 0;
  for (int it = 0;; ++it) {
    if (!eps && it == budget.epochs) {
      r.status = SolveStatus::completed;
      break;
    }
    if (eps && meter->dense()) {
      r.suboptimality = meter->measure_dense(r.w);
      r.threshold = meter->threshold_dense();
      if (r.suboptimality <= r.threshold) {
        r.status = SolveStatus::converged;
        break;
      }
    }
    if (eps && it == budget.iteration_cap) {
      r.status = SolveStatus::budget_exhausted;
      break;
    }
    const auto pr = it == 0 ? first_projection(problem, r.w, w0_projection) : problem.project(r.w);
    const VectorXd g = problem.gradient(r.w, pr);
    r.passes += 1.0;
    if (eps && !meter->dense()) {
      r.suboptimality = meter->measure_proxy(g);
      r.threshold = meter->threshold_proxy(problem.linear_term_dot(r.w, pr));
      if (r.suboptimality <= r.threshold) {
        r.status = SolveStatus::converged;
        break;
      }
    }
    const double f = problem.value(r.w, pr);
    increases = f > prev ? increases + 1 : 0;
    prev = f;
    if (increases >= 3 || !std::isfinite(f)) {
      r.status = SolveStatus::diverged;
      r.diagnostic = "objective increased for 3 consecutive steps; step size " + std::to_string(xi) + " too large";
      break;
    }
    r.w.noalias() -= xi * g;
    ++r.epochs;
  }
  return r;
}

SolveResult solve_agd(const LeastSquaresProblem& problem, const VectorXd& w0, const SolveBudget& budget,
                      const LeastSquaresProblem::Projection* w0_projection) {
  validate(budget, w0, problem);
  const bool eps = budget.mode == BudgetMode::epsilon_target;
  const double xi = budget.step_size > 0.0 ? budget.step_size : auto_gd_step(problem);
  const double mu = problem.curvature().strong_convexity;
  std::optional<Meter> meter;
  if (eps) meter.emplace(problem, budget.epsilon);

  // Constant momentum when μ is known, otherwise the t_k sequence with
  // gradient restarts.
  const bool strongly = mu > 0.0;
  const double kappa = strongly ? std::max(1.0, 1.0 / (xi * mu)) : 0.0;
  const double beta_const = strongly ? (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0) : 0.0;
  double tk = 1.0;

  SolveResult r;
  VectorXd w = w0;
  VectorXd y = w0;
  for (int it = 0;; ++it) {
    if (!eps && it == budget.epochs) {
      r.status = SolveStatus::completed;
      break;
    }
    if (eps && meter->dense()) {
      r.suboptimality = meter->measure_dense(w);
      r.threshold = meter->threshold_dense();
      if (r.suboptimality <= r.threshold) {
        r.status = SolveStatus::converged;
        break;
      }
    }
    if (eps && it == budget.iteration_cap) {
      r.status = SolveStatus::budget_exhausted;
      break;
    }
    const auto pr = it == 0 ? first_projection(problem, y, w0_projection) : problem.project(y);
    const VectorXd g = problem.gradient(y, pr);
    r.passes += 1.0;
    if (eps && !meter->dense()) {
      r.suboptimality = meter->measure_proxy(g);
      r.threshold = meter->threshold_proxy(problem.linear_term_dot(y, pr));
      if (r.suboptimality <= r.threshold) {
        w = y;
        r.status = SolveStatus::converged;
        break;
      }
    }
    VectorXd w_new = y - xi * g;
    if (!finite(w_new)) {
      r.status = SolveStatus::diverged;
      r.diagnostic = "non-finite iterate";
      break;
    }
    double beta = beta_const;
    if (!strongly) {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
      beta = (tk - 1.0) / t_next;
      tk = t_next;
      if (g.dot(w_new - w) > 0.0) {
        tk = 1.0;
        beta = 0.0;
      }
    }
    y = w_new + beta * (w_new - w);
    w = std::move(w_new);
    ++r.epochs;
  }
  r.w = std::move(w);
  return r;
}

namespace {

// One epoch of m variance-reduced steps from anchor w0 with anchor gradient
// g0. Returns the displacement of the selected output from w0.
VectorXd svrg_epoch(const LeastSquaresProblem& problem, const VectorXd& g0, double xi, Index m, EpochOutput output,
                    double extra_ridge, std::mt19937_64& rng) {
  std::uniform_int_distribution<Index> pick(0, problem.n() - 1);
  Index keep = m;
  if (output == EpochOutput::random_iterate) keep = std::uniform_int_distribution<Index>(1, m)(rng);
  VectorXd delta = VectorXd::Zero(problem.dim());
  VectorXd kept;
  for (Index k = 1; k <= m; ++k) {
    problem.sample_update(pick(rng), delta, g0, xi, extra_ridge);
    if (k == keep) {
      if (k == m) return delta;
      kept = delta;
    }
  }
  return kept;
}

}  // namespace

SolveResult solve_svrg(const LeastSquaresProblem& problem, const VectorXd& w0, const SolveBudget& budget,
                       const LeastSquaresProblem::Projection* w0_projection) {
  validate(budget, w0, problem);
  const bool eps = budget.mode == BudgetMode::epsilon_target;
  const double xi = budget.step_size > 0.0 ? budget.step_size : auto_svrg_step(problem);
  const Index m = budget.inner_steps > 0 ? budget.inner_steps : problem.n();
  const double stochastic_passes = static_cast<double>(m) / static_cast<double>(problem.n());
  std::optional<Meter> meter;
  if (eps) meter.emplace(problem, budget.epsilon);
  std::mt19937_64 rng(budget.seed);

  SolveResult r;
  r.w = w0;
  for (int epoch = 0;; ++epoch) {
    if (!eps && epoch == budget.epochs) {
      r.status = SolveStatus::completed;
      break;
    }
    if (eps && meter->dense()) {
      r.suboptimality = meter->measure_dense(r.w);
      r.threshold = meter->threshold_dense();
      if (r.suboptimality <= r.threshold) {
        r.status = SolveStatus::converged;
        break;
      }
    }
    if (eps && epoch == budget.epoch_cap) {
      r.status = SolveStatus::budget_exhausted;
      r.diagnostic = "epsilon target not reached within " + std::to_string(budget.epoch_cap) + " epochs";
      break;
    }
    const auto pr = epoch == 0 ? first_projection(problem, r.w, w0_projection) : problem.project(r.w);
    const VectorXd g0 = problem.gradient(r.w, pr);
    r.passes += 1.0;
    if (eps && !meter->dense()) {
      r.suboptimality = meter->measure_proxy(g0);
      r.threshold = meter->threshold_proxy(problem.linear_term_dot(r.w, pr));
      if (r.suboptimality <= r.threshold) {
        r.status = SolveStatus::converged;
        break;
      }
    }
    r.w += svrg_epoch(problem, g0, xi, m, budget.output, 0.0, rng);
    r.passes += stochastic_passes;
    ++r.epochs;
    if (!finite(r.w)) {
      r.status = SolveStatus::diverged;
      r.diagnostic = "non-finite iterate; step size " + std::to_string(xi) + " too large";
      break;
    }
  }
  return r;
}

SolveResult solve_asvrg(const LeastSquaresProblem& problem, const VectorXd& w0, const SolveBudget& budget,
                        const LeastSquaresProblem::Projection* w0_projection) {
  validate(budget, w0, problem);
  const double mu = problem.curvature().strong_convexity;
  const double l_sample = problem.curvature().sample_smoothness;
  const double n = static_cast<double>(problem.n());
  if (!(mu > 0.0) || l_sample / mu <= n) return solve_svrg(problem, w0, budget, w0_projection);

  const bool eps = budget.mode == BudgetMode::epsilon_target;
  const double kappa_c = l_sample / n - mu;
  const double q = mu / (mu + kappa_c);
  const double beta = (1.0 - std::sqrt(q)) / (1.0 + std::sqrt(q));
  const double xi = budget.step_size > 0.0 ? budget.step_size : 1.0 / (l_sample + kappa_c);
  const Index m = budget.inner_steps > 0 ? budget.inner_steps : problem.n();
  const double stochastic_passes = static_cast<double>(m) / n;
  std::optional<Meter> meter;
  if (eps) meter.emplace(problem, budget.epsilon);
  std::mt19937_64 rng(budget.seed);

  SolveResult r;
  r.w = w0;
  VectorXd y = w0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0;; ++k) {
    if (!eps && k == budget.epochs) {
      r.status = SolveStatus::completed;
      break;
    }
    if (eps && meter->dense()) {
      r.suboptimality = meter->measure_dense(r.w);
      r.threshold = meter->threshold_dense();
      if (r.suboptimality <= r.threshold) {
        r.status = SolveStatus::converged;
        break;
      }
    }
    if (eps && k == budget.epoch_cap) {
      r.status = SolveStatus::budget_exhausted;
      r.diagnostic = "epsilon target not reached within " + std::to_string(budget.epoch_cap) + " epochs";
      break;
    }
    const auto pr = k == 0 ? first_projection(problem, r.w, w0_projection) : problem.project(r.w);
    const VectorXd gf = problem.gradient(r.w, pr);
    r.passes += 1.0;
    if (eps && !meter->dense()) {
      r.suboptimality = meter->measure_proxy(gf);
      r.threshold = meter->threshold_proxy(problem.linear_term_dot(r.w, pr));
      if (r.suboptimality <= r.threshold) {
        r.status = SolveStatus::converged;
        break;
      }
    }
    // Restart the extrapolation when the objective went up.
    const double f = problem.value(r.w, pr);
    if (f > prev) y = r.w;
    prev = f;

    const VectorXd g0 = gf + kappa_c * (r.w - y);
    VectorXd w_new = r.w + svrg_epoch(problem, g0, xi, m, budget.output, kappa_c, rng);
    r.passes += stochastic_passes;
    ++r.epochs;
    if (!finite(w_new)) {
      r.status = SolveStatus::diverged;
      r.diagnostic = "non-finite iterate";
      break;
    }
    y = w_new + beta * (w_new - r.w);
    r.w = std::move(w_new);
  }
  return r;
}

VectorXd closed_form_minimizer(const LeastSquaresProblem& problem) {
  if (problem.dim() > kDenseOracleMaxDim)
    throw ConfigError("closed_form_minimizer: dimension " + std::to_string(problem.dim()) + " exceeds 200");
  return make_dense_oracle(problem).w_bar;
}

double dense_suboptimality(const LeastSquaresProblem& problem, const VectorXd& w) {
  if (problem.dim() > kDenseOracleMaxDim) throw ConfigError("dense_suboptimality: dimension exceeds 200");
  const DenseOracle o = make_dense_oracle(problem);
  return half_energy(o.h, w - o.w_bar);
}

}  // namespace stocca
