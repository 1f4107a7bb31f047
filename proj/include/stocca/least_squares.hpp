#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "stocca/dataset.hpp"

namespace stocca {

enum class ProblemKind { per_view, joint_shifted };

/// Curvature constants of a quadratic objective. Zero means unknown.
struct Curvature {
  double smoothness = 0.0;         // σmax of the Hessian
  double strong_convexity = 0.0;   // σmin of the Hessian
  double sample_smoothness = 0.0;  // bound on the norm of every per-sample Hessian
};

/// A strongly convex quadratic with finite-sum structure.
///
/// per_view:      f(u) = (1/2N)‖Aᵀu − t‖² + (γ/2)‖u‖²
///                component i: ½(a_iᵀu − t_i)² + (γ/2)‖u‖²
/// joint_shifted: h(u,v) = ½wᵀQ_λw − uᵀΣxx u_r − vᵀΣyy v_r, w = [u; v],
///                Q_λ = [[λΣxx, −Σxy], [−Σyx, λΣyy]]
///                component i uses [[λ(x_i x_iᵀ + γx I), −x_i y_iᵀ], [−y_i x_iᵀ, λ(y_i y_iᵀ + γy I)]]
///
/// Holds non-owning references to the views.
class LeastSquaresProblem {
 public:
  struct Projection {
    VectorXd p;  // Aᵀu (or Xᵀu)
    VectorXd q;  // Yᵀv, joint kind only
  };

  static LeastSquaresProblem per_view(const DataMatrix& a, double gamma, VectorXd target, Curvature curvature = {});
  /// f_t: design X, target Yᵀv.
  static LeastSquaresProblem for_x_view(const CcaDataset& ds, const VectorXd& v, const VectorXd* y_projection = nullptr);
  /// g_t: design Y, target Xᵀu.
  static LeastSquaresProblem for_y_view(const CcaDataset& ds, const VectorXd& u, const VectorXd* x_projection = nullptr);
  /// Linear term blockdiag(Σxx, Σyy)·[u_r; v_r]. `mu_hint` is a lower bound on
  /// σmin(Q_λ) when the caller has one.
  static LeastSquaresProblem joint_shifted(const CcaDataset& ds, double lambda, const VectorXd& u_ref,
                                           const VectorXd& v_ref, double mu_hint = 0.0,
                                           const Projection* ref_projection = nullptr);

  ProblemKind kind() const { return kind_; }
  Index dim() const;
  Index n() const { return a_->cols(); }
  double lambda() const { return lambda_; }
  const Curvature& curvature() const { return curvature_; }

  Projection project(const VectorXd& w) const;
  double value(const VectorXd& w) const;
  double value(const VectorXd& w, const Projection& proj) const;
  VectorXd gradient(const VectorXd& w) const;
  VectorXd gradient(const VectorXd& w, const Projection& proj) const;

  /// ∇f_i(w) − ∇f_i(w0) + g0, the variance-reduced direction for sample i.
  VectorXd sample_direction(Index i, const VectorXd& w, const VectorXd& w0, const VectorXd& g0) const;
  /// In-place form on δ = w − w0: δ ← δ − ξ·(direction + extra_ridge·δ).
  void sample_update(Index i, VectorXd& delta, const VectorXd& g0, double xi, double extra_ridge = 0.0) const;

  /// Dense Hessian H and linear term b with ∇f(w) = Hw − b. Guarded by `max_dim`.
  MatrixXd dense_hessian(Index max_dim = 2000) const;
  VectorXd dense_linear_term() const;
  /// Hessian of component i, dense.
  MatrixXd dense_sample_hessian(Index i) const;

  /// bᵀw, used to scale the numerical floor of suboptimality targets.
  double linear_term_dot(const VectorXd& w, const Projection& proj) const;

 private:
  ProblemKind kind_ = ProblemKind::per_view;
  const DataMatrix* a_ = nullptr;
  const DataMatrix* b_ = nullptr;
  double gamma_a_ = 0.0;
  double gamma_b_ = 0.0;
  double lambda_ = 0.0;
  VectorXd target_;
  VectorXd u_ref_;
  VectorXd v_ref_;
  Projection ref_proj_;
  Curvature curvature_;
  const DenseBlocks* blocks_ = nullptr;  // set when built from a dataset
  bool x_side_ = true;                   // per_view from a dataset: which view
};

enum class BudgetMode { epsilon_target, fixed_epochs };
enum class EpochOutput { last_iterate, random_iterate };

struct SolveBudget {
  BudgetMode mode = BudgetMode::fixed_epochs;
  double epsilon = 1e-8;
  /// SVRG epochs, or GD/AGD iterations, in fixed mode.
  int epochs = 1;
  /// Stochastic steps per SVRG epoch; 0 selects N.
  Index inner_steps = 0;
  /// 0 selects the automatic rule.
  double step_size = 0.0;
  /// SVRG epoch cap in epsilon mode.
  int epoch_cap = 100;
  /// GD/AGD iteration cap in epsilon mode.
  int iteration_cap = 1000000;
  EpochOutput output = EpochOutput::last_iterate;
  std::uint64_t seed = 0;
};

/// `completed`: a fixed budget ran to the end. `converged`: an epsilon target
/// was certified. `budget_exhausted`: the cap was hit first.
enum class SolveStatus { completed, converged, budget_exhausted, diverged };

struct SolveResult {
  VectorXd w;
  /// Passes over the problem's samples (one full gradient = 1).
  double passes = 0.0;
  /// SVRG epochs or GD/AGD iterations performed.
  int epochs = 0;
  SolveStatus status = SolveStatus::budget_exhausted;
  /// Last measured f(w) − min f, NaN when not measured.
  double suboptimality = std::numeric_limits<double>::quiet_NaN();
  /// Stopping threshold actually applied: ε raised to the measurement
  /// floor. NaN for fixed budgets.
  double threshold = std::numeric_limits<double>::quiet_NaN();
  std::string diagnostic;
};

const char* to_string(SolveStatus s);

VectorXd full_gradient(const LeastSquaresProblem& problem, const VectorXd& w);

/// w − ξ·((a_i a_iᵀ + γI)(w − w0) + g0) for per_view, and the joint analogue.
VectorXd stochastic_gradient_step(const LeastSquaresProblem& problem, const VectorXd& w, const VectorXd& w0,
                                  const VectorXd& anchor_grad, Index i, double xi);

// `w0_projection`, when given, must equal problem.project(w0); it saves the
// first projection (callers that just normalised w0 already have it).
SolveResult solve_gd(const LeastSquaresProblem& problem, const VectorXd& w0, const SolveBudget& budget,
                     const LeastSquaresProblem::Projection* w0_projection = nullptr);
SolveResult solve_agd(const LeastSquaresProblem& problem, const VectorXd& w0, const SolveBudget& budget,
                      const LeastSquaresProblem::Projection* w0_projection = nullptr);
SolveResult solve_svrg(const LeastSquaresProblem& problem, const VectorXd& w0, const SolveBudget& budget,
                       const LeastSquaresProblem::Projection* w0_projection = nullptr);
/// Catalyst-style acceleration: each outer step runs one SVRG epoch on
/// f(w) + (κc/2)‖w − y‖² with κc = L_sample/N − μ, followed by Nesterov
/// extrapolation of y. Falls back to solve_svrg when L_sample/μ ≤ N or μ is
/// unknown.
SolveResult solve_asvrg(const LeastSquaresProblem& problem, const VectorXd& w0, const SolveBudget& budget,
                        const LeastSquaresProblem::Projection* w0_projection = nullptr);

/// Dense normal-equations solve; dims ≤ 200.
VectorXd closed_form_minimizer(const LeastSquaresProblem& problem);

/// ½(w − w̄)ᵀH(w − w̄) against the dense minimiser; dims ≤ 200.
double dense_suboptimality(const LeastSquaresProblem& problem, const VectorXd& w);

/// Auto step sizes: 1/σmax for GD/AGD and 1/(per-sample bound) for SVRG.
double auto_gd_step(const LeastSquaresProblem& problem);
double auto_svrg_step(const LeastSquaresProblem& problem);

/// Problems up to this dimension are measured against the dense minimiser.
inline constexpr Index kDenseOracleMaxDim = 200;
/// Targets are floored at this multiple of w̄ᵀHw̄, the best double precision can certify.
inline constexpr double kSuboptimalityFloor = 1e-18;

}  // namespace stocca
