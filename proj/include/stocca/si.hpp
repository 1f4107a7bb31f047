#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "stocca/als.hpp"

namespace stocca {

enum class SiPhase { shrinking, fixed, done };

/// theorem:   ε̃, m1, m2 from the convergence theorem; inner solves stop on ε̃.
/// practical: fixed epoch counts per solve and ε̃ = 0 in the Δ_s formula.
enum class SiMode { theorem, practical };

struct SiConfig {
  SiMode mode = SiMode::practical;
  double delta_tilde = 0.0;  // gap estimate Δ̃, required
  double eta = 0.1;
  /// 0 selects the theorem formulas (with μ̃).
  int m1 = 0;
  int m2 = 0;
  /// 0 selects the theorem value in theorem mode.
  double epsilon_tilde = 0.0;
  /// 0 means μ̃ is measured against the reference (theorem mode) or 0.05.
  double mu_tilde = 0.0;
  /// Exit the shrink loop once Δ_s ≤ this; 0 selects Δ̃.
  double exit_threshold = 0.0;
  InnerSolver inner = InnerSolver::svrg;
  int shrink_epochs = 2;  // practical: epochs per solve inside the shrink loop
  int fixed_epochs = 4;   // practical: epochs per solve at λ_(f)
  int shrink_cap = 200;
  /// Keep iterating at λ_(f) past m2 until the pass budget is spent.
  bool run_to_budget = false;
  double passes_max = std::numeric_limits<double>::infinity();

  double step_size = 0.0;
  Index inner_steps = 0;
  int epoch_cap = 100;
  EpochOutput output = EpochOutput::last_iterate;
  std::uint64_t seed = 0;
  std::optional<VectorXd> u0, v0;
};

struct SiState {
  VectorXd u;
  VectorXd v;
  VectorXd u_tilde;
  VectorXd v_tilde;
  VectorXd xu, yv, xu_tilde, yv_tilde;
  double lambda = 0.0;
  int s = 0;
  int t = 0;
  SiPhase phase = SiPhase::shrinking;
  double passes = 0.0;
};

struct SiTheoryParameters {
  int m1 = 0;
  int m2 = 0;
  double epsilon_tilde = 0.0;
};

/// m1 = ⌈8 ln(16/μ̃)⌉, m2 = ⌈1.25 ln(128/(μ̃η²))⌉ and
/// ε̃ = min((1/3084)(Δ̃/18)^{m1−1}, (η⁴/4¹⁰)(Δ̃/18)^{m2−1}, Δ̃/256).
SiTheoryParameters si_theory_parameters(double mu_tilde, double eta, double delta_tilde);

/// Same without the Δ̃/256 cap.
SiTheoryParameters si_theory_parameters_uncapped(double mu_tilde, double eta, double delta_tilde);

/// Jointly normalised start: [u; v] scaled so uᵀΣxx u + vᵀΣyy v = 2.
SiState si_init(const CcaDataset& ds, const VectorXd& u0, const VectorXd& v0, double lambda);

/// uᵀΣxx u + vᵀΣyy v from the stored projections.
double joint_norm(const SiState& state, const CcaDataset& ds);

/// Inner-solve stopping rule for one SI solve.
struct SiSolveRule {
  BudgetMode mode = BudgetMode::fixed_epochs;
  double epsilon = 0.0;
  int epochs = 2;
};

/// One inexact power step on M_λ at the state's λ: solve h_t from the warm
/// start (ũ, ṽ), then normalise jointly.
SiState si_power_step(const SiState& state, const CcaDataset& ds, const SiConfig& config, const SiSolveRule& rule,
                      double mu_hint, SolveResult* result = nullptr);

struct DeltaEstimate {
  double delta_s = 0.0;
  /// ½[u; v]ᵀ blockdiag(Σxx, Σyy) w_s
  double rayleigh = 0.0;
  VectorXd w_s;
  double passes = 0.0;
};

/// Solves l_s (warm-started at (ũ, ṽ)) and evaluates
/// Δ_s = ½ / (½[u; v]ᵀ blockdiag(Σ) w_s − 2√(ε̃/Δ̃)).
DeltaEstimate estimate_delta_s(const SiState& state, const CcaDataset& ds, const SiConfig& config,
                               const SiSolveRule& rule, double epsilon_tilde, double delta_tilde, double mu_hint);

struct ShrinkRecord {
  int s = 0;
  double lambda_prev = 0.0;
  double delta_s = 0.0;
  double lambda = 0.0;
};

struct SiStepRecord {
  int t = 0;
  int s = 0;
  double lambda = 0.0;
  double joint_norm = 0.0;
  double passes = 0.0;
  SiPhase phase = SiPhase::shrinking;
};

struct SiPhaseOneResult {
  SiState state;
  double lambda_f = 0.0;
  SiTheoryParameters parameters;
  double mu_tilde = 0.0;
  double exit_threshold = 0.0;
  std::vector<ShrinkRecord> shrinks;
  std::vector<SiStepRecord> steps;
  RunTrace trace;
};

/// Shrink loop from λ_(0) = 1 + Δ̃, then m2 power steps at λ_(f).
SiPhaseOneResult run_si_phase1(const CcaDataset& ds, const SiConfig& config, const ReferenceSolution* reference = nullptr,
                               const std::string& label = "si");

struct FinalPair {
  VectorXd u;
  VectorXd v;
};

/// û = u/√(uᵀΣxx u), v̂ = v/√(vᵀΣyy v).
FinalPair final_normalization(const VectorXd& u, const VectorXd& v, const CcaDataset& ds);

struct SiRun {
  FinalPair solution;
  SiPhaseOneResult phase1;
};

SiRun run_si(const CcaDataset& ds, const SiConfig& config, const ReferenceSolution* reference = nullptr,
             const std::string& label = "si");

}  // namespace stocca
