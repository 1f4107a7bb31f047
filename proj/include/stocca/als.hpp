#pragma once

#include <cstdint>
#include <limits>
#include <optional>

#include "stocca/least_squares.hpp"
#include "stocca/random.hpp"
#include "stocca/reference.hpp"
#include "stocca/trace.hpp"

namespace stocca {

enum class InnerSolver { gd, agd, svrg, asvrg, exact };

const char* to_string(InnerSolver s);
InnerSolver parse_inner_solver(const std::string& name);

/// How each inner solve is stopped.
///  theorem:      ε from the convergence theorem; needs ρ1, ρ2, ρ_r and μ
///  fixed:        the same ε for every solve
///  geometric:    ε0·decay^(t−1) at outer step t
///  fixed_epochs: a fixed number of epochs (GD/AGD iterations) per solve
enum class EpsilonMode { theorem, fixed, geometric, fixed_epochs };

struct AlsConfig {
  InnerSolver inner = InnerSolver::svrg;
  double eta = 0.05;
  EpsilonMode epsilon_mode = EpsilonMode::geometric;
  double epsilon = 1e-8;
  double epsilon0 = 1e-3;
  double decay = 0.5;
  int inner_epochs = 2;
  /// Outer steps; negative selects the theorem's T (theorem mode only).
  int steps = -1;
  /// Stop once the cumulative pass count reaches this.
  double passes_max = std::numeric_limits<double>::infinity();

  // Theorem inputs; filled from the reference when it is given.
  std::optional<double> rho1, rho2, rho_r, mu;

  // Inner-solver knobs (see SolveBudget).
  double step_size = 0.0;
  Index inner_steps = 0;
  int epoch_cap = 100;
  EpochOutput output = EpochOutput::last_iterate;

  std::uint64_t seed = 0;
  /// Start vectors; random (seeded) when absent.
  std::optional<VectorXd> u0, v0;
};

struct AlsState {
  VectorXd u;
  VectorXd v;
  VectorXd u_tilde;
  VectorXd v_tilde;
  // Projections onto the samples, kept from normalisation for reuse.
  VectorXd xu, yv, xu_tilde, yv_tilde;
  int t = 0;
  double passes = 0.0;
};

struct AlsStepReport {
  SolveResult f;  // w omitted
  SolveResult g;
};

struct AlsSchedule {
  int steps = 0;
  double epsilon = 0.0;
};

/// T = ⌈ρ1²/(ρ1²−ρ2²)·ln(2/(μη))⌉ (at least 1) and
/// ε(T) = (η²ρr²/128)·((2ρ1/ρr − 1)/((2ρ1/ρr)^T − 1))².
AlsSchedule als_theory_schedule(double eta, double rho1, double rho2, double rho_r, double mu);

/// Normalises ũ0 = u0, ṽ0 = v0 and sets u0 ← ũ0, v0 ← ṽ0.
AlsState als_init(const CcaDataset& ds, const VectorXd& u0, const VectorXd& v0);

/// Solves f_t from ±ũ_{t−1} and g_t from ±ṽ_{t−1} (g_t is defined by u_{t−1}),
/// then normalises both views exactly. The sign of each warm start is the one
/// with the lower objective. `epsilon` is ignored in fixed_epochs
/// mode.
AlsState als_outer_step(const AlsState& state, const CcaDataset& ds, const AlsConfig& config, double epsilon,
                        AlsStepReport* report = nullptr);

/// Initial suboptimality of the next subproblems at the warm starts:
/// max(f_{t+1}(±ũ_t) − min f_{t+1}, g_{t+1}(±ṽ_t) − min g_{t+1}), signs as in als_outer_step. Dense, dims ≤ 200.
double warm_start_gap(const AlsState& state, const CcaDataset& ds);

struct AlsRun {
  AlsState state;
  RunTrace trace;
  AlsSchedule schedule;  // steps used and (theorem mode) ε
  std::vector<AlsStepReport> reports;
};

/// Runs the outer loop; the trace has one row per outer step plus the start.
/// `label` names the algorithm in trace rows.
AlsRun run_als(const CcaDataset& ds, const AlsConfig& config, const ReferenceSolution* reference = nullptr,
               const std::string& label = "als");

/// Dispatches to the chosen solver; `exact` uses the dense minimiser.
SolveResult run_inner_solver(InnerSolver solver, const LeastSquaresProblem& problem, const VectorXd& w0,
                             const SolveBudget& budget, const LeastSquaresProblem::Projection* w0_projection);

}  // namespace stocca
