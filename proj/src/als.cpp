#include "stocca/als.hpp"

#include <chrono>
#include <cmath>

#include "stocca/covariance.hpp"
#include "stocca/errors.hpp"
#include "stocca/metrics.hpp"

namespace stocca {

const char* to_string(InnerSolver s) {
  switch (s) {
    case InnerSolver::gd: return "gd";
    case InnerSolver::agd: return "agd";
    case InnerSolver::svrg: return "svrg";
    case InnerSolver::asvrg: return "asvrg";
    case InnerSolver::exact: return "exact";
  }
  return "unknown";
}

InnerSolver parse_inner_solver(const std::string& name) {
  if (name == "gd") return InnerSolver::gd;
  if (name == "agd") return InnerSolver::agd;
  if (name == "svrg") return InnerSolver::svrg;
  if (name == "asvrg") return InnerSolver::asvrg;
  if (name == "exact") return InnerSolver::exact;
  throw ConfigError("unknown inner solver '" + name + "' (expected gd, agd, svrg, asvrg or exact)");
}

AlsSchedule als_theory_schedule(double eta, double rho1, double rho2, double rho_r, double mu) {
  if (!(eta > 0.0) || !(eta <= 1.0)) throw ConfigError("als_theory_schedule: eta must lie in (0, 1]");
  if (!(rho1 > rho2) || !(rho2 >= 0.0)) throw ConfigError("als_theory_schedule: needs ρ1 > ρ2 ≥ 0 (zero gap)");
  if (!(rho_r > 0.0) || rho_r > rho1) throw ConfigError("als_theory_schedule: ρ_r must lie in (0, ρ1]");
  if (!(mu > 0.0)) throw ConfigError("als_theory_schedule: μ must be positive");
  const double delta = rho1 * rho1 / (rho1 * rho1 - rho2 * rho2);
  AlsSchedule s;
  s.steps = std::max(1, static_cast<int>(std::ceil(delta * std::log(2.0 / (mu * eta)))));
  const double r = 2.0 * rho1 / rho_r;
  const double ratio = (r - 1.0) / (std::pow(r, s.steps) - 1.0);
  s.epsilon = eta * eta * rho_r * rho_r / 128.0 * ratio * ratio;
  return s;
}

SolveResult run_inner_solver(InnerSolver solver, const LeastSquaresProblem& problem, const VectorXd& w0,
                             const SolveBudget& budget, const LeastSquaresProblem::Projection* w0_projection) {
  switch (solver) {
    case InnerSolver::gd: return solve_gd(problem, w0, budget, w0_projection);
    case InnerSolver::agd: return solve_agd(problem, w0, budget, w0_projection);
    case InnerSolver::svrg: return solve_svrg(problem, w0, budget, w0_projection);
    case InnerSolver::asvrg: return solve_asvrg(problem, w0, budget, w0_projection);
    case InnerSolver::exact: {
      SolveResult r;
      r.w = closed_form_minimizer(problem);
      r.passes = 1.0;
      r.status = SolveStatus::converged;
      r.suboptimality = 0.0;
      return r;
    }
  }
  throw ConfigError("unknown inner solver");
}

AlsState als_init(const CcaDataset& ds, const VectorXd& u0, const VectorXd& v0) {
  if (u0.size() != ds.dx() || v0.size() != ds.dy()) throw DimensionError("als_init: start vector sizes");
  const Normalized nu = sigma_normalize(CovarianceOperator::xx(ds), u0);
  const Normalized nv = sigma_normalize(CovarianceOperator::yy(ds), v0);
  AlsState s;
  s.u = s.u_tilde = nu.w;
  s.v = s.v_tilde = nv.w;
  s.xu = s.xu_tilde = nu.projection;
  s.yv = s.yv_tilde = nv.projection;
  return s;
}

namespace {

SolveBudget make_budget(const AlsConfig& c, double epsilon, std::uint64_t seed) {
  SolveBudget b;
  if (c.epsilon_mode == EpsilonMode::fixed_epochs) {
    b.mode = BudgetMode::fixed_epochs;
    b.epochs = c.inner_epochs;
  } else {
    b.mode = BudgetMode::epsilon_target;
    b.epsilon = epsilon;
  }
  b.step_size = c.step_size;
  b.inner_steps = c.inner_steps;
  b.epoch_cap = c.epoch_cap;
  b.output = c.output;
  b.seed = seed;
  return b;
}

void check_inner(const SolveResult& r, const char* which) {
  if (r.status == SolveStatus::diverged) throw NumericError(std::string("inner solve of ") + which + " diverged: " + r.diagnostic);
}

}  // namespace

AlsState als_outer_step(const AlsState& state, const CcaDataset& ds, const AlsConfig& config, double epsilon,
                        AlsStepReport* report) {
  const auto f = LeastSquaresProblem::for_x_view(ds, state.v, &state.yv);
  const auto g = LeastSquaresProblem::for_y_view(ds, state.u, &state.xu);
  // When the start pairs u and v with opposite signs the exact iterates flip
  // sign every step, so ±ũ is used, whichever gives the lower f_t (g_t).
  // Both signs are read off projections already at hand.
  const double sf = relative_sign(state.xu_tilde, state.yv);
  const double sg = relative_sign(state.yv_tilde, state.xu);
  const LeastSquaresProblem::Projection pf{sf * state.xu_tilde, {}};
  const LeastSquaresProblem::Projection pg{sg * state.yv_tilde, {}};

  const auto t = static_cast<std::uint64_t>(state.t + 1);
  SolveResult rf = run_inner_solver(config.inner, f, sf * state.u_tilde, make_budget(config, epsilon, derive_seed(config.seed, t, 0)), &pf);
  SolveResult rg = run_inner_solver(config.inner, g, sg * state.v_tilde, make_budget(config, epsilon, derive_seed(config.seed, t, 1)), &pg);
  check_inner(rf, "f_t");
  check_inner(rg, "g_t");

  AlsState next;
  next.t = state.t + 1;
  next.passes = state.passes + 0.5 * (rf.passes + rg.passes);
  next.u_tilde = std::move(rf.w);
  next.v_tilde = std::move(rg.w);
  next.xu_tilde = ds.x().project(next.u_tilde);
  next.yv_tilde = ds.y().project(next.v_tilde);
  const Normalized nu = sigma_normalize(next.u_tilde, next.xu_tilde, ds.gamma_x());
  const Normalized nv = sigma_normalize(next.v_tilde, next.yv_tilde, ds.gamma_y());
  next.u = nu.w;
  next.v = nv.w;
  next.xu = nu.projection;
  next.yv = nv.projection;
  if (report) {
    report->f = std::move(rf);
    report->g = std::move(rg);
  }
  return next;
}

double warm_start_gap(const AlsState& state, const CcaDataset& ds) {
  const auto f = LeastSquaresProblem::for_x_view(ds, state.v, &state.yv);
  const auto g = LeastSquaresProblem::for_y_view(ds, state.u, &state.xu);
  const double sf = relative_sign(state.xu_tilde, state.yv);
  const double sg = relative_sign(state.yv_tilde, state.xu);
  return std::max(dense_suboptimality(f, sf * state.u_tilde), dense_suboptimality(g, sg * state.v_tilde));
}

AlsRun run_als(const CcaDataset& ds, const AlsConfig& config, const ReferenceSolution* reference,
               const std::string& label) {
  if (!(config.eta > 0.0) || !(config.eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
  if (config.epsilon_mode == EpsilonMode::fixed && !(config.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (config.epsilon_mode == EpsilonMode::geometric && (!(config.epsilon0 > 0.0) || !(config.decay > 0.0) || config.decay > 1.0))
    throw ConfigError("geometric schedule needs epsilon0 > 0 and decay in (0, 1]");
  if (config.epsilon_mode == EpsilonMode::fixed_epochs && config.inner_epochs < 1) throw ConfigError("inner_epochs must be >= 1");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  VectorXd u0, v0;
  if (config.u0 && config.v0) {
    u0 = *config.u0;
    v0 = *config.v0;
  } else {
    InitialVectors init = random_initialization(ds, config.seed);
    u0 = config.u0 ? *config.u0 : init.u;
    v0 = config.v0 ? *config.v0 : init.v;
  }

  AlsRun run;
  run.state = als_init(ds, u0, v0);
  run.schedule.steps = config.steps;

  if (config.epsilon_mode == EpsilonMode::theorem) {
    double rho1 = config.rho1.value_or(reference ? reference->rho1() : 0.0);
    double rho2 = config.rho2.value_or(reference ? reference->rho2() : 0.0);
    double rho_r = config.rho_r.value_or(reference ? reference->rho_r() : 0.0);
    double mu = config.mu.value_or(reference ? initial_alignment(ds, u0, v0, *reference) : 0.0);
    if (!(rho1 > 0.0) || !(rho_r > 0.0) || !(mu > 0.0))
      throw ConfigError("theorem mode needs ρ1, ρ2, ρ_r and μ (or a reference solution)");
    const AlsSchedule s = als_theory_schedule(config.eta, rho1, rho2, rho_r, mu);
    run.schedule.epsilon = s.epsilon;
    if (config.steps < 0) run.schedule.steps = s.steps;
  } else if (config.steps < 0) {
    if (!std::isfinite(config.passes_max)) throw ConfigError("outer step count or pass budget required outside theorem mode");
    run.schedule.steps = std::numeric_limits<int>::max();
  }

  auto record = [&] {
    const double sign = relative_sign(run.state.xu, run.state.yv);
    TraceRow row = make_row(label, run.state.t, run.state.passes, ds, run.state.u, sign * run.state.v, reference);
    row.wall_time = elapsed();
    run.trace.rows.push_back(std::move(row));
  };
  record();

  for (int t = 1; t <= run.schedule.steps && run.state.passes < config.passes_max; ++t) {
    double eps = config.epsilon;
    if (config.epsilon_mode == EpsilonMode::theorem) eps = run.schedule.epsilon;
    if (config.epsilon_mode == EpsilonMode::geometric) eps = config.epsilon0 * std::pow(config.decay, t - 1);
    AlsStepReport report;
    try {
      run.state = als_outer_step(run.state, ds, config, eps, &report);
    } catch (const NumericError& e) {
      run.trace.status = "numeric_error";
      run.trace.message = e.what();
      break;
    }
    run.reports.push_back(report);
    record();
  }
  return run;
}

}  // namespace stocca
