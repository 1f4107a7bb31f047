#include "stocca/si.hpp"

#include <chrono>
#include <cmath>

#include "stocca/covariance.hpp"
#include "stocca/errors.hpp"

namespace stocca {

SiTheoryParameters si_theory_parameters_uncapped(double mu_tilde, double eta, double delta_tilde) {
  if (!(mu_tilde > 0.0) || !(eta > 0.0) || !(delta_tilde > 0.0))
    throw ConfigError("si_theory_parameters: μ̃, η and Δ̃ must be positive");
  SiTheoryParameters p;
  p.m1 = static_cast<int>(std::ceil(8.0 * std::log(16.0 / mu_tilde)));
  p.m2 = static_cast<int>(std::ceil(1.25 * std::log(128.0 / (mu_tilde * eta * eta))));
  p.m1 = std::max(p.m1, 1);
  p.m2 = std::max(p.m2, 1);
  const double base = delta_tilde / 18.0;
  const double e1 = std::pow(base, p.m1 - 1) / 3084.0;
  const double e2 = std::pow(eta, 4) / std::pow(4.0, 10) * std::pow(base, p.m2 - 1);
  p.epsilon_tilde = std::min(e1, e2);
  return p;
}

SiTheoryParameters si_theory_parameters(double mu_tilde, double eta, double delta_tilde) {
  SiTheoryParameters p = si_theory_parameters_uncapped(mu_tilde, eta, delta_tilde);
  p.epsilon_tilde = std::min(p.epsilon_tilde, delta_tilde / 256.0);
  return p;
}

namespace {

void joint_rescale(SiState& s, const CcaDataset& ds) {
  const double q = quadratic_form_from_projection(s.xu_tilde, s.u_tilde, ds.gamma_x()) +
                   quadratic_form_from_projection(s.yv_tilde, s.v_tilde, ds.gamma_y());
  if (!(q > 0.0) || !std::isfinite(q)) throw NumericError("cannot normalise an iterate with zero joint Σ-norm");
  const double scale = std::sqrt(2.0 / q);
  s.u = s.u_tilde * scale;
  s.v = s.v_tilde * scale;
  s.xu = s.xu_tilde * scale;
  s.yv = s.yv_tilde * scale;
}

VectorXd stack(const VectorXd& a, const VectorXd& b) {
  VectorXd w(a.size() + b.size());
  w << a, b;
  return w;
}

SolveBudget make_budget(const SiConfig& c, const SiSolveRule& rule, std::uint64_t seed) {
  SolveBudget b;
  b.mode = rule.mode;
  b.epsilon = rule.epsilon;
  b.epochs = rule.epochs;
  b.step_size = c.step_size;
  b.inner_steps = c.inner_steps;
  b.epoch_cap = c.epoch_cap;
  b.output = c.output;
  b.seed = seed;
  return b;
}

SolveResult solve_joint(const SiState& state, const CcaDataset& ds, const SiConfig& config, const SiSolveRule& rule,
                        double mu_hint, std::uint64_t stream) {
  const LeastSquaresProblem::Projection ref{state.xu, state.yv};
  const auto problem = LeastSquaresProblem::joint_shifted(ds, state.lambda, state.u, state.v, mu_hint, &ref);
  const LeastSquaresProblem::Projection start{state.xu_tilde, state.yv_tilde};
  const auto seed = derive_seed(config.seed, static_cast<std::uint64_t>(state.t) + 1, stream);
  SolveResult r = run_inner_solver(config.inner, problem, stack(state.u_tilde, state.v_tilde),
                                   make_budget(config, rule, seed), &start);
  if (r.status == SolveStatus::diverged) throw NumericError("shifted least-squares solve diverged: " + r.diagnostic);
  return r;
}

}  // namespace

SiState si_init(const CcaDataset& ds, const VectorXd& u0, const VectorXd& v0, double lambda) {
  if (u0.size() != ds.dx() || v0.size() != ds.dy()) throw DimensionError("si_init: start vector sizes");
  SiState s;
  s.u_tilde = u0;
  s.v_tilde = v0;
  s.xu_tilde = ds.x().project(u0);
  s.yv_tilde = ds.y().project(v0);
  joint_rescale(s, ds);
  s.u_tilde = s.u;
  s.v_tilde = s.v;
  s.xu_tilde = s.xu;
  s.yv_tilde = s.yv;
  s.lambda = lambda;
  return s;
}

double joint_norm(const SiState& state, const CcaDataset& ds) {
  return quadratic_form_from_projection(state.xu, state.u, ds.gamma_x()) +
         quadratic_form_from_projection(state.yv, state.v, ds.gamma_y());
}

SiState si_power_step(const SiState& state, const CcaDataset& ds, const SiConfig& config, const SiSolveRule& rule,
                      double mu_hint, SolveResult* result) {
  SolveResult r = solve_joint(state, ds, config, rule, mu_hint, 0);
  SiState next = state;
  next.t = state.t + 1;
  next.passes = state.passes + r.passes;
  next.u_tilde = r.w.head(ds.dx());
  next.v_tilde = r.w.tail(ds.dy());
  next.xu_tilde = ds.x().project(next.u_tilde);
  next.yv_tilde = ds.y().project(next.v_tilde);
  joint_rescale(next, ds);
  if (result) *result = std::move(r);
  return next;
}

DeltaEstimate estimate_delta_s(const SiState& state, const CcaDataset& ds, const SiConfig& config,
                               const SiSolveRule& rule, double epsilon_tilde, double delta_tilde, double mu_hint) {
  if (!(delta_tilde > 0.0)) throw ConfigError("estimate_delta_s: Δ̃ must be positive");
  SolveResult r = solve_joint(state, ds, config, rule, mu_hint, 1);
  DeltaEstimate e;
  e.passes = r.passes;
  e.w_s = std::move(r.w);
  const auto wu = e.w_s.head(ds.dx());
  const auto wv = e.w_s.tail(ds.dy());
  const double inv_n = 1.0 / static_cast<double>(ds.n());
  const VectorXd xw = ds.x().project(wu);
  const VectorXd yw = ds.y().project(wv);
  const double quad = state.xu.dot(xw) * inv_n + ds.gamma_x() * state.u.dot(wu) + state.yv.dot(yw) * inv_n +
                      ds.gamma_y() * state.v.dot(wv);
  e.rayleigh = 0.5 * quad;
  // A tiny ε̃ is only met up to the solver's measurement floor; correct for
  // the accuracy actually certified.
  const double eps = std::isfinite(r.threshold) ? std::max(epsilon_tilde, r.threshold) : epsilon_tilde;
  const double denominator = e.rayleigh - 2.0 * std::sqrt(std::max(eps, 0.0) / delta_tilde);
  if (!(denominator > 0.0))
    throw ConfigError("Δ_s estimate has a nonpositive denominator; ε̃ is too large for Δ̃");
  e.delta_s = 0.5 / denominator;
  return e;
}

FinalPair final_normalization(const VectorXd& u, const VectorXd& v, const CcaDataset& ds) {
  return {sigma_normalize(CovarianceOperator::xx(ds), u).w, sigma_normalize(CovarianceOperator::yy(ds), v).w};
}

SiPhaseOneResult run_si_phase1(const CcaDataset& ds, const SiConfig& config, const ReferenceSolution* reference,
                               const std::string& label) {
  if (!(config.delta_tilde > 0.0)) throw ConfigError("SI needs a positive gap estimate delta_tilde");
  if (!(config.eta > 0.0) || !(config.eta < 1.0)) throw ConfigError("eta must lie in (0, 1)");
  if (config.shrink_cap < 1) throw ConfigError("shrink_cap must be >= 1");
  if (config.run_to_budget && !std::isfinite(config.passes_max))
    throw ConfigError("run_to_budget needs a finite pass budget");
  if (config.mode == SiMode::practical && (config.shrink_epochs < 1 || config.fixed_epochs < 1))
    throw ConfigError("practical SI needs at least one epoch per solve");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  VectorXd u0, v0;
  {
    InitialVectors init;
    if (!config.u0 || !config.v0) init = random_initialization(ds, config.seed);
    u0 = config.u0 ? *config.u0 : init.u;
    v0 = config.v0 ? *config.v0 : init.v;
  }

  SiPhaseOneResult out;
  SiState& st = out.state;
  st = si_init(ds, u0, v0, 1.0 + config.delta_tilde);
  const bool theorem = config.mode == SiMode::theorem;
  out.mu_tilde = config.mu_tilde;
  if (!(out.mu_tilde > 0.0)) {
    if (theorem) {
      if (!reference) throw ConfigError("theorem-mode SI needs μ̃ or a reference solution");
      out.mu_tilde = joint_alignment(st.u, st.v, *reference);
      if (!(out.mu_tilde > 0.0)) throw NumericError("initial joint alignment is zero; convergence not guaranteed");
    } else {
      out.mu_tilde = 0.05;
    }
  }
  out.parameters = si_theory_parameters(std::min(out.mu_tilde, 1.0), config.eta, config.delta_tilde);
  if (config.m1 > 0) out.parameters.m1 = config.m1;
  if (config.m2 > 0) out.parameters.m2 = config.m2;
  if (config.epsilon_tilde > 0.0)
    out.parameters.epsilon_tilde = config.epsilon_tilde;
  else if (!theorem)
    out.parameters.epsilon_tilde = 0.0;
  out.exit_threshold = config.exit_threshold > 0.0 ? config.exit_threshold : config.delta_tilde;

  SiSolveRule shrink_rule, fixed_rule;
  if (theorem) {
    shrink_rule = fixed_rule = {BudgetMode::epsilon_target, out.parameters.epsilon_tilde, 0};
  } else {
    shrink_rule = {BudgetMode::fixed_epochs, 0.0, config.shrink_epochs};
    fixed_rule = {BudgetMode::fixed_epochs, 0.0, config.fixed_epochs};
  }
  // λ − ρ1 stays above a quarter of the smaller of Δ̃ and the exit value.
  const SpectralInfo& spec = ds.spectral_info();
  const double mu_hint =
      0.25 * std::min(config.delta_tilde, out.exit_threshold) * std::min(spec.sigma_min_x, spec.sigma_min_y);

  auto record = [&] {
    TraceRow row = make_row(label, st.t, st.passes, ds, st.u, st.v, reference, true);
    row.wall_time = elapsed();
    out.trace.rows.push_back(std::move(row));
    out.steps.push_back({st.t, st.s, st.lambda, joint_norm(st, ds), st.passes, st.phase});
  };
  record();
  auto budget_left = [&] { return st.passes < config.passes_max; };

  try {
    bool exited = false;
    while (!exited && budget_left()) {
      if (st.s >= config.shrink_cap) {
        out.trace.status = "shrink_cap";
        out.trace.message = "shift did not settle within " + std::to_string(config.shrink_cap) + " shrinks";
        break;
      }
      for (int j = 0; j < out.parameters.m1 && budget_left(); ++j) {
        st = si_power_step(st, ds, config, shrink_rule, mu_hint);
        record();
      }
      if (!budget_left()) break;
      const DeltaEstimate est =
          estimate_delta_s(st, ds, config, shrink_rule, out.parameters.epsilon_tilde, config.delta_tilde, mu_hint);
      st.passes += est.passes;
      const double lambda_prev = st.lambda;
      st.lambda = lambda_prev - 0.5 * est.delta_s;
      ++st.s;
      out.shrinks.push_back({st.s, lambda_prev, est.delta_s, st.lambda});
      if (!(st.lambda > 0.0)) throw NumericError("shift estimate collapsed to a nonpositive value");
      exited = est.delta_s <= out.exit_threshold;
    }
    out.lambda_f = st.lambda;
    if (exited) {
      st.phase = SiPhase::fixed;
      for (int j = 0; (j < out.parameters.m2 || config.run_to_budget) && budget_left(); ++j) {
        st = si_power_step(st, ds, config, fixed_rule, mu_hint);
        record();
      }
      st.phase = SiPhase::done;
    }
  } catch (const NumericError& e) {
    out.trace.status = "numeric_error";
    out.trace.message = e.what();
  }
  out.lambda_f = st.lambda;
  return out;
}

SiRun run_si(const CcaDataset& ds, const SiConfig& config, const ReferenceSolution* reference,
             const std::string& label) {
  SiRun run;
  run.phase1 = run_si_phase1(ds, config, reference, label);
  run.solution = final_normalization(run.phase1.state.u, run.phase1.state.v, ds);
  return run;
}

}  // namespace stocca
