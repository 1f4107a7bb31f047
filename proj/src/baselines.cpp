#include "stocca/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "stocca/covariance.hpp"
#include "stocca/errors.hpp"

namespace stocca {

AppGradStep auto_appgrad_step(const CcaDataset& ds) {
  const SpectralInfo& s = ds.spectral_info();
  if (!(s.sigma_max_x > 0.0) || !(s.sigma_max_y > 0.0)) throw NumericError("zero covariance; no step size");
  return {0.5 / s.sigma_max_x, 0.5 / s.sigma_max_y};
}

AlsState appgrad_step(const AlsState& state, const CcaDataset& ds, const AppGradStep& xi) {
  const auto f = LeastSquaresProblem::for_x_view(ds, state.v, &state.yv);
  const auto g = LeastSquaresProblem::for_y_view(ds, state.u, &state.xu);
  // Same sign-matched start as als_outer_step.
  const double sf = relative_sign(state.xu_tilde, state.yv);
  const double sg = relative_sign(state.yv_tilde, state.xu);
  const VectorXd gu = f.gradient(sf * state.u_tilde, {sf * state.xu_tilde, {}});
  const VectorXd gv = g.gradient(sg * state.v_tilde, {sg * state.yv_tilde, {}});

  AlsState next;
  next.t = state.t + 1;
  next.passes = state.passes + 1.0;
  next.u_tilde = sf * state.u_tilde;
  next.v_tilde = sg * state.v_tilde;
  const double step_x = 2.0 * xi.xi_x;
  const double step_y = 2.0 * xi.xi_y;
  next.u_tilde.noalias() -= step_x * gu;
  next.v_tilde.noalias() -= step_y * gv;
  next.xu_tilde = ds.x().project(next.u_tilde);
  next.yv_tilde = ds.y().project(next.v_tilde);
  const Normalized nu = sigma_normalize(next.u_tilde, next.xu_tilde, ds.gamma_x());
  const Normalized nv = sigma_normalize(next.v_tilde, next.yv_tilde, ds.gamma_y());
  next.u = nu.w;
  next.v = nv.w;
  next.xu = nu.projection;
  next.yv = nv.projection;
  return next;
}

MinibatchSampler::MinibatchSampler(Index n, Index batch, std::uint64_t seed)
    : perm_(static_cast<std::size_t>(n)), batch_(static_cast<std::size_t>(batch)), pos_(n), rng_(seed) {
  if (batch < 1 || batch > n) throw ConfigError("minibatch size must lie in [1, N]");
  std::iota(perm_.begin(), perm_.end(), Index{0});
}

const std::vector<Index>& MinibatchSampler::next() {
  const Index n = static_cast<Index>(perm_.size());
  const Index b = static_cast<Index>(batch_.size());
  if (pos_ + b > n) {
    std::shuffle(perm_.begin(), perm_.end(), rng_);
    pos_ = 0;
  }
  std::copy(perm_.begin() + pos_, perm_.begin() + pos_ + b, batch_.begin());
  pos_ += b;
  return batch_;
}

namespace {

// ũ − step·(A_B(A_Bᵀũ − B_Bᵀpartner)/b + γũ)
VectorXd minibatch_update(const DataMatrix& a, const DataMatrix& other, double gamma, const VectorXd& w_tilde,
                          const VectorXd& partner, const std::vector<Index>& batch, double step) {
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  VectorXd grad = gamma * w_tilde;
  for (Index i : batch) a.col_axpy(i, (a.col_dot(i, w_tilde) - other.col_dot(i, partner)) * inv_b, grad);
  return w_tilde - step * grad;
}

// Sign of Σ_B (a_iᵀw)(b_iᵀpartner), the minibatch stand-in for relative_sign.
double minibatch_sign(const DataMatrix& a, const DataMatrix& other, const VectorXd& w, const VectorXd& partner,
                      const std::vector<Index>& batch) {
  double s = 0.0;
  for (Index i : batch) s += a.col_dot(i, w) * other.col_dot(i, partner);
  return s < 0.0 ? -1.0 : 1.0;
}

double minibatch_norm(const DataMatrix& a, double gamma, const VectorXd& w, const std::vector<Index>& batch) {
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double q = gamma * w.squaredNorm();
  for (Index i : batch) {
    const double p = a.col_dot(i, w);
    q += p * p * inv_b;
  }
  if (!(q > 0.0) || !std::isfinite(q)) throw NumericError("minibatch normalisation hit a zero Σ-norm");
  return q;
}

}  // namespace

AlsState s_appgrad_step(const AlsState& state, const CcaDataset& ds, const AppGradStep& xi,
                        MinibatchSampler& sampler, Index batch_size) {
  if (batch_size == ds.n()) return appgrad_step(state, ds, xi);
  const std::vector<Index>& batch = sampler.next();
  AlsState next;
  next.t = state.t + 1;
  next.passes = state.passes + static_cast<double>(batch.size()) / static_cast<double>(ds.n());
  const double sf = minibatch_sign(ds.x(), ds.y(), state.u_tilde, state.v, batch);
  const double sg = minibatch_sign(ds.y(), ds.x(), state.v_tilde, state.u, batch);
  next.u_tilde = minibatch_update(ds.x(), ds.y(), ds.gamma_x(), sf * state.u_tilde, state.v, batch, 2.0 * xi.xi_x);
  next.v_tilde = minibatch_update(ds.y(), ds.x(), ds.gamma_y(), sg * state.v_tilde, state.u, batch, 2.0 * xi.xi_y);
  next.u = next.u_tilde / std::sqrt(minibatch_norm(ds.x(), ds.gamma_x(), next.u_tilde, batch));
  next.v = next.v_tilde / std::sqrt(minibatch_norm(ds.y(), ds.gamma_y(), next.v_tilde, batch));
  return next;
}

namespace {

struct StartVectors {
  VectorXd u, v;
};

StartVectors start_vectors(const CcaDataset& ds, std::uint64_t seed, const std::optional<VectorXd>& u0,
                           const std::optional<VectorXd>& v0) {
  if (u0 && v0) return {*u0, *v0};
  InitialVectors init = random_initialization(ds, seed);
  return {u0 ? *u0 : init.u, v0 ? *v0 : init.v};
}

}  // namespace

BaselineRun run_appgrad(const CcaDataset& ds, const AppGradConfig& config, const ReferenceSolution* reference,
                        const std::string& label) {
  if (config.steps < 0 && !std::isfinite(config.passes_max)) throw ConfigError("appgrad needs a step count or pass budget");
  const auto start = std::chrono::steady_clock::now();
  const StartVectors sv = start_vectors(ds, config.seed, config.u0, config.v0);
  const AppGradStep xi = config.step_size > 0.0 ? AppGradStep{config.step_size, config.step_size} : auto_appgrad_step(ds);

  BaselineRun run;
  run.state = als_init(ds, sv.u, sv.v);
  auto record = [&] {
    const double sign = relative_sign(run.state.xu, run.state.yv);
    TraceRow row = make_row(label, run.state.t, run.state.passes, ds, run.state.u, sign * run.state.v, reference);
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    run.trace.rows.push_back(std::move(row));
  };
  record();
  const int steps = config.steps < 0 ? std::numeric_limits<int>::max() : config.steps;
  try {
    for (int t = 0; t < steps && run.state.passes < config.passes_max; ++t) {
      run.state = appgrad_step(run.state, ds, xi);
      record();
    }
  } catch (const NumericError& e) {
    run.trace.status = "numeric_error";
    run.trace.message = e.what();
  }
  return run;
}

BaselineRun run_s_appgrad(const CcaDataset& ds, const MinibatchConfig& mb, double passes_max,
                          const ReferenceSolution* reference, const std::string& label, std::optional<VectorXd> u0,
                          std::optional<VectorXd> v0) {
  if (mb.steps < 1 && !std::isfinite(passes_max)) throw ConfigError("s-appgrad needs a step count or pass budget");
  const auto start = std::chrono::steady_clock::now();
  const StartVectors sv = start_vectors(ds, mb.seed, u0, v0);
  const AppGradStep xi = mb.step_size > 0.0 ? AppGradStep{mb.step_size, mb.step_size} : auto_appgrad_step(ds);
  MinibatchSampler sampler(ds.n(), mb.batch_size, derive_seed(mb.seed, 0, 2));

  BaselineRun run;
  run.state = als_init(ds, sv.u, sv.v);
  // Objective and alignments are measured on the exactly rescaled iterates so
  // they stay comparable with the other solvers; the constraint columns keep
  // the iterate's own (inexact) normalisation.
  auto record = [&] {
    const TraceRow raw = make_row(label, run.state.t, run.state.passes, ds, run.state.u, run.state.v, nullptr);
    const double sign = raw.objective < 0.0 ? -1.0 : 1.0;
    TraceRow row = make_row(label, run.state.t, run.state.passes, ds, run.state.u, sign * run.state.v, reference, true);
    row.constraint_u = raw.constraint_u;
    row.constraint_v = raw.constraint_v;
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    run.trace.rows.push_back(std::move(row));
  };
  record();
  const int steps = mb.steps < 1 ? std::numeric_limits<int>::max() : mb.steps;
  // Recording every minibatch step would swamp the trace; sample about once per pass.
  const int stride = static_cast<int>(std::max<Index>(1, ds.n() / mb.batch_size));
  try {
    for (int t = 0; t < steps && run.state.passes < passes_max; ++t) {
      run.state = s_appgrad_step(run.state, ds, xi, sampler, mb.batch_size);
      if ((t + 1) % stride == 0 || t + 1 == steps) record();
    }
  } catch (const NumericError& e) {
    run.trace.status = "numeric_error";
    run.trace.message = e.what();
  }
  if (run.trace.rows.back().step != run.state.t) record();
  return run;
}

}  // namespace stocca
