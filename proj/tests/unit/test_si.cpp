#include <doctest.h>

#include <Eigen/LU>
#include <random>

#include "stocca/errors.hpp"
#include "stocca/metrics.hpp"
#include "stocca/si.hpp"
#include "test_support.hpp"

using namespace stocca;
namespace ts = testing_support;

namespace {

SiConfig exact_config(double delta_tilde) {
  SiConfig c;
  c.mode = SiMode::theorem;
  c.inner = InnerSolver::exact;
  c.delta_tilde = delta_tilde;
  return c;
}

const SiSolveRule kExactRule{BudgetMode::epsilon_target, 1e-30, 0};

// Whitened concatenation [Σxx^{1/2}u; Σyy^{1/2}v].
VectorXd whiten(const ReferenceSolution& ref, const VectorXd& u, const VectorXd& v) {
  VectorXd r(u.size() + v.size());
  r << ref.root_x * u, ref.root_y * v;
  return r;
}

MatrixXd shifted_inverse(const ReferenceSolution& ref, const DenseBlocks& b, double lambda) {
  const MatrixXd t = ref.whiten_x * b.sxy * ref.whiten_y;
  const Index dx = t.rows(), dy = t.cols();
  MatrixXd c = MatrixXd::Zero(dx + dy, dx + dy);
  c.topRightCorner(dx, dy) = t;
  c.bottomLeftCorner(dy, dx) = t.transpose();
  return (lambda * MatrixXd::Identity(dx + dy, dx + dy) - c).inverse();
}

}  // namespace

TEST_CASE("SI parameter formulas") {
  const SiTheoryParameters p = si_theory_parameters(1.0, 1.0 - 1e-12, 0.5);
  CHECK(p.m1 == 23);
  CHECK(p.m2 == 7);
  CHECK(si_theory_parameters(1.0, 0.1, 0.5).m1 == 23);

  // Δ̃ = 18 removes the powers.
  for (double eta : {0.5, 0.1}) {
    const SiTheoryParameters u = si_theory_parameters_uncapped(1.0, eta, 18.0);
    CHECK(u.epsilon_tilde == doctest::Approx(std::min(1.0 / 3084.0, std::pow(eta, 4) / std::pow(4.0, 10))));
  }

  const SiTheoryParameters c = si_theory_parameters(0.5, 0.1, 0.4);
  const SiTheoryParameters uc = si_theory_parameters_uncapped(0.5, 0.1, 0.4);
  CHECK(c.m1 == static_cast<int>(std::ceil(8.0 * std::log(32.0))));
  CHECK(c.m2 == static_cast<int>(std::ceil(1.25 * std::log(128.0 / (0.5 * 0.01)))));
  CHECK(c.epsilon_tilde <= 0.4 / 256.0);
  CHECK(c.epsilon_tilde == std::min(uc.epsilon_tilde, 0.4 / 256.0));
  CHECK_THROWS_AS(si_theory_parameters(0.0, 0.1, 0.1), ConfigError);
}

TEST_CASE("Δ_s at the exact top pair is half the distance to ρ1") {
  const CcaDataset ds = ts::random_dataset(6, 5, 120, 1e-2, 1e-2, 8);
  const ReferenceSolution ref = exact_solution(ds);
  for (double lambda : {1.05, 1.3, ref.rho1() + 0.01}) {
    SiConfig c = exact_config(0.2);
    const SiState s = si_init(ds, ref.u_star, ref.v_star, lambda);
    CHECK(joint_norm(s, ds) == doctest::Approx(2.0).epsilon(1e-12));
    const DeltaEstimate e = estimate_delta_s(s, ds, c, kExactRule, 0.0, 0.2, 0.0);
    CHECK(e.rayleigh == doctest::Approx(1.0 / (lambda - ref.rho1())).epsilon(1e-8));
    CHECK(e.delta_s == doctest::Approx(0.5 * (lambda - ref.rho1())).epsilon(1e-8));

    // A correction of half the Rayleigh term doubles the estimate.
    const double eps = 0.2 * std::pow(e.rayleigh / 4.0, 2);
    const DeltaEstimate e2 = estimate_delta_s(s, ds, c, kExactRule, eps, 0.2, 0.0);
    CHECK(e2.delta_s == doctest::Approx(2.0 * e.delta_s).epsilon(1e-10));
    CHECK_THROWS_AS(estimate_delta_s(s, ds, c, kExactRule, 4.0 * eps, 0.2, 0.0), ConfigError);
  }
}

TEST_CASE("an exact power step equals dense shifted-inverse iteration on the whitened vector") {
  const CcaDataset ds = ts::planted(5, 4, 100, {0.8, 0.5, 0.2}, 1e-3, 3, 0.05, 1.0);
  const ReferenceSolution ref = exact_solution(ds);
  const InitialVectors init = random_initialization(ds, 11);
  SiConfig c = exact_config(0.3);
  SiState s = si_init(ds, init.u, init.v, 0.95);
  for (int t = 0; t < 5; ++t) {
    const VectorXd r = whiten(ref, s.u, s.v);
    VectorXd expect = shifted_inverse(ref, ds.dense_blocks(), s.lambda) * r;
    expect *= std::sqrt(2.0) / expect.norm();
    s = si_power_step(s, ds, c, kExactRule, 0.0);
    CHECK((whiten(ref, s.u, s.v) - expect).norm() <= 1e-8);
    CHECK(joint_norm(s, ds) == doctest::Approx(2.0).epsilon(1e-10));
  }
}

TEST_CASE("the top pair is a fixed point of the power step") {
  const CcaDataset ds = ts::random_dataset(5, 5, 90, 0.05, 0.05, 15);
  const ReferenceSolution ref = exact_solution(ds);
  SiState s = si_init(ds, ref.u_star, ref.v_star, 1.1);
  s = si_power_step(s, ds, exact_config(0.2), kExactRule, 0.0);
  CHECK((s.u - ref.u_star).norm() <= 1e-8 * ref.u_star.norm());
  CHECK((s.v - ref.v_star).norm() <= 1e-8 * ref.v_star.norm());
  CHECK(joint_norm(s, ds) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("identity covariances: one exact solve applies (λI − C)⁻¹") {
  const CcaDataset ds = ts::planted(3, 3, 40, {0.7, 0.4, 0.1}, 0.0, 4, 1.0, 1.0);
  const ReferenceSolution ref = exact_solution(ds);
  std::mt19937_64 rng(2);
  const VectorXd u = ts::gaussian_vector(3, rng), v = ts::gaussian_vector(3, rng);
  SiState s = si_init(ds, u, v, 0.9);
  const MatrixXd m = shifted_inverse(ref, ds.dense_blocks(), 0.9);
  VectorXd rhs(6);
  rhs << s.u, s.v;
  SolveResult raw;
  si_power_step(s, ds, exact_config(0.3), kExactRule, 0.0, &raw);
  CHECK((raw.w - m * rhs).norm() <= 1e-10 * (m * rhs).norm());
}

TEST_CASE("shift brackets with Δ̃ = Δ on planted instances") {
  for (int k = 0; k < 10; ++k) {
    const double rho2 = 0.75 - 0.03 * k;
    const CcaDataset ds = ts::planted(5, 5, 150, {0.9, rho2, 0.3}, 1e-3, 900 + k, 0.1, 1.0);
    const ReferenceSolution ref = exact_solution(ds);
    SiConfig c;
    c.mode = SiMode::theorem;
    c.inner = InnerSolver::svrg;
    c.delta_tilde = ref.gap;
    c.eta = 0.1;
    c.seed = 50 + k;
    const SiPhaseOneResult r = run_si_phase1(ds, c, &ref);
    CHECK(r.trace.status == "ok");
    REQUIRE(!r.shrinks.empty());
    const double rho1 = ref.rho1();
    for (const ShrinkRecord& s : r.shrinks) {
      CHECK(s.delta_s >= 0.5 * (s.lambda_prev - rho1) - 1e-9);
      CHECK(s.delta_s <= s.lambda_prev - rho1 + 1e-9);
      CHECK(s.lambda < s.lambda_prev);
      CHECK(s.lambda > rho1);
      CHECK(s.lambda - rho1 <= 0.75 * (s.lambda_prev - rho1) + 1e-12);
    }
    CHECK(r.lambda_f >= rho1 + ref.gap / 4.0 - 1e-12);
    CHECK(r.lambda_f <= rho1 + 1.5 * ref.gap + 1e-12);
    const double bound = std::ceil(std::log((1.0 + ref.gap - rho1) / ref.gap) / std::log(4.0 / 3.0)) + 1.0;
    CHECK(static_cast<double>(r.shrinks.size()) <= bound);

    // (λ+1)·max‖·‖²/((λ−ρ1)·min σmin) ≤ 9κ̃/Δ along the whole path.
    const ConditionNumbers kn = condition_numbers(ds, ref);
    for (const SiStepRecord& st : r.steps) {
      const double proxy = (st.lambda + 1.0) * kn.kappa_tilde / (st.lambda - rho1);
      CHECK(proxy <= 9.0 / ref.gap * kn.kappa_tilde);
    }
  }
}

TEST_CASE("theory-mode SI meets the alignment and objective targets") {
  for (int k = 0; k < 3; ++k) {
    const CcaDataset ds = ts::planted(6, 5, 200, {0.85, 0.6, 0.2}, 1e-3, 70 + k, 0.05, 1.0);
    const ReferenceSolution ref = exact_solution(ds);
    SiConfig c;
    c.mode = SiMode::theorem;
    c.inner = InnerSolver::svrg;
    c.delta_tilde = ref.gap;
    c.eta = 0.1;
    c.seed = k;
    const SiRun run = run_si(ds, c, &ref);
    CHECK(run.phase1.state.phase == SiPhase::done);
    CHECK(joint_alignment(run.phase1.state.u, run.phase1.state.v, ref) >= 1.0 - 0.01 / 64.0);
    const MetricReport m = evaluate_metrics(ds, run.solution.u, run.solution.v, ref);
    CHECK(std::abs(m.constraint_u - 1.0) <= 1e-10);
    CHECK(std::abs(m.constraint_v - 1.0) <= 1e-10);
    CHECK(m.min_alignment() >= 0.9);
    CHECK(m.objective >= ref.rho1() * 0.8);
  }
}

TEST_CASE("joint normalisation holds at every phase-one step") {
  const CcaDataset ds = ts::random_dataset(8, 7, 250, 1e-3, 1e-3, 19);
  const ReferenceSolution ref = exact_solution(ds);
  for (InnerSolver inner : {InnerSolver::svrg, InnerSolver::asvrg, InnerSolver::agd}) {
    SiConfig c;
    c.inner = inner;
    c.delta_tilde = ref.gap;
    c.exit_threshold = 0.06;
    c.run_to_budget = true;
    c.passes_max = 60;
    c.m1 = 2;
    c.seed = 3;
    const SiPhaseOneResult r = run_si_phase1(ds, c, &ref);
    for (const SiStepRecord& s : r.steps) CHECK(std::abs(s.joint_norm - 2.0) <= 1e-8);
    for (std::size_t t = 1; t < r.trace.rows.size(); ++t) CHECK(r.trace.rows[t].passes >= r.trace.rows[t - 1].passes);
  }
}

TEST_CASE("practical SI converges on a planted instance") {
  const CcaDataset ds = ts::planted(10, 10, 2000, {0.9, 0.7, 0.4}, 1e-4, 5, 0.01, 1.0);
  const ReferenceSolution ref = exact_solution(ds);
  SiConfig c;
  c.delta_tilde = ref.gap;
  c.exit_threshold = 0.06;
  c.m1 = 2;
  c.run_to_budget = true;
  c.passes_max = 150;
  c.seed = 1;
  const SiRun run = run_si(ds, c, &ref);
  CHECK(run.phase1.trace.status == "ok");
  CHECK(run.phase1.trace.rows.back().suboptimality <= 1e-8);
  CHECK(run.phase1.lambda_f > ref.rho1());
}

TEST_CASE("final normalisation") {
  const CcaDataset ds = ts::random_dataset(4, 3, 60, 0.1, 0.1, 23);
  const ReferenceSolution ref = exact_solution(ds);
  const FinalPair same = final_normalization(ref.u_star, ref.v_star, ds);
  CHECK((same.u - ref.u_star).norm() <= 1e-12);
  std::mt19937_64 rng(4);
  const VectorXd u = ts::gaussian_vector(4, rng), v = ts::gaussian_vector(3, rng);
  const FinalPair a = final_normalization(u, v, ds);
  const FinalPair b = final_normalization(7.0 * u, v, ds);
  CHECK((a.u - b.u).norm() <= 1e-14);
  CHECK_THROWS_AS(final_normalization(VectorXd::Zero(4), v, ds), NumericError);
}

TEST_CASE("SI config validation") {
  const CcaDataset ds = ts::random_dataset(3, 3, 20, 0.1, 0.1, 1);
  SiConfig c;
  CHECK_THROWS_AS(run_si(ds, c), ConfigError);  // no Δ̃
  c.delta_tilde = 0.1;
  c.run_to_budget = true;
  CHECK_THROWS_AS(run_si(ds, c), ConfigError);  // unbounded
  SiConfig t;
  t.mode = SiMode::theorem;
  t.delta_tilde = 0.1;
  CHECK_THROWS_AS(run_si(ds, t), ConfigError);  // theorem mode without μ̃ or reference
}
