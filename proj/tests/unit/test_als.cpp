#include <doctest.h>

#include <random>

#include "stocca/als.hpp"
#include "stocca/baselines.hpp"
#include "stocca/errors.hpp"
#include "test_support.hpp"

using namespace stocca;
namespace ts = testing_support;

namespace {

AlsConfig exact_inner(int steps, std::uint64_t seed) {
  AlsConfig c;
  c.inner = InnerSolver::exact;
  c.epsilon_mode = EpsilonMode::fixed;
  c.epsilon = 1e-30;
  c.steps = steps;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("ALS schedule examples") {
  const AlsSchedule s = als_theory_schedule(0.01, 0.9, 0.5, 0.5, 0.5);
  CHECK(s.steps == 9);
  // (1e-4·0.25/128)·(2.6/(3.6⁹ − 1))², evaluated by hand.
  CHECK(s.epsilon == doctest::Approx(1.2800893e-16).epsilon(1e-7));

  // μ = 2/η makes the logarithm vanish; at least one step remains.
  CHECK(als_theory_schedule(0.5, 0.9, 0.5, 0.5, 4.0).steps == 1);
  CHECK(als_theory_schedule(1.0, 0.9, 0.5, 0.5, 2.0).steps == 1);

  // Rank one: 2ρ1/ρr = 2.
  const double eta = 0.1, rho = 0.6;
  const AlsSchedule r1 = als_theory_schedule(eta, rho, 0.0, rho, 0.3);
  CHECK(r1.steps == static_cast<int>(std::ceil(std::log(2.0 / (0.3 * eta)))));
  const double denom = std::pow(2.0, r1.steps) - 1.0;
  CHECK(r1.epsilon == doctest::Approx(eta * eta * rho * rho / 128.0 / (denom * denom)).epsilon(1e-12));

  CHECK_THROWS_AS(als_theory_schedule(0.1, 0.5, 0.5, 0.5, 0.5), ConfigError);
}

TEST_CASE("ALS with the exact inner solver reproduces exact ALS") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const CcaDataset ds = ts::random_dataset(8, 6, 150, 1e-2, 1e-2, 70 + seed);
    const ReferenceSolution ref = exact_solution(ds);
    const InitialVectors init = random_initialization(ds, seed);
    AlsConfig c = exact_inner(12, seed);
    c.u0 = init.u;
    c.v0 = init.v;
    const AlsRun run = run_als(ds, c, &ref);
    const ExactAlsRun exact = run_exact_als(ds, init.u, init.v, 12, &ref);
    REQUIRE(run.trace.rows.size() == exact.trace.size());
    for (std::size_t t = 0; t < exact.trace.size(); ++t) {
      const TraceRow& a = run.trace.rows[t];
      const MetricReport& b = exact.trace[t];
      CHECK(std::abs(a.objective - b.objective) <= 1e-8);
      CHECK(std::abs(a.align_u - b.align_u) <= 1e-8);
      CHECK(std::abs(a.align_v - b.align_v) <= 1e-8);
      CHECK(std::abs(a.constraint_u - b.constraint_u) <= 1e-8);
      CHECK(std::abs(a.constraint_v - b.constraint_v) <= 1e-8);
    }
  }
}

TEST_CASE("ALS with a single GD step per view is the AppGrad update") {
  const CcaDataset ds = ts::random_dataset(7, 5, 120, 0.0, 0.0, 91);
  const InitialVectors init = random_initialization(ds, 2);
  AlsConfig c;
  c.inner = InnerSolver::gd;
  c.epsilon_mode = EpsilonMode::fixed_epochs;
  c.inner_epochs = 1;
  AlsState a = als_init(ds, init.u, init.v);
  AlsState b = a;
  const AppGradStep xi = auto_appgrad_step(ds);
  for (int t = 0; t < 5; ++t) {
    a = als_outer_step(a, ds, c, 0.0);
    b = appgrad_step(b, ds, xi);
    CHECK((a.u_tilde - b.u_tilde).norm() <= 1e-12 * a.u_tilde.norm());
    CHECK((a.v_tilde - b.v_tilde).norm() <= 1e-12 * a.v_tilde.norm());
    CHECK((a.u - b.u).norm() <= 1e-12 * a.u.norm());
    CHECK(a.passes == b.passes);
  }
}

TEST_CASE("warm-start suboptimality stays below ½(√(2ε) + 2)²") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const CcaDataset ds = ts::random_dataset(6, 5, 100, 1e-2, 1e-2, 200 + seed);
    const double eps = 1e-6;
    AlsConfig c;
    c.inner = InnerSolver::svrg;
    c.epsilon_mode = EpsilonMode::fixed;
    c.epsilon = eps;
    c.seed = seed;
    AlsState s = als_init(ds, random_initialization(ds, seed).u, random_initialization(ds, seed).v);
    CHECK(warm_start_gap(s, ds) <= 2.0 + 1e-12);
    const double bound = 0.5 * std::pow(std::sqrt(2.0 * eps) + 2.0, 2);
    for (int t = 0; t < 8; ++t) {
      s = als_outer_step(s, ds, c, eps);
      CHECK(warm_start_gap(s, ds) <= bound);
    }
  }
}

TEST_CASE("warm-start gap vanishes at the optimum") {
  const CcaDataset ds = ts::random_dataset(5, 4, 80, 0.1, 0.1, 3);
  const ReferenceSolution ref = exact_solution(ds);
  AlsState s = als_init(ds, ref.u_star, ref.v_star);
  // ũ = ρ1 u* solves f exactly when v = v*.
  s.u_tilde = ref.rho1() * ref.u_star;
  s.v_tilde = ref.rho1() * ref.v_star;
  s.xu_tilde = ds.x().project(s.u_tilde);
  s.yv_tilde = ds.y().project(s.v_tilde);
  CHECK(warm_start_gap(s, ds) <= 1e-20);
}

TEST_CASE("ALS from the optimum stays aligned") {
  const CcaDataset ds = ts::random_dataset(6, 6, 120, 1e-2, 1e-2, 17);
  const ReferenceSolution ref = exact_solution(ds);
  AlsConfig c;
  c.inner = InnerSolver::svrg;
  c.epsilon_mode = EpsilonMode::fixed;
  c.epsilon = 1e-10;
  c.steps = 5;
  c.u0 = ref.u_star;
  c.v0 = ref.v_star;
  const AlsRun run = run_als(ds, c, &ref);
  for (const TraceRow& r : run.trace.rows) CHECK(std::min(r.align_u, r.align_v) >= 1.0 - 1e-4);
}

TEST_CASE("theory-mode ALS with SVRG reaches the alignment target") {
  const CcaDataset ds = ts::planted(5, 5, 300, {0.8, 0.5, 0.2}, 1e-3, 5, 0.1, 1.0);
  const ReferenceSolution ref = exact_solution(ds);
  CHECK(ref.gap == doctest::Approx(0.3).epsilon(1e-10));
  AlsConfig c;
  c.inner = InnerSolver::svrg;
  c.epsilon_mode = EpsilonMode::theorem;
  c.eta = 0.05;
  c.seed = 9;
  const AlsRun run = run_als(ds, c, &ref);
  CHECK(run.trace.status == "ok");
  CHECK(run.state.t == run.schedule.steps);
  const TraceRow& last = run.trace.rows.back();
  CHECK(std::min(last.align_u, last.align_v) >= 0.95);
  CHECK(last.objective >= ref.rho1() * (1.0 - 2.0 * 0.05));
}

TEST_CASE("theory-mode ALS on planted instances for two accuracy targets") {
  for (int k = 0; k < 10; ++k) {
    const CcaDataset ds = ts::planted(4 + k % 3, 5, 150, {0.9, 0.6 - 0.02 * k, 0.1}, 1e-3, 40 + k, 0.05, 1.0);
    const ReferenceSolution ref = exact_solution(ds);
    for (double eta : {0.1, 0.02}) {
      AlsConfig c;
      c.inner = InnerSolver::svrg;
      c.epsilon_mode = EpsilonMode::theorem;
      c.eta = eta;
      c.seed = 100 + k;
      const AlsRun run = run_als(ds, c, &ref);
      const TraceRow& last = run.trace.rows.back();
      CHECK(std::min(last.align_u, last.align_v) >= 1.0 - eta);
    }
  }
}

TEST_CASE("a tight fixed ε drives the suboptimality down") {
  const CcaDataset ds = ts::planted(8, 6, 200, {0.9, 0.6, 0.3}, 1e-3, 6, 0.05, 1.0);
  const ReferenceSolution ref = exact_solution(ds);
  AlsConfig c;
  c.inner = InnerSolver::svrg;
  c.epsilon_mode = EpsilonMode::fixed;
  c.epsilon = 1e-12;
  c.steps = 60;
  c.seed = 1;
  const AlsRun run = run_als(ds, c, &ref);
  CHECK(run.trace.rows.back().suboptimality <= 1e-6 * ref.rho1());
  CHECK(run.trace.rows.back().suboptimality >= -1e-10);
}

TEST_CASE("per-view constraints hold after every outer step for every inner solver") {
  const CcaDataset ds = ts::random_dataset(10, 8, 300, 1e-3, 1e-3, 12);
  const ReferenceSolution ref = exact_solution(ds);
  for (InnerSolver s : {InnerSolver::gd, InnerSolver::agd, InnerSolver::svrg, InnerSolver::asvrg}) {
    AlsConfig c;
    c.inner = s;
    c.epsilon_mode = EpsilonMode::fixed_epochs;
    c.inner_epochs = 2;
    c.steps = 15;
    c.seed = 4;
    const AlsRun run = run_als(ds, c, &ref);
    for (const TraceRow& r : run.trace.rows) {
      CHECK(std::abs(r.constraint_u - 1.0) <= 1e-8);
      CHECK(std::abs(r.constraint_v - 1.0) <= 1e-8);
    }
    for (std::size_t t = 1; t < run.trace.rows.size(); ++t)
      CHECK(run.trace.rows[t].passes >= run.trace.rows[t - 1].passes);
  }
}

TEST_CASE("zero outer steps return the normalised start") {
  const CcaDataset ds = ts::random_dataset(4, 4, 50, 0.1, 0.1, 2);
  AlsConfig c;
  c.steps = 0;
  c.u0 = VectorXd::Ones(4);
  c.v0 = VectorXd::Ones(4);
  const AlsRun run = run_als(ds, c);
  const AlsState init = als_init(ds, *c.u0, *c.v0);
  CHECK(run.trace.rows.size() == 1);
  CHECK(run.state.t == 0);
  CHECK((run.state.u - init.u).norm() == 0.0);
  CHECK((run.state.v - init.v).norm() == 0.0);
  CHECK(run.state.passes == 0.0);
}

TEST_CASE("ALS pass accounting averages the two views") {
  const CcaDataset ds = ts::random_dataset(4, 4, 50, 0.1, 0.1, 7);
  AlsConfig c;
  c.inner = InnerSolver::svrg;
  c.epsilon_mode = EpsilonMode::fixed_epochs;
  c.inner_epochs = 3;
  c.steps = 4;
  const AlsRun run = run_als(ds, c);
  for (std::size_t t = 0; t < run.trace.rows.size(); ++t) CHECK(run.trace.rows[t].passes == 6.0 * t);
}

TEST_CASE("config validation") {
  const CcaDataset ds = ts::random_dataset(3, 3, 20, 0.1, 0.1, 1);
  AlsConfig c;
  c.eta = 1.5;
  c.steps = 1;
  CHECK_THROWS_AS(run_als(ds, c), ConfigError);
  AlsConfig t;
  t.epsilon_mode = EpsilonMode::theorem;
  CHECK_THROWS_AS(run_als(ds, t), ConfigError);
  AlsConfig open;
  CHECK_THROWS_AS(run_als(ds, open), ConfigError);  // neither steps nor a pass budget
  CHECK_THROWS_AS(parse_inner_solver("newton"), ConfigError);
}
