#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "pxeig/ekeland.hpp"
#include "support.hpp"

using namespace pxeig;
using pxeig::test::interval_space;

namespace {

struct FixtureRun {
  EnergySetup<double> setup;
  SolverConfig config;
  NodalField<double> start;
};

FixtureRun fixture_run(double fraction, StartMode mode = StartMode::BumpRay) {
  const auto& fc = test::fixture_a_certificate();
  FixtureRun r{test::fixture_a(fraction * fc.cert.lambda_star), SolverConfig{}, {}};
  r.config.rho = fc.cert.rho;
  r.config.start = mode;
  if (mode == StartMode::BumpRay) {
    const auto bump = make_bump(r.setup, default_eps0(r.setup));
    r.start = bump_ray_start(r.setup, bump, r.config);
  } else {
    r.start = random_ball_start(r.setup, r.config);
  }
  return r;
}

void check_trace(const EigenPairReport<double>& rep, const EnergySetup<double>& s) {
  for (std::size_t k = 1; k < rep.trace.size(); ++k) CHECK(rep.trace[k].energy <= rep.trace[k - 1].energy);
  CHECK(rep.norm <= rep.rho + 1e-10);
  CHECK(rep.energy == energy(s, rep.u));
}

}  // namespace

TEST_SUITE("ekeland") {
  TEST_CASE("projection onto the ball") {
    const auto s = test::fixture_a(0.0, 64);
    Rng rng(1);
    const NodalField<double> u = random_smooth_field(*s.space, rng);
    const NodalField<double> big = (2.0 / sobolev_norm(u, s.p, *s.space)) * u;
    const NodalField<double> pr = project_to_ball(big, 0.5, s.p, *s.space);
    CHECK(std::abs(sobolev_norm(pr, s.p, *s.space) - 0.5) <= 1e-10);
    CHECK((pr - 0.25 * big).cwiseAbs().maxCoeff() <= 1e-15);
    const NodalField<double> small = (0.3 / sobolev_norm(u, s.p, *s.space)) * u;
    CHECK(project_to_ball(small, 0.5, s.p, *s.space) == small);
    CHECK(project_to_ball(s.space->zero(), 0.5, s.p, *s.space) == s.space->zero());
    CHECK_THROWS_AS(project_to_ball(small, 0.0, s.p, *s.space), PreconditionError);
  }

  TEST_CASE("solver config checks") {
    SolverConfig c;
    c.tolerance = 0.0;
    CHECK_THROWS_AS(c.check(), PreconditionError);
    c = SolverConfig{};
    c.backtracking = 1.0;
    CHECK_THROWS_AS(c.check(), PreconditionError);
    c = SolverConfig{};
    c.armijo = 0.0;
    CHECK_THROWS_AS(c.check(), PreconditionError);
    CHECK_NOTHROW(SolverConfig{}.check());
  }

  TEST_CASE("linear case below the first eigenvalue has no nontrivial minimizer") {
    const EnergySetup<double> s(interval_space(64), ExponentField::constant(2), ExponentField::constant(2), 5.0);
    SolverConfig c;
    c.rho = 0.5;
    c.start = StartMode::RandomInBall;
    const auto rep = solve(s, c, random_ball_start(s, c));
    CHECK(rep.verdict == Verdict::NoNontrivial);
    for (const auto& r : rep.trace) CHECK(r.energy >= 0.0);
    check_trace(rep, s);
  }

  TEST_CASE("zero start is a trivial critical point") {
    const auto s = test::fixture_a(0.05, 64);
    SolverConfig c;
    c.rho = 0.5;
    const auto rep = solve(s, c, s.space->zero());
    CHECK(rep.verdict == Verdict::TrivialCritical);
    CHECK(rep.iterations == 0);
    CHECK(rep.energy == 0.0);
    CHECK(rep.residual_norm == 0.0);
    CHECK(std::string(to_string(rep.verdict)) == "TRIVIAL-CRITICAL");
  }

  TEST_CASE("discrete linear eigenpair is accepted") {
    const int n = 256;
    const double h = 1.0 / n;
    const int m = n - 1;
    // Closed-form P1 stiffness and consistent mass on a uniform grid.
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m), mass = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      k(i, i) = 2 / h;
      mass(i, i) = 4 * h / 6;
      if (i + 1 < m) {
        k(i, i + 1) = k(i + 1, i) = -1 / h;
        mass(i, i + 1) = mass(i + 1, i) = h / 6;
      }
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, mass);
    REQUIRE(es.info() == Eigen::Success);
    const double lam = es.eigenvalues()(0);
    CHECK(lam == doctest::Approx(test::kP1FirstEigenvalue256).epsilon(1e-10));
    CHECK(std::abs(lam - test::kPiSquared) <= 0.01 * test::kPiSquared);

    const EnergySetup<double> s(interval_space(n), ExponentField::constant(2), ExponentField::constant(2), lam);
    NodalField<double> u = es.eigenvectors().col(0);
    u /= sobolev_norm(u, s.p, *s.space);
    const auto ok = verify_eigenpair(s, u, 1e-8);
    CHECK(ok.pass);
    CHECK(ok.residual <= 1e-8);
    CHECK_FALSE(verify_eigenpair(s.with_lambda(1.01 * lam), u, 1e-8).pass);
    const auto zero = verify_eigenpair(s, s.space->zero(), 1e-8);
    CHECK_FALSE(zero.pass);
    CHECK_FALSE(zero.nontrivial);
  }

  TEST_CASE("fixture solve succeeds") {
    const auto r = fixture_run(0.5);
    CHECK(energy(r.setup, r.start) < 0.0);
    const auto rep = solve(r.setup, r.config, r.start);
    CHECK(rep.verdict == Verdict::Success);
    CHECK(rep.energy < 0.0);
    CHECK(rep.residual_norm <= 1e-6);
    CHECK(rep.interior);
    CHECK(rep.norm <= 0.99 * rep.rho);
    CHECK_FALSE(rep.u.isZero(0));
    check_trace(rep, r.setup);
    const auto v = verify_eigenpair(r.setup, rep.u, 1e-6);
    CHECK(v.pass);
    CHECK(v.nontrivial);
  }

  TEST_CASE("solve is deterministic") {
    const auto r = fixture_run(0.3, StartMode::RandomInBall);
    const auto a = solve(r.setup, r.config, r.start);
    const auto b = solve(r.setup, r.config, r.start);
    CHECK(a.u == b.u);
    CHECK(a.energy == b.energy);
    CHECK(a.iterations == b.iterations);
    CHECK(a.trace.size() == b.trace.size());
    CHECK(a.verdict == Verdict::Success);
  }

  TEST_CASE("lambda sweep") {
    for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      CAPTURE(frac);
      const auto r = fixture_run(frac);
      const auto rep = solve(r.setup, r.config, r.start);
      CHECK(rep.verdict == Verdict::Success);
      check_trace(rep, r.setup);
    }
  }

  TEST_CASE("preconditioners agree on monotonicity and feasibility") {
    auto r = fixture_run(0.5);
    const auto weighted = solve(r.setup, r.config, r.start);
    for (Preconditioner pc : {Preconditioner::Stiffness, Preconditioner::Diagonal}) {
      r.config.preconditioner = pc;
      r.config.max_iterations = 300;
      const auto rep = solve(r.setup, r.config, r.start);
      check_trace(rep, r.setup);
      CHECK(rep.energy < 0.0);
      CHECK(rep.energy >= weighted.energy - 1e-12 * std::abs(weighted.energy));
    }
  }

  TEST_CASE("iteration cap") {
    auto r = fixture_run(0.5);
    r.config.max_iterations = 2;
    const auto rep = solve(r.setup, r.config, r.start);
    CHECK(rep.verdict == Verdict::MaxIterations);
    CHECK(rep.iterations <= 2);
    CHECK(rep.trace.size() <= 3);
  }
}
