// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>

#include "pxeig/geometry.hpp"
#include "support.hpp"

using namespace pxeig;
using pxeig::test::interval_space;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, double time_limit, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit > 0 && secs >= time_limit) {
    o.pass = false;
    o.detail += fmt("; runtime %.2fs exceeds %.0fs", secs, time_limit);
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %d: %s (%s; %.2fs)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

SampledExponent<double> sample(const std::string& src, const FeSpace<double>& space) {
  return ExponentField::parse(src, space.dim()).sample(space);
}

NodalField<double> draw(const FeSpace<double>& space, Rng& rng, int i) {
  return i % 2 ? random_field(space, rng) : random_smooth_field(space, rng);
}

Outcome luxemburg_correctness() {
  const auto space = test::square_space(16);
  Rng rng(101);
  double worst = 0;
  const double exps[] = {1.1, 1.7, 2.0, 3.0, 5.5};
  for (int i = 0; i < 100; ++i) {
    const double c = exps[i % 5];
    const auto e = ExponentField::constant(c).sample(*space);
    const NodalField<double> u = rng.uniform(0.01, 100.0) * draw(*space, rng, i);
    const VectorX<double> v = space->values_at_points(u);
    double s = 0;
    for (Eigen::Index k = 0; k < v.size(); ++k) s += space->weights()(k) * std::pow(std::abs(v(k)), c);
    const double want = std::pow(s, 1 / c);
    worst = std::max(worst, std::abs(luxemburg_norm(u, e, *space) - want) / want);
  }
  const auto line = interval_space(256);
  double worst_const = 0;
  for (const char* src : {"2 + x", "1.5 + 2*x", "3 - 0.5*x", "4"}) {
    const auto e = sample(src, *line);
    const double one = luxemburg_norm<double>([](const auto&) { return 1.0; }, e, *line);
    for (double c : {-5.0, -0.3, 0.02, 1.0, 7.0, 250.0}) {
      const double got = luxemburg_norm<double>([c](const auto&) { return c; }, e, *line);
      worst_const = std::max({worst_const, std::abs(got - std::abs(c) * one), std::abs(got - std::abs(c))});
    }
  }
  return {worst <= 1e-9 && worst_const <= 1e-10,
          fmt("max rel. deviation from classical norm %.2e, constant-function deviation %.2e", worst, worst_const)};
}

Outcome modular_norm_relations() {
  const auto space = interval_space(128);
  const auto e = sample("1.5 + 2*x", *space);
  Rng rng(202);
  int l4 = 0, l5 = 0, l6 = 0;
  for (int i = 0; i < 1000; ++i) {
    const NodalField<double> w = draw(*space, rng, i);
    const double nw = luxemburg_norm(w, e, *space);
    const NodalField<double> u = (rng.uniform(1.0 + 1e-6, 50.0) / nw) * w;
    const double n = luxemburg_norm(u, e, *space), r = modular(u, e, *space);
    if (!(n > 1 && std::pow(n, e.lower) <= r * (1 + 1e-12) && r <= std::pow(n, e.upper) * (1 + 1e-12))) ++l4;
  }
  for (int i = 0; i < 1000; ++i) {
    const NodalField<double> w = draw(*space, rng, i);
    const double nw = luxemburg_norm(w, e, *space);
    const NodalField<double> u = (rng.uniform(1e-3, 1.0 - 1e-6) / nw) * w;
    const double n = luxemburg_norm(u, e, *space), r = modular(u, e, *space);
    if (!(n < 1 && std::pow(n, e.upper) <= r * (1 + 1e-12) && r <= std::pow(n, e.lower) * (1 + 1e-12))) ++l5;
  }
  for (int i = 0; i < 1000; ++i) {
    // u_k = 2^-k w: the norm and the modular must vanish together.
    const NodalField<double> w = std::pow(10.0, rng.uniform(-2, 2)) * draw(*space, rng, i);
    double pn = INFINITY, pr = INFINITY;
    bool ok = true;
    for (int k = 0; k <= 60; k += 4) {
      const NodalField<double> u = std::ldexp(1.0, -k) * w;
      const double n = luxemburg_norm(u, e, *space), r = modular(u, e, *space);
      ok = ok && n < pn && r < pr;
      if (n < 1) ok = ok && r <= std::pow(n, e.lower) * (1 + 1e-12) && std::pow(n, e.upper) <= r * (1 + 1e-12);
      pn = n;
      pr = r;
    }
    ok = ok && pn < 1e-12 && pr < 1e-12;
    if (!ok) ++l6;
  }
  return {l4 == 0 && l5 == 0 && l6 == 0, fmt("violations: norm>1 %d/1000, norm<1 %d/1000, convergence %d/1000", l4, l5, l6)};
}

Outcome holder() {
  const auto space = interval_space(128);
  const auto p = sample("2 + x", *space);
  Rng rng(303);
  int bad = 0;
  double tightest = INFINITY;
  for (int i = 0; i < 1000; ++i) {
    const NodalField<double> u = draw(*space, rng, i), v = draw(*space, rng, i + 1);
    const auto g = holder_gap(u, v, p, *space);
    if (!(g.lhs <= g.rhs)) ++bad;
    tightest = std::min(tightest, g.rhs / g.lhs);
  }
  return {bad == 0, fmt("%d violations in 1000 pairs, smallest rhs/lhs %.4f", bad, tightest)};
}

Outcome lambda_star_formula() {
  const double a = lambda_star(0.5, 3.0, 1.5, 2.0).lambda_star;
  const double b = lambda_star(0.5, 3.0, 1.5, 1.0).lambda_star;
  return {std::abs(a - 1.0 / 32) <= 1e-15 && std::abs(b - 0.0883883) <= 1e-6,
          fmt("lambda*(c1=2) = %.17g, lambda*(c1=1) = %.9f", a, b)};
}

Outcome lemma1() {
  const auto& fc = test::fixture_a_certificate();
  const double lam = fc.cert.lambda_star / 2;
  const auto s = test::fixture_a(lam);
  const double bound = sphere_lower_bound(fc.cert, lam);
  Rng rng(404);
  int bad = 0;
  double worst = INFINITY;
  for (int i = 0; i < 200; ++i) {
    NodalField<double> u = draw(*s.space, rng, i);
    u *= fc.cert.rho / sobolev_norm(u, s.p, *s.space);
    const double margin = energy(s, u) - bound;
    if (!(margin >= -1e-9)) ++bad;
    worst = std::min(worst, margin);
  }
  return {bad == 0, fmt("rho %.4f, bound %.5f, min J - bound %.4g, %d/200 violations", fc.cert.rho, bound, worst, bad)};
}

const BumpSpec<double>& fixture_bump() {
  static const BumpSpec<double> b = [] {
    const auto s = test::fixture_a(0.0);
    return make_bump(s, default_eps0(s));
  }();
  return b;
}

Outcome lemma2() {
  const auto& fc = test::fixture_a_certificate();
  std::string detail;
  bool ok = true;
  for (double frac : {0.1, 0.5, 0.9}) {
    const auto s = test::fixture_a(frac * fc.cert.lambda_star);
    const auto rc = negative_ray_check(s, fixture_bump(), threshold(s, fixture_bump()));
    ok = ok && rc.pass;
    double jmax = -INFINITY;
    for (const auto& smp : rc.samples) jmax = std::max(jmax, smp.value);
    detail += fmt("%s%.1f lambda*: %s, max J %.3g", detail.empty() ? "" : "; ", frac, rc.pass ? "PASS" : "FAIL", jmax);
  }
  return {ok, detail};
}

Outcome eigenpair_sweep() {
  const auto& fc = test::fixture_a_certificate();
  std::string detail;
  bool ok = true;
  for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto s = test::fixture_a(frac * fc.cert.lambda_star);
    SolverConfig c;
    c.rho = fc.cert.rho;
    const auto rep = solve(s, c, bump_ray_start(s, fixture_bump(), c));
    const bool success = rep.verdict == Verdict::Success && rep.energy < 0 && rep.residual_norm <= 1e-6 && rep.interior;
    ok = ok && success;
    detail += fmt("%s%.1f: %s J=%.3g res=%.1e", detail.empty() ? "" : "; ", frac, to_string(rep.verdict),
                  rep.energy, rep.residual_norm);
  }
  return {ok, detail};
}

Outcome corollary() {
  const auto s = test::fixture_a(0.0);
  const auto sw = rayleigh_sweep(s, fixture_bump(), 20);
  bool decreasing = sw.samples.size() == 21;
  for (std::size_t k = 1; k < sw.samples.size(); ++k) decreasing = decreasing && sw.samples[k].value < sw.samples[k - 1].value;
  const double last = sw.samples.back().value;
  bool witnesses = true;
  for (double c : {1e-3, 1.0, 1e3}) {
    const auto w = small_quotient_witness(s, fixture_bump(), c);
    witnesses = witnesses && w.found && c * w.lebesgue_modular >= w.gradient_modular;
  }
  return {decreasing && last < 1e-3 && witnesses,
          fmt("strictly decreasing: %s, R(2^-20 phi) = %.3g, witnesses for C in {1e-3, 1, 1e3}: %s",
              decreasing ? "yes" : "no", last, witnesses ? "yes" : "no")};
}

Outcome unbounded() {
  const auto& fc = test::fixture_a_certificate();
  const auto s = test::fixture_a(0.5 * fc.cert.lambda_star);
  const auto u = unbounded_direction(s, 0.1, 40);
  for (std::size_t k = 0; k < u.trace.size(); ++k) {
    if (u.trace[k].value < -1e3) return {true, fmt("J(2^%zu psi) = %.3g", k, u.trace[k].value)};
  }
  return {false, fmt("J(2^40 psi) = %.3g", u.trace.back().value)};
}

Outcome gradient_consistency() {
  const auto s = test::fixture_a(0.5, 256);
  Rng rng(505);
  double worst = 0;
  for (int i = 0; i < 50; ++i) {
    const NodalField<double> u = draw(*s.space, rng, i);
    NodalField<double> v = random_field(*s.space, rng);
    // Direction on the scale of u so that h is a relative step.
    v *= sobolev_norm(u, s.p, *s.space) / sobolev_norm(v, s.p, *s.space);
    const double h = 1e-5;
    const double fd = (energy(s, NodalField<double>(u + h * v)) - energy(s, NodalField<double>(u - h * v))) / (2 * h);
    const double an = residual(s, u, v);
    worst = std::max(worst, std::abs(fd - an) / std::abs(an));
  }
  return {worst <= 1e-5, fmt("p- = %.2f, max relative error %.2e over 50 pairs", s.p.lower, worst)};
}

Outcome linear_sanity() {
  const int n = 256, m = n - 1;
  const double h = 1.0 / n;
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
  const double lam = es.eigenvalues()(0);
  const EnergySetup<double> s(interval_space(n), ExponentField::constant(2), ExponentField::constant(2), lam);
  NodalField<double> u = es.eigenvectors().col(0);
  u /= sobolev_norm(u, s.p, *s.space);
  const auto v = verify_eigenpair(s, u, 1e-8);
  const double rel = std::abs(lam - test::kPiSquared) / test::kPiSquared;
  return {v.pass && rel < 0.01, fmt("lambda_h = %.10f, |lambda_h - pi^2|/pi^2 = %.2e, residual %.2e", lam, rel, v.residual)};
}

}  // namespace

int main() {
  criterion(1, "Luxemburg norm correctness", 5, luxemburg_correctness);
  criterion(2, "modular-norm relations and convergence equivalence", 30, modular_norm_relations);
  criterion(3, "Hoelder-type inequality", 0, holder);
  criterion(4, "lambda* reproduction", 0, lambda_star_formula);
  criterion(5, "discrete sphere estimate at lambda*/2", 60, lemma1);
  criterion(6, "negative ray along the plateau bump", 0, lemma2);
  criterion(7, "eigenpairs across the lambda sweep", 300, eigenpair_sweep);
  criterion(8, "Rayleigh quotient infimum is zero", 0, corollary);
  criterion(9, "unbounded direction", 0, unbounded);
  criterion(10, "residual vs central differences", 0, gradient_consistency);
  criterion(11, "linear eigenpair sanity check", 0, linear_sanity);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
