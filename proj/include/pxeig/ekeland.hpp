#pragma once

// Ball-constrained minimization of J over {||u|| <= rho}: projected, preconditioned
// descent with Armijo backtracking. Iterates decrease J monotonically toward the
// infimum over the ball while the residual goes to zero; when lambda < lambda* the
// limit is interior, has J < 0 and is therefore a nontrivial weak eigenfunction.

#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pxeig/assembly.hpp"
#include "pxeig/energy.hpp"
#include "pxeig/geometry.hpp"
#include "pxeig/random.hpp"
#include "pxeig/sobolev.hpp"

namespace pxeig {

enum class Verdict { Success, NoNontrivial, TrivialCritical, Stalled, MaxIterations, Boundary, Error };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Success:
      return "SUCCESS";
    case Verdict::NoNontrivial:
      return "NO-NONTRIVIAL";
    case Verdict::TrivialCritical:
      return "TRIVIAL-CRITICAL";
    case Verdict::Stalled:
      return "STALLED";
    case Verdict::MaxIterations:
      return "MAX-ITERATIONS";
    case Verdict::Boundary:
      return "BOUNDARY";
    case Verdict::Error:
      return "ERROR";
  }
  return "?";
}

enum class StartMode { BumpRay, RandomInBall, Zero };

/// Descent preconditioner. `Weighted` is the stiffness matrix with element weights
/// (p-1)|grad u|^{p-2} of the current iterate, `Stiffness` the linear-case stiffness
/// matrix, `Diagonal` its diagonal.
enum class Preconditioner { Weighted, Stiffness, Diagonal };

struct SolverConfig {
  double rho = 0.5;
  int max_iterations = 20000;
  double tolerance = 1e-6;
  /// Also require residual <= relative_tolerance * (same norm of the flux and source
  /// parts taken separately), which makes the stopping test independent of the scale of u.
  double relative_tolerance = 1e-8;
  double initial_step = 1.0;
  double backtracking = 0.5;
  double armijo = 1e-4;
  double interior_margin = 0.99;
  std::uint64_t seed = 1;
  StartMode start = StartMode::BumpRay;
  Preconditioner preconditioner = Preconditioner::Weighted;

  void check() const {
    if (!(rho > 0.0)) throw PreconditionError("rho must be positive");
    if (!(tolerance > 0.0)) throw PreconditionError("tolerance must be positive");
    if (!(relative_tolerance > 0.0)) throw PreconditionError("relative tolerance must be positive");
    if (!(backtracking > 0.0 && backtracking < 1.0)) throw PreconditionError("backtracking factor must lie in (0, 1)");
    if (!(armijo > 0.0 && armijo < 1.0)) throw PreconditionError("sufficient-decrease constant must lie in (0, 1)");
    if (!(initial_step > 0.0)) throw PreconditionError("initial step must be positive");
    if (max_iterations < 0) throw PreconditionError("max iterations must be nonnegative");
  }
};

struct IterationRecord {
  double energy;
  double step;
  double residual;
};

template <typename Scalar>
struct EigenPairReport {
  NodalField<Scalar> u;
  Scalar energy = Scalar(0);
  Scalar residual_norm = Scalar(0);
  Scalar residual_scale = Scalar(0);  // residual norm of |flux| + lambda |source|
  Scalar norm = Scalar(0);
  Scalar rho = Scalar(0);
  Scalar lambda = Scalar(0);
  bool interior = false;
  int iterations = 0;
  std::vector<IterationRecord> trace;  // entry 0 is the start
  Verdict verdict = Verdict::Error;
  std::string message;
};

/// u if ||u|| <= rho, otherwise (rho / ||u||) u.
template <typename Scalar>
NodalField<Scalar> project_to_ball(const NodalField<Scalar>& u, Scalar rho, const SampledExponent<Scalar>& p,
                                   const FeSpace<Scalar>& space) {
  if (!(rho > Scalar(0))) throw PreconditionError("ball radius must be positive");
  const Scalar n = sobolev_norm(u, p, space);
  if (n <= rho) return u;
  return (rho / n) * u;
}

/// ||e_i|| for every interior hat e_i.
template <typename Scalar>
VectorX<Scalar> basis_norms(const EnergySetup<Scalar>& setup) {
  const auto& space = *setup.space;
  VectorX<Scalar> out(space.dofs());
  for (int i = 0; i < space.dofs(); ++i) {
    out(i) = sobolev_norm(hat(space, space.mesh().interior_nodes[static_cast<std::size_t>(i)]), setup.p, space);
  }
  return out;
}

/// max_i |<J'(u), e_i>| / ||e_i||, the discrete dual norm used for termination.
template <typename Scalar>
Scalar residual_norm(const VectorX<Scalar>& r, const VectorX<Scalar>& norms) {
  return r.size() == 0 ? Scalar(0) : r.cwiseAbs().cwiseQuotient(norms).maxCoeff();
}

namespace detail {

template <typename Scalar>
ElementField<Scalar> preconditioner_weights(const EnergySetup<Scalar>& setup, const NodalField<Scalar>& u) {
  const auto& space = *setup.space;
  const ElementField<Scalar> mag = gradient(u, space);
  const Scalar floor = std::max(Scalar(1e-3) * mag.maxCoeff(), Scalar(1e-12));
  const int m = space.points_per_element();
  ElementField<Scalar> w(mag.size());
  for (Eigen::Index e = 0; e < mag.size(); ++e) {
    const Scalar g = std::max(mag(e), floor);
    Scalar acc(0), wsum(0);
    for (int k = 0; k < m; ++k) {
      const Eigen::Index i = e * m + k;
      const Scalar pk = setup.p.at_points(i);
      acc += space.weights()(i) * (pk - Scalar(1)) * std::pow(g, pk - Scalar(2));
      wsum += space.weights()(i);
    }
    w(e) = acc / wsum;
  }
  return w;
}

}  // namespace detail

/// Projected preconditioned descent on J over the closed ball of radius config.rho.
template <typename Scalar>
EigenPairReport<Scalar> solve(const EnergySetup<Scalar>& setup, const SolverConfig& config,
                              const NodalField<Scalar>& start) {
  config.check();
  const auto& space = *setup.space;
  space.check(start);
  const Scalar rho(config.rho);
  EigenPairReport<Scalar> rep;
  rep.rho = rho;
  rep.lambda = setup.lambda;

  const VectorX<Scalar> bnorms = basis_norms(setup);
  const SparseMatrix<Scalar> linear = stiffness_matrix(space);
  Eigen::SimplicialLDLT<SparseMatrix<Scalar>> fixed;
  if (config.preconditioner == Preconditioner::Stiffness) fixed.compute(linear);
  const VectorX<Scalar> diag = linear.diagonal();

  NodalField<Scalar> u = project_to_ball(start, rho, setup.p, space);
  Scalar j = energy(setup, u);
  VectorX<Scalar> r, scale_terms;
  r = residual_vector(setup, u, &scale_terms);
  Scalar res = residual_norm(r, bnorms);
  Scalar res_scale = residual_norm(scale_terms, bnorms);
  rep.trace.push_back({static_cast<double>(j), 0.0, static_cast<double>(res)});
  Scalar step(config.initial_step);

  auto finish = [&](Verdict v, std::string msg) {
    rep.u = u;
    rep.energy = j;
    rep.residual_norm = res;
    rep.residual_scale = res_scale;
    rep.norm = sobolev_norm(u, setup.p, space);
    rep.interior = rep.norm <= Scalar(config.interior_margin) * rho;
    rep.verdict = v;
    rep.message = std::move(msg);
    return rep;
  };
  auto converged_verdict = [&]() {
    if (u.isZero(0)) return Verdict::TrivialCritical;
    if (!(j < Scalar(0))) return Verdict::NoNontrivial;
    if (!(sobolev_norm(u, setup.p, space) <= Scalar(config.interior_margin) * rho)) return Verdict::Boundary;
    return Verdict::Success;
  };

  if (!std::isfinite(static_cast<double>(j))) return finish(Verdict::Error, "non-finite energy at the start");

  for (int it = 0;; ++it) {
    if (res <= Scalar(config.tolerance) && res <= Scalar(config.relative_tolerance) * res_scale) {
      const Verdict v = converged_verdict();
      return finish(v, "residual below tolerance");
    }
    if (it >= config.max_iterations) {
      return finish(j < Scalar(0) || u.isZero(0) ? Verdict::MaxIterations : Verdict::NoNontrivial,
                    "iteration cap reached");
    }

    VectorX<Scalar> dir;
    switch (config.preconditioner) {
      case Preconditioner::Weighted: {
        Eigen::SimplicialLDLT<SparseMatrix<Scalar>> chol(stiffness_matrix(space, detail::preconditioner_weights(setup, u)));
        if (chol.info() != Eigen::Success) return finish(Verdict::Error, "preconditioner factorization failed");
        dir = -chol.solve(r);
        break;
      }
      case Preconditioner::Stiffness:
        dir = -fixed.solve(r);
        break;
      case Preconditioner::Diagonal:
        dir = -r.cwiseQuotient(diag);
        break;
    }

    // Armijo backtracking along the projected path.
    Scalar s = std::min(Scalar(config.initial_step), step * Scalar(4));
    bool accepted = false;
    NodalField<Scalar> trial;
    Scalar jt(0);
    while (s >= Scalar(1e-14)) {
      trial = project_to_ball(NodalField<Scalar>(u + s * dir), rho, setup.p, space);
      jt = energy(setup, trial);
      if (!std::isfinite(static_cast<double>(jt))) return finish(Verdict::Error, "non-finite energy during line search");
      if (jt <= j + Scalar(config.armijo) * r.dot(trial - u) && jt <= j) {
        accepted = true;
        break;
      }
      s *= Scalar(config.backtracking);
    }
    if (!accepted) {
      return finish(Verdict::Stalled, "line search step fell below 1e-14");
    }
    step = s;
    u = std::move(trial);
    j = jt;
    r = residual_vector(setup, u, &scale_terms);
    res = residual_norm(r, bnorms);
    res_scale = residual_norm(scale_terms, bnorms);
    rep.iterations = it + 1;
    rep.trace.push_back({static_cast<double>(j), static_cast<double>(s), static_cast<double>(res)});
  }
}

/// Start on the bump ray: t phi with t minimizing J over a geometric grid of t inside
/// the ball. J(start) < 0 whenever the small-t threshold is positive.
template <typename Scalar>
NodalField<Scalar> bump_ray_start(const EnergySetup<Scalar>& setup, const BumpSpec<Scalar>& bump,
                                  const SolverConfig& config) {
  const Scalar t_cap = std::min(Scalar(1), Scalar(0.5 * config.interior_margin * config.rho) / bump.norm);
  Scalar best_t = t_cap, best_j = energy(setup, NodalField<Scalar>(t_cap * bump.phi));
  for (int k = 1; k <= 160; ++k) {
    const Scalar t = t_cap * std::pow(Scalar(2), -Scalar(k) / Scalar(4));
    const Scalar jt = energy(setup, NodalField<Scalar>(t * bump.phi));
    if (jt < best_j) {
      best_j = jt;
      best_t = t;
    }
  }
  return best_t * bump.phi;
}

/// Smooth random field scaled to norm rho / 2.
template <typename Scalar>
NodalField<Scalar> random_ball_start(const EnergySetup<Scalar>& setup, const SolverConfig& config) {
  Rng rng(config.seed);
  NodalField<Scalar> u = random_smooth_field(*setup.space, rng);
  const Scalar n = sobolev_norm(u, setup.p, *setup.space);
  if (n == Scalar(0)) return u;
  return (Scalar(0.5 * config.rho) / n) * u;
}

template <typename Scalar>
struct EigenpairCheck {
  bool pass = false;
  bool nontrivial = false;
  Scalar residual = Scalar(0);
  Scalar norm = Scalar(0);
};

/// Weak eigenpair check: max_i |<J'(u), e_i>| / ||e_i|| <= tol and ||u|| >= nontrivial_tol.
template <typename Scalar>
EigenpairCheck<Scalar> verify_eigenpair(const EnergySetup<Scalar>& setup, const NodalField<Scalar>& u, Scalar tol,
                                        Scalar nontrivial_tol = Scalar(1e-12)) {
  EigenpairCheck<Scalar> c;
  c.residual = residual_norm(residual_vector(setup, u), basis_norms(setup));
  c.norm = sobolev_norm(u, setup.p, *setup.space);
  c.nontrivial = c.norm >= nontrivial_tol;
  c.pass = c.nontrivial && c.residual <= tol;
  return c;
}

}  // namespace pxeig
