#pragma once

// Energy functional J(u) = int |grad u|^p / p - lambda int |u|^q / q, its weak
// residual, and the explicit threshold lambda* below which the ball-constrained
// infimum of J is negative.

#include <cmath>
#include <memory>
#include <string>

#include "pxeig/exponent.hpp"
#include "pxeig/mesh.hpp"

namespace pxeig {

template <typename Scalar>
struct EnergySetup {
  std::shared_ptr<const FeSpace<Scalar>> space;
  SampledExponent<Scalar> p;
  SampledExponent<Scalar> q;
  Scalar lambda = Scalar(0);

  EnergySetup(std::shared_ptr<const FeSpace<Scalar>> s, SampledExponent<Scalar> p_, SampledExponent<Scalar> q_,
              Scalar lam)
      : space(std::move(s)), p(std::move(p_)), q(std::move(q_)), lambda(lam) {
    if (!space) throw PreconditionError("energy setup needs a space");
    if (!(lambda >= Scalar(0))) throw PreconditionError("lambda must be nonnegative");
    if (p.at_points.size() != space->point_count() || q.at_points.size() != space->point_count()) {
      throw PreconditionError("exponents were sampled on a different space");
    }
  }

  EnergySetup(std::shared_ptr<const FeSpace<Scalar>> s, const ExponentField& pf, const ExponentField& qf, Scalar lam)
      : EnergySetup(s, pf.sample(*s), qf.sample(*s), lam) {}

  EnergySetup with_lambda(Scalar lam) const { return EnergySetup(space, p, q, lam); }
};

/// |a|^{e-2} a with the value 0 at a = 0.
template <typename Scalar>
Scalar signed_power(Scalar a, Scalar e) {
  if (a == Scalar(0)) return Scalar(0);
  return std::pow(std::abs(a), e - Scalar(1)) * (a < Scalar(0) ? Scalar(-1) : Scalar(1));
}

/// The two integrals of J separately: (int |grad u|^p / p, int |u|^q / q).
template <typename Scalar>
std::pair<Scalar, Scalar> energy_parts(const EnergySetup<Scalar>& setup, const NodalField<Scalar>& u) {
  const auto& space = *setup.space;
  const VectorX<Scalar> g = space.expand(gradient(u, space));
  const VectorX<Scalar> uq = space.values_at_points(u);
  VectorX<Scalar> kinetic(g.size()), potential(g.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const Scalar pk = setup.p.at_points(k), qk = setup.q.at_points(k);
    kinetic(k) = g(k) == Scalar(0) ? Scalar(0) : std::pow(g(k), pk) / pk;
    potential(k) = uq(k) == Scalar(0) ? Scalar(0) : std::pow(std::abs(uq(k)), qk) / qk;
  }
  return {space.integrate_values(kinetic), space.integrate_values(potential)};
}

template <typename Scalar>
Scalar energy(const EnergySetup<Scalar>& setup, const NodalField<Scalar>& u) {
  const auto [kin, pot] = energy_parts(setup, u);
  return kin - setup.lambda * pot;
}

/// <J'(u), v> = int |grad u|^{p-2} grad u . grad v - lambda int |u|^{q-2} u v.
template <typename Scalar>
Scalar residual(const EnergySetup<Scalar>& setup, const NodalField<Scalar>& u, const NodalField<Scalar>& v) {
  const auto& space = *setup.space;
  const MatrixX<Scalar> gu = space.element_gradients(u);
  const MatrixX<Scalar> gv = space.element_gradients(v);
  const VectorX<Scalar> uq = space.values_at_points(u);
  const VectorX<Scalar> vq = space.values_at_points(v);
  const int m = space.points_per_element();
  VectorX<Scalar> integrand(uq.size());
  for (int e = 0; e < space.mesh().element_count(); ++e) {
    const Scalar mag = gu.col(e).norm();
    const Scalar dot = gu.col(e).dot(gv.col(e));
    for (int k = 0; k < m; ++k) {
      const Eigen::Index i = static_cast<Eigen::Index>(e) * m + k;
      const Scalar flux = mag == Scalar(0) ? Scalar(0) : std::pow(mag, setup.p.at_points(i) - Scalar(2)) * dot;
      integrand(i) = flux - setup.lambda * signed_power(uq(i), setup.q.at_points(i)) * vq(i);
    }
  }
  return space.integrate_values(integrand);
}

/// Residual vector r_i = <J'(u), e_i> over all interior basis functions. If `scale` is
/// given it receives |flux_i| + lambda |source_i|, the size of the two parts before they cancel.
template <typename Scalar>
VectorX<Scalar> residual_vector(const EnergySetup<Scalar>& setup, const NodalField<Scalar>& u,
                                VectorX<Scalar>* scale = nullptr) {
  const auto& space = *setup.space;
  const MatrixX<Scalar> gu = space.element_gradients(u);
  const VectorX<Scalar> uq = space.values_at_points(u);
  const VectorX<Scalar>& w = space.weights();
  const int d = space.dim(), m = space.points_per_element();
  VectorX<Scalar> r = space.zero();
  VectorX<Scalar> flux_part = space.zero(), source_part = space.zero();
  for (int e = 0; e < space.mesh().element_count(); ++e) {
    const Scalar mag = gu.col(e).norm();
    Scalar flux_weight(0);
    VectorX<Scalar> source = VectorX<Scalar>::Zero(d + 1);
    for (int k = 0; k < m; ++k) {
      const Eigen::Index i = static_cast<Eigen::Index>(e) * m + k;
      if (mag != Scalar(0)) flux_weight += w(i) * std::pow(mag, setup.p.at_points(i) - Scalar(2));
      source += w(i) * signed_power(uq(i), setup.q.at_points(i)) * space.shape_values().col(k);
    }
    const VectorX<Scalar> flux = flux_weight * (space.shape_gradients(e).transpose() * gu.col(e));
    for (int a = 0; a <= d; ++a) {
      const int i = space.dof(e, a);
      if (i < 0) continue;
      flux_part(i) += flux(a);
      source_part(i) += source(a);
    }
  }
  r = flux_part - setup.lambda * source_part;
  if (scale) *scale = flux_part.cwiseAbs() + setup.lambda * source_part.cwiseAbs();
  return r;
}

/// Numeric witnesses of the sphere estimate: on ||u|| = rho, J(u) >= a > 0 for lambda < lambda*.
template <typename Scalar>
struct LambdaStarCertificate {
  Scalar rho;
  Scalar c1;
  Scalar p_plus;
  Scalar q_minus;
  Scalar lambda_star;
  Scalar a;
};

/// lambda* = rho^{p+ - q-} / (2 p+) * q- / c1^{q-},  a = rho^{p+} / (2 p+).
template <typename Scalar>
LambdaStarCertificate<Scalar> lambda_star(Scalar rho, Scalar p_plus, Scalar q_minus, Scalar c1) {
  if (!(c1 > Scalar(0))) throw PreconditionError("c1 must be positive");
  // rho c1 = 1 is accepted: the sphere bound still holds there.
  if (!(rho > Scalar(0) && rho < Scalar(1) && rho * c1 <= Scalar(1))) {
    throw PreconditionError("rho must lie in (0, 1) with rho <= 1/c1, got " + std::to_string(static_cast<double>(rho)));
  }
  if (!(q_minus > Scalar(1) && p_plus > q_minus)) throw PreconditionError("need p+ > q- > 1");
  LambdaStarCertificate<Scalar> c{rho, c1, p_plus, q_minus, Scalar(0), Scalar(0)};
  c.lambda_star = std::pow(rho, p_plus - q_minus) / (Scalar(2) * p_plus) * q_minus / std::pow(c1, q_minus);
  c.a = std::pow(rho, p_plus) / (Scalar(2) * p_plus);
  return c;
}

/// rho^{q-} (rho^{p+ - q-} / p+ - lambda c1^{q-} / q-): lower bound of J on ||u|| = rho.
template <typename Scalar>
Scalar sphere_lower_bound(const LambdaStarCertificate<Scalar>& c, Scalar lambda) {
  if (!(lambda >= Scalar(0))) throw PreconditionError("lambda must be nonnegative");
  return std::pow(c.rho, c.q_minus) *
         (std::pow(c.rho, c.p_plus - c.q_minus) / c.p_plus - lambda * std::pow(c.c1, c.q_minus) / c.q_minus);
}

/// Default ball radius 0.9 min(1, 1/c1).
template <typename Scalar>
Scalar default_rho(Scalar c1) {
  return Scalar(0.9) * std::min(Scalar(1), Scalar(1) / c1);
}

}  // namespace pxeig
