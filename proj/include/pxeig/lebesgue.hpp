#pragma once

// Variable-exponent Lebesgue space numerics. Every integral is a quadrature sum
// sum_k W_k |f_k|^{e_k} with positive weights, so the inequalities between modular
// and norm hold exactly for the discrete measure.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <sstream>
#include <type_traits>
#include <vector>

#include "pxeig/exponent.hpp"
#include "pxeig/mesh.hpp"

namespace pxeig {

/// sum_k W_k |f_k|^{e_k}.
template <typename Scalar>
Scalar modular_values(const VectorX<Scalar>& values, const VectorX<Scalar>& exponents,
                      const VectorX<Scalar>& weights) {
  VectorX<Scalar> terms(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const Scalar a = std::abs(values(k));
    terms(k) = a == Scalar(0) ? Scalar(0) : weights(k) * std::pow(a, exponents(k));
  }
  return pairwise_sum(terms);
}

namespace detail {

/// log of the modular of f / exp(s), with the exponents and log-magnitudes of the
/// nonzero entries pre-extracted. Also returns d/ds via the softmax weights.
template <typename Scalar>
struct LogModular {
  std::vector<Scalar> log_terms;  // log W_k + e_k log|f_k|
  std::vector<Scalar> exps;

  LogModular(const VectorX<Scalar>& values, const VectorX<Scalar>& exponents, const VectorX<Scalar>& weights) {
    for (Eigen::Index k = 0; k < values.size(); ++k) {
      const Scalar a = std::abs(values(k));
      if (a == Scalar(0) || weights(k) == Scalar(0)) continue;
      log_terms.push_back(std::log(weights(k)) + exponents(k) * std::log(a));
      exps.push_back(exponents(k));
    }
  }

  bool empty() const { return log_terms.empty(); }

  /// Returns (phi(s), phi'(s)) with phi(s) = log sum_k exp(log_terms_k - e_k s).
  std::pair<Scalar, Scalar> eval(Scalar s) const {
    Scalar shift = -std::numeric_limits<Scalar>::infinity();
    std::vector<Scalar> z(log_terms.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
      z[k] = log_terms[k] - exps[k] * s;
      shift = std::max(shift, z[k]);
    }
    std::vector<Scalar> w(z.size()), we(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) {
      w[k] = std::exp(z[k] - shift);
      we[k] = w[k] * exps[k];
    }
    const Scalar sum = pairwise_sum(std::span<const Scalar>(w));
    const Scalar wsum = pairwise_sum(std::span<const Scalar>(we));
    return {shift + std::log(sum), -wsum / sum};
  }
};

}  // namespace detail

/// Luxemburg norm inf{mu > 0 : modular(f / mu) <= 1} from quadrature-point data.
///
/// Works with s = log(mu): s -> log modular(f / e^s) is convex and strictly decreasing
/// with slope in [-e+, -e-], so after bracketing by geometric growth of mu the root is
/// found by Newton steps from the left end, safeguarded by bisection. `tol` is the
/// relative tolerance on mu; iteration continues to machine precision once inside it.
template <typename Scalar>
Scalar luxemburg_values(const VectorX<Scalar>& values, const VectorX<Scalar>& exponents,
                        const VectorX<Scalar>& weights, Scalar tol = Scalar(1e-12)) {
  if (!(tol > Scalar(0))) throw PreconditionError("Luxemburg tolerance must be positive");
  const detail::LogModular<Scalar> lm(values, exponents, weights);
  if (lm.empty()) return Scalar(0);
  for (Scalar t : lm.log_terms) {
    if (!std::isfinite(t)) throw ComputationError("Luxemburg norm: non-finite field values");
  }

  // Geometric bracketing of mu around 1.
  Scalar lo(0), hi(0);
  auto phi_lo = lm.eval(lo), phi_hi = phi_lo;
  Scalar step(1);
  int grow = 0;
  while (!(phi_lo.first >= Scalar(0) && phi_hi.first <= Scalar(0))) {
    if (++grow > 2000) {
      std::ostringstream os;
      os << "Luxemburg norm: failed to bracket the root, tried mu in [" << std::exp(lo) << ", " << std::exp(hi)
         << "]";
      throw ComputationError(os.str());
    }
    if (phi_lo.first < Scalar(0)) {
      lo -= step;
      phi_lo = lm.eval(lo);
    }
    if (phi_hi.first > Scalar(0)) {
      hi += step;
      phi_hi = lm.eval(hi);
    }
    step *= Scalar(2);
  }
  if (phi_lo.first == Scalar(0)) return std::exp(lo);
  if (phi_hi.first == Scalar(0)) return std::exp(hi);

  Scalar s = lo;
  auto cur = phi_lo;
  for (int it = 0; it < 200; ++it) {
    Scalar next = s - cur.first / cur.second;
    if (!(next > lo && next < hi)) next = (lo + hi) / Scalar(2);
    const Scalar delta = std::abs(next - s);
    s = next;
    cur = lm.eval(s);
    if (cur.first > Scalar(0)) {
      lo = s;
    } else if (cur.first < Scalar(0)) {
      hi = s;
    } else {
      break;
    }
    const Scalar floor = Scalar(4) * std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + std::abs(s));
    if (delta <= std::max(tol * Scalar(1e-4), floor) || hi - lo <= floor) {
      break;
    }
  }
  return std::exp(s);
}

/// rho_e(u) for a nodal field.
template <typename Scalar>
Scalar modular(const NodalField<Scalar>& u, const SampledExponent<Scalar>& e, const FeSpace<Scalar>& space) {
  return modular_values<Scalar>(space.values_at_points(u), e.at_points, space.weights());
}

/// rho_e(f) for a pointwise function f(Point).
template <typename Scalar, typename F>
  requires std::is_convertible_v<std::invoke_result_t<F, typename FeSpace<Scalar>::Point>, Scalar>
Scalar modular(F&& f, const SampledExponent<Scalar>& e, const FeSpace<Scalar>& space) {
  VectorX<Scalar> vals(space.point_count());
  for (Eigen::Index k = 0; k < vals.size(); ++k) {
    vals(k) = static_cast<Scalar>(f(typename FeSpace<Scalar>::Point(space.points().col(k))));
  }
  return modular_values<Scalar>(vals, e.at_points, space.weights());
}

template <typename Scalar>
Scalar luxemburg_norm(const NodalField<Scalar>& u, const SampledExponent<Scalar>& e, const FeSpace<Scalar>& space,
                      Scalar tol = Scalar(1e-12)) {
  return luxemburg_values<Scalar>(space.values_at_points(u), e.at_points, space.weights(), tol);
}

template <typename Scalar, typename F>
  requires std::is_convertible_v<std::invoke_result_t<F, typename FeSpace<Scalar>::Point>, Scalar>
Scalar luxemburg_norm(F&& f, const SampledExponent<Scalar>& e, const FeSpace<Scalar>& space,
                      Scalar tol = Scalar(1e-12)) {
  VectorX<Scalar> vals(space.point_count());
  for (Eigen::Index k = 0; k < vals.size(); ++k) {
    vals(k) = static_cast<Scalar>(f(typename FeSpace<Scalar>::Point(space.points().col(k))));
  }
  return luxemburg_values<Scalar>(vals, e.at_points, space.weights(), tol);
}

/// Conjugate exponent sampled directly from an already sampled field: e / (e - 1).
template <typename Scalar>
SampledExponent<Scalar> conjugate(const SampledExponent<Scalar>& e) {
  SampledExponent<Scalar> c;
  auto conj = [](Scalar v) { return v / (v - Scalar(1)); };
  c.at_points = e.at_points.unaryExpr(conj);
  c.at_nodes = e.at_nodes.unaryExpr(conj);
  c.lower = conj(e.upper);
  c.upper = conj(e.lower);
  return c;
}

inline ExponentField conjugate(const ExponentField& e) { return e.conjugate(); }

template <typename Scalar>
struct HolderGap {
  Scalar lhs;  // |int u v|
  Scalar rhs;  // (1/p- + 1/p'-) |u|_p |v|_p'
};

/// Both sides of the Holder-type inequality |int uv| <= (1/p- + 1/p'-) |u|_p |v|_p', for
/// functions given by their values at the quadrature points.
template <typename Scalar>
HolderGap<Scalar> holder_gap_values(const VectorX<Scalar>& uq, const VectorX<Scalar>& vq,
                                    const SampledExponent<Scalar>& p, const FeSpace<Scalar>& space) {
  if (uq.size() != space.point_count() || vq.size() != space.point_count()) {
    throw PreconditionError("point values do not match the quadrature tables");
  }
  const auto pc = conjugate(p);
  HolderGap<Scalar> gap;
  gap.lhs = std::abs(space.integrate_values(uq.cwiseProduct(vq)));
  gap.rhs = (Scalar(1) / p.lower + Scalar(1) / pc.lower) * luxemburg_values<Scalar>(uq, p.at_points, space.weights()) *
            luxemburg_values<Scalar>(vq, pc.at_points, space.weights());
  return gap;
}

template <typename Scalar>
HolderGap<Scalar> holder_gap(const NodalField<Scalar>& u, const NodalField<Scalar>& v,
                             const SampledExponent<Scalar>& p, const FeSpace<Scalar>& space) {
  return holder_gap_values<Scalar>(space.values_at_points(u), space.values_at_points(v), p, space);
}

}  // namespace pxeig
