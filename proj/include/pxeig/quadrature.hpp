#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <stdexcept>

#include "pxeig/error.hpp"

namespace pxeig {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Deterministic pairwise (tree) summation.
template <typename Scalar>
Scalar pairwise_sum(std::span<const Scalar> values) {
  if (values.size() <= 8) {
    Scalar s(0);
    for (const Scalar& v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

template <typename Derived>
typename Derived::Scalar pairwise_sum(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const VectorX<Scalar> tmp = v.derived();
  return pairwise_sum(std::span<const Scalar>(tmp.data(), static_cast<std::size_t>(tmp.size())));
}

/// Reference quadrature rule: points in reference coordinates (dim x n), weights summing
/// to the reference measure (1 on [0,1], 1/2 on the unit triangle).
template <typename Scalar>
struct QuadratureRule {
  MatrixX<Scalar> points;
  VectorX<Scalar> weights;
};

/// n-point Gauss-Legendre on [0,1] via the Golub-Welsch eigenproblem.
template <typename Scalar>
QuadratureRule<Scalar> gauss_legendre_unit(int n) {
  if (n < 1) throw PreconditionError("Gauss-Legendre rule needs at least one point");
  MatrixX<Scalar> jacobi = MatrixX<Scalar>::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const Scalar kk(k);
    const Scalar beta = kk / std::sqrt(Scalar(4) * kk * kk - Scalar(1));
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(jacobi);
  QuadratureRule<Scalar> rule;
  rule.points.resize(1, n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Nodes are symmetric about zero; snap the odd-order middle node exactly.
    Scalar node = es.eigenvalues()(i);
    if (n % 2 == 1 && i == n / 2) node = Scalar(0);
    rule.points(0, i) = (node + Scalar(1)) / Scalar(2);
    const Scalar v0 = es.eigenvectors()(0, i);
    rule.weights(i) = v0 * v0;  // 2 v0^2 on [-1,1], halved for [0,1]
  }
  // Symmetrize to remove eigensolver asymmetry.
  for (int i = 0; i < n / 2; ++i) {
    const Scalar x = (rule.points(0, i) + (Scalar(1) - rule.points(0, n - 1 - i))) / Scalar(2);
    const Scalar w = (rule.weights(i) + rule.weights(n - 1 - i)) / Scalar(2);
    rule.points(0, i) = x;
    rule.points(0, n - 1 - i) = Scalar(1) - x;
    rule.weights(i) = w;
    rule.weights(n - 1 - i) = w;
  }
  rule.weights /= rule.weights.sum();
  return rule;
}

/// Segment rule of the given order: `order` Gauss points, exact to degree 2*order-1.
template <typename Scalar>
QuadratureRule<Scalar> segment_rule(int order) {
  return gauss_legendre_unit<Scalar>(order);
}

/// Conical-product rule on the unit triangle, exact to degree 2*order-1, positive weights.
/// Uses (x, y) = (s, (1-s) t) with order+1 points in s to absorb the Jacobian (1-s).
template <typename Scalar>
QuadratureRule<Scalar> triangle_rule(int order) {
  const auto gs = gauss_legendre_unit<Scalar>(order + 1);
  const auto gt = gauss_legendre_unit<Scalar>(order);
  const int ns = static_cast<int>(gs.weights.size());
  const int nt = static_cast<int>(gt.weights.size());
  QuadratureRule<Scalar> rule;
  rule.points.resize(2, ns * nt);
  rule.weights.resize(ns * nt);
  int k = 0;
  for (int i = 0; i < ns; ++i) {
    const Scalar s = gs.points(0, i);
    for (int j = 0; j < nt; ++j, ++k) {
      const Scalar t = gt.points(0, j);
      rule.points(0, k) = s;
      rule.points(1, k) = (Scalar(1) - s) * t;
      rule.weights(k) = gs.weights(i) * gt.weights(j) * (Scalar(1) - s);
    }
  }
  return rule;
}

}  // namespace pxeig
