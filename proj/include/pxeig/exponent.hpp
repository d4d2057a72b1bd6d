#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <utility>

#include "pxeig/expr.hpp"
#include "pxeig/mesh.hpp"

namespace pxeig {

/// An exponent field sampled on a space: values at the quadrature points plus the
/// bounds h- and h+ taken over quadrature points and mesh nodes.
template <typename Scalar>
struct SampledExponent {
  VectorX<Scalar> at_points;
  VectorX<Scalar> at_nodes;
  Scalar lower = Scalar(0);
  Scalar upper = Scalar(0);
};

/// Continuous exponent function h on the closed domain, h(x) > 1.
class ExponentField {
 public:
  explicit ExponentField(Expr expr) : expr_(std::move(expr)) {}

  static ExponentField constant(double c) { return ExponentField(Expr::number(c)); }
  static ExponentField parse(std::string_view source, int dim) { return ExponentField(parse_expr(source, dim)); }

  double operator()(double x, double y = 0.0) const { return expr_.eval(x, y); }
  const Expr& expr() const { return expr_; }
  std::string to_string() const { return expr_.to_string(); }

  /// Pointwise conjugate h / (h - 1).
  ExponentField conjugate() const {
    return ExponentField(Expr::binary(Expr::Kind::Div, expr_,
                                      Expr::binary(Expr::Kind::Sub, expr_, Expr::number(1.0))));
  }

  /// Samples at quadrature points and nodes; rejects non-finite values and h- <= 1.
  template <typename Scalar>
  SampledExponent<Scalar> sample(const FeSpace<Scalar>& space) const {
    SampledExponent<Scalar> s;
    const auto& pts = space.points();
    s.at_points.resize(pts.cols());
    for (Eigen::Index k = 0; k < pts.cols(); ++k) {
      s.at_points(k) = Scalar(eval_checked(static_cast<double>(pts(0, k)), static_cast<double>(pts(1, k))));
    }
    const auto& nodes = space.mesh().nodes;
    s.at_nodes.resize(nodes.cols());
    for (Eigen::Index k = 0; k < nodes.cols(); ++k) {
      s.at_nodes(k) = Scalar(eval_checked(static_cast<double>(nodes(0, k)), static_cast<double>(nodes(1, k))));
    }
    s.lower = std::min(s.at_points.minCoeff(), s.at_nodes.minCoeff());
    s.upper = std::max(s.at_points.maxCoeff(), s.at_nodes.maxCoeff());
    if (!(s.lower > Scalar(1))) {
      throw InvalidExponent("exponent " + to_string() + " has infimum " + std::to_string(static_cast<double>(s.lower)) +
                            " <= 1");
    }
    return s;
  }

 private:
  double eval_checked(double x, double y) const {
    const double v = expr_.eval(x, y);
    if (!std::isfinite(v)) throw InvalidExponent("exponent " + to_string() + " is not finite");
    return v;
  }

  Expr expr_;
};

/// (h-, h+) over the quadrature points and nodes of the space.
template <typename Scalar>
std::pair<Scalar, Scalar> exponent_bounds(const ExponentField& e, const FeSpace<Scalar>& space) {
  const auto s = e.sample(space);
  return {s.lower, s.upper};
}

}  // namespace pxeig
