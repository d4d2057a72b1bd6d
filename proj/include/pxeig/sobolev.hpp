#pragma once

// The discrete energy space E = W_0^{1,p(x)}: its norm |grad u|_{p(x)}, admissibility of
// an exponent pair, and a computed embedding constant c1 with |u|_{q(x)} <= c1 ||u||.

#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pxeig/assembly.hpp"
#include "pxeig/lebesgue.hpp"
#include "pxeig/parallel.hpp"
#include "pxeig/random.hpp"

namespace pxeig {

/// ||u|| = Luxemburg norm of the element-wise |grad u| with exponent p.
template <typename Scalar>
Scalar sobolev_norm(const NodalField<Scalar>& u, const SampledExponent<Scalar>& p, const FeSpace<Scalar>& space,
                    Scalar tol = Scalar(1e-12)) {
  return luxemburg_values<Scalar>(space.expand(gradient(u, space)), p.at_points, space.weights(), tol);
}

struct AdmissibilityReport {
  double q_minus = 0, p_minus = 0, q_plus = 0, p_plus = 0;
  int ambient_n = 0;
  bool condition_holds = false;  // 1 < q- < p- < q+
  bool subcritical = false;      // q(x) < p*(x) at every sample point
  bool p_plus_below_n = false;   // p+ < N
  std::vector<std::string> failures;

  bool admissible() const { return condition_holds && subcritical && p_plus_below_n; }
};

/// Critical Sobolev exponent N p / (N - p), +infinity when p >= N.
inline double critical_exponent(double p, int ambient_n) {
  return p < ambient_n ? ambient_n * p / (ambient_n - p) : std::numeric_limits<double>::infinity();
}

/// Checks 1 < q- < p- < q+, p+ < N and q < p* on all quadrature points and nodes.
/// Failures are verdicts; `failures` lists a few offending locations.
template <typename Scalar>
AdmissibilityReport validate(const ExponentField& p, const ExponentField& q, const FeSpace<Scalar>& space,
                             int ambient_n) {
  const auto ps = p.sample(space);
  const auto qs = q.sample(space);
  AdmissibilityReport r;
  r.p_minus = static_cast<double>(ps.lower);
  r.p_plus = static_cast<double>(ps.upper);
  r.q_minus = static_cast<double>(qs.lower);
  r.q_plus = static_cast<double>(qs.upper);
  r.ambient_n = ambient_n;

  r.condition_holds = 1.0 < r.q_minus && r.q_minus < r.p_minus && r.p_minus < r.q_plus;
  if (!r.condition_holds) {
    std::ostringstream os;
    os << "condition 1 < q- < p- < q+ fails: q- = " << r.q_minus << ", p- = " << r.p_minus << ", q+ = " << r.q_plus;
    r.failures.push_back(os.str());
  }
  r.p_plus_below_n = r.p_plus < ambient_n;
  if (!r.p_plus_below_n) {
    std::ostringstream os;
    os << "p+ = " << r.p_plus << " is not below N = " << ambient_n;
    r.failures.push_back(os.str());
  }

  r.subcritical = true;
  int reported = 0;
  auto check_point = [&](double pv, double qv, double x, double y) {
    if (qv < critical_exponent(pv, ambient_n)) return;
    r.subcritical = false;
    if (reported++ < 5) {
      std::ostringstream os;
      os << "q >= p* at (" << x << ", " << y << "): q = " << qv << ", p* = " << critical_exponent(pv, ambient_n);
      r.failures.push_back(os.str());
    }
  };
  const auto& pts = space.points();
  for (Eigen::Index k = 0; k < pts.cols(); ++k) {
    check_point(static_cast<double>(ps.at_points(k)), static_cast<double>(qs.at_points(k)),
                static_cast<double>(pts(0, k)), static_cast<double>(pts(1, k)));
  }
  const auto& nodes = space.mesh().nodes;
  for (Eigen::Index k = 0; k < nodes.cols(); ++k) {
    check_point(static_cast<double>(ps.at_nodes(k)), static_cast<double>(qs.at_nodes(k)),
                static_cast<double>(nodes(0, k)), static_cast<double>(nodes(1, k)));
  }
  return r;
}

/// Derivative of the Luxemburg norm with respect to the quadrature-point values, by
/// implicit differentiation of modular(f / mu) = 1. Returns nullopt when the mu-derivative
/// of the modular is not usable.
template <typename Scalar>
std::optional<VectorX<Scalar>> luxemburg_point_gradient(const VectorX<Scalar>& values, const VectorX<Scalar>& exps,
                                                        const VectorX<Scalar>& weights, Scalar norm) {
  VectorX<Scalar> out = VectorX<Scalar>::Zero(values.size());
  if (norm == Scalar(0)) return out;
  VectorX<Scalar> terms(values.size());  // W_k (|f_k| / mu)^{e_k}
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const Scalar a = std::abs(values(k));
    terms(k) = a == Scalar(0) ? Scalar(0) : weights(k) * std::exp(exps(k) * (std::log(a) - std::log(norm)));
  }
  const Scalar d = pairwise_sum(terms.cwiseProduct(exps));
  if (!std::isfinite(d) || d <= Scalar(1e-300)) return std::nullopt;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values(k) != Scalar(0)) out(k) = norm * exps(k) * terms(k) / (values(k) * d);
  }
  return out;
}

namespace detail {

template <typename Scalar, typename NormFn>
VectorX<Scalar> numerical_gradient(const NodalField<Scalar>& u, NormFn&& norm) {
  VectorX<Scalar> g(u.size());
  const Scalar scale = std::max(u.cwiseAbs().maxCoeff(), Scalar(1));
  const Scalar h = std::cbrt(std::numeric_limits<Scalar>::epsilon()) * scale;
  NodalField<Scalar> w = u;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    w(i) = u(i) + h;
    const Scalar fp = norm(w);
    w(i) = u(i) - h;
    const Scalar fm = norm(w);
    w(i) = u(i);
    g(i) = (fp - fm) / (Scalar(2) * h);
  }
  return g;
}

}  // namespace detail

template <typename Scalar>
struct NormWithGradient {
  Scalar norm;
  VectorX<Scalar> gradient;  // d norm / d u_i over interior dofs
};

/// |u|_{e} and its gradient with respect to the interior nodal values.
template <typename Scalar>
NormWithGradient<Scalar> lebesgue_norm_gradient(const NodalField<Scalar>& u, const SampledExponent<Scalar>& e,
                                                const FeSpace<Scalar>& space) {
  const VectorX<Scalar> vals = space.values_at_points(u);
  NormWithGradient<Scalar> out{luxemburg_values<Scalar>(vals, e.at_points, space.weights()), space.zero()};
  const auto dpts = luxemburg_point_gradient<Scalar>(vals, e.at_points, space.weights(), out.norm);
  if (!dpts) {
    out.gradient = detail::numerical_gradient(u, [&](const NodalField<Scalar>& w) { return luxemburg_norm(w, e, space); });
    return out;
  }
  const int d = space.dim(), m = space.points_per_element();
  for (int el = 0; el < space.mesh().element_count(); ++el) {
    for (int a = 0; a <= d; ++a) {
      const int i = space.dof(el, a);
      if (i < 0) continue;
      for (int k = 0; k < m; ++k) out.gradient(i) += (*dpts)(static_cast<Eigen::Index>(el) * m + k) * space.shape_values()(a, k);
    }
  }
  return out;
}

/// ||u|| and its gradient with respect to the interior nodal values.
template <typename Scalar>
NormWithGradient<Scalar> sobolev_norm_gradient(const NodalField<Scalar>& u, const SampledExponent<Scalar>& p,
                                               const FeSpace<Scalar>& space) {
  const MatrixX<Scalar> grads = space.element_gradients(u);
  const ElementField<Scalar> mag = grads.colwise().norm().transpose();
  const VectorX<Scalar> vals = space.expand(mag);
  NormWithGradient<Scalar> out{luxemburg_values<Scalar>(vals, p.at_points, space.weights()), space.zero()};
  const auto dpts = luxemburg_point_gradient<Scalar>(vals, p.at_points, space.weights(), out.norm);
  if (!dpts) {
    out.gradient =
        detail::numerical_gradient(u, [&](const NodalField<Scalar>& w) { return sobolev_norm(w, p, space); });
    return out;
  }
  const int d = space.dim(), m = space.points_per_element();
  for (int el = 0; el < space.mesh().element_count(); ++el) {
    if (mag(el) == Scalar(0)) continue;
    Scalar c(0);
    for (int k = 0; k < m; ++k) c += (*dpts)(static_cast<Eigen::Index>(el) * m + k);
    const VectorX<Scalar> dmag = space.shape_gradients(el).transpose() * grads.col(el) / mag(el);
    for (int a = 0; a <= d; ++a) {
      const int i = space.dof(el, a);
      if (i >= 0) out.gradient(i) += c * dmag(a);
    }
  }
  return out;
}

/// |u|_{q(x)} / ||u||, the quantity whose supremum is the embedding constant.
template <typename Scalar>
Scalar embedding_quotient(const NodalField<Scalar>& u, const SampledExponent<Scalar>& p,
                          const SampledExponent<Scalar>& q, const FeSpace<Scalar>& space) {
  const Scalar den = sobolev_norm(u, p, space);
  if (den == Scalar(0)) throw PreconditionError("embedding quotient of the zero field");
  return luxemburg_norm(u, q, space) / den;
}

template <typename Scalar>
struct EmbeddingEstimate {
  Scalar estimate = Scalar(0);  // best |w|_q / ||w|| found
  Scalar safety_factor = Scalar(1.1);
  Scalar effective = Scalar(0);  // estimate * safety_factor
  NodalField<Scalar> witness;    // normalized to ||w|| = 1
  int best_start = -1;
  bool warning = false;          // some start made no progress at all
  std::vector<Scalar> start_values;
};

struct EmbeddingOptions {
  double safety_factor = 1.1;
  int max_iterations = 400;
  double stall_tolerance = 1e-13;
};

namespace detail {

template <typename Scalar>
struct AscentResult {
  NodalField<Scalar> u;
  Scalar value;
  bool progressed;
};

/// Preconditioned gradient ascent of the 0-homogeneous quotient, kept on ||u|| = 1.
template <typename Scalar, typename Solver>
AscentResult<Scalar> quotient_ascent(NodalField<Scalar> u, const SampledExponent<Scalar>& p,
                                     const SampledExponent<Scalar>& q, const FeSpace<Scalar>& space,
                                     const Solver& riesz, const SparseMatrix<Scalar>& stiff,
                                     const EmbeddingOptions& opt) {
  u /= sobolev_norm(u, p, space);
  Scalar value = embedding_quotient(u, p, q, space);
  const Scalar initial = value;
  Scalar step(0.5);
  int quiet = 0;
  for (int it = 0; it < opt.max_iterations && quiet < 5; ++it) {
    const auto nq = lebesgue_norm_gradient(u, q, space);
    const auto np = sobolev_norm_gradient(u, p, space);
    const VectorX<Scalar> grad = (nq.gradient - (nq.norm / np.norm) * np.gradient) / np.norm;
    VectorX<Scalar> dir = riesz.solve(grad);
    const Scalar dn = std::sqrt(dir.dot(stiff * dir));
    if (!(dn > Scalar(0)) || !std::isfinite(dn)) break;
    dir /= dn;
    bool accepted = false;
    while (step > Scalar(1e-14)) {
      NodalField<Scalar> trial = u + step * dir;
      const Scalar tn = sobolev_norm(trial, p, space);
      if (tn > Scalar(0)) {
        trial /= tn;
        const Scalar tv = embedding_quotient(trial, p, q, space);
        if (tv > value) {
          quiet = (tv - value) <= Scalar(opt.stall_tolerance) * value ? quiet + 1 : 0;
          u = std::move(trial);
          value = tv;
          step = std::min(step * Scalar(2), Scalar(4));
          accepted = true;
          break;
        }
      }
      step /= Scalar(2);
    }
    if (!accepted) break;
  }
  return {std::move(u), value, value > initial};
}

}  // namespace detail

/// Multistart estimate of sup |u|_{q(x)} / ||u|| over the discrete space.
///
/// Starts: the interior hat nearest the domain center, a smooth sine bump, then
/// `starts` random fields drawn from `seed`, then any `extra_starts`. The best value
/// wins, ties going to the lower start index.
template <typename Scalar>
EmbeddingEstimate<Scalar> estimate_embedding_constant(const SampledExponent<Scalar>& p,
                                                      const SampledExponent<Scalar>& q, const FeSpace<Scalar>& space,
                                                      int starts, std::uint64_t seed,
                                                      const EmbeddingOptions& opt = {},
                                                      const std::vector<NodalField<Scalar>>& extra_starts = {}) {
  if (space.dofs() == 0) throw PreconditionError("space has no interior degrees of freedom");
  const auto& mesh = space.mesh();
  std::vector<NodalField<Scalar>> inits;

  int center = 0;
  Scalar best_dist = std::numeric_limits<Scalar>::infinity();
  for (int n : mesh.interior_nodes) {
    Scalar dist(0);
    for (int a = 0; a < mesh.dim(); ++a) {
      const Scalar c = Scalar((mesh.domain.lo[a] + mesh.domain.hi[a]) / 2);
      dist += (mesh.nodes(a, n) - c) * (mesh.nodes(a, n) - c);
    }
    if (dist < best_dist) {
      best_dist = dist;
      center = n;
    }
  }
  inits.push_back(hat(space, center));
  inits.push_back(space.interpolate([&](const auto& x) {
    Scalar v(1);
    for (int a = 0; a < mesh.dim(); ++a) {
      v *= std::sin(Scalar(M_PI) * (x(a) - Scalar(mesh.domain.lo[a])) / Scalar(mesh.domain.extent(a)));
    }
    return v;
  }));
  Rng rng(seed);
  for (int s = 0; s < starts; ++s) inits.push_back(random_field(space, rng));
  for (const auto& e : extra_starts) {
    space.check(e);
    inits.push_back(e);
  }

  const SparseMatrix<Scalar> stiff = stiffness_matrix(space);
  Eigen::SimplicialLDLT<SparseMatrix<Scalar>> riesz(stiff);
  if (riesz.info() != Eigen::Success) throw ComputationError("stiffness factorization failed");

  const auto results = parallel_map(inits.size(), [&](std::size_t i) {
    return detail::quotient_ascent<Scalar>(inits[i], p, q, space, riesz, stiff, opt);
  });

  EmbeddingEstimate<Scalar> est;
  est.safety_factor = Scalar(opt.safety_factor);
  for (std::size_t i = 0; i < results.size(); ++i) {
    est.start_values.push_back(results[i].value);
    if (!results[i].progressed) est.warning = true;
    if (est.best_start < 0 || results[i].value > est.estimate) {
      est.estimate = results[i].value;
      est.best_start = static_cast<int>(i);
      est.witness = results[i].u;
    }
  }
  est.witness /= sobolev_norm(est.witness, p, space);
  est.estimate = embedding_quotient(est.witness, p, q, space);
  est.effective = est.estimate * est.safety_factor;
  return est;
}

}  // namespace pxeig
