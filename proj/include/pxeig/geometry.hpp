#pragma once

// Plateau bumps where q is close to q-, the small-t threshold on which J(t phi) < 0,
// the Rayleigh-quotient sweep showing inf int|grad u|^p / int|u|^q = 0, and the
// direction psi along which J(t psi) -> -infinity when p+ < q+.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <vector>

#include "pxeig/energy.hpp"
#include "pxeig/lebesgue.hpp"
#include "pxeig/sobolev.hpp"

namespace pxeig {

/// A box of grid cells [lo, hi) in lattice units.
struct CellBox {
  std::array<int, 2> lo{0, 0};
  std::array<int, 2> hi{0, 0};

  int extent(int axis) const { return hi[axis] - lo[axis]; }
  bool empty(int dim) const {
    for (int a = 0; a < dim; ++a) {
      if (extent(a) <= 0) return true;
    }
    return false;
  }
};

namespace detail {

/// Largest-area box of cells on which `ok(i, j)` holds (histogram method). Ties keep the
/// first box found scanning rows bottom-up and columns left to right.
template <typename Scalar>
std::optional<CellBox> largest_cell_box(const Mesh<Scalar>& mesh, const std::function<bool(int, int)>& ok) {
  const int nx = mesh.cells[0], ny = mesh.dim() == 2 ? mesh.cells[1] : 1;
  std::vector<int> height(static_cast<std::size_t>(nx), 0);
  std::optional<CellBox> best;
  long best_area = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) height[static_cast<std::size_t>(i)] = ok(i, j) ? height[static_cast<std::size_t>(i)] + 1 : 0;
    std::vector<int> stack;
    for (int i = 0; i <= nx; ++i) {
      const int hcur = i == nx ? 0 : height[static_cast<std::size_t>(i)];
      while (!stack.empty() && height[static_cast<std::size_t>(stack.back())] >= hcur) {
        const int top = stack.back();
        stack.pop_back();
        const int hh = height[static_cast<std::size_t>(top)];
        const int left = stack.empty() ? 0 : stack.back() + 1;
        const long area = static_cast<long>(hh) * (i - left);
        if (hh > 0 && area > best_area) {
          best_area = area;
          best = CellBox{{left, j - hh + 1}, {i, j + 1}};
        }
      }
      stack.push_back(i);
    }
  }
  return best;
}

/// Extreme value of an exponent over the quadrature points and vertices of grid cell (i, j).
template <typename Scalar>
Scalar cell_extreme(const FeSpace<Scalar>& space, const SampledExponent<Scalar>& e, int i, int j, bool want_max) {
  const auto& mesh = space.mesh();
  const int per_cell = mesh.dim() == 1 ? 1 : 2;
  const int first = mesh.dim() == 1 ? i : 2 * (j * mesh.cells[0] + i);
  const int m = space.points_per_element();
  Scalar out = want_max ? -std::numeric_limits<Scalar>::infinity() : std::numeric_limits<Scalar>::infinity();
  auto take = [&](Scalar v) { out = want_max ? std::max(out, v) : std::min(out, v); };
  for (int el = first; el < first + per_cell; ++el) {
    for (int k = 0; k < m; ++k) take(e.at_points(static_cast<Eigen::Index>(el) * m + k));
    for (int a = 0; a <= mesh.dim(); ++a) take(e.at_nodes(mesh.elements(a, el)));
  }
  return out;
}

template <typename Scalar>
Box to_box(const Mesh<Scalar>& mesh, const CellBox& cells) {
  Box b;
  for (int a = 0; a < mesh.dim(); ++a) {
    b.lo[a] = mesh.domain.lo[a] + cells.lo[a] * static_cast<double>(mesh.h[a]);
    b.hi[a] = cells.hi[a] == mesh.cells[a] ? mesh.domain.hi[a] : mesh.domain.lo[a] + cells.hi[a] * static_cast<double>(mesh.h[a]);
  }
  return b;
}

}  // namespace detail

/// Plateau box plus the ramp width that surrounds it.
struct PlateauChoice {
  Box plateau;
  Box region;  // admissible cell box before shrinking
  double ramp_width = 0.0;
};

namespace detail {

/// Shrinks an admissible cell box by the ramp on every side. Without an explicit ramp
/// width the ramp is a quarter of the box's shortest side (at least one cell).
template <typename Scalar>
PlateauChoice shrink_for_ramp(const Mesh<Scalar>& mesh, const CellBox& region, std::optional<double> ramp_width) {
  const int d = mesh.dim();
  PlateauChoice pc;
  pc.region = to_box(mesh, region);
  if (ramp_width) {
    if (!(*ramp_width > 0.0)) throw PreconditionError("ramp width must be positive");
    pc.ramp_width = *ramp_width;
  } else {
    double shortest = std::numeric_limits<double>::infinity();
    for (int a = 0; a < d; ++a) shortest = std::min(shortest, pc.region.hi[a] - pc.region.lo[a]);
    pc.ramp_width = shortest / 4.0;
    for (int a = 0; a < d; ++a) pc.ramp_width = std::max(pc.ramp_width, static_cast<double>(mesh.h[a]));
  }
  CellBox shrunk = region;
  for (int a = 0; a < d; ++a) {
    const int r = static_cast<int>(std::ceil(pc.ramp_width / static_cast<double>(mesh.h[a]) - 1e-9));
    shrunk.lo[a] += r;
    shrunk.hi[a] -= r;
  }
  if (shrunk.empty(d)) {
    throw ComputationError("plateau region is empty after reserving the ramp margin; region too small for this mesh");
  }
  pc.plateau = to_box(mesh, shrunk);
  return pc;
}

}  // namespace detail

/// Largest box of cells on which q <= q- + eps0 at every sample point, shrunk on all
/// sides by the ramp so that plateau plus ramp stays inside that box.
template <typename Scalar>
PlateauChoice choose_plateau(const SampledExponent<Scalar>& q, const SampledExponent<Scalar>& p,
                             const FeSpace<Scalar>& space, double eps0, std::optional<double> ramp_width = {}) {
  if (!(eps0 > 0.0)) throw PreconditionError("eps0 must be positive");
  if (!(static_cast<double>(q.lower) + eps0 < static_cast<double>(p.lower))) {
    throw PreconditionError("need q- + eps0 < p-");
  }
  const Scalar level = q.lower + Scalar(eps0);
  const auto region = detail::largest_cell_box<Scalar>(
      space.mesh(), [&](int i, int j) { return detail::cell_extreme(space, q, i, j, true) <= level; });
  if (!region) throw ComputationError("no mesh cell satisfies q <= q- + eps0; eps0 too small for this mesh");
  return detail::shrink_for_ramp(space.mesh(), *region, ramp_width);
}

/// Nodal interpolant of min(1, max(0, 1 - dist(x, plateau) / ramp)), dist in the max-norm.
template <typename Scalar>
NodalField<Scalar> build_bump(const FeSpace<Scalar>& space, const Box& plateau, double ramp_width) {
  const auto& dom = space.mesh().domain;
  if (!(ramp_width > 0.0)) throw PreconditionError("ramp width must be positive");
  for (int a = 0; a < dom.dim; ++a) {
    const double tol = 1e-12 * dom.extent(a);
    if (!(plateau.lo[a] < plateau.hi[a]) || plateau.lo[a] - ramp_width < dom.lo[a] - tol ||
        plateau.hi[a] + ramp_width > dom.hi[a] + tol) {
      throw PreconditionError("plateau plus ramp does not fit inside the domain");
    }
  }
  return space.interpolate([&](const auto& x) {
    double dist = 0.0;
    for (int a = 0; a < dom.dim; ++a) {
      const double xa = static_cast<double>(x(a));
      dist = std::max(dist, std::max(plateau.lo[a] - xa, xa - plateau.hi[a]));
    }
    return Scalar(std::clamp(1.0 - dist / ramp_width, 0.0, 1.0));
  });
}

template <typename Scalar>
struct BumpSpec {
  double eps0 = 0.0;
  PlateauChoice choice;
  NodalField<Scalar> phi;
  std::vector<int> plateau_elements;  // discrete Omega_0: elements inside the plateau with phi == 1
  Scalar norm = Scalar(0);            // ||phi||
};

/// Elements whose vertices all lie in `plateau` and carry phi == 1.
template <typename Scalar>
std::vector<int> plateau_elements(const FeSpace<Scalar>& space, const NodalField<Scalar>& phi, const Box& plateau) {
  const auto& mesh = space.mesh();
  std::vector<int> out;
  for (int e = 0; e < mesh.element_count(); ++e) {
    bool inside = true;
    for (int a = 0; a <= mesh.dim() && inside; ++a) {
      const int n = mesh.elements(a, e);
      const int i = space.dof(e, a);
      if (i < 0 || phi(i) != Scalar(1)) inside = false;
      for (int ax = 0; ax < mesh.dim() && inside; ++ax) {
        const double x = static_cast<double>(mesh.nodes(ax, n));
        const double tol = 1e-12 * mesh.domain.extent(ax);
        if (x < plateau.lo[ax] - tol || x > plateau.hi[ax] + tol) inside = false;
      }
    }
    if (inside) out.push_back(e);
  }
  return out;
}

/// Plateau bump for the small-t estimate. Verifies q <= q- + eps0 on Omega_0, 0 <= phi <= 1
/// and ||phi|| > 0.
template <typename Scalar>
BumpSpec<Scalar> make_bump(const EnergySetup<Scalar>& setup, double eps0, std::optional<double> ramp_width = {}) {
  const auto& space = *setup.space;
  BumpSpec<Scalar> b;
  b.eps0 = eps0;
  b.choice = choose_plateau(setup.q, setup.p, space, eps0, ramp_width);
  b.phi = build_bump(space, b.choice.plateau, b.choice.ramp_width);
  b.plateau_elements = plateau_elements(space, b.phi, b.choice.plateau);
  if (b.plateau_elements.empty()) throw ComputationError("bump plateau contains no complete element");
  const Scalar level = setup.q.lower + Scalar(eps0);
  const int m = space.points_per_element();
  for (int e : b.plateau_elements) {
    for (int k = 0; k < m; ++k) {
      if (setup.q.at_points(static_cast<Eigen::Index>(e) * m + k) > level) {
        throw ComputationError("q exceeds q- + eps0 inside the plateau");
      }
    }
  }
  if (b.phi.minCoeff() < Scalar(0) || b.phi.maxCoeff() > Scalar(1)) throw ComputationError("bump leaves [0, 1]");
  b.norm = sobolev_norm(b.phi, setup.p, space);
  if (!(b.norm > Scalar(0))) throw ComputationError("bump has zero norm");
  return b;
}

/// Default exponent margin eps0 = (p- - q-) / 2.
template <typename Scalar>
double default_eps0(const EnergySetup<Scalar>& setup) {
  return 0.5 * static_cast<double>(setup.p.lower - setup.q.lower);
}

template <typename Scalar>
struct ThresholdReport {
  Scalar delta;
  Scalar exponent;  // 1 / (p- - q- - eps0)
  Scalar t_max;     // delta^exponent
  Scalar plateau_integral;   // int_{Omega_0} |phi|^q
  Scalar gradient_integral;  // int |grad phi|^p
  Scalar ratio;              // (lambda p- / q+) plateau_integral / gradient_integral
};

/// delta = 0.99 min(1, ratio) and t_max = delta^{1/(p- - q- - eps0)}: J(t phi) < 0 for 0 < t <= t_max.
template <typename Scalar>
ThresholdReport<Scalar> threshold(const EnergySetup<Scalar>& setup, const BumpSpec<Scalar>& bump) {
  const auto& space = *setup.space;
  const Scalar gap = setup.p.lower - setup.q.lower - Scalar(bump.eps0);
  if (!(gap > Scalar(0))) throw PreconditionError("need q- + eps0 < p-");
  ThresholdReport<Scalar> r{};
  r.gradient_integral = modular_values<Scalar>(space.expand(gradient(bump.phi, space)), setup.p.at_points, space.weights());
  const VectorX<Scalar> phiq = space.values_at_points(bump.phi);
  const int m = space.points_per_element();
  VectorX<Scalar> terms = VectorX<Scalar>::Zero(static_cast<Eigen::Index>(bump.plateau_elements.size()) * m);
  Eigen::Index t = 0;
  for (int e : bump.plateau_elements) {
    for (int k = 0; k < m; ++k, ++t) {
      const Eigen::Index i = static_cast<Eigen::Index>(e) * m + k;
      terms(t) = space.weights()(i) * std::pow(std::abs(phiq(i)), setup.q.at_points(i));
    }
  }
  r.plateau_integral = pairwise_sum(terms);
  r.ratio = setup.lambda * setup.p.lower / setup.q.upper * r.plateau_integral / r.gradient_integral;
  r.delta = Scalar(0.99) * std::min(Scalar(1), r.ratio);
  r.exponent = Scalar(1) / gap;
  r.t_max = std::pow(r.delta, r.exponent);
  return r;
}

template <typename Scalar>
struct RaySample {
  Scalar t;
  Scalar value;
};

template <typename Scalar>
struct RayCheck {
  bool pass = false;
  std::vector<RaySample<Scalar>> samples;  // (t, J(t phi))
  std::optional<Scalar> offending_t;
};

/// J(t phi) on t = t_max 2^-k, k = 0..samples-1; PASS iff every value is negative.
/// With t_max = 0 (lambda = 0) the grid starts at t = 1 instead.
template <typename Scalar>
RayCheck<Scalar> negative_ray_check(const EnergySetup<Scalar>& setup, const BumpSpec<Scalar>& bump,
                                    const ThresholdReport<Scalar>& thr, int samples = 30) {
  RayCheck<Scalar> rc;
  rc.pass = true;
  Scalar t = thr.t_max > Scalar(0) ? thr.t_max : Scalar(1);
  for (int k = 0; k < samples; ++k, t /= Scalar(2)) {
    const Scalar j = energy(setup, NodalField<Scalar>(t * bump.phi));
    rc.samples.push_back({t, j});
    if (!(j < Scalar(0)) && rc.pass) {
      rc.pass = false;
      rc.offending_t = t;
    }
  }
  return rc;
}

/// int |grad u|^p / int |u|^q.
template <typename Scalar>
Scalar rayleigh_quotient(const NodalField<Scalar>& u, const SampledExponent<Scalar>& p,
                         const SampledExponent<Scalar>& q, const FeSpace<Scalar>& space) {
  const Scalar den = modular(u, q, space);
  if (!(den > Scalar(0))) throw PreconditionError("Rayleigh quotient: zero denominator");
  return modular_values<Scalar>(space.expand(gradient(u, space)), p.at_points, space.weights()) / den;
}

template <typename Scalar>
struct RayleighSweep {
  std::vector<RaySample<Scalar>> samples;  // (t, R(t phi)), t = 2^-k
  Scalar fitted_constant;  // max_k R(t phi) / t^{p- - q- - eps0}
  bool strictly_decreasing = false;
};

template <typename Scalar>
RayleighSweep<Scalar> rayleigh_sweep(const EnergySetup<Scalar>& setup, const BumpSpec<Scalar>& bump, int kmax = 20) {
  RayleighSweep<Scalar> s{{}, Scalar(0), true};
  const Scalar decay = setup.p.lower - setup.q.lower - Scalar(bump.eps0);
  Scalar t(1);
  for (int k = 0; k <= kmax; ++k, t /= Scalar(2)) {
    const Scalar r = rayleigh_quotient(NodalField<Scalar>(t * bump.phi), setup.p, setup.q, *setup.space);
    if (!s.samples.empty() && !(r < s.samples.back().value)) s.strictly_decreasing = false;
    s.samples.push_back({t, r});
    s.fitted_constant = std::max(s.fitted_constant, r / std::pow(t, decay));
  }
  return s;
}

template <typename Scalar>
struct SmallQuotientWitness {
  Scalar t;
  Scalar gradient_modular;  // int |grad u0|^p
  Scalar lebesgue_modular;  // int |u0|^q
  bool found = false;
};

/// First u0 = 2^-k phi with C int|u0|^q >= int|grad u0|^p, k = 0..kmax.
template <typename Scalar>
SmallQuotientWitness<Scalar> small_quotient_witness(const EnergySetup<Scalar>& setup, const BumpSpec<Scalar>& bump,
                                                    Scalar c, int kmax = 200) {
  const auto& space = *setup.space;
  SmallQuotientWitness<Scalar> w{};
  Scalar t(1);
  for (int k = 0; k <= kmax; ++k, t /= Scalar(2)) {
    const NodalField<Scalar> u0 = t * bump.phi;
    w.t = t;
    w.gradient_modular = modular_values<Scalar>(space.expand(gradient(u0, space)), setup.p.at_points, space.weights());
    w.lebesgue_modular = modular(u0, setup.q, space);
    if (c * w.lebesgue_modular >= w.gradient_modular) {
      w.found = true;
      return w;
    }
  }
  return w;
}

template <typename Scalar>
struct UnboundedTrace {
  NodalField<Scalar> psi;
  PlateauChoice choice;
  std::vector<RaySample<Scalar>> trace;  // (2^k, J(2^k psi))
};

/// Bump psi supported where q > p+ + margin, and the trace J(2^k psi), k = 0..kmax.
template <typename Scalar>
UnboundedTrace<Scalar> unbounded_direction(const EnergySetup<Scalar>& setup, double margin = 0.1, int kmax = 40) {
  if (!(setup.p.upper < setup.q.upper)) throw PreconditionError("need max p < max q");
  const auto& space = *setup.space;
  const Scalar level = setup.p.upper + Scalar(margin);
  const auto region = detail::largest_cell_box<Scalar>(
      space.mesh(), [&](int i, int j) { return detail::cell_extreme(space, setup.q, i, j, false) > level; });
  if (!region) {
    std::ostringstream os;
    os << "no mesh cell has q > p+ + " << margin;
    throw ComputationError(os.str());
  }
  UnboundedTrace<Scalar> out;
  out.choice = detail::shrink_for_ramp(space.mesh(), *region, std::nullopt);
  out.psi = build_bump(space, out.choice.plateau, out.choice.ramp_width);
  Scalar t(1);
  for (int k = 0; k <= kmax; ++k, t *= Scalar(2)) {
    out.trace.push_back({t, energy(setup, NodalField<Scalar>(t * out.psi))});
  }
  return out;
}

}  // namespace pxeig
