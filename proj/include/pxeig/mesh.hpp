#pragma once

// Uniform simplicial meshes of an interval or a rectangle, P1 elements vanishing
// on the boundary, and the quadrature tables every integral in the library uses.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "pxeig/error.hpp"
#include "pxeig/quadrature.hpp"

namespace pxeig {

/// Omega: an interval (dim 1) or an axis-aligned rectangle (dim 2).
struct Domain {
  int dim = 1;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};

  static Domain interval(double a, double b) { return Domain{1, {a, 0.0}, {b, 0.0}}; }
  static Domain rectangle(double x0, double x1, double y0, double y1) { return Domain{2, {x0, y0}, {x1, y1}}; }

  double extent(int axis) const { return hi[axis] - lo[axis]; }
  double measure() const { return dim == 1 ? extent(0) : extent(0) * extent(1); }

  void check() const {
    if (dim != 1 && dim != 2) throw PreconditionError("domain dimension must be 1 or 2");
    for (int a = 0; a < dim; ++a) {
      if (!(extent(a) > 0.0) || !std::isfinite(extent(a))) {
        throw PreconditionError("domain axis " + std::to_string(a) + " must have positive finite length");
      }
    }
  }
};

/// Axis-aligned box given by node-aligned bounds; unused axes are ignored in 1D.
struct Box {
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{0.0, 0.0};
};

template <typename Scalar>
struct Mesh {
  Domain domain;
  std::array<int, 2> cells{1, 1};
  std::array<Scalar, 2> h{Scalar(1), Scalar(1)};
  MatrixX<Scalar> nodes;  // 2 x n_nodes, y = 0 in 1D
  Eigen::MatrixXi elements;  // (dim+1) x n_elements
  std::vector<bool> boundary;
  VectorX<Scalar> measures;
  std::vector<int> interior_index;  // node -> dof, -1 on the boundary
  std::vector<int> interior_nodes;  // dof -> node

  int dim() const { return domain.dim; }
  int node_count() const { return static_cast<int>(nodes.cols()); }
  int element_count() const { return static_cast<int>(elements.cols()); }
  int interior_count() const { return static_cast<int>(interior_nodes.size()); }
  int nodes_per_axis(int axis) const { return cells[axis] + 1; }

  /// Grid node index of lattice coordinates (i, j).
  int node_id(int i, int j = 0) const { return j * nodes_per_axis(0) + i; }

  /// Grid cell (i, j) containing element e.
  std::array<int, 2> cell_of_element(int e) const {
    if (dim() == 1) return {e, 0};
    const int c = e / 2;
    return {c % cells[0], c / cells[0]};
  }
};

/// Uniform mesh with `resolution[a]` cells along axis a. In 2D each cell is split along
/// its (0,0)-(1,1) diagonal into two counter-clockwise triangles.
template <typename Scalar = double>
Mesh<Scalar> build_mesh(const Domain& domain, std::array<int, 2> resolution) {
  domain.check();
  for (int a = 0; a < domain.dim; ++a) {
    if (resolution[a] < 2) throw PreconditionError("resolution must be at least 2 cells per axis");
  }
  Mesh<Scalar> m;
  m.domain = domain;
  m.cells = {resolution[0], domain.dim == 2 ? resolution[1] : 1};
  for (int a = 0; a < 2; ++a) m.h[a] = Scalar(domain.extent(a)) / Scalar(m.cells[a]);

  const int nx = m.cells[0] + 1;
  const int ny = domain.dim == 2 ? m.cells[1] + 1 : 1;
  m.nodes.resize(2, nx * ny);
  m.boundary.assign(static_cast<std::size_t>(nx * ny), false);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int id = j * nx + i;
      // Coordinates from lattice indices so that the end nodes hit the bounds exactly.
      m.nodes(0, id) = i == m.cells[0] ? Scalar(domain.hi[0]) : Scalar(domain.lo[0]) + Scalar(i) * m.h[0];
      m.nodes(1, id) = domain.dim == 1
                           ? Scalar(0)
                           : (j == m.cells[1] ? Scalar(domain.hi[1]) : Scalar(domain.lo[1]) + Scalar(j) * m.h[1]);
      bool on_boundary = i == 0 || i == nx - 1;
      if (domain.dim == 2) on_boundary = on_boundary || j == 0 || j == ny - 1;
      m.boundary[static_cast<std::size_t>(id)] = on_boundary;
    }
  }

  if (domain.dim == 1) {
    m.elements.resize(2, m.cells[0]);
    for (int i = 0; i < m.cells[0]; ++i) {
      m.elements(0, i) = i;
      m.elements(1, i) = i + 1;
    }
  } else {
    m.elements.resize(3, 2 * m.cells[0] * m.cells[1]);
    int e = 0;
    for (int j = 0; j < m.cells[1]; ++j) {
      for (int i = 0; i < m.cells[0]; ++i) {
        const int n00 = j * nx + i, n10 = n00 + 1, n01 = n00 + nx, n11 = n01 + 1;
        m.elements.col(e++) << n00, n10, n11;
        m.elements.col(e++) << n00, n11, n01;
      }
    }
  }

  m.measures.resize(m.element_count());
  for (int e = 0; e < m.element_count(); ++e) {
    if (domain.dim == 1) {
      m.measures(e) = m.nodes(0, m.elements(1, e)) - m.nodes(0, m.elements(0, e));
    } else {
      const auto a = m.nodes.col(m.elements(0, e));
      const auto b = m.nodes.col(m.elements(1, e));
      const auto c = m.nodes.col(m.elements(2, e));
      m.measures(e) = ((b(0) - a(0)) * (c(1) - a(1)) - (c(0) - a(0)) * (b(1) - a(1))) / Scalar(2);
    }
  }

  m.interior_index.assign(static_cast<std::size_t>(m.node_count()), -1);
  for (int n = 0; n < m.node_count(); ++n) {
    if (!m.boundary[static_cast<std::size_t>(n)]) {
      m.interior_index[static_cast<std::size_t>(n)] = static_cast<int>(m.interior_nodes.size());
      m.interior_nodes.push_back(n);
    }
  }
  return m;
}

template <typename Scalar = double>
Mesh<Scalar> build_mesh(const Domain& domain, int resolution) {
  return build_mesh<Scalar>(domain, std::array<int, 2>{resolution, resolution});
}

/// Interior nodal values of a P1 function vanishing on the boundary. Boundary values are
/// not stored, so they are zero by construction.
template <typename Scalar>
using NodalField = VectorX<Scalar>;

/// One value per element (|grad u| is piecewise constant for P1).
template <typename Scalar>
using ElementField = VectorX<Scalar>;

/// P1 space on a mesh together with the quadrature tables of a fixed order.
template <typename Scalar = double>
class FeSpace {
 public:
  using Point = Eigen::Matrix<Scalar, 2, 1>;

  FeSpace(Mesh<Scalar> mesh, int order) : mesh_(std::move(mesh)), order_(order) {
    if (order < 1 || order > 5) throw PreconditionError("quadrature order must be in 1..5");
    const int d = mesh_.dim();
    const QuadratureRule<Scalar> ref = d == 1 ? segment_rule<Scalar>(order) : triangle_rule<Scalar>(order);
    per_element_ = static_cast<int>(ref.weights.size());

    // Barycentric shape values at the reference points.
    shape_.resize(d + 1, per_element_);
    for (int k = 0; k < per_element_; ++k) {
      Scalar rest(1);
      for (int a = 0; a < d; ++a) {
        shape_(a + 1, k) = ref.points(a, k);
        rest -= ref.points(a, k);
      }
      shape_(0, k) = rest;
    }

    const int ne = mesh_.element_count();
    points_.resize(2, static_cast<Eigen::Index>(ne) * per_element_);
    weights_.resize(static_cast<Eigen::Index>(ne) * per_element_);
    shape_grads_.resize(static_cast<std::size_t>(ne));
    const Scalar ref_measure = d == 1 ? Scalar(1) : Scalar(0.5);
    for (int e = 0; e < ne; ++e) {
      MatrixX<Scalar> verts(2, d + 1);
      for (int a = 0; a <= d; ++a) verts.col(a) = mesh_.nodes.col(mesh_.elements(a, e));
      for (int k = 0; k < per_element_; ++k) {
        const Eigen::Index q = static_cast<Eigen::Index>(e) * per_element_ + k;
        points_.col(q) = verts * shape_.col(k);
        weights_(q) = ref.weights(k) * mesh_.measures(e) / ref_measure;
      }
      shape_grads_[static_cast<std::size_t>(e)] = reference_gradients(verts);
    }
  }

  const Mesh<Scalar>& mesh() const { return mesh_; }
  int order() const { return order_; }
  int dim() const { return mesh_.dim(); }
  int dofs() const { return mesh_.interior_count(); }
  int points_per_element() const { return per_element_; }
  Eigen::Index point_count() const { return weights_.size(); }

  /// Physical quadrature points (2 x nq) and weights including the element measure.
  const MatrixX<Scalar>& points() const { return points_; }
  const VectorX<Scalar>& weights() const { return weights_; }
  /// Barycentric shape values at the reference points, (dim+1) x points_per_element.
  const MatrixX<Scalar>& shape_values() const { return shape_; }
  /// Constant gradients of the element's shape functions, dim x (dim+1).
  const MatrixX<Scalar>& shape_gradients(int e) const { return shape_grads_[static_cast<std::size_t>(e)]; }

  /// Interior degree of freedom of local vertex a of element e, or -1.
  int dof(int e, int a) const { return mesh_.interior_index[static_cast<std::size_t>(mesh_.elements(a, e))]; }

  NodalField<Scalar> zero() const { return NodalField<Scalar>::Zero(dofs()); }

  /// Full nodal vector including the (zero) boundary entries.
  VectorX<Scalar> to_full(const NodalField<Scalar>& u) const {
    check(u);
    VectorX<Scalar> full = VectorX<Scalar>::Zero(mesh_.node_count());
    for (int i = 0; i < dofs(); ++i) full(mesh_.interior_nodes[static_cast<std::size_t>(i)]) = u(i);
    return full;
  }

  /// Restriction of a full nodal vector; boundary entries are discarded.
  NodalField<Scalar> from_full(const VectorX<Scalar>& full) const {
    if (full.size() != mesh_.node_count()) throw PreconditionError("full nodal vector has wrong length");
    NodalField<Scalar> u(dofs());
    for (int i = 0; i < dofs(); ++i) u(i) = full(mesh_.interior_nodes[static_cast<std::size_t>(i)]);
    return u;
  }

  /// Nodal interpolant of f, forced to zero on the boundary.
  template <typename F>
  NodalField<Scalar> interpolate(F&& f) const {
    NodalField<Scalar> u(dofs());
    for (int i = 0; i < dofs(); ++i) {
      const int n = mesh_.interior_nodes[static_cast<std::size_t>(i)];
      u(i) = static_cast<Scalar>(f(Point(mesh_.nodes(0, n), mesh_.nodes(1, n))));
    }
    return u;
  }

  /// Values of the P1 interpolant at every quadrature point.
  VectorX<Scalar> values_at_points(const NodalField<Scalar>& u) const {
    check(u);
    const int d = dim();
    VectorX<Scalar> out(point_count());
    for (int e = 0; e < mesh_.element_count(); ++e) {
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> local(d + 1);
      for (int a = 0; a <= d; ++a) {
        const int i = dof(e, a);
        local(a) = i < 0 ? Scalar(0) : u(i);
      }
      out.segment(static_cast<Eigen::Index>(e) * per_element_, per_element_) = shape_.transpose() * local;
    }
    return out;
  }

  /// Constant gradient vector of u on every element (dim x n_elements).
  MatrixX<Scalar> element_gradients(const NodalField<Scalar>& u) const {
    check(u);
    const int d = dim();
    MatrixX<Scalar> g(d, mesh_.element_count());
    for (int e = 0; e < mesh_.element_count(); ++e) {
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> local(d + 1);
      for (int a = 0; a <= d; ++a) {
        const int i = dof(e, a);
        local(a) = i < 0 ? Scalar(0) : u(i);
      }
      g.col(e) = shape_grads_[static_cast<std::size_t>(e)] * local;
    }
    return g;
  }

  /// Repeats one value per element onto that element's quadrature points.
  VectorX<Scalar> expand(const ElementField<Scalar>& per_element) const {
    if (per_element.size() != mesh_.element_count()) throw PreconditionError("element field has wrong length");
    VectorX<Scalar> out(point_count());
    for (int e = 0; e < mesh_.element_count(); ++e) {
      out.segment(static_cast<Eigen::Index>(e) * per_element_, per_element_).setConstant(per_element(e));
    }
    return out;
  }

  /// Sum of weights times quadrature-point values, in pairwise order.
  Scalar integrate_values(const VectorX<Scalar>& at_points) const {
    return pairwise_sum(weights_.cwiseProduct(at_points));
  }

  /// Quadrature of a pointwise integrand f(Point).
  template <typename F>
  Scalar integrate(F&& f) const {
    VectorX<Scalar> vals(point_count());
    for (Eigen::Index q = 0; q < point_count(); ++q) vals(q) = static_cast<Scalar>(f(Point(points_.col(q))));
    return integrate_values(vals);
  }

  /// Point evaluation of the P1 interpolant (point must lie in the closed domain).
  Scalar evaluate(const NodalField<Scalar>& u, const Point& x) const {
    check(u);
    const auto& dom = mesh_.domain;
    std::array<Scalar, 2> local{};
    std::array<int, 2> cell{0, 0};
    for (int a = 0; a < dim(); ++a) {
      const Scalar s = (x(a) - Scalar(dom.lo[a])) / mesh_.h[a];
      if (s < Scalar(-1e-12) || s > Scalar(mesh_.cells[a]) + Scalar(1e-12)) {
        throw PreconditionError("evaluation point outside the domain");
      }
      cell[a] = std::clamp(static_cast<int>(std::floor(s)), 0, mesh_.cells[a] - 1);
      local[a] = std::clamp(s - Scalar(cell[a]), Scalar(0), Scalar(1));
    }
    auto nodal = [&](int i, int j) {
      const int idx = mesh_.interior_index[static_cast<std::size_t>(mesh_.node_id(cell[0] + i, cell[1] + j))];
      return idx < 0 ? Scalar(0) : u(idx);
    };
    if (dim() == 1) return (Scalar(1) - local[0]) * nodal(0, 0) + local[0] * nodal(1, 0);
    const Scalar s = local[0], t = local[1];
    // Lower triangle (n00, n10, n11) when t <= s, upper (n00, n11, n01) otherwise.
    if (t <= s) return (Scalar(1) - s) * nodal(0, 0) + (s - t) * nodal(1, 0) + t * nodal(1, 1);
    return (Scalar(1) - t) * nodal(0, 0) + s * nodal(1, 1) + (t - s) * nodal(0, 1);
  }

  void check(const NodalField<Scalar>& u) const {
    if (u.size() != dofs()) throw PreconditionError("nodal field does not conform to the mesh");
  }

 private:
  static MatrixX<Scalar> reference_gradients(const MatrixX<Scalar>& verts) {
    const int d = static_cast<int>(verts.cols()) - 1;
    MatrixX<Scalar> g(d, d + 1);
    if (d == 1) {
      const Scalar len = verts(0, 1) - verts(0, 0);
      g << -Scalar(1) / len, Scalar(1) / len;
      return g;
    }
    Eigen::Matrix<Scalar, 2, 2> jac;
    jac.col(0) = verts.col(1) - verts.col(0);
    jac.col(1) = verts.col(2) - verts.col(0);
    const Eigen::Matrix<Scalar, 2, 2> inv_t = jac.inverse().transpose();
    Eigen::Matrix<Scalar, 2, 3> ref;
    ref << -1, 1, 0, -1, 0, 1;
    g = inv_t * ref;
    return g;
  }

  Mesh<Scalar> mesh_;
  int order_;
  int per_element_ = 0;
  MatrixX<Scalar> shape_;
  MatrixX<Scalar> points_;
  VectorX<Scalar> weights_;
  std::vector<MatrixX<Scalar>> shape_grads_;
};

/// |grad u| per element.
template <typename Scalar>
ElementField<Scalar> gradient(const NodalField<Scalar>& u, const FeSpace<Scalar>& space) {
  return space.element_gradients(u).colwise().norm().transpose();
}

/// Quadrature of f over the mesh with a rule of the given order.
template <typename Scalar, typename F>
Scalar integrate(F&& f, const Mesh<Scalar>& mesh, int order) {
  return FeSpace<Scalar>(mesh, order).integrate(std::forward<F>(f));
}

/// Single interior hat function at node `node`.
template <typename Scalar>
NodalField<Scalar> hat(const FeSpace<Scalar>& space, int node) {
  const int idx = space.mesh().interior_index.at(static_cast<std::size_t>(node));
  if (idx < 0) throw PreconditionError("hat function requested at a boundary node");
  NodalField<Scalar> u = space.zero();
  u(idx) = Scalar(1);
  return u;
}

}  // namespace pxeig
