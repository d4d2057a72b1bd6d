#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "pxeig/mesh.hpp"

namespace pxeig {

template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar>;

/// Weighted P1 stiffness matrix on the interior dofs: sum_e w_e |e| grad(phi_a).grad(phi_b).
template <typename Scalar>
SparseMatrix<Scalar> stiffness_matrix(const FeSpace<Scalar>& space, const ElementField<Scalar>& weights) {
  const auto& mesh = space.mesh();
  const int d = mesh.dim();
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.element_count() * (d + 1) * (d + 1)));
  for (int e = 0; e < mesh.element_count(); ++e) {
    const MatrixX<Scalar>& g = space.shape_gradients(e);
    const MatrixX<Scalar> local = weights(e) * mesh.measures(e) * (g.transpose() * g);
    for (int a = 0; a <= d; ++a) {
      const int i = space.dof(e, a);
      if (i < 0) continue;
      for (int b = 0; b <= d; ++b) {
        const int j = space.dof(e, b);
        if (j >= 0) triplets.emplace_back(i, j, local(a, b));
      }
    }
  }
  SparseMatrix<Scalar> k(space.dofs(), space.dofs());
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

/// Unweighted (linear-case) stiffness matrix.
template <typename Scalar>
SparseMatrix<Scalar> stiffness_matrix(const FeSpace<Scalar>& space) {
  return stiffness_matrix(space, ElementField<Scalar>(ElementField<Scalar>::Ones(space.mesh().element_count())));
}

}  // namespace pxeig
