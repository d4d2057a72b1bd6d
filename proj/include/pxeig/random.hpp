#pragma once

#include <cstdint>
#include <random>

#include "pxeig/mesh.hpp"

namespace pxeig {

/// Seeded generator with a portable mapping to [0, 1), so draws are identical across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Nodal field with independent uniform(-1, 1) interior values.
template <typename Scalar>
NodalField<Scalar> random_field(const FeSpace<Scalar>& space, Rng& rng) {
  NodalField<Scalar> u(space.dofs());
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = Scalar(rng.uniform(-1.0, 1.0));
  return u;
}

/// Smooth random field: a few random sine modes times random amplitudes.
template <typename Scalar>
NodalField<Scalar> random_smooth_field(const FeSpace<Scalar>& space, Rng& rng, int modes = 4) {
  const auto& dom = space.mesh().domain;
  NodalField<Scalar> u = space.zero();
  for (int m = 0; m < modes; ++m) {
    const double amp = rng.uniform(-1.0, 1.0);
    const int kx = 1 + static_cast<int>(rng.next() % 5);
    const int ky = 1 + static_cast<int>(rng.next() % 5);
    u += space.interpolate([&](const auto& x) {
      const double sx = std::sin(kx * M_PI * (static_cast<double>(x(0)) - dom.lo[0]) / dom.extent(0));
      const double sy = dom.dim == 2 ? std::sin(ky * M_PI * (static_cast<double>(x(1)) - dom.lo[1]) / dom.extent(1)) : 1.0;
      return Scalar(amp * sx * sy);
    });
  }
  return u;
}

}  // namespace pxeig
