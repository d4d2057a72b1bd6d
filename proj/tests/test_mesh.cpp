#include <cmath>

#include "doctest.h"
#include "pxeig/random.hpp"
#include "support.hpp"

using namespace pxeig;
using pxeig::test::interval_space;
using pxeig::test::square_space;

namespace {

double signed_area(const Mesh<double>& m, int e) {
  const auto a = m.nodes.col(m.elements(0, e)), b = m.nodes.col(m.elements(1, e)), c = m.nodes.col(m.elements(2, e));
  return 0.5 * ((b(0) - a(0)) * (c(1) - a(1)) - (c(0) - a(0)) * (b(1) - a(1)));
}

bool on_boundary(const Mesh<double>& m, int n) {
  for (int a = 0; a < m.dim(); ++a) {
    if (m.nodes(a, n) == m.domain.lo[a] || m.nodes(a, n) == m.domain.hi[a]) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("meshfe") {
  TEST_CASE("interval mesh counts") {
    const auto m = build_mesh(Domain::interval(0, 1), 4);
    CHECK(m.node_count() == 5);
    CHECK(m.element_count() == 4);
    std::vector<int> marked;
    for (int i = 0; i < m.node_count(); ++i) {
      if (m.boundary[static_cast<std::size_t>(i)]) marked.push_back(i);
    }
    REQUIRE(marked.size() == 2);
    CHECK(m.nodes(0, marked[0]) == 0.0);
    CHECK(m.nodes(0, marked[1]) == 1.0);
  }

  TEST_CASE("square mesh counts and orientation") {
    const auto m = build_mesh(Domain::rectangle(0, 1, 0, 1), 2);
    CHECK(m.node_count() == 9);
    CHECK(m.element_count() == 8);
    CHECK(m.interior_count() == 1);
    for (int e = 0; e < m.element_count(); ++e) CHECK(signed_area(m, e) > 0.0);
  }

  TEST_CASE("resolution below two is rejected") {
    CHECK_THROWS_AS(build_mesh(Domain::interval(0, 1), 1), PreconditionError);
    CHECK_THROWS_AS(build_mesh(Domain::rectangle(0, 1, 0, 1), std::array<int, 2>{4, 1}), PreconditionError);
    CHECK_THROWS_AS(build_mesh(Domain::interval(1, 1), 4), PreconditionError);
  }

  TEST_CASE("measures are positive and sum to the domain measure") {
    for (const Domain& d : {Domain::interval(-0.5, 2.0), Domain::rectangle(0, 2, -1, 0.5), Domain::rectangle(0, 1, 0, 1)}) {
      for (int n : {2, 3, 17, 64}) {
        const auto m = build_mesh(d, std::array<int, 2>{n, n + 1});
        CHECK(m.measures.minCoeff() > 0.0);
        CHECK(std::abs(m.measures.sum() - d.measure()) <= 1e-12 * d.measure());
        for (int i = 0; i < m.node_count(); ++i) CHECK(m.boundary[static_cast<std::size_t>(i)] == on_boundary(m, i));
      }
    }
  }

  TEST_CASE("integrate(1) equals the measure for every order") {
    for (int order = 1; order <= 5; ++order) {
      const auto m = build_mesh(Domain::rectangle(0, 2, -1, 0.5), std::array<int, 2>{7, 5});
      CHECK(integrate([](const auto&) { return 1.0; }, m, order) == doctest::Approx(3.0).epsilon(1e-12));
    }
    CHECK_THROWS_AS(FeSpace<double>(build_mesh(Domain::interval(0, 1), 4), 6), PreconditionError);
    CHECK_THROWS_AS(FeSpace<double>(build_mesh(Domain::interval(0, 1), 4), 0), PreconditionError);
  }

  TEST_CASE("polynomial exactness on intervals") {
    const auto m = build_mesh(Domain::interval(0, 1), 8);
    for (int order = 1; order <= 5; ++order) {
      CHECK(std::abs(integrate([](const auto& x) { return x(0); }, m, order) - 0.5) <= 1e-14);
    }
    CHECK(std::abs(integrate([](const auto& x) { return std::pow(x(0), 3); }, m, 2) - 0.25) <= 1e-14);
    CHECK(std::abs(integrate([](const auto& x) { return std::pow(x(0), 9); }, m, 5) - 0.1) <= 1e-14);
  }

  TEST_CASE("polynomial exactness on triangles") {
    const auto m = build_mesh(Domain::rectangle(0, 1, 0, 1), 3);
    for (int order = 1; order <= 5; ++order) {
      const int degree = 2 * order - 1;
      for (int a = 0; a <= degree; ++a) {
        for (int b = 0; a + b <= degree; ++b) {
          const double got = integrate([&](const auto& x) { return std::pow(x(0), a) * std::pow(x(1), b); }, m, order);
          CHECK(got == doctest::Approx(1.0 / ((a + 1) * (b + 1))).epsilon(1e-13));
        }
      }
    }
  }

  TEST_CASE("quadrature weights are positive") {
    for (int order = 1; order <= 5; ++order) {
      CHECK(interval_space(5, order)->weights().minCoeff() > 0.0);
      CHECK(square_space(3, order)->weights().minCoeff() > 0.0);
    }
  }

  TEST_CASE("x^(2+x) converges to the adaptive-quadrature reference") {
    double prev_err = 1.0;
    for (int n = 16; n <= 256; n *= 2) {
      const double got = integrate([](const auto& x) { return std::pow(x(0), 2 + x(0)); },
                                   build_mesh(Domain::interval(0, 1), n), 5);
      const double err = std::abs(got - test::kIntegralXPow2PlusX);
      CHECK(err <= prev_err);
      prev_err = err;
    }
    CHECK(prev_err < 1e-14);
  }

  TEST_CASE("refinement differences decrease") {
    auto f = [](const auto& x) { return std::sin(3 * x(0)) * std::exp(x(0)) + std::cos(2 * x(1)); };
    std::vector<double> values;
    for (int n = 4; n <= 256; n *= 2) values.push_back(integrate(f, build_mesh(Domain::rectangle(0, 1, 0, 1), n), 1));
    for (std::size_t i = 2; i < values.size(); ++i) {
      CHECK(std::abs(values[i] - values[i - 1]) < std::abs(values[i - 1] - values[i - 2]));
    }
  }

  TEST_CASE("gradient of a hat") {
    const auto space = interval_space(2);
    const NodalField<double> u = hat(*space, 1);
    const auto g = gradient(u, *space);
    CHECK(g.size() == 2);
    CHECK(g(0) == 2.0);
    CHECK(g(1) == 2.0);
    CHECK(gradient(space->zero(), *space).isZero(0));
    CHECK_THROWS_AS(hat(*space, 0), PreconditionError);
  }

  TEST_CASE("2D gradients match per-element finite differences") {
    const auto space = square_space(8);
    const auto& m = space->mesh();
    const NodalField<double> u = space->interpolate([](const auto& x) { return x(0); });
    const VectorX<double> full = space->to_full(u);
    const MatrixX<double> g = space->element_gradients(u);
    int checked = 0;
    for (int e = 0; e < m.element_count(); ++e) {
      bool interior = true;
      for (int a = 0; a < 3; ++a) interior = interior && !m.boundary[static_cast<std::size_t>(m.elements(a, e))];
      if (!interior) continue;
      double gx = NAN, gy = NAN;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const int i = m.elements(a, e), j = m.elements(b, e);
          const double dx = m.nodes(0, j) - m.nodes(0, i), dy = m.nodes(1, j) - m.nodes(1, i);
          if (dx > 0 && dy == 0) gx = (full(j) - full(i)) / dx;
          if (dy > 0 && dx == 0) gy = (full(j) - full(i)) / dy;
        }
      }
      CHECK(std::abs(g(0, e) - gx) <= 1e-12);
      CHECK(std::abs(g(1, e) - gy) <= 1e-12);
      CHECK(std::abs(g(0, e) - 1.0) <= 1e-12);
      ++checked;
    }
    CHECK(checked > 0);
  }

  TEST_CASE("gradient components are linear") {
    const auto space = square_space(4);
    Rng rng(3);
    // Dyadic data keeps every operation exact.
    NodalField<double> u(space->dofs()), v(space->dofs());
    for (int i = 0; i < space->dofs(); ++i) {
      u(i) = static_cast<double>(static_cast<int>(rng.next() % 17) - 8);
      v(i) = static_cast<double>(static_cast<int>(rng.next() % 17) - 8);
    }
    const MatrixX<double> lhs = space->element_gradients(NodalField<double>(0.5 * u - 2.0 * v));
    const MatrixX<double> rhs = 0.5 * space->element_gradients(u) - 2.0 * space->element_gradients(v);
    CHECK(lhs == rhs);

    const NodalField<double> a = random_field(*space, rng), b = random_field(*space, rng);
    const MatrixX<double> l2 = space->element_gradients(NodalField<double>(0.3 * a + 1.7 * b));
    const MatrixX<double> r2 = 0.3 * space->element_gradients(a) + 1.7 * space->element_gradients(b);
    CHECK((l2 - r2).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("boundary values are zero by construction") {
    const auto space = square_space(6);
    const NodalField<double> u = space->interpolate([](const auto&) { return 1.0; });
    const VectorX<double> full = space->to_full(u);
    const auto& m = space->mesh();
    for (int i = 0; i < m.node_count(); ++i) {
      if (m.boundary[static_cast<std::size_t>(i)]) CHECK(full(i) == 0.0);
    }
    CHECK(space->from_full(full) == u);
    CHECK_THROWS_AS(space->check(NodalField<double>::Zero(3)), PreconditionError);
  }

  TEST_CASE("point evaluation reproduces the interpolant") {
    const auto space = square_space(8);
    auto f = [](const auto& x) { return 2.0 * x(0) - 3.0 * x(1) + 0.5; };
    const NodalField<double> u = space->interpolate(f);
    // Away from the boundary ring the interpolant of a linear function is exact.
    for (double x : {0.3, 0.41, 0.5, 0.66}) {
      for (double y : {0.3, 0.47, 0.52, 0.7}) {
        CHECK(space->evaluate(u, {x, y}) == doctest::Approx(f(Eigen::Vector2d(x, y))).epsilon(1e-12));
      }
    }
    CHECK(space->evaluate(u, {0.0, 0.5}) == 0.0);
    CHECK_THROWS_AS((void)space->evaluate(u, {1.5, 0.5}), PreconditionError);
  }
}
