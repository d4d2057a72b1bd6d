#pragma once

// Shared fixtures and frozen reference values for the unit and acceptance tests.

#include <memory>

#include "pxeig/ekeland.hpp"

namespace pxeig::test {

// Reference values computed by tests/oracles/compute_oracles.py (mpmath, 40 digits).
inline constexpr double kIntegralXPow2PlusX = 0.27811761219970833834;  // int_0^1 x^{2+x}
inline constexpr double kModularTwo2PlusX = 5.7707801635558536294;     // int_0^1 2^{2+x} = 4/ln 2
inline constexpr double kLuxemburgX2PlusX = 0.63089565052899666362;    // |x|_{2+x} on (0,1)
inline constexpr double kEnergyHatFixtureA = 2.4511672831421589873;    // J(hat), lambda = 0.01
inline constexpr double kBumpGradientModular = 434.31600864526662137;  // int |grad phi|^p
inline constexpr double kBumpPlateauIntegral = 0.125;                  // int_{Omega_0} phi^q
inline constexpr double kBumpDelta = 2.0352198717835700363e-6;         // delta at lambda = 0.01
inline constexpr double kP1FirstEigenvalue256 = 9.8697282637755341316;  // 6/h^2 (1-cos pi h)/(2+cos pi h)
inline constexpr double kPiSquared = 9.8696044010893586188;

inline std::shared_ptr<const FeSpace<double>> interval_space(int cells, int order = 3, double a = 0.0,
                                                             double b = 1.0) {
  return std::make_shared<const FeSpace<double>>(build_mesh(Domain::interval(a, b), cells), order);
}

inline std::shared_ptr<const FeSpace<double>> square_space(int cells, int order = 3) {
  return std::make_shared<const FeSpace<double>>(build_mesh(Domain::rectangle(0, 1, 0, 1), cells), order);
}

inline const ExponentField& fixture_p() {
  static const ExponentField p = ExponentField::parse("3 - 0.5*x", 1);
  return p;
}

inline const ExponentField& fixture_q() {
  static const ExponentField q = ExponentField::parse("1.5 + 2*x", 1);
  return q;
}

/// Fixture A on `cells` cells with the given lambda.
inline EnergySetup<double> fixture_a(double lambda, int cells = 256) {
  return EnergySetup<double>(interval_space(cells), fixture_p(), fixture_q(), lambda);
}

/// Hat with peak 1 at the node closest to x = 0.5.
inline NodalField<double> center_hat(const FeSpace<double>& space) {
  const auto& m = space.mesh();
  return hat(space, m.node_id(m.cells[0] / 2, m.dim() == 2 ? m.cells[1] / 2 : 0));
}

/// Embedding estimate, certificate and rho for fixture A, computed once per process.
struct FixtureCertificate {
  EmbeddingEstimate<double> embedding;
  LambdaStarCertificate<double> cert;
};

inline const FixtureCertificate& fixture_a_certificate() {
  static const FixtureCertificate fc = [] {
    const auto s = fixture_a(0.0);
    auto emb = estimate_embedding_constant(s.p, s.q, *s.space, 8, 1);
    const auto cert = lambda_star(default_rho(emb.effective), s.p.upper, s.q.lower, emb.effective);
    return FixtureCertificate{std::move(emb), cert};
  }();
  return fc;
}

}  // namespace pxeig::test
