#pragma once

// Line-oriented run configuration: `key = value` pairs, `#` starts a comment.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pxeig/ekeland.hpp"
#include "pxeig/error.hpp"
#include "pxeig/mesh.hpp"

namespace pxeig {

class ConfigError : public InputError {
 public:
  ConfigError(const std::string& message, std::string key = {}, int line = 0);
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

struct RunConfig {
  // domain and discretization
  int dim = 1;
  std::vector<double> bounds;  // lo0 hi0 [lo1 hi1]; empty means the unit interval / square
  std::array<int, 2> resolution{256, 256};
  int quad_order = 3;

  // exponents and admissibility
  std::string p_expr;
  std::string q_expr;
  std::string field_expr;  // function measured by the `norm` command; optional
  int ambient_n = 5;
  std::optional<double> eps0;
  std::optional<double> ramp_width;
  std::optional<double> rho;
  double c1_safety = 1.1;
  int embed_starts = 8;
  int lemma1_samples = 200;

  // lambda selection: `lambda` wins over `lambda_fraction`, which wins over `lambda_grid`
  std::optional<double> lambda;
  std::optional<double> lambda_fraction;
  std::vector<double> lambda_grid{0.1, 0.3, 0.5, 0.7, 0.9};

  // solver
  int max_iters = 20000;
  double tol = 1e-6;
  double rel_tol = 1e-8;
  double initial_step = 1.0;
  double backtrack = 0.5;
  double armijo = 1e-4;
  StartMode start = StartMode::BumpRay;
  Preconditioner preconditioner = Preconditioner::Weighted;
  int solve_starts = 1;

  std::uint64_t seed = 1;
  std::string out_dir = "out";

  Domain domain() const;
  SolverConfig solver(double ball_radius) const;

  /// Range checks that do not need any computation. Throws ConfigError.
  void check() const;

  /// Canonical `key = value` text; parsing it yields an identical config.
  std::string echo() const;

  static RunConfig parse(std::istream& in);
  static RunConfig parse_string(const std::string& text);
  static RunConfig load(const std::string& path);
};

/// Every key accepted by RunConfig::parse, in echo order.
const std::vector<std::string>& config_keys();

const char* to_string(StartMode m);
const char* to_string(Preconditioner p);
StartMode parse_start_mode(const std::string& s);
Preconditioner parse_preconditioner(const std::string& s);

}  // namespace pxeig
