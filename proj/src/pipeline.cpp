#include "pxeig/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include "json.hpp"
#include "pxeig/ekeland.hpp"
#include "pxeig/expr.hpp"
#include "pxeig/parallel.hpp"

#ifndef PXEIG_VERSION
#define PXEIG_VERSION "0.0.0"
#endif

namespace pxeig {

const char* to_string(Command c) {
  switch (c) {
    case Command::Validate:
      return "validate";
    case Command::Norm:
      return "norm";
    case Command::Embed:
      return "embed";
    case Command::LambdaStar:
      return "lambda-star";
    case Command::GeometryCheck:
      return "geometry-check";
    case Command::NegativeRay:
      return "negative-ray";
    case Command::Rayleigh:
      return "rayleigh";
    case Command::Unbounded:
      return "unbounded";
    case Command::Solve:
      return "solve";
    case Command::Sweep:
      return "sweep";
    case Command::Run:
      return "run";
  }
  return "?";
}

namespace {

using json = nlohmann::ordered_json;
using Space = FeSpace<double>;
using Setup = EnergySetup<double>;

constexpr double kUnboundedLevel = -1e3;
constexpr double kSphereSlack = 1e-9;

// Thrown when a hard verdict (inadmissible exponents) ends the pipeline early.
struct Halt {};

std::string num(double v) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

struct CsvTable {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(const std::filesystem::path& dir) const {
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw ComputationError("cannot write " + (dir / file).string());
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
  }
};

json box_json(const Box& b, int dim) {
  json lo = json::array(), hi = json::array();
  for (int a = 0; a < dim; ++a) {
    lo.push_back(b.lo[a]);
    hi.push_back(b.hi[a]);
  }
  return json{{"lo", lo}, {"hi", hi}};
}

// First path holding a non-finite number, if any.
std::optional<std::string> find_nonfinite(const json& j, const std::string& path) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) return path.empty() ? "/" : path;
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (auto p = find_nonfinite(v, path + "/" + k)) return p;
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (auto p = find_nonfinite(j[i], path + "/" + std::to_string(i))) return p;
    }
  }
  return std::nullopt;
}

struct LambdaChoice {
  double lambda;
  std::optional<double> fraction;  // of lambda*, when chosen that way
};

struct Candidate {
  std::string start;
  std::uint64_t seed;
  EigenPairReport<double> report;
  EigenpairCheck<double> check;
  int index;
};

struct LambdaSolve {
  LambdaChoice choice;
  std::vector<Candidate> candidates;  // ranked, best first
};

class Session {
 public:
  Session(Command command, const RunConfig& config, const RunOptions& options)
      : command_(command), config_(config), options_(options) {
    report_["tool"] = {{"name", "pxeig"}, {"version", PXEIG_VERSION}};
    report_["command"] = to_string(command);
    json echo = json::object();
    std::istringstream lines(config.echo());
    for (std::string l; std::getline(lines, l);) {
      const auto eq = l.find(" = ");
      echo[l.substr(0, eq)] = l.substr(eq + 3);
    }
    report_["config"] = echo;
  }

  RunOutcome run() {
    RunOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      dispatch();
      out.exit_code = failures_.empty() ? kExitOk : kExitVerdict;
    } catch (const Halt&) {
      out.exit_code = kExitVerdict;
    } catch (const ConfigError& e) {
      record_error("config", e.what(), e.key());
      out.exit_code = kExitInput;
    } catch (const InputError& e) {
      record_error("input", e.what());
      out.exit_code = kExitInput;
    } catch (const DomainError& e) {
      record_error("domain", e.what());
      out.exit_code = kExitInput;
    } catch (const InvalidExponent& e) {
      record_error("invalid-exponent", e.what());
      out.exit_code = kExitInput;
    } catch (const PreconditionError& e) {
      record_error("precondition", e.what());
      out.exit_code = kExitInput;
    } catch (const std::exception& e) {
      record_error("computation", e.what());
      out.exit_code = kExitComputation;
    }
    if (options_.timings) {
      timings_["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    report_["failures"] = failures_;
    if (auto bad = find_nonfinite(report_, "")) {
      record_error("computation", "non-finite value in report at " + *bad);
      scrub(report_);
      out.exit_code = kExitComputation;
    }
    report_["status"] = out.exit_code == kExitOk            ? "ok"
                        : out.exit_code == kExitVerdict     ? "verdict-failure"
                        : out.exit_code == kExitInput       ? "input-error"
                                                            : "computation-error";
    report_["exit_code"] = out.exit_code;

    const std::string report_file = std::string(to_string(command_)) + ".json";
    if (options_.write_files) {
      for (const auto& t : tables_) out.artifacts.push_back(t.file);
      out.artifacts.push_back(report_file);
    }
    report_["artifacts"] = out.artifacts;
    if (options_.timings) report_["timings"] = timings_;
    out.report = report_.dump(2) + "\n";

    if (options_.write_files) {
      try {
        const std::filesystem::path dir(config_.out_dir);
        std::filesystem::create_directories(dir);
        for (const auto& t : tables_) t.write(dir);
        std::ofstream f(dir / report_file, std::ios::binary);
        if (!f) throw ComputationError("cannot write " + (dir / report_file).string());
        f << out.report;
      } catch (const std::exception& e) {
        out.exit_code = kExitComputation;
        out.report = json{{"status", "computation-error"}, {"error", e.what()}}.dump(2) + "\n";
      }
    }
    return out;
  }

 private:
  Command command_;
  RunConfig config_;
  RunOptions options_;
  json report_;
  json timings_ = json::object();
  std::vector<std::string> failures_;
  std::vector<CsvTable> tables_;

  std::shared_ptr<const Space> space_;
  std::optional<ExponentField> p_, q_;
  std::optional<Setup> base_;
  std::optional<EmbeddingEstimate<double>> embedding_;
  std::optional<LambdaStarCertificate<double>> cert_;
  std::optional<BumpSpec<double>> bump_;

  static void scrub(json& j) {
    if (j.is_number_float() && !std::isfinite(j.get<double>())) {
      j = "non-finite";
    } else if (j.is_structured()) {
      for (auto& v : j) scrub(v);
    }
  }

  void record_error(const std::string& kind, const std::string& message, const std::string& key = {}) {
    json e{{"kind", kind}, {"message", message}};
    if (!key.empty()) e["key"] = key;
    report_["error"] = e;
  }

  template <typename F>
  void timed(const char* stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    if (options_.timings) timings_[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  void fail(std::string what) { failures_.push_back(std::move(what)); }

  // ---- stages ---------------------------------------------------------------

  void dispatch() {
    timed("discretize", [&] { discretize(); });
    switch (command_) {
      case Command::Validate:
        admissibility(false);
        break;
      case Command::Norm:
        norm();
        break;
      case Command::Embed:
        admissibility(false);
        mesh_tables();
        embed();
        break;
      case Command::LambdaStar:
        admissibility(true);
        embed();
        certificate();
        break;
      case Command::GeometryCheck:
        admissibility(true);
        mesh_tables();
        embed();
        certificate();
        sphere_bound();
        bump();
        negative_ray();
        rayleigh();
        unbounded(false);
        break;
      case Command::NegativeRay:
        admissibility(true);
        mesh_tables();
        embed();
        certificate();
        bump();
        negative_ray();
        break;
      case Command::Rayleigh:
        admissibility(true);
        mesh_tables();
        bump();
        rayleigh();
        break;
      case Command::Unbounded:
        admissibility(true);
        mesh_tables();
        embed();
        certificate();
        unbounded(true);
        break;
      case Command::Solve:
      case Command::Sweep:
        admissibility(true);
        mesh_tables();
        embed();
        certificate();
        bump();
        solve_all(command_ == Command::Solve ? std::vector<LambdaChoice>{single_lambda()} : lambda_list());
        break;
      case Command::Run:
        admissibility(true);
        mesh_tables();
        embed();
        certificate();
        sphere_bound();
        bump();
        negative_ray();
        rayleigh();
        unbounded(false);
        solve_all(lambda_list());
        break;
    }
  }

  void discretize() {
    const Domain domain = config_.domain();
    auto mesh = build_mesh<double>(domain, config_.resolution);
    space_ = std::make_shared<const Space>(std::move(mesh), config_.quad_order);
    p_ = ExponentField::parse(config_.p_expr, config_.dim);
    q_ = ExponentField::parse(config_.q_expr, config_.dim);
    const auto& m = space_->mesh();
    json cells = json::array(), h = json::array();
    for (int a = 0; a < config_.dim; ++a) {
      cells.push_back(m.cells[a]);
      h.push_back(m.h[a]);
    }
    report_["mesh"] = {{"dim", config_.dim},  {"cells", cells},
                       {"h", h},              {"nodes", m.node_count()},
                       {"elements", m.element_count()}, {"interior_dofs", m.interior_count()},
                       {"quad_order", config_.quad_order}, {"measure", m.measures.sum()}};
  }

  void mesh_tables() {
    const auto& m = space_->mesh();
    const int d = config_.dim;
    CsvTable nodes{"mesh_nodes.csv", d == 1 ? std::vector<std::string>{"node", "x", "boundary"}
                                            : std::vector<std::string>{"node", "x", "y", "boundary"}, {}};
    for (int i = 0; i < m.node_count(); ++i) {
      std::vector<std::string> row{std::to_string(i), num(m.nodes(0, i))};
      if (d == 2) row.push_back(num(m.nodes(1, i)));
      row.push_back(m.boundary[static_cast<std::size_t>(i)] ? "1" : "0");
      nodes.rows.push_back(std::move(row));
    }
    CsvTable elems{"mesh_elements.csv", d == 1 ? std::vector<std::string>{"element", "n0", "n1"}
                                               : std::vector<std::string>{"element", "n0", "n1", "n2"}, {}};
    for (int e = 0; e < m.element_count(); ++e) {
      std::vector<std::string> row{std::to_string(e)};
      for (int a = 0; a <= d; ++a) row.push_back(std::to_string(m.elements(a, e)));
      elems.rows.push_back(std::move(row));
    }
    tables_.push_back(std::move(nodes));
    tables_.push_back(std::move(elems));
  }

  CsvTable field_table(const std::string& file, const NodalField<double>& u) const {
    const auto& m = space_->mesh();
    const VectorX<double> full = space_->to_full(u);
    CsvTable t{file, config_.dim == 1 ? std::vector<std::string>{"node", "x", "u"}
                                      : std::vector<std::string>{"node", "x", "y", "u"}, {}};
    for (int i = 0; i < m.node_count(); ++i) {
      std::vector<std::string> row{std::to_string(i), num(m.nodes(0, i))};
      if (config_.dim == 2) row.push_back(num(m.nodes(1, i)));
      row.push_back(num(full(i)));
      t.rows.push_back(std::move(row));
    }
    return t;
  }

  const Setup& base() {
    if (!base_) base_.emplace(space_, *p_, *q_, 0.0);
    return *base_;
  }

  void admissibility(bool halt) {
    AdmissibilityReport r;
    timed("validate", [&] { r = validate(*p_, *q_, *space_, config_.ambient_n); });
    report_["admissibility"] = {{"q_minus", r.q_minus},
                                {"p_minus", r.p_minus},
                                {"q_plus", r.q_plus},
                                {"p_plus", r.p_plus},
                                {"ambient_N", r.ambient_n},
                                {"mesh_dim", config_.dim},
                                {"condition_holds", r.condition_holds},
                                {"subcritical", r.subcritical},
                                {"p_plus_below_N", r.p_plus_below_n},
                                {"admissible", r.admissible()},
                                {"failures", r.failures}};
    if (!r.admissible()) {
      if (!r.condition_holds) fail("admissibility: 1 < q- < p- < q+ fails");
      if (!r.subcritical) fail("admissibility: q < p* fails somewhere");
      if (!r.p_plus_below_n) fail("admissibility: p+ < N fails");
      if (halt) throw Halt{};
    }
  }

  void norm() {
    if (config_.field_expr.empty()) throw ConfigError("norm needs a field (config key field_expr or --field)", "field_expr");
    const Expr field = parse_expr(config_.field_expr, config_.dim);
    const std::string& which = options_.norm_exponent;
    const ExponentField e = which == "p" ? *p_ : which == "q" ? *q_ : ExponentField::parse(which, config_.dim);
    const auto se = e.sample(*space_);
    auto f = [&](const Space::Point& x) { return field.eval(x(0), x(1)); };
    json out{{"field", field.to_string()}, {"exponent", e.to_string()}, {"exponent_lower", se.lower},
             {"exponent_upper", se.upper}};
    timed("norm", [&] {
      out["modular"] = modular<double>(f, se, *space_);
      out["luxemburg_norm"] = luxemburg_norm<double>(f, se, *space_);
      const NodalField<double> u = space_->interpolate(f);
      out["gradient_norm_of_interpolant"] = sobolev_norm(u, se, *space_);
    });
    report_["norm"] = out;
  }

  void embed() {
    EmbeddingOptions opt;
    opt.safety_factor = config_.c1_safety;
    timed("embed", [&] {
      embedding_ = estimate_embedding_constant(base().p, base().q, *space_, config_.embed_starts, config_.seed, opt);
    });
    const auto& e = *embedding_;
    report_["embedding"] = {{"estimate", e.estimate},
                            {"safety_factor", e.safety_factor},
                            {"effective_c1", e.effective},
                            {"witness_quotient", embedding_quotient(e.witness, base().p, base().q, *space_)},
                            {"best_start", e.best_start},
                            {"warning", e.warning},
                            {"start_values", e.start_values}};
    tables_.push_back(field_table("embed_witness.csv", e.witness));
  }

  void certificate() {
    const double rho = config_.rho.value_or(default_rho(embedding_->effective));
    cert_ = lambda_star(rho, base().p.upper, base().q.lower, embedding_->effective);
    const auto& c = *cert_;
    report_["lambda_star"] = {{"rho", c.rho},
                              {"rho_source", config_.rho ? "config" : "default"},
                              {"c1", c.c1},
                              {"p_plus", c.p_plus},
                              {"q_minus", c.q_minus},
                              {"lambda_star", c.lambda_star},
                              {"a", c.a}};
  }

  LambdaChoice single_lambda() const {
    if (config_.lambda) return {*config_.lambda, std::nullopt};
    const double f = config_.lambda_fraction.value_or(0.5);
    return {f * cert_->lambda_star, f};
  }

  std::vector<LambdaChoice> lambda_list() const {
    if (config_.lambda || config_.lambda_fraction) return {single_lambda()};
    std::vector<LambdaChoice> out;
    for (double f : config_.lambda_grid) out.push_back({f * cert_->lambda_star, f});
    return out;
  }

  static json lambda_json(const LambdaChoice& c) {
    json j{{"lambda", c.lambda}};
    if (c.fraction) j["fraction_of_lambda_star"] = *c.fraction;
    return j;
  }

  void sphere_bound() {
    json entries = json::array();
    timed("sphere_bound", [&] {
      const auto& space = *space_;
      for (const auto& choice : lambda_list()) {
        const Setup s = base().with_lambda(choice.lambda);
        const double bound = sphere_lower_bound(*cert_, choice.lambda);
        Rng rng(config_.seed ^ 0x9e3779b97f4a7c15ULL);
        double min_energy = std::numeric_limits<double>::infinity(), min_margin = min_energy;
        int violations = 0;
        for (int i = 0; i < config_.lemma1_samples; ++i) {
          NodalField<double> u = i % 2 == 0 ? random_field(space, rng) : random_smooth_field(space, rng);
          const double n = sobolev_norm(u, s.p, space);
          if (n == 0.0) continue;
          u *= cert_->rho / n;
          const double j = energy(s, u);
          min_energy = std::min(min_energy, j);
          min_margin = std::min(min_margin, j - bound);
          if (j < bound - kSphereSlack) ++violations;
        }
        json e = lambda_json(choice);
        e["bound"] = bound;
        e["samples"] = config_.lemma1_samples;
        e["min_energy"] = min_energy;
        e["min_margin"] = min_margin;
        e["violations"] = violations;
        e["pass"] = violations == 0;
        if (violations > 0) fail("sphere bound violated at lambda = " + num(choice.lambda));
        entries.push_back(e);
      }
    });
    report_["sphere_bound"] = entries;
  }

  void bump() {
    const double eps0 = config_.eps0.value_or(default_eps0(base()));
    timed("bump", [&] { bump_ = make_bump(base(), eps0, config_.ramp_width); });
    const auto& b = *bump_;
    report_["bump"] = {{"eps0", b.eps0},
                       {"eps0_source", config_.eps0 ? "config" : "default"},
                       {"region", box_json(b.choice.region, config_.dim)},
                       {"plateau", box_json(b.choice.plateau, config_.dim)},
                       {"ramp_width", b.choice.ramp_width},
                       {"plateau_elements", b.plateau_elements.size()},
                       {"min", b.phi.minCoeff()},
                       {"max", b.phi.maxCoeff()},
                       {"norm", b.norm}};
    tables_.push_back(field_table("bump.csv", b.phi));
  }

  void negative_ray() {
    json entries = json::array();
    CsvTable table{"negative_ray.csv", {"lambda", "k", "t", "J"}, {}};
    timed("negative_ray", [&] {
      for (const auto& choice : lambda_list()) {
        const Setup s = base().with_lambda(choice.lambda);
        const auto thr = threshold(s, *bump_);
        const auto rc = negative_ray_check(s, *bump_, thr);
        json e = lambda_json(choice);
        e["delta"] = thr.delta;
        e["t_exponent"] = thr.exponent;
        e["t_max"] = thr.t_max;
        e["plateau_integral"] = thr.plateau_integral;
        e["gradient_integral"] = thr.gradient_integral;
        e["ratio"] = thr.ratio;
        e["samples"] = rc.samples.size();
        e["max_energy"] = std::max_element(rc.samples.begin(), rc.samples.end(), [](auto& a, auto& b) {
                            return a.value < b.value;
                          })->value;
        e["pass"] = rc.pass;
        if (rc.offending_t) e["offending_t"] = *rc.offending_t;
        if (!rc.pass) fail("negative ray check failed at lambda = " + num(choice.lambda));
        for (std::size_t k = 0; k < rc.samples.size(); ++k) {
          table.rows.push_back({num(choice.lambda), std::to_string(k), num(rc.samples[k].t), num(rc.samples[k].value)});
        }
        entries.push_back(e);
      }
    });
    report_["negative_ray"] = entries;
    tables_.push_back(std::move(table));
  }

  void rayleigh() {
    json out;
    CsvTable table{"rayleigh.csv", {"k", "t", "quotient"}, {}};
    timed("rayleigh", [&] {
      const auto sweep = rayleigh_sweep(base(), *bump_);
      for (std::size_t k = 0; k < sweep.samples.size(); ++k) {
        table.rows.push_back({std::to_string(k), num(sweep.samples[k].t), num(sweep.samples[k].value)});
      }
      out["strictly_decreasing"] = sweep.strictly_decreasing;
      out["first_quotient"] = sweep.samples.front().value;
      out["final_quotient"] = sweep.samples.back().value;
      out["decay_exponent"] = base().p.lower - base().q.lower - bump_->eps0;
      out["fitted_constant"] = sweep.fitted_constant;
      if (!sweep.strictly_decreasing) fail("Rayleigh sweep is not strictly decreasing");
      json witnesses = json::array();
      for (double c : {1e-3, 1.0, 1e3}) {
        const auto w = small_quotient_witness(base(), *bump_, c);
        witnesses.push_back({{"C", c},
                             {"found", w.found},
                             {"t", w.t},
                             {"gradient_modular", w.gradient_modular},
                             {"lebesgue_modular", w.lebesgue_modular}});
        if (!w.found) fail("no small-quotient witness for C = " + num(c));
      }
      out["witnesses"] = witnesses;
    });
    report_["rayleigh"] = out;
    tables_.push_back(std::move(table));
  }

  void unbounded(bool required) {
    if (!(base().p.upper < base().q.upper)) {
      if (required) throw PreconditionError("unbounded direction needs max p < max q");
      report_["unbounded"] = {{"applicable", false}, {"reason", "max p >= max q"}};
      return;
    }
    json out{{"applicable", true}, {"level", kUnboundedLevel}};
    json traces = json::array();
    CsvTable table{"unbounded.csv", {"lambda", "k", "t", "J"}, {}};
    bool psi_written = false;
    timed("unbounded", [&] {
      for (const auto& choice : lambda_list()) {
        if (!(choice.lambda > 0.0)) {
          json e = lambda_json(choice);
          e["reached"] = false;
          e["reason"] = "lambda = 0";
          traces.push_back(e);
          fail("unbounded trace needs lambda > 0");
          continue;
        }
        const auto u = unbounded_direction(base().with_lambda(choice.lambda));
        if (!psi_written) {
          out["plateau"] = box_json(u.choice.plateau, config_.dim);
          out["ramp_width"] = u.choice.ramp_width;
          tables_.push_back(field_table("unbounded_psi.csv", u.psi));
          psi_written = true;
        }
        json e = lambda_json(choice);
        std::optional<int> first;
        for (std::size_t k = 0; k < u.trace.size(); ++k) {
          table.rows.push_back({num(choice.lambda), std::to_string(k), num(u.trace[k].t), num(u.trace[k].value)});
          if (!first && u.trace[k].value < kUnboundedLevel) first = static_cast<int>(k);
        }
        e["final_energy"] = u.trace.back().value;
        e["reached"] = first.has_value();
        if (first) e["first_k_below_level"] = *first;
        if (!first) fail("unbounded trace stays above " + num(kUnboundedLevel) + " at lambda = " + num(choice.lambda));
        traces.push_back(e);
      }
    });
    out["traces"] = traces;
    report_["unbounded"] = out;
    tables_.push_back(std::move(table));
  }

  LambdaSolve solve_one(const LambdaChoice& choice) const {
    const Setup s = base_->with_lambda(choice.lambda);
    const SolverConfig base_cfg = config_.solver(cert_->rho);
    LambdaSolve out{choice, {}};
    for (int i = 0; i < config_.solve_starts; ++i) {
      SolverConfig cfg = base_cfg;
      cfg.seed = config_.seed + static_cast<std::uint64_t>(i);
      // The first start follows the configured mode; extra starts probe other minimizers.
      const StartMode mode = i == 0 ? cfg.start : StartMode::RandomInBall;
      NodalField<double> start;
      switch (mode) {
        case StartMode::BumpRay:
          start = bump_ray_start(s, *bump_, cfg);
          break;
        case StartMode::RandomInBall:
          start = random_ball_start(s, cfg);
          break;
        case StartMode::Zero:
          start = space_->zero();
          break;
      }
      Candidate c{to_string(mode), cfg.seed, pxeig::solve(s, cfg, start), {}, i};
      c.check = verify_eigenpair(s, c.report.u, config_.tol);
      out.candidates.push_back(std::move(c));
    }
    std::stable_sort(out.candidates.begin(), out.candidates.end(), [](const Candidate& a, const Candidate& b) {
      const bool sa = a.report.verdict == Verdict::Success, sb = b.report.verdict == Verdict::Success;
      if (sa != sb) return sa;
      return a.report.energy < b.report.energy;
    });
    return out;
  }

  void solve_all(const std::vector<LambdaChoice>& choices) {
    std::vector<LambdaSolve> results;
    timed("solve", [&] {
      (void)base();
      results = parallel_map(choices.size(), [&](std::size_t i) { return solve_one(choices[i]); });
    });
    json entries = json::array();
    CsvTable summary{"sweep.csv", {"index", "lambda", "fraction", "verdict", "energy", "residual", "norm", "iterations"},
                     {}};
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      const auto& best = r.candidates.front();
      json e = lambda_json(r.choice);
      e["verdict"] = to_string(best.report.verdict);
      e["best_candidate"] = best.index;
      json cands = json::array();
      for (const auto& c : r.candidates) {
        const auto& rep = c.report;
        cands.push_back({{"index", c.index},
                         {"start", c.start},
                         {"seed", c.seed},
                         {"verdict", to_string(rep.verdict)},
                         {"message", rep.message},
                         {"energy", rep.energy},
                         {"initial_energy", rep.trace.front().energy},
                         {"residual_norm", rep.residual_norm},
                         {"residual_scale", rep.residual_scale},
                         {"norm", rep.norm},
                         {"rho", rep.rho},
                         {"interior", rep.interior},
                         {"iterations", rep.iterations},
                         {"eigenpair_check", c.check.pass}});
      }
      e["candidates"] = cands;
      const std::string tag = std::to_string(i);
      tables_.push_back(field_table("eigenfunction_" + tag + ".csv", best.report.u));
      CsvTable trace{"trace_" + tag + ".csv", {"iteration", "energy", "step", "residual"}, {}};
      for (std::size_t k = 0; k < best.report.trace.size(); ++k) {
        const auto& t = best.report.trace[k];
        trace.rows.push_back({std::to_string(k), num(t.energy), num(t.step), num(t.residual)});
      }
      tables_.push_back(std::move(trace));
      summary.rows.push_back({tag, num(r.choice.lambda), r.choice.fraction ? num(*r.choice.fraction) : "",
                              to_string(best.report.verdict), num(best.report.energy), num(best.report.residual_norm),
                              num(best.report.norm), std::to_string(best.report.iterations)});
      if (best.report.verdict != Verdict::Success) {
        fail("lambda = " + num(r.choice.lambda) + ": verdict " + to_string(best.report.verdict));
      }
      entries.push_back(e);
    }
    report_["eigenpairs"] = entries;
    if (command_ != Command::Solve) tables_.push_back(std::move(summary));
  }
};

}  // namespace

RunOutcome execute(Command command, const RunConfig& config, const RunOptions& options) {
  return Session(command, config, options).run();
}

}  // namespace pxeig
