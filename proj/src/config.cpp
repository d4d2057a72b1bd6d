#include "pxeig/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pxeig/expr.hpp"

namespace pxeig {

ConfigError::ConfigError(const std::string& message, std::string key, int line)
    : InputError(line > 0 ? "config line " + std::to_string(line) + ": " + message : message),
      key_(std::move(key)),
      line_(line) {}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

// Value readers. `key` and `line` only feed error messages.
struct Reader {
  std::string key;
  int line;

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(key + ": " + what, key, line); }

  double real(const std::string& s) const {
    double v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail("expected a number, got '" + s + "'");
    if (!std::isfinite(v)) fail("value must be finite");
    return v;
  }
  long long integer(const std::string& s) const {
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail("expected an integer, got '" + s + "'");
    return v;
  }
  int small_int(const std::string& s) const {
    const long long v = integer(s);
    if (v < -1000000000LL || v > 1000000000LL) fail("integer out of range");
    return static_cast<int>(v);
  }
  std::optional<double> real_or_auto(const std::string& s) const {
    if (s == "auto") return std::nullopt;
    return real(s);
  }
  std::vector<double> reals(const std::string& s) const {
    std::vector<double> out;
    for (const auto& t : split_list(s)) out.push_back(real(t));
    if (out.empty()) fail("expected at least one number");
    return out;
  }
};

using Setter = std::function<void(RunConfig&, const Reader&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"dim", [](RunConfig& c, const Reader& r, const std::string& v) { c.dim = r.small_int(v); }},
      {"bounds", [](RunConfig& c, const Reader& r, const std::string& v) { c.bounds = r.reals(v); }},
      {"resolution",
       [](RunConfig& c, const Reader& r, const std::string& v) {
         const auto parts = split_list(v);
         if (parts.empty() || parts.size() > 2) r.fail("expected one or two integers");
         c.resolution[0] = r.small_int(parts[0]);
         c.resolution[1] = parts.size() == 2 ? r.small_int(parts[1]) : c.resolution[0];
       }},
      {"quad_order", [](RunConfig& c, const Reader& r, const std::string& v) { c.quad_order = r.small_int(v); }},
      {"p_expr", [](RunConfig& c, const Reader&, const std::string& v) { c.p_expr = v; }},
      {"q_expr", [](RunConfig& c, const Reader&, const std::string& v) { c.q_expr = v; }},
      {"field_expr", [](RunConfig& c, const Reader&, const std::string& v) { c.field_expr = v; }},
      {"ambient_N", [](RunConfig& c, const Reader& r, const std::string& v) { c.ambient_n = r.small_int(v); }},
      {"eps0", [](RunConfig& c, const Reader& r, const std::string& v) { c.eps0 = r.real_or_auto(v); }},
      {"ramp_width", [](RunConfig& c, const Reader& r, const std::string& v) { c.ramp_width = r.real_or_auto(v); }},
      {"rho", [](RunConfig& c, const Reader& r, const std::string& v) { c.rho = r.real_or_auto(v); }},
      {"c1_safety", [](RunConfig& c, const Reader& r, const std::string& v) { c.c1_safety = r.real(v); }},
      {"embed_starts", [](RunConfig& c, const Reader& r, const std::string& v) { c.embed_starts = r.small_int(v); }},
      {"lemma1_samples",
       [](RunConfig& c, const Reader& r, const std::string& v) { c.lemma1_samples = r.small_int(v); }},
      {"lambda", [](RunConfig& c, const Reader& r, const std::string& v) { c.lambda = r.real_or_auto(v); }},
      {"lambda_fraction",
       [](RunConfig& c, const Reader& r, const std::string& v) { c.lambda_fraction = r.real_or_auto(v); }},
      {"lambda_grid", [](RunConfig& c, const Reader& r, const std::string& v) { c.lambda_grid = r.reals(v); }},
      {"max_iters", [](RunConfig& c, const Reader& r, const std::string& v) { c.max_iters = r.small_int(v); }},
      {"tol", [](RunConfig& c, const Reader& r, const std::string& v) { c.tol = r.real(v); }},
      {"rel_tol", [](RunConfig& c, const Reader& r, const std::string& v) { c.rel_tol = r.real(v); }},
      {"initial_step", [](RunConfig& c, const Reader& r, const std::string& v) { c.initial_step = r.real(v); }},
      {"backtrack", [](RunConfig& c, const Reader& r, const std::string& v) { c.backtrack = r.real(v); }},
      {"armijo", [](RunConfig& c, const Reader& r, const std::string& v) { c.armijo = r.real(v); }},
      {"start",
       [](RunConfig& c, const Reader& r, const std::string& v) {
         try {
           c.start = parse_start_mode(v);
         } catch (const InputError& e) {
           r.fail(e.what());
         }
       }},
      {"preconditioner",
       [](RunConfig& c, const Reader& r, const std::string& v) {
         try {
           c.preconditioner = parse_preconditioner(v);
         } catch (const InputError& e) {
           r.fail(e.what());
         }
       }},
      {"solve_starts", [](RunConfig& c, const Reader& r, const std::string& v) { c.solve_starts = r.small_int(v); }},
      {"seed",
       [](RunConfig& c, const Reader& r, const std::string& v) {
         const long long s = r.integer(v);
         if (s < 0) r.fail("seed must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"out_dir", [](RunConfig& c, const Reader&, const std::string& v) { c.out_dir = v; }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

const char* to_string(StartMode m) {
  switch (m) {
    case StartMode::BumpRay:
      return "bump-ray";
    case StartMode::RandomInBall:
      return "random-in-ball";
    case StartMode::Zero:
      return "zero";
  }
  return "?";
}

const char* to_string(Preconditioner p) {
  switch (p) {
    case Preconditioner::Weighted:
      return "weighted";
    case Preconditioner::Stiffness:
      return "stiffness";
    case Preconditioner::Diagonal:
      return "diagonal";
  }
  return "?";
}

StartMode parse_start_mode(const std::string& s) {
  if (s == "bump-ray") return StartMode::BumpRay;
  if (s == "random-in-ball") return StartMode::RandomInBall;
  if (s == "zero") return StartMode::Zero;
  throw InputError("unknown start mode '" + s + "' (expected bump-ray, random-in-ball or zero)");
}

Preconditioner parse_preconditioner(const std::string& s) {
  if (s == "weighted") return Preconditioner::Weighted;
  if (s == "stiffness") return Preconditioner::Stiffness;
  if (s == "diagonal") return Preconditioner::Diagonal;
  throw InputError("unknown preconditioner '" + s + "' (expected weighted, stiffness or diagonal)");
}

Domain RunConfig::domain() const {
  if (bounds.empty()) return dim == 1 ? Domain::interval(0.0, 1.0) : Domain::rectangle(0.0, 1.0, 0.0, 1.0);
  if (dim == 1) return Domain::interval(bounds[0], bounds[1]);
  return Domain::rectangle(bounds[0], bounds[1], bounds[2], bounds[3]);
}

SolverConfig RunConfig::solver(double ball_radius) const {
  SolverConfig s;
  s.rho = ball_radius;
  s.max_iterations = max_iters;
  s.tolerance = tol;
  s.relative_tolerance = rel_tol;
  s.initial_step = initial_step;
  s.backtracking = backtrack;
  s.armijo = armijo;
  s.seed = seed;
  s.start = start;
  s.preconditioner = preconditioner;
  return s;
}

void RunConfig::check() const {
  auto bad = [](const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what, key); };
  if (dim != 1 && dim != 2) bad("dim", "must be 1 or 2");
  if (!bounds.empty()) {
    if (bounds.size() != static_cast<std::size_t>(2 * dim)) {
      bad("bounds", "expected " + std::to_string(2 * dim) + " numbers for dim " + std::to_string(dim));
    }
    for (int a = 0; a < dim; ++a) {
      if (!(bounds[2 * a] < bounds[2 * a + 1])) bad("bounds", "each axis needs lo < hi");
    }
  }
  for (int a = 0; a < dim; ++a) {
    if (resolution[a] < 2) bad("resolution", "at least 2 cells per axis are required");
    if (resolution[a] > 1000000) bad("resolution", "too many cells");
  }
  if (quad_order < 1 || quad_order > 5) bad("quad_order", "must lie in 1..5");
  for (const auto& [key, src] : {std::pair<std::string, const std::string*>{"p_expr", &p_expr}, {"q_expr", &q_expr}}) {
    if (src->empty()) bad(key, "is required");
    try {
      (void)parse_expr(*src, dim);
    } catch (const ExprError& e) {
      bad(key, e.what());
    }
  }
  if (!field_expr.empty()) {
    try {
      (void)parse_expr(field_expr, dim);
    } catch (const ExprError& e) {
      bad("field_expr", e.what());
    }
  }
  if (ambient_n < 1) bad("ambient_N", "must be a positive integer");
  if (eps0 && !(*eps0 > 0.0)) bad("eps0", "must be positive");
  if (ramp_width && !(*ramp_width > 0.0)) bad("ramp_width", "must be positive");
  if (rho && !(*rho > 0.0 && *rho < 1.0)) bad("rho", "must lie in (0, 1)");
  if (!(c1_safety >= 1.0)) bad("c1_safety", "must be at least 1");
  if (embed_starts < 1) bad("embed_starts", "must be at least 1");
  if (lemma1_samples < 1) bad("lemma1_samples", "must be at least 1");
  if (lambda && !(*lambda >= 0.0)) bad("lambda", "must be nonnegative");
  if (lambda_fraction && !(*lambda_fraction > 0.0)) bad("lambda_fraction", "must be positive");
  if (lambda_grid.empty()) bad("lambda_grid", "must not be empty");
  for (double f : lambda_grid) {
    if (!(f > 0.0)) bad("lambda_grid", "fractions must be positive");
  }
  if (max_iters < 0) bad("max_iters", "must be nonnegative");
  if (!(tol > 0.0)) bad("tol", "must be positive");
  if (!(rel_tol > 0.0)) bad("rel_tol", "must be positive");
  if (!(initial_step > 0.0)) bad("initial_step", "must be positive");
  if (!(backtrack > 0.0 && backtrack < 1.0)) bad("backtrack", "must lie in (0, 1)");
  if (!(armijo > 0.0 && armijo < 1.0)) bad("armijo", "must lie in (0, 1)");
  if (solve_starts < 1) bad("solve_starts", "must be at least 1");
  if (out_dir.empty()) bad("out_dir", "must not be empty");
}

std::string RunConfig::echo() const {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("auto"); };
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
    return s;
  };
  std::ostringstream os;
  os << "dim = " << dim << "\n";
  if (!bounds.empty()) os << "bounds = " << list(bounds) << "\n";
  os << "resolution = " << resolution[0];
  if (dim == 2) os << " " << resolution[1];
  os << "\n";
  os << "quad_order = " << quad_order << "\n"
     << "p_expr = " << p_expr << "\n"
     << "q_expr = " << q_expr << "\n"
     << (field_expr.empty() ? std::string() : "field_expr = " + field_expr + "\n")
     << "ambient_N = " << ambient_n << "\n"
     << "eps0 = " << opt(eps0) << "\n"
     << "ramp_width = " << opt(ramp_width) << "\n"
     << "rho = " << opt(rho) << "\n"
     << "c1_safety = " << format_double(c1_safety) << "\n"
     << "embed_starts = " << embed_starts << "\n"
     << "lemma1_samples = " << lemma1_samples << "\n"
     << "lambda = " << opt(lambda) << "\n"
     << "lambda_fraction = " << opt(lambda_fraction) << "\n"
     << "lambda_grid = " << list(lambda_grid) << "\n"
     << "max_iters = " << max_iters << "\n"
     << "tol = " << format_double(tol) << "\n"
     << "rel_tol = " << format_double(rel_tol) << "\n"
     << "initial_step = " << format_double(initial_step) << "\n"
     << "backtrack = " << format_double(backtrack) << "\n"
     << "armijo = " << format_double(armijo) << "\n"
     << "start = " << to_string(start) << "\n"
     << "preconditioner = " << to_string(preconditioner) << "\n"
     << "solve_starts = " << solve_starts << "\n"
     << "seed = " << seed << "\n"
     << "out_dir = " << out_dir << "\n";
  return os.str();
}

RunConfig RunConfig::parse(std::istream& in) {
  RunConfig c;
  std::map<std::string, int> seen;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(std::string_view(raw).substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + text + "'", {}, line);
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw ConfigError("missing key before '='", {}, line);
    const auto& table = setters();
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& kv) { return kv.first == key; });
    if (it == table.end()) {
      std::string msg = "unknown key '" + key + "'";
      const auto best = std::min_element(table.begin(), table.end(), [&](const auto& a, const auto& b) {
        return edit_distance(key, a.first) < edit_distance(key, b.first);
      });
      if (edit_distance(key, best->first) <= 2) msg += " (did you mean '" + best->first + "'?)";
      throw ConfigError(msg, key, line);
    }
    if (const auto prev = seen.find(key); prev != seen.end()) {
      throw ConfigError("key '" + key + "' repeats line " + std::to_string(prev->second), key, line);
    }
    seen.emplace(key, line);
    if (value.empty()) throw ConfigError(key + ": missing value", key, line);
    it->second(c, Reader{key, line}, value);
  }
  if (in.bad()) throw ConfigError("read error");
  c.check();
  return c;
}

RunConfig RunConfig::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in);
}

}  // namespace pxeig
