#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace fraclab::harness {

namespace pt = boost::property_tree;

ConfigError::ConfigError(const std::string& what, unsigned long line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"domain", {"dim", "bounds", "n", "inner", "exclude"}},
      {"operator", {"alpha"}},
      {"problem", {"a", "a_grid", "a_window_fraction", "a_window_points", "a_span_relative"}},
      {"solver",
       {"inner", "omega", "inner_tol", "outer_tol", "zero_tol", "blowup_cap", "max_iter", "max_sweeps", "penalty",
        "contact_tol", "verify_tol"}},
      {"sweep", {"starts"}},
      {"potential", {"times", "refine", "beta"}},
      {"mc", {"dt", "n_paths", "t", "beta"}},
      {"run", {"seed", "output"}},
  };
  return keys;
}

// Line of `key` inside `[section]`, for diagnostics; 0 if not found.
unsigned long line_of(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  std::string current;
  unsigned long no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (current == section && eq != std::string::npos && trim(t.substr(0, eq)) == key) return no;
  }
  return 0;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, const std::string& text) : tree_(tree), text_(text) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
    throw ConfigError("[" + section + "] " + key + ": " + what, line_of(text_, section, key));
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto s = tree_.get_child_optional(section);
    if (!s) return std::nullopt;
    const auto v = s->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    std::string value = *v;
    // Strip trailing comments.
    for (const char c : {';', '#'}) {
      if (const auto p = value.find(c); p != std::string::npos) value.erase(p);
    }
    value.erase(value.find_last_not_of(" \t\r") + 1);
    return value;
  }

  std::vector<double> numbers(const std::string& section, const std::string& key, const std::string& value) const {
    std::vector<double> out;
    std::istringstream in(value);
    std::string tok;
    while (in >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        fail(section, key, "'" + tok + "' is not a number");
      }
      if (used != tok.size() || !std::isfinite(v)) fail(section, key, "'" + tok + "' is not a finite number");
      out.push_back(v);
    }
    return out;
  }

  std::optional<std::vector<double>> list(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    auto out = numbers(section, key, *v);
    if (out.empty()) fail(section, key, "expected at least one number");
    return out;
  }

  std::optional<double> real(const std::string& section, const std::string& key) const {
    const auto v = list(section, key);
    if (!v) return std::nullopt;
    if (v->size() != 1) fail(section, key, "expected a single number");
    return v->front();
  }

  std::optional<long> integer(const std::string& section, const std::string& key) const {
    const auto v = real(section, key);
    if (!v) return std::nullopt;
    if (*v != std::floor(*v)) fail(section, key, "expected an integer");
    return static_cast<long>(*v);
  }

  std::optional<ShapeSpec> shape(const std::string& section, const std::string& key) const {
    const auto v = raw(section, key);
    if (!v) return std::nullopt;
    std::istringstream in(*v);
    ShapeSpec s;
    in >> s.kind;
    if (s.kind != "box" && s.kind != "ball") fail(section, key, "shape must start with 'box' or 'ball'");
    std::string rest;
    std::getline(in, rest);
    s.params = numbers(section, key, rest);
    return s;
  }

  void check_unknown() const {
    for (const auto& [section, body] : tree_) {
      const auto it = known_keys().find(section);
      if (it == known_keys().end()) {
        throw ConfigError("unknown section [" + section + "]");
      }
      for (const auto& [key, value] : body) {
        if (!it->second.count(key)) fail(section, key, "unknown key");
      }
    }
  }

 private:
  const pt::ptree& tree_;
  const std::string& text_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    if constexpr (std::is_floating_point_v<T>) {
      s += fmt(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

std::string shape_text(const ShapeSpec& s) { return s.kind + " " + join(s.params); }

void validate_shape(const Reader& r, const std::string& key, const ShapeSpec& s, int dim) {
  const std::size_t want = s.kind == "box" ? 2u * static_cast<std::size_t>(dim) : static_cast<std::size_t>(dim) + 1;
  if (s.params.size() != want) {
    r.fail("domain", key, s.kind + " in " + std::to_string(dim) + "D takes " + std::to_string(want) + " numbers");
  }
  if (s.kind == "ball" && !(s.params.back() > 0.0)) r.fail("domain", key, "ball radius must be positive");
  if (s.kind == "box") {
    for (int d = 0; d < dim; ++d) {
      if (!(s.params[2 * d] < s.params[2 * d + 1])) r.fail("domain", key, "box bounds must be increasing");
    }
  }
}

NodePredicate predicate(const ShapeSpec& s, int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  if (s.kind == "ball") {
    return dim == 1 ? ball_predicate({s.params[0], 0.0}, s.params[1])
                    : ball_predicate({s.params[0], s.params[1]}, s.params[2]);
  }
  return dim == 1 ? box_predicate({s.params[0], -inf}, {s.params[1], inf})
                  : box_predicate({s.params[0], s.params[2]}, {s.params[1], s.params[3]});
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.message(), e.line());
  }
  const Reader r(tree, text);
  r.check_unknown();

  RunConfig c;
  if (auto v = r.integer("domain", "dim")) {
    if (*v != 1 && *v != 2) r.fail("domain", "dim", "dimension must be 1 or 2");
    c.domain.dim = static_cast<int>(*v);
  }
  const int dim = c.domain.dim;
  if (dim == 2) {
    c.domain.bounds = {0.0, 1.0, 0.0, 1.0};
    c.domain.n = {32, 32};
  }
  if (auto v = r.list("domain", "bounds")) {
    if (v->size() != 2u * static_cast<std::size_t>(dim)) r.fail("domain", "bounds", "expected 2 numbers per axis");
    for (int d = 0; d < dim; ++d) {
      if (!((*v)[2 * d] < (*v)[2 * d + 1])) r.fail("domain", "bounds", "bounds must be increasing");
    }
    c.domain.bounds = *v;
  }
  if (auto v = r.list("domain", "n")) {
    if (v->size() != static_cast<std::size_t>(dim)) r.fail("domain", "n", "expected one count per axis");
    c.domain.n.clear();
    for (double x : *v) {
      if (x != std::floor(x) || x < 4) r.fail("domain", "n", "node counts must be integers >= 4");
      c.domain.n.push_back(static_cast<int>(x));
    }
  }
  if (auto s = r.shape("domain", "inner")) {
    validate_shape(r, "inner", *s, dim);
    c.domain.inner = *s;
  }
  if (auto s = r.shape("domain", "exclude")) {
    if (dim != 2) r.fail("domain", "exclude", "exclusion masks are 2D only");
    validate_shape(r, "exclude", *s, dim);
    c.domain.exclude = *s;
  }

  if (auto v = r.real("operator", "alpha")) {
    if (!(*v > 0.0 && *v <= 2.0)) r.fail("operator", "alpha", "alpha must lie in (0, 2]");
    c.alpha = *v;
  }

  int choices = 0;
  if (auto v = r.real("problem", "a")) {
    if (!(*v > 0.0)) r.fail("problem", "a", "a must be positive");
    c.problem.a = *v;
    ++choices;
  }
  if (auto v = r.list("problem", "a_grid")) {
    if (!std::is_sorted(v->begin(), v->end())) r.fail("problem", "a_grid", "a_grid must be sorted");
    if (v->front() <= 0.0) r.fail("problem", "a_grid", "a values must be positive");
    c.problem.a_grid = *v;
    ++choices;
  }
  if (auto v = r.real("problem", "a_window_fraction")) {
    if (!(*v > 0.0 && *v < 1.0)) r.fail("problem", "a_window_fraction", "fraction must lie in (0, 1)");
    c.problem.a_window_fraction = *v;
    ++choices;
  }
  if (auto v = r.integer("problem", "a_window_points")) {
    if (*v < 1) r.fail("problem", "a_window_points", "need at least one point");
    c.problem.a_window_points = static_cast<int>(*v);
    ++choices;
  }
  if (auto v = r.list("problem", "a_span_relative")) {
    if (v->size() != 3 || (*v)[2] < 2 || (*v)[2] != std::floor((*v)[2]) || !((*v)[0] > 0.0)) {
      r.fail("problem", "a_span_relative", "expected 'lo hi count' with lo > 0 and integer count >= 2");
    }
    c.problem.a_span_relative = *v;
    ++choices;
  }
  if (choices > 1) throw ConfigError("[problem] set only one of a, a_grid, a_window_fraction, a_window_points, a_span_relative");

  if (auto v = r.raw("solver", "inner")) {
    if (*v != "psor" && *v != "penalty") r.fail("solver", "inner", "inner solver must be 'psor' or 'penalty'");
    c.solver.inner = *v;
  }
  if (auto v = r.real("solver", "omega")) {
    if (!(*v > 0.0 && *v < 2.0)) r.fail("solver", "omega", "omega must lie in (0, 2)");
    c.solver.omega = *v;
  }
  auto positive = [&](const char* key, double& field) {
    if (auto v = r.real("solver", key)) {
      if (!(*v > 0.0)) r.fail("solver", key, "must be positive");
      field = *v;
    }
  };
  positive("inner_tol", c.solver.inner_tol);
  positive("outer_tol", c.solver.outer_tol);
  positive("zero_tol", c.solver.zero_tol);
  positive("penalty", c.solver.penalty);
  positive("contact_tol", c.solver.contact_tol);
  positive("verify_tol", c.solver.verify_tol);
  if (auto v = r.real("solver", "blowup_cap")) {
    if (!(*v > 0.0)) r.fail("solver", "blowup_cap", "must be positive");
    c.solver.blowup_cap = *v;
  }
  if (auto v = r.integer("solver", "max_iter")) {
    if (*v < 1) r.fail("solver", "max_iter", "must be positive");
    c.solver.max_iter = *v;
  }
  if (auto v = r.integer("solver", "max_sweeps")) {
    if (*v < 1) r.fail("solver", "max_sweeps", "must be positive");
    c.solver.max_sweeps = *v;
  }

  if (auto v = r.integer("sweep", "starts")) {
    if (*v < 1) r.fail("sweep", "starts", "need at least one start");
    c.sweep.starts = static_cast<int>(*v);
  }

  if (auto v = r.list("potential", "times")) {
    for (double t : *v) {
      if (!(t > 0.0)) r.fail("potential", "times", "times must be positive");
    }
    c.potential.times = *v;
  }
  if (auto v = r.list("potential", "refine")) {
    c.potential.refine.clear();
    for (double x : *v) {
      if (x != std::floor(x) || x < 4) r.fail("potential", "refine", "node counts must be integers >= 4");
      c.potential.refine.push_back(static_cast<int>(x));
    }
  }
  if (auto v = r.real("potential", "beta")) {
    if (!(*v > 0.0)) r.fail("potential", "beta", "must be positive");
    c.potential.beta = *v;
  }

  if (auto v = r.real("mc", "dt")) {
    if (!(*v > 0.0)) r.fail("mc", "dt", "must be positive");
    c.mc.dt = *v;
  }
  if (auto v = r.integer("mc", "n_paths")) {
    if (*v < 2) r.fail("mc", "n_paths", "need at least two paths");
    c.mc.n_paths = *v;
  }
  if (auto v = r.real("mc", "t")) {
    if (!(*v >= 0.0)) r.fail("mc", "t", "must be nonnegative");
    c.mc.t = *v;
  }
  if (auto v = r.real("mc", "beta")) {
    if (!(*v >= 0.0)) r.fail("mc", "beta", "must be nonnegative");
    c.mc.beta = *v;
  }

  if (auto v = r.raw("run", "seed")) {
    try {
      std::size_t used = 0;
      c.seed = std::stoull(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      r.fail("run", "seed", "seed must be a nonnegative integer");
    }
  }
  if (auto v = r.raw("run", "output")) {
    if (v->empty()) r.fail("run", "output", "must not be empty");
    c.output_dir = *v;
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[domain]\n";
  os << "dim = " << c.domain.dim << "\n";
  os << "bounds = " << join(c.domain.bounds) << "\n";
  os << "n = " << join(c.domain.n) << "\n";
  if (c.domain.inner) os << "inner = " << shape_text(*c.domain.inner) << "\n";
  if (c.domain.exclude) os << "exclude = " << shape_text(*c.domain.exclude) << "\n";
  os << "\n[operator]\nalpha = " << fmt(c.alpha) << "\n";
  os << "\n[problem]\n";
  if (c.problem.a) os << "a = " << fmt(*c.problem.a) << "\n";
  if (!c.problem.a_grid.empty()) os << "a_grid = " << join(c.problem.a_grid) << "\n";
  if (c.problem.a_window_fraction) os << "a_window_fraction = " << fmt(*c.problem.a_window_fraction) << "\n";
  if (c.problem.a_window_points) os << "a_window_points = " << *c.problem.a_window_points << "\n";
  if (c.problem.a_span_relative) os << "a_span_relative = " << join(*c.problem.a_span_relative) << "\n";
  const auto& s = c.solver;
  os << "\n[solver]\n";
  os << "inner = " << s.inner << "\n";
  os << "omega = " << fmt(s.omega) << "\n";
  os << "inner_tol = " << fmt(s.inner_tol) << "\n";
  os << "outer_tol = " << fmt(s.outer_tol) << "\n";
  os << "zero_tol = " << fmt(s.zero_tol) << "\n";
  if (s.blowup_cap) os << "blowup_cap = " << fmt(*s.blowup_cap) << "\n";
  os << "max_iter = " << s.max_iter << "\n";
  os << "max_sweeps = " << s.max_sweeps << "\n";
  os << "penalty = " << fmt(s.penalty) << "\n";
  os << "contact_tol = " << fmt(s.contact_tol) << "\n";
  os << "verify_tol = " << fmt(s.verify_tol) << "\n";
  os << "\n[sweep]\nstarts = " << c.sweep.starts << "\n";
  os << "\n[potential]\n";
  os << "times = " << join(c.potential.times) << "\n";
  os << "refine = " << join(c.potential.refine) << "\n";
  os << "beta = " << fmt(c.potential.beta) << "\n";
  os << "\n[mc]\n";
  if (c.mc.dt) os << "dt = " << fmt(*c.mc.dt) << "\n";
  os << "n_paths = " << c.mc.n_paths << "\n";
  os << "t = " << fmt(c.mc.t) << "\n";
  os << "beta = " << fmt(c.mc.beta) << "\n";
  os << "\n[run]\nseed = " << c.seed << "\noutput = " << c.output_dir << "\n";
  return os.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  // Where results go does not change what is computed.
  RunConfig key = cfg;
  key.output_dir.clear();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char ch : serialize_config(key)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

GridDomain build_domain(const DomainSpec& spec) {
  const auto& b = spec.bounds;
  GridDomain g = spec.dim == 1 ? GridDomain::interval(b[0], b[1], spec.n[0])
                               : GridDomain::rectangle(b[0], b[1], b[2], b[3], spec.n[0], spec.n[1]);
  if (spec.exclude) {
    const NodePredicate out = predicate(*spec.exclude, spec.dim);
    g = g.with_mask([out](const Point& p) { return !out(p); });
  }
  if (spec.inner) g = g.with_inner_domain(predicate(*spec.inner, spec.dim));
  return g;
}

DomainSpec refined(const DomainSpec& spec, int factor) {
  DomainSpec out = spec;
  for (auto& n : out.n) n = spec.dim == 1 ? factor * (n + 1) - 1 : factor * n;
  return out;
}

SolveOptions solve_options(const SolverSpec& s) {
  SolveOptions o;
  o.inner.omega = s.omega;
  o.inner.tol = s.inner_tol;
  o.inner.max_sweeps = s.max_sweeps;
  o.inner_solver = s.inner == "penalty" ? InnerSolver::penalty : InnerSolver::psor;
  o.penalty = s.penalty;
  o.outer_tol = s.outer_tol;
  o.zero_tol = s.zero_tol;
  o.blowup_cap = s.blowup_cap;
  o.max_outer = s.max_iter;
  o.contact_tol = s.contact_tol;
  o.verify_tol = s.verify_tol;
  return o;
}

std::vector<double> resolve_a_values(const ProblemSpec& p, double lambda_d, std::optional<double> lambda_d0) {
  auto need_window = [&](const char* what) {
    if (!lambda_d0) throw ConfigError(std::string("[problem] ") + what + " needs an inner domain D0");
    return *lambda_d0;
  };
  if (p.a) return {*p.a};
  if (!p.a_grid.empty()) return p.a_grid;
  if (p.a_window_fraction) {
    const double hi = need_window("a_window_fraction");
    return {lambda_d + *p.a_window_fraction * (hi - lambda_d)};
  }
  if (p.a_window_points) {
    const double hi = need_window("a_window_points");
    std::vector<double> out;
    const int n = *p.a_window_points;
    for (int k = 1; k <= n; ++k) out.push_back(lambda_d + k * (hi - lambda_d) / (n + 1));
    return out;
  }
  if (p.a_span_relative) {
    const double hi = need_window("a_span_relative");
    const auto& s = *p.a_span_relative;
    const double lo_a = s[0] * lambda_d;
    const double hi_a = s[1] * hi;
    const int n = static_cast<int>(s[2]);
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(lo_a + k * (hi_a - lo_a) / (n - 1));
    return out;
  }
  // Nothing configured: the window midpoint.
  const double hi = need_window("default a (window midpoint)");
  return {0.5 * (lambda_d + hi)};
}

}  // namespace fraclab::harness
