#include <gtest/gtest.h>

#include <cmath>

#include "config.hpp"

using namespace fraclab;
using namespace fraclab::harness;

namespace {

unsigned long error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  ADD_FAILURE() << "config was accepted:\n" << text;
  return 0;
}

const char* kFull = R"([domain]
dim = 2
bounds = -1 1 -1 1
n = 24 24
inner = ball 0 0 0.4
exclude = box 0.5 0.9 0.5 0.9

[operator]
alpha = 0.75

[problem]
a_span_relative = 0.5 1.5 15

[solver]
inner = penalty
omega = 1.2
inner_tol = 1e-11
penalty = 1e4
blowup_cap = 1e5

[sweep]
starts = 3

[potential]
times = 0.05 0.5 2
refine = 16 32
beta = 0.25

[mc]
dt = 0.002
n_paths = 5000
t = 0.5
beta = 1

[run]
seed = 77
output = out/x
)";

}  // namespace

TEST(Config, DefaultsFromAnEmptyFile) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c, RunConfig{});
  EXPECT_EQ(c.domain.dim, 1);
  EXPECT_EQ(c.domain.n, std::vector<int>{255});
  EXPECT_EQ(c.solver.inner, "psor");
}

TEST(Config, ParsesEverySection) {
  const RunConfig c = parse_config(kFull);
  EXPECT_EQ(c.domain.dim, 2);
  EXPECT_EQ(c.domain.n, (std::vector<int>{24, 24}));
  ASSERT_TRUE(c.domain.inner);
  EXPECT_EQ(c.domain.inner->kind, "ball");
  EXPECT_EQ(c.domain.inner->params, (std::vector<double>{0.0, 0.0, 0.4}));
  ASSERT_TRUE(c.domain.exclude);
  EXPECT_DOUBLE_EQ(c.alpha, 0.75);
  ASSERT_TRUE(c.problem.a_span_relative);
  EXPECT_EQ(*c.problem.a_span_relative, (std::vector<double>{0.5, 1.5, 15.0}));
  EXPECT_EQ(c.solver.inner, "penalty");
  EXPECT_DOUBLE_EQ(c.solver.penalty, 1e4);
  EXPECT_EQ(c.solver.blowup_cap, 1e5);
  EXPECT_EQ(c.sweep.starts, 3);
  EXPECT_EQ(c.potential.refine, (std::vector<int>{16, 32}));
  EXPECT_EQ(c.mc.dt, 0.002);
  EXPECT_EQ(c.mc.n_paths, 5000);
  EXPECT_EQ(c.seed, 77u);
  EXPECT_EQ(c.output_dir, "out/x");
}

TEST(Config, RoundTripIsExact) {
  for (const std::string text : {std::string(kFull), std::string("[problem]\na_grid = 0.1 0.30000000000000004 2\n"),
                                 std::string("[problem]\na = 1.7\n[domain]\nn = 63\ninner = box -0.5 0.5\n")}) {
    const RunConfig c = parse_config(text);
    const std::string canon = serialize_config(c);
    const RunConfig back = parse_config(canon);
    EXPECT_EQ(back, c);
    EXPECT_EQ(serialize_config(back), canon);
    EXPECT_EQ(config_hash(back), config_hash(c));
  }
}

TEST(Config, HashSeparatesConfigs) {
  RunConfig a = parse_config(kFull);
  RunConfig b = a;
  b.seed += 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  RunConfig c = a;
  c.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(c));
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("[domain]\ndim = 1\nn = 3\n"), 3u);
  EXPECT_EQ(error_line("[domain]\n\n\nbogus = 1\n"), 4u);
  EXPECT_EQ(error_line("[operator]\nalpha = 2.5\n"), 2u);
  EXPECT_EQ(error_line("[problem]\na_grid = 1 3 2\n"), 2u);
  EXPECT_EQ(error_line("[solver]\ninner = newton\n"), 2u);
  EXPECT_EQ(error_line("[domain]\ninner = disc 0 1\n"), 2u);
  EXPECT_EQ(error_line("[operator]\nalpha = one\n"), 2u);
  EXPECT_EQ(error_line("[domain\ndim = 1\n"), 1u);
}

TEST(Config, MessagesNameTheProblem) {
  try {
    parse_config("[problem]\na_grid = 1 3 2\n");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("line 2"), std::string::npos) << what;
    EXPECT_NE(what.find("sorted"), std::string::npos) << what;
  }
  EXPECT_THROW(parse_config("[nonsense]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[problem]\na = 1\na_window_points = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("[domain]\ndim = 1\nexclude = box 0 1\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST(Config, ResolvesWindowRelativeValues) {
  const double ld = 1.0;
  const double ld0 = 3.0;
  ProblemSpec p;
  EXPECT_EQ(resolve_a_values(p, ld, ld0), std::vector<double>{2.0});
  p.a_window_fraction = 0.25;
  EXPECT_EQ(resolve_a_values(p, ld, ld0), std::vector<double>{1.5});
  p = {};
  p.a_window_points = 3;
  const auto pts = resolve_a_values(p, ld, ld0);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_DOUBLE_EQ(pts[0], 1.5);
  EXPECT_DOUBLE_EQ(pts[1], 2.0);
  EXPECT_DOUBLE_EQ(pts[2], 2.5);
  p = {};
  p.a_span_relative = std::vector<double>{0.5, 1.5, 3};
  const auto span = resolve_a_values(p, ld, ld0);
  ASSERT_EQ(span.size(), 3u);
  EXPECT_DOUBLE_EQ(span.front(), 0.5);
  EXPECT_DOUBLE_EQ(span.back(), 4.5);
  EXPECT_THROW(resolve_a_values(p, ld, std::nullopt), ConfigError);
  p = {};
  p.a = 0.7;
  EXPECT_EQ(resolve_a_values(p, ld, std::nullopt), std::vector<double>{0.7});
}

TEST(Config, BuildsDomainsAndRefinements) {
  const RunConfig c = parse_config("[domain]\nn = 63\ninner = box -0.5 0.5\n");
  const GridDomain g = build_domain(c.domain);
  EXPECT_EQ(g.size(), 63u);
  EXPECT_EQ(g.inner_count(), 33u);
  const GridDomain fine = build_domain(refined(c.domain, 2));
  EXPECT_GT(fine.size(), g.size());
  const RunConfig two = parse_config(kFull);
  const GridDomain g2 = build_domain(two.domain);
  EXPECT_EQ(g2.dim(), 2);
  EXPECT_LT(g2.size(), 24u * 24u);
  EXPECT_TRUE(g2.has_inner_domain());
  const SolveOptions o = solve_options(two.solver);
  EXPECT_EQ(o.inner_solver, InnerSolver::penalty);
  EXPECT_DOUBLE_EQ(o.inner.omega, 1.2);
  EXPECT_EQ(o.blowup_cap, 1e5);
}
