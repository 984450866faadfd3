#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fraclab/domain.hpp"
#include "fraclab/obstacle.hpp"

namespace fraclab::harness {

/// Thrown for malformed configs; `line` is 0 when no line applies.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, unsigned long line = 0);
  unsigned long line() const { return line_; }

 private:
  unsigned long line_;
};

/// A D0 or exclusion shape: "box lo hi" / "ball c r" in 1D,
/// "box x0 x1 y0 y1" / "ball cx cy r" in 2D.
struct ShapeSpec {
  std::string kind;  // "box" or "ball"
  std::vector<double> params;

  bool operator==(const ShapeSpec&) const = default;
};

struct DomainSpec {
  int dim = 1;
  std::vector<double> bounds{-1.0, 1.0};  // a b, or x0 x1 y0 y1
  std::vector<int> n{255};                // nodes (1D) or cells per axis (2D)
  std::optional<ShapeSpec> inner;
  std::optional<ShapeSpec> exclude;       // 2D only

  bool operator==(const DomainSpec&) const = default;
};

/// Exactly one way of choosing a is active; window-relative forms are
/// resolved once the eigenvalues are known.
struct ProblemSpec {
  std::optional<double> a;
  std::vector<double> a_grid;
  std::optional<double> a_window_fraction;       // a = l_D + f (l_D0 - l_D)
  std::optional<int> a_window_points;            // N interior points of the window
  std::optional<std::vector<double>> a_span_relative;  // lo hi count: lo l_D .. hi l_D0

  bool operator==(const ProblemSpec&) const = default;
};

struct SolverSpec {
  std::string inner = "psor";
  double omega = 1.5;
  double inner_tol = 1e-12;
  double outer_tol = 1e-9;
  double zero_tol = 1e-8;
  std::optional<double> blowup_cap;
  long max_iter = 200000;
  long max_sweeps = 2000000;
  double penalty = 1e6;
  double contact_tol = 1e-8;
  double verify_tol = 1e-8;

  bool operator==(const SolverSpec&) const = default;
};

struct SweepSpec {
  int starts = 5;

  bool operator==(const SweepSpec&) const = default;
};

struct PotentialSpec {
  std::vector<double> times{0.1, 1.0};
  std::vector<int> refine{64, 128, 256};
  double beta = 1.0;

  bool operator==(const PotentialSpec&) const = default;
};

struct McSpec {
  std::optional<double> dt;  // default 1e-3 diam^alpha
  long n_paths = 100000;
  double t = 0.25;
  double beta = 0.0;

  bool operator==(const McSpec&) const = default;
};

struct RunConfig {
  DomainSpec domain;
  double alpha = 1.0;
  ProblemSpec problem;
  SolverSpec solver;
  SweepSpec sweep;
  PotentialSpec potential;
  McSpec mc;
  std::uint64_t seed = 1;
  std::string output_dir = "results";

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

/// 64-bit FNV-1a of the canonical serialisation, ignoring the output directory.
std::uint64_t config_hash(const RunConfig& cfg);

/// Grid with D0 set when configured.
GridDomain build_domain(const DomainSpec& spec);

/// Same shapes with the node counts multiplied by `factor` (refinement studies).
DomainSpec refined(const DomainSpec& spec, int factor);

SolveOptions solve_options(const SolverSpec& spec);

/// Resolves the configured a-values against the window (lambda_D, lambda_D0).
std::vector<double> resolve_a_values(const ProblemSpec& p, double lambda_d, std::optional<double> lambda_d0);

}  // namespace fraclab::harness
