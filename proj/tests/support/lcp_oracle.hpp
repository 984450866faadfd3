#pragma once

// Brute-force LCP solution by enumerating every active set. Only for tiny
// instances: 2^n linear solves.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace fraclab::testing {

struct LcpOracle {
  Eigen::VectorXd v;
  Eigen::VectorXd nu_density;  // f - A v, zero off the active set
  std::vector<bool> active;
  int feasible_sets = 0;
};

/// Solves A v + nu = f, v <= h, nu >= 0, nu (h - v) = 0 for SPD A with
/// h_i = +inf meaning no constraint. Returns the unique feasible active set.
inline std::optional<LcpOracle> brute_force_lcp(const Eigen::MatrixXd& A, const Eigen::VectorXd& f,
                                                const Eigen::VectorXd& h, double slack = 1e-12) {
  const int n = static_cast<int>(A.rows());
  std::optional<LcpOracle> found;
  int feasible = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<bool> act(static_cast<std::size_t>(n));
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      act[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
      if (act[static_cast<std::size_t>(i)] && !std::isfinite(h[i])) ok = false;
    }
    if (!ok) continue;
    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i) {
      if (!act[static_cast<std::size_t>(i)]) free_idx.push_back(i);
    }
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = act[static_cast<std::size_t>(i)] ? h[i] : 0.0;
    if (!free_idx.empty()) {
      const int m = static_cast<int>(free_idx.size());
      Eigen::MatrixXd Aff(m, m);
      Eigen::VectorXd rhs(m);
      for (int a = 0; a < m; ++a) {
        rhs[a] = f[free_idx[a]];
        for (int i = 0; i < n; ++i) {
          if (act[static_cast<std::size_t>(i)]) rhs[a] -= A(free_idx[a], i) * h[i];
        }
        for (int b = 0; b < m; ++b) Aff(a, b) = A(free_idx[a], free_idx[b]);
      }
      const Eigen::VectorXd vf = Aff.llt().solve(rhs);
      for (int a = 0; a < m; ++a) v[free_idx[a]] = vf[a];
    }
    const Eigen::VectorXd nu = f - A * v;
    for (int i = 0; i < n && ok; ++i) {
      if (act[static_cast<std::size_t>(i)]) {
        ok = nu[i] >= -slack;
      } else {
        ok = v[i] <= h[i] + slack;
      }
    }
    if (!ok) continue;
    ++feasible;
    LcpOracle o;
    o.v = v;
    o.nu_density = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (act[static_cast<std::size_t>(i)]) o.nu_density[i] = nu[i];
    }
    o.active = act;
    found = o;
  }
  if (found) found->feasible_sets = feasible;
  return found;
}

}  // namespace fraclab::testing
