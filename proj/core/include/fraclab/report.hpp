#pragma once

#include <string>
#include <vector>

namespace fraclab {

/// One measured quantity compared against a threshold.
struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// Outcome of a verifier: named checks plus an overall verdict.
struct Report {
  std::string name;
  std::vector<Check> checks;

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }

  /// value <= threshold
  void at_most(std::string what, double value, double threshold) {
    checks.push_back({std::move(what), value, threshold, value <= threshold});
  }
  /// value >= threshold
  void at_least(std::string what, double value, double threshold) {
    checks.push_back({std::move(what), value, threshold, value >= threshold});
  }
  /// value > threshold
  void above(std::string what, double value, double threshold) {
    checks.push_back({std::move(what), value, threshold, value > threshold});
  }
  /// value < threshold
  void below(std::string what, double value, double threshold) {
    checks.push_back({std::move(what), value, threshold, value < threshold});
  }

  const Check* find(const std::string& what) const {
    for (const auto& c : checks) {
      if (c.name == what) return &c;
    }
    return nullptr;
  }
};

}  // namespace fraclab
