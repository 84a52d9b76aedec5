// report.hpp
// Uniform result record for every verification routine: one entry per
// check with the tolerance used and the worst deviation observed.

#pragma once

#include <string>
#include <vector>

namespace mdil {

struct CheckResult {
  std::string name;
  int t = -1;  // time index, -1 when the check is not time-indexed
  double tolerance = 0.0;
  double max_abs_deviation = 0.0;
  bool pass = false;
  std::string detail;  // locator for failures or informational note
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  // pass = deviation <= tolerance; returns the stored entry.
  CheckResult& add(std::string name, int t, double tolerance,
                   double max_abs_deviation, std::string detail = "");

  // Recorded value without a pass criterion (always passes).
  CheckResult& add_info(std::string name, int t, double value,
                        std::string detail);

  void merge(const VerificationReport& other);

  bool all_pass() const;
  double max_deviation() const;
};

}  // namespace mdil
