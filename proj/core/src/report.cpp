#include "mdil/report.hpp"

#include <algorithm>

namespace mdil {

CheckResult& VerificationReport::add(std::string name, int t, double tolerance,
                                     double max_abs_deviation,
                                     std::string detail) {
  checks.push_back({std::move(name), t, tolerance, max_abs_deviation,
                    max_abs_deviation <= tolerance, std::move(detail)});
  return checks.back();
}

CheckResult& VerificationReport::add_info(std::string name, int t,
                                          double value, std::string detail) {
  checks.push_back({std::move(name), t, 0.0, value, true, std::move(detail)});
  return checks.back();
}

void VerificationReport::merge(const VerificationReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

bool VerificationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.pass; });
}

double VerificationReport::max_deviation() const {
  double m = 0.0;
  for (const auto& c : checks) m = std::max(m, c.max_abs_deviation);
  return m;
}

}  // namespace mdil
