#pragma once

#include <string>
#include <vector>

namespace ssar::cli {

/// One row of the verify table: passes when the measured `value` (an error
/// or a violation count) is finite and below `tolerance`.
struct CheckResult {
  std::string suite;
  std::string check;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  double seconds = 0.0;
};

/// Penalty and NLL gradients on 1000 random tabular instances.
std::vector<CheckResult> verify_proposition_suite();
/// deterministic_margin == 2 delta^2 (log N(a; pi, delta^2 I) - C_n) on
/// 10000 random inputs.
std::vector<CheckResult> verify_margin_suite();
/// Every loss against central differences on random batches of 16.
std::vector<CheckResult> verify_gradient_suite();
/// IQL V on the two-state chain vs. the tabular solve, plus scalar
/// expectile monotonicity and the tau = 0.5 mean.
std::vector<CheckResult> verify_expectile_suite();

std::vector<CheckResult> verify_all();

/// Fixed-width pass/fail table.
std::string format_table(const std::vector<CheckResult>& rows);
bool all_passed(const std::vector<CheckResult>& rows);

}  // namespace ssar::cli
