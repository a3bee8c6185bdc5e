/**
 * @file validation.hpp
 * @brief Invariant suites that exercise every module on reference scenarios
 *        and report measured values against tolerances.
 */
#pragma once

#include <map>
#include <string>
#include <vector>

namespace helios {

struct CheckResult {
  std::string suite;
  std::string name;
  int criterion = 0;  ///< acceptance criterion this check belongs to, 0 if auxiliary
  double value = 0.0;
  double tolerance = 0.0;
  std::string comparison;  ///< "<=", ">=", ">" or "=="
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool pass() const;
};

/// Named tolerances; defaults are the documented acceptance thresholds.
class ValidationTolerances {
 public:
  ValidationTolerances();
  double get(const std::string& key) const;
  /// Throws InvalidArgument for unknown keys.
  void set(const std::string& key, double value);
  const std::map<std::string, double>& values() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

/// symplectic, conservation, cosphere, fermat, measure, wigner.
const std::vector<std::string>& suite_names();
bool is_suite_name(const std::string& name);

/// Runs one suite, or every suite for "all".
std::vector<SuiteReport> run_suite(const std::string& name, const ValidationTolerances& tolerances = {});

struct CriterionStatus {
  int criterion = 0;
  std::string title;
  bool pass = false;
  std::vector<const CheckResult*> checks;
};

/// Groups the checks of the given reports by acceptance criterion (1..8).
std::vector<CriterionStatus> criterion_summary(const std::vector<SuiteReport>& reports);

}  // namespace helios
