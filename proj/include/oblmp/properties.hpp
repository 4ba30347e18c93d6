#pragma once

// Randomized invariant suites shared by `oblmp verify` and the test binaries.

#include <cstdint>
#include <string>
#include <vector>

namespace oblmp {

struct VerifyConfig {
  std::uint64_t seed = 1;
  /// Multiplies the number of cases of every property.
  double scale = 1.0;
  /// Flips the sign of the dual update while building duals (mutation check).
  bool inject_sign_fault = false;
};

struct PropertyOutcome {
  std::string name;
  bool passed = true;
  long cases = 0;
  double worst = 0.0;      ///< worst observed deviation (or mismatch count)
  double tolerance = 0.0;
  long failing_case = -1;  ///< first failing case, rerun with the same seed to reproduce
  std::string detail;
};

/// Names of all properties, in run order.
std::vector<std::string> property_names();

/// Runs one property. Throws Error for an unknown name.
PropertyOutcome run_property(const std::string& name, const VerifyConfig& cfg);

std::vector<PropertyOutcome> run_property_suite(const VerifyConfig& cfg);

}  // namespace oblmp
