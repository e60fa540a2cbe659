#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dephase {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Invariant suite. The quick suite stays at j <= 10; the full suite adds the
// measurement chain at j up to 100 and the larger round trips.
std::vector<CheckResult> RunValidationSuite(bool quick, int threads = 1);

// Tr sqrt(sqrt(a) b sqrt(a)) for positive semidefinite a, b.
double RootFidelity(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

}  // namespace dephase
