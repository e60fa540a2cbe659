#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dephase/qfi.hpp"

namespace dephase {

struct DeltaRange {
  double min = 1e-4;
  double max = 3.0;
  int points = 60;
  bool log = true;

  // Throws std::invalid_argument for points < 1, negative bounds, min > max,
  // or a log range starting at 0.
  std::vector<double> Values() const;
};

struct SweepConfig {
  std::vector<std::string> states;
  std::vector<int> twice_j;
  DeltaRange delta;
  // Used instead of `delta` when nonempty.
  std::vector<double> delta_values;
  double theta = 0.0;
  double gaussian_width = 0.0;  // 0 selects sqrt(N)/2
  std::string output;
  int threads = 0;

  void Validate() const;
  std::vector<double> Deltas() const;

  // Keys: states, twice_j, delta {min, max, points, log} or delta_values,
  // theta, gaussian_width, output, threads. Unknown keys are rejected.
  static SweepConfig FromJson(const std::string& text);
};

// Rows ordered by state, then twice_j, then delta, regardless of thread
// count.
std::vector<QfiReport> RunSweep(const SweepConfig& config, int threads);

// Header: state,twice_j,delta,f_theta,f_delta,inv_f_minus_delta,
// pred_inv_f_theta,pred_inv_f_delta,mass,asymptotic_valid
void WriteSweepCsv(std::ostream& out, const std::vector<QfiReport>& rows);

}  // namespace dephase
