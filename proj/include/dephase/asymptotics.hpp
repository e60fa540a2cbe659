#pragma once

#include "dephase/spin_state.hpp"

namespace dephase {

struct NoiseSetting;

// Large-mass predictions, valid when M = delta j^2 is large.
struct AsymptoticPrediction {
  double inv_f_theta = 0.0;
  double inv_f_delta = 0.0;
  double mass = 0.0;
  double gradient_integral = 0.0;
  bool valid = false;  // mass >= kMassThreshold
};

inline constexpr double kMassThreshold = 10.0;

// Discretized integral of phi'(x)^2 over x = m/j:
//   j^2 sum_m (phi_{m+1} - phi_m)^2
// with phantom zeros at m = +-(j+1) (hard wall outside |x| <= 1).
double GradientIntegral(const ProbeState& state);

// 1/F_theta ~ delta + gradient_integral / j^2.
double PredictInvFTheta(const ProbeState& state, double delta);

// 1/F_delta ~ 2 delta^2 + 4 delta gradient_integral / j^2.
double PredictInvFDelta(const ProbeState& state, double delta);

AsymptoticPrediction Predict(const ProbeState& state, double delta);

// Optimal-clustering bounds on 1/F for N particles:
//   2 sqrt(delta)/N  <~  1/F  <~  2 pi sqrt(delta)/N.
struct ClusteringBounds {
  double lower = 0.0;
  double upper = 0.0;
  // Stationary cluster counts of nu * F(N/nu) for the two bound models:
  // per-cluster error delta + nu^2/N^2 (lower) and delta + pi^2 nu^2/N^2
  // (upper).
  double nu_lower = 0.0;
  double nu_upper = 0.0;
  bool small_delta = true;  // false when delta > 0.25
};

// Throws std::invalid_argument for particles < 1 or negative delta.
ClusteringBounds ComputeClusteringBounds(int particles, double delta);

// Fisher information inequality for a sum of independent variables:
// 1/F >= 1/f_classical + 1/f_statistical. Infinite inputs contribute zero.
double FisherSumBound(double f_classical, double f_statistical);

// delta + 1/N^2: the bound with f_classical = 1/delta and f_statistical = N^2.
double FisherSumBoundFor(int particles, double delta);

}  // namespace dephase
