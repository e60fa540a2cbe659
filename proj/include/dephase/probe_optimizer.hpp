#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dephase/qfi.hpp"
#include "dephase/spin_state.hpp"

namespace dephase {

enum class Objective { kPhaseQfi, kDiffusionQfi, kPhaseVariance };

std::string_view ObjectiveName(Objective objective);
// Accepts phase_qfi, diffusion_qfi, phase_variance.
Objective ParseObjective(std::string_view name);

// Whether larger objective values are better.
bool Maximizes(Objective objective);

enum class GradientMethod {
  // Envelope-theorem gradient through the optimal SLD (or the exact quadratic
  // form for the phase variance).
  kAnalytic,
  // Central differences of the normalized objective, step fd_step * |phi_i|
  // (absolute fd_step for zero entries).
  kFiniteDifference,
};

struct OptimizerTolerances {
  int max_iterations = 5000;
  double gradient_norm = 1e-10;
  double fd_step = 1e-6;
};

inline constexpr std::uint64_t kDefaultOptimizerSeed = 20240501;

struct OptimizationProblem {
  SpinDimension dim = SpinDimension::FromTwiceJ(1);
  NoiseSetting setting;
  Objective objective = Objective::kPhaseQfi;
  bool symmetric = true;
  std::vector<ProbeState> starts;
  OptimizerTolerances tolerances;
  GradientMethod gradient = GradientMethod::kAnalytic;
  int threads = 1;

  // Throws std::invalid_argument for an empty start list, mismatched
  // dimensions or non-positive tolerances.
  void Validate() const;
};

struct StartOutcome {
  std::string label;
  double initial_value = 0.0;
  double final_value = 0.0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
};

struct OptimizationResult {
  ProbeState best_state;
  double best_value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string best_start;
  std::vector<StartOutcome> starts;  // same order as the problem's starts
};

// Cosine, NOON, flat and gaussian (w = sqrt(N)/2) profiles.
std::vector<ProbeState> DefaultStarts(SpinDimension dim);

// `count` random profiles (uniform in [-1, 1) per component, mirrored when
// `symmetric`), reproducible from the seed.
std::vector<ProbeState> RandomStarts(SpinDimension dim, int count,
                                     std::uint64_t seed, bool symmetric = true);

// Objective value at a state and its gradient with respect to the raw
// amplitude vector.
double EvaluateObjective(Objective objective, SpinDimension dim,
                         const Eigen::VectorXd& amplitudes,
                         const NoiseSetting& setting);
Eigen::VectorXd ObjectiveGradient(Objective objective, SpinDimension dim,
                                  const Eigen::VectorXd& amplitudes,
                                  const NoiseSetting& setting,
                                  GradientMethod method, double fd_step);

// Projected ascent on the unit sphere from every start; returns the best
// final iterate. Ties within 1e-9 relative go to the smaller boundary
// amplitude, then to the earlier start.
OptimizationResult Optimize(const OptimizationProblem& problem);

// Best F_theta over default starts plus 20 random symmetric starts.
double OptimalQfi(SpinDimension dim, double delta,
                  std::uint64_t seed = kDefaultOptimizerSeed);

// Wrapped second moment of the convolved canonical-phase distribution.
double PhaseVarianceObjective(const ProbeState& state,
                              const NoiseSetting& setting);

// The same moment as the exact quadratic form phi^T Q phi, with
// Q_{mm'} = B(m - m') exp(-delta (m - m')^2 / 2), B(0) = pi^2/3,
// B(k) = 2 (-1)^k / k^2.
Eigen::MatrixXd PhaseVarianceForm(SpinDimension dim, double delta);

}  // namespace dephase
