#include "dephase/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dephase {

double GradientIntegral(const ProbeState& state) {
  const auto amp = state.amplitudes();
  const double j = state.dim().j();
  double sum = amp.front() * amp.front() + amp.back() * amp.back();
  for (std::size_t i = 0; i + 1 < amp.size(); ++i) {
    const double d = amp[i + 1] - amp[i];
    sum += d * d;
  }
  return j * j * sum;
}

double PredictInvFTheta(const ProbeState& state, double delta) {
  const double j = state.dim().j();
  return delta + GradientIntegral(state) / (j * j);
}

double PredictInvFDelta(const ProbeState& state, double delta) {
  const double j = state.dim().j();
  return 2.0 * delta * delta + 4.0 * delta * GradientIntegral(state) / (j * j);
}

AsymptoticPrediction Predict(const ProbeState& state, double delta) {
  const double j = state.dim().j();
  AsymptoticPrediction p;
  p.gradient_integral = GradientIntegral(state);
  p.inv_f_theta = delta + p.gradient_integral / (j * j);
  p.inv_f_delta = 2.0 * delta * delta + 4.0 * delta * p.gradient_integral / (j * j);
  p.mass = delta * j * j;
  p.valid = p.mass >= kMassThreshold;
  return p;
}

ClusteringBounds ComputeClusteringBounds(int particles, double delta) {
  if (particles < 1) throw std::invalid_argument("particle count must be >= 1");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be >= 0");
  const double n = particles;
  const double root = std::sqrt(delta);
  ClusteringBounds b;
  b.lower = 2.0 * root / n;
  b.upper = 2.0 * std::numbers::pi * root / n;
  b.nu_lower = n * root;
  b.nu_upper = n * root / std::numbers::pi;
  b.small_delta = delta <= 0.25;
  return b;
}

double FisherSumBound(double f_classical, double f_statistical) {
  const auto inv = [](double f) {
    return std::isinf(f) ? 0.0 : 1.0 / f;
  };
  return inv(f_classical) + inv(f_statistical);
}

double FisherSumBoundFor(int particles, double delta) {
  const double f_classical =
      delta > 0.0 ? 1.0 / delta : std::numeric_limits<double>::infinity();
  return FisherSumBound(f_classical, static_cast<double>(particles) * particles);
}

}  // namespace dephase
