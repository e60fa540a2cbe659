#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dephase/qfi.hpp"
#include "dephase/spin_state.hpp"

namespace dephase {

inline constexpr int kDefaultGridSize = 1 << 14;

enum class DistributionKind { kConditional, kConvolved };

// Density of measured phases on the uniform grid angle(g) = -pi + 2 pi g / G,
// normalized so that sum density * 2pi/G = 1.
class PhaseDistribution {
 public:
  // Clamps negative values to zero and renormalizes. Throws
  // std::invalid_argument for an empty, non-finite or all-zero density.
  PhaseDistribution(std::vector<double> density, DistributionKind kind,
                    double theta);

  int size() const { return static_cast<int>(density_.size()); }
  double spacing() const;
  double angle(int g) const;
  std::span<const double> density() const { return density_; }
  double operator[](int g) const { return density_[g]; }
  DistributionKind kind() const { return kind_; }
  // Phase the distribution is conditioned on.
  double theta() const { return theta_; }

  double Normalization() const;
  // Periodic linear interpolation at an arbitrary angle.
  double At(double angle) const;

 private:
  std::vector<double> density_;
  DistributionKind kind_;
  double theta_;
};

// Wraps an angle into [-pi, pi).
double WrapAngle(double angle);

// |sum_m phi_m e^{i m (theta_mu - theta)}|^2 / 2pi on the grid. Rejects
// G < 4 (2j + 1).
PhaseDistribution ConditionalDistribution(const ProbeState& state, double theta,
                                          int grid_size = kDefaultGridSize);

enum class ClosedFormVariant {
  // -2 sin(a/2) cos(N d/2) cos(d/2) / (cos a - cos d), a = pi/N, N = 2j+1.
  // Equal to the direct overlap sum; the points d = +-a are removable.
  kCorrected,
  // sin(a) cos(N d) / (cos a - cos d). Not the overlap sum; it has poles at
  // d = +-a that give two spikes.
  kUncorrected,
};

// Squared closed-form amplitude for the cosine state, rescaled to unit grid
// integral.
PhaseDistribution ClosedFormCosineDistribution(
    SpinDimension dim, double theta = 0.0, int grid_size = kDefaultGridSize,
    ClosedFormVariant variant = ClosedFormVariant::kCorrected);

// Unnormalized closed-form amplitude at offset d = theta_mu - theta.
double ClosedFormCosineAmplitude(SpinDimension dim, double offset,
                                 ClosedFormVariant variant);

// Circular convolution with the wrapped Gaussian of variance delta, by
// multiplying Fourier mode k with exp(-k^2 delta / 2).
PhaseDistribution ConvolveWithDiffusion(const PhaseDistribution& dist,
                                        double delta);

// Conditional distribution at setting.theta convolved with setting.delta.
PhaseDistribution ConvolvedDistribution(const ProbeState& state,
                                        const NoiseSetting& setting,
                                        int grid_size = kDefaultGridSize);

// Wrapped normal density with the given variance, centered at `center`.
PhaseDistribution WrappedGaussianDistribution(double variance, double center,
                                              int grid_size = kDefaultGridSize);

// Second moment of the wrapped deviation from theta_true.
double WrappedVariance(const PhaseDistribution& dist, double theta_true);

// Variance of a single canonical phase measurement without dephasing.
double MeasurementVariance(const ProbeState& state,
                           int grid_size = kDefaultGridSize);

// Grid integral of (p')^2 / p with p' the spectral derivative. Densities are
// floored at 1e-13 of the peak (and never below 1e-300) before division.
double ClassicalFisher(const PhaseDistribution& dist);

// Same integral with the derivative taken in theta: (p(theta+h) -
// p(theta-h)) / 2h from two distributions of the family.
double ClassicalFisherFromFamily(
    const std::function<PhaseDistribution(double)>& family, double theta,
    double h);

// Inverse-CDF sampling with the CDF linearly interpolated between grid
// points. Samples lie in [-pi, pi). Throws std::invalid_argument for
// shots < 1.
class PhaseSampler {
 public:
  explicit PhaseSampler(const PhaseDistribution& dist);
  std::vector<double> Sample(int shots, std::uint64_t seed) const;
  double Quantile(double u) const;

 private:
  std::vector<double> cdf_;
  double start_ = 0.0;
  double spacing_ = 0.0;
};

std::vector<double> SampleMeasurements(const PhaseDistribution& dist, int shots,
                                       std::uint64_t seed);

// Draws zeta ~ Normal(0, delta) and theta_mu from the conditional
// distribution, returning the wrapped sum.
std::vector<double> SampleTwoStage(const PhaseDistribution& conditional,
                                   double delta, int shots, std::uint64_t seed);

struct EstimatorRun {
  std::uint64_t seed = 0;
  int shots = 0;
  double theta_true = 0.0;
  double delta_true = 0.0;
  std::vector<double> samples;
  double theta_hat = 0.0;
  double delta_hat = 0.0;
  double sq_error_theta = 0.0;
  double sq_error_delta = 0.0;
};

// Circular mean and unbiased wrapped sample variance minus the single-shot
// measurement variance. Throws std::invalid_argument for fewer than 2 samples.
void EstimatePhaseAndDiffusion(EstimatorRun& run, double measurement_variance);

enum class SamplingMode { kConvolved, kTwoStage };

struct CampaignOptions {
  int shots = 100;
  int trials = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  int grid_size = kDefaultGridSize;
  SamplingMode mode = SamplingMode::kConvolved;
  bool keep_samples = false;
};

struct CampaignResult {
  std::vector<EstimatorRun> runs;  // in trial order; trial i uses seed + i
  double mse_theta = 0.0;
  double mse_delta = 0.0;
  double mean_delta_hat = 0.0;
  double measurement_variance = 0.0;
  double f_theta = 0.0;
  double f_delta = 0.0;
  double crb_theta = 0.0;        // 1 / (nu F_theta)
  double crb_delta = 0.0;        // 1 / (nu F_delta)
  double predicted_delta = 0.0;  // (2 delta^2 + 4 delta s^2) / (nu - 1)
};

CampaignResult RunEstimatorCampaign(const ProbeState& state,
                                    const NoiseSetting& setting,
                                    const CampaignOptions& options);

struct CorrectedErrorReport {
  double p_tilde_at_pi = 0.0;
  double uncorrected = 0.0;      // delta + pi^2 / N^2
  double corrected_error = 0.0;  // uncorrected / [1 - 2 pi p(pi)]^2
  double factor = 0.0;           // corrected / uncorrected
};

CorrectedErrorReport CorrectedError(const ProbeState& state,
                                    const NoiseSetting& setting,
                                    int grid_size = kDefaultGridSize);

}  // namespace dephase
