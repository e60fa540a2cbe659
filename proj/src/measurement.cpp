#include "dephase/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fftw3.h>

#include "dephase/errors.hpp"
#include "dephase/parallel.hpp"
#include "dephase/simd/kernels.hpp"

namespace dephase {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDensityFloor = 1e-300;

// FFTW's planner is not reentrant.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> Autocorrelation(const ProbeState& state) {
  const auto amp = state.amplitudes();
  const std::size_t n = amp.size();
  std::vector<double> c(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) s += amp[i] * amp[i + k];
    c[k] = s;
  }
  return c;
}

void RequireGrid(SpinDimension dim, int grid_size) {
  const int minimum = 4 * dim.dim();
  if (grid_size < minimum) {
    throw std::invalid_argument("grid size " + std::to_string(grid_size) +
                                " undersamples the distribution; need >= " +
                                std::to_string(minimum));
  }
}

// sin(N e / 2) / sin(e / 2), continuous at e = 0.
double Dirichlet(double n, double e) {
  const double s = std::sin(0.5 * e);
  if (std::abs(s) < 1e-300) return n;
  return std::sin(0.5 * n * e) / s;
}

// Multiplies the discrete Fourier coefficients of `v` by f(k, c) in place.
template <class F>
void ApplySpectral(std::vector<double>& v, F f) {
  const int n = static_cast<int>(v.size());
  const int modes = n / 2 + 1;
  double* real = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(modes);
  fftw_plan forward;
  fftw_plan backward;
  {
    std::lock_guard lock(PlannerMutex());
    forward = fftw_plan_dft_r2c_1d(n, real, spec, FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_1d(n, spec, real, FFTW_ESTIMATE);
  }
  std::copy(v.begin(), v.end(), real);
  fftw_execute(forward);
  for (int k = 0; k < modes; ++k) {
    const std::complex<double> c =
        f(k, std::complex<double>(spec[k][0], spec[k][1])) / static_cast<double>(n);
    spec[k][0] = c.real();
    spec[k][1] = c.imag();
  }
  fftw_execute(backward);
  std::copy(real, real + n, v.begin());
  {
    std::lock_guard lock(PlannerMutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
  fftw_free(real);
  fftw_free(spec);
}

// FFT round-off leaves noise near 1e-16 of the peak; dividing by it is
// meaningless.
double NoiseFloor(const PhaseDistribution& dist) {
  const auto& d = dist.density();
  return std::max(kDensityFloor, 1e-13 * *std::max_element(d.begin(), d.end()));
}

}  // namespace

PhaseDistribution::PhaseDistribution(std::vector<double> density,
                                     DistributionKind kind, double theta)
    : density_(std::move(density)), kind_(kind), theta_(theta) {
  if (density_.empty()) throw std::invalid_argument("empty density");
  double total = 0.0;
  for (double& p : density_) {
    if (!std::isfinite(p)) throw std::invalid_argument("non-finite density");
    if (p < 0.0) p = 0.0;
    total += p;
  }
  if (total <= 0.0) throw std::invalid_argument("density integrates to zero");
  const double scale = 1.0 / (total * spacing());
  for (double& p : density_) p *= scale;
}

double PhaseDistribution::spacing() const {
  return kTwoPi / static_cast<double>(density_.size());
}

double PhaseDistribution::angle(int g) const { return -kPi + g * spacing(); }

double PhaseDistribution::Normalization() const {
  double total = 0.0;
  for (double p : density_) total += p;
  return total * spacing();
}

double PhaseDistribution::At(double angle) const {
  const double pos = (WrapAngle(angle) + kPi) / spacing();
  const int n = size();
  const int g = std::min(static_cast<int>(std::floor(pos)), n - 1);
  const double frac = pos - g;
  return (1.0 - frac) * density_[g] + frac * density_[(g + 1) % n];
}

double WrapAngle(double angle) {
  double w = std::fmod(angle + kPi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  w -= kPi;
  return w >= kPi ? -kPi : w;
}

PhaseDistribution ConditionalDistribution(const ProbeState& state, double theta,
                                          int grid_size) {
  RequireGrid(state.dim(), grid_size);
  const std::vector<double> c = Autocorrelation(state);
  std::vector<double> offset(grid_size);
  const double h = kTwoPi / grid_size;
  for (int g = 0; g < grid_size; ++g) offset[g] = -kPi + g * h - theta;
  std::vector<double> density(grid_size);
  simd::active_kernels().cosine_series(c.data(), c.size(), offset.data(),
                                       offset.size(), density.data());
  for (double& p : density) p /= kTwoPi;
  return PhaseDistribution(std::move(density), DistributionKind::kConditional,
                           theta);
}

double ClosedFormCosineAmplitude(SpinDimension dim, double offset,
                                 ClosedFormVariant variant) {
  const double n = dim.dim();
  const double a = kPi / n;
  const double d = WrapAngle(offset);
  if (variant == ClosedFormVariant::kUncorrected) {
    const double denom = std::cos(a) - std::cos(d);
    if (denom == 0.0) {
      throw NumericalError("uncorrected closed form has a pole at this angle");
    }
    return std::sin(a) * std::cos(n * d) / denom;
  }
  // cos a - cos d = 2 sin((d+a)/2) sin((d-a)/2) and N a = pi, so the zero of
  // the denominator nearest to d cancels against cos(N d / 2).
  const double front = std::sin(0.5 * a) * std::cos(0.5 * d);
  if (std::abs(d - a) <= std::abs(d + a)) {
    return front * Dirichlet(n, d - a) / std::sin(0.5 * (d + a));
  }
  return -front * Dirichlet(n, d + a) / std::sin(0.5 * (d - a));
}

PhaseDistribution ClosedFormCosineDistribution(SpinDimension dim, double theta,
                                               int grid_size,
                                               ClosedFormVariant variant) {
  RequireGrid(dim, grid_size);
  std::vector<double> density(grid_size);
  const double h = kTwoPi / grid_size;
  for (int g = 0; g < grid_size; ++g) {
    const double amp =
        ClosedFormCosineAmplitude(dim, -kPi + g * h - theta, variant);
    density[g] = amp * amp;
  }
  return PhaseDistribution(std::move(density), DistributionKind::kConditional,
                           theta);
}

PhaseDistribution ConvolveWithDiffusion(const PhaseDistribution& dist,
                                        double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("delta must be finite and >= 0");
  }
  std::vector<double> out(dist.density().begin(), dist.density().end());
  if (delta > 0.0) {
    ApplySpectral(out, [delta](int k, std::complex<double> c) {
      return std::exp(-0.5 * delta * k * k) * c;
    });
  }
  return PhaseDistribution(std::move(out), DistributionKind::kConvolved,
                           dist.theta());
}

PhaseDistribution ConvolvedDistribution(const ProbeState& state,
                                        const NoiseSetting& setting,
                                        int grid_size) {
  setting.Validate();
  return ConvolveWithDiffusion(
      ConditionalDistribution(state, setting.theta, grid_size), setting.delta);
}

PhaseDistribution WrappedGaussianDistribution(double variance, double center,
                                              int grid_size) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("variance must be positive");
  }
  if (grid_size < 2) throw std::invalid_argument("grid too small");
  const int images =
      static_cast<int>(std::ceil((kPi + std::sqrt(80.0 * variance)) / kTwoPi)) + 1;
  std::vector<double> density(grid_size);
  const double h = kTwoPi / grid_size;
  const double norm = 1.0 / std::sqrt(kTwoPi * variance);
  for (int g = 0; g < grid_size; ++g) {
    const double x = WrapAngle(-kPi + g * h - center);
    double s = 0.0;
    for (int k = -images; k <= images; ++k) {
      const double y = x + kTwoPi * k;
      s += std::exp(-0.5 * y * y / variance);
    }
    density[g] = norm * s;
  }
  return PhaseDistribution(std::move(density), DistributionKind::kConvolved,
                           center);
}

double WrappedVariance(const PhaseDistribution& dist, double theta_true) {
  double s = 0.0;
  for (int g = 0; g < dist.size(); ++g) {
    const double d = WrapAngle(dist.angle(g) - theta_true);
    s += dist[g] * d * d;
  }
  return s * dist.spacing();
}

double MeasurementVariance(const ProbeState& state, int grid_size) {
  return WrappedVariance(ConditionalDistribution(state, 0.0, grid_size), 0.0);
}

double ClassicalFisher(const PhaseDistribution& dist) {
  const int n = dist.size();
  std::vector<double> deriv(dist.density().begin(), dist.density().end());
  ApplySpectral(deriv, [n](int k, std::complex<double> c) {
    if (2 * k == n) return std::complex<double>(0.0, 0.0);
    return std::complex<double>(0.0, k) * c;
  });
  const double floor = NoiseFloor(dist);
  double s = 0.0;
  for (int g = 0; g < n; ++g) {
    s += deriv[g] * deriv[g] / std::max(dist[g], floor);
  }
  return s * dist.spacing();
}

double ClassicalFisherFromFamily(
    const std::function<PhaseDistribution(double)>& family, double theta,
    double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step must be positive");
  const PhaseDistribution center = family(theta);
  const PhaseDistribution plus = family(theta + h);
  const PhaseDistribution minus = family(theta - h);
  if (plus.size() != center.size() || minus.size() != center.size()) {
    throw std::invalid_argument("family changes grid size");
  }
  const double floor = NoiseFloor(center);
  double s = 0.0;
  for (int g = 0; g < center.size(); ++g) {
    const double d = (plus[g] - minus[g]) / (2.0 * h);
    s += d * d / std::max(center[g], floor);
  }
  return s * center.spacing();
}

PhaseSampler::PhaseSampler(const PhaseDistribution& dist)
    : cdf_(dist.size() + 1, 0.0), start_(-kPi), spacing_(dist.spacing()) {
  const int n = dist.size();
  for (int g = 0; g < n; ++g) {
    cdf_[g + 1] = cdf_[g] + 0.5 * (dist[g] + dist[(g + 1) % n]) * spacing_;
  }
  const double total = cdf_.back();
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

double PhaseSampler::Quantile(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto cell = std::clamp<std::ptrdiff_t>(it - cdf_.begin() - 1, 0,
                                               static_cast<std::ptrdiff_t>(cdf_.size()) - 2);
  const double lo = cdf_[cell];
  const double hi = cdf_[cell + 1];
  const double frac = hi > lo ? (u - lo) / (hi - lo) : 0.5;
  return WrapAngle(start_ + (static_cast<double>(cell) + frac) * spacing_);
}

std::vector<double> PhaseSampler::Sample(int shots, std::uint64_t seed) const {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<double> out(shots);
  for (double& x : out) x = Quantile(Uniform01(rng));
  return out;
}

std::vector<double> SampleMeasurements(const PhaseDistribution& dist, int shots,
                                       std::uint64_t seed) {
  return PhaseSampler(dist).Sample(shots, seed);
}

std::vector<double> SampleTwoStage(const PhaseDistribution& conditional,
                                   double delta, int shots, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be >= 0");
  const PhaseSampler sampler(conditional);
  const double sigma = std::sqrt(delta);
  std::mt19937_64 rng(seed);
  std::vector<double> out(shots);
  for (double& x : out) {
    const double measured = sampler.Quantile(Uniform01(rng));
    // Box-Muller on (0, 1] x [0, 1).
    const double u1 = 1.0 - Uniform01(rng);
    const double u2 = Uniform01(rng);
    const double zeta =
        sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    x = WrapAngle(measured + zeta);
  }
  return out;
}

void EstimatePhaseAndDiffusion(EstimatorRun& run, double measurement_variance) {
  const auto nu = run.samples.size();
  if (nu < 2) throw std::invalid_argument("need at least 2 shots");
  double sx = 0.0;
  double sy = 0.0;
  for (double x : run.samples) {
    sx += std::cos(x);
    sy += std::sin(x);
  }
  run.theta_hat = std::atan2(sy, sx);
  double ss = 0.0;
  for (double x : run.samples) {
    const double d = WrapAngle(x - run.theta_hat);
    ss += d * d;
  }
  run.delta_hat = ss / static_cast<double>(nu - 1) - measurement_variance;
  const double et = WrapAngle(run.theta_hat - run.theta_true);
  const double ed = run.delta_hat - run.delta_true;
  run.sq_error_theta = et * et;
  run.sq_error_delta = ed * ed;
}

CampaignResult RunEstimatorCampaign(const ProbeState& state,
                                    const NoiseSetting& setting,
                                    const CampaignOptions& options) {
  setting.Validate();
  if (options.shots < 2) throw std::invalid_argument("shots must be >= 2");
  if (options.trials < 1) throw std::invalid_argument("trials must be >= 1");

  CampaignResult result;
  result.measurement_variance = MeasurementVariance(state, options.grid_size);
  const PhaseDistribution conditional =
      ConditionalDistribution(state, setting.theta, options.grid_size);
  const PhaseSampler convolved(
      ConvolveWithDiffusion(conditional, setting.delta));

  result.runs.resize(options.trials);
  ParallelFor(options.trials, options.threads, [&](int t) {
    EstimatorRun& run = result.runs[t];
    run.seed = options.seed + static_cast<std::uint64_t>(t);
    run.shots = options.shots;
    run.theta_true = setting.theta;
    run.delta_true = setting.delta;
    run.samples = options.mode == SamplingMode::kTwoStage
                      ? SampleTwoStage(conditional, setting.delta,
                                       options.shots, run.seed)
                      : convolved.Sample(options.shots, run.seed);
    EstimatePhaseAndDiffusion(run, result.measurement_variance);
    if (!options.keep_samples) {
      run.samples.clear();
      run.samples.shrink_to_fit();
    }
  });

  for (const auto& run : result.runs) {
    result.mse_theta += run.sq_error_theta;
    result.mse_delta += run.sq_error_delta;
    result.mean_delta_hat += run.delta_hat;
  }
  const double trials = options.trials;
  result.mse_theta /= trials;
  result.mse_delta /= trials;
  result.mean_delta_hat /= trials;

  const QfiReport qfi = ComputeQfiReport(state, setting);
  const double nu = options.shots;
  result.f_theta = qfi.f_theta;
  result.f_delta = qfi.f_delta;
  result.crb_theta = 1.0 / (nu * qfi.f_theta);
  result.crb_delta = std::isinf(qfi.f_delta) ? 0.0 : 1.0 / (nu * qfi.f_delta);
  const double d = setting.delta;
  result.predicted_delta =
      (2.0 * d * d + 4.0 * d * result.measurement_variance) / (nu - 1.0);
  return result;
}

CorrectedErrorReport CorrectedError(const ProbeState& state,
                                    const NoiseSetting& setting,
                                    int grid_size) {
  const PhaseDistribution p = ConvolvedDistribution(state, setting, grid_size);
  const double n = state.dim().particles();
  CorrectedErrorReport r;
  r.p_tilde_at_pi = p.At(setting.theta + kPi);
  r.uncorrected = setting.delta + kPi * kPi / (n * n);
  const double denom = 1.0 - kTwoPi * r.p_tilde_at_pi;
  r.factor = 1.0 / (denom * denom);
  r.corrected_error = r.uncorrected * r.factor;
  return r;
}

}  // namespace dephase
