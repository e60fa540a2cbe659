#include "dephase/validation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "dephase/asymptotics.hpp"
#include "dephase/clustering.hpp"
#include "dephase/measurement.hpp"
#include "dephase/operator_series.hpp"
#include "dephase/qfi.hpp"
#include "dephase/simd/kernels.hpp"

namespace dephase {
namespace {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void Require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << what << "; ";
    }
  }
};

using Check = std::function<void(Outcome&)>;

MatrixXcd PsdSqrt(const MatrixXcd& a) {
  const Eigen::SelfAdjointEigenSolver<MatrixXcd> s(a);
  const Eigen::VectorXd r = s.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return s.eigenvectors() * r.cast<Complex>().asDiagonal() *
         s.eigenvectors().adjoint();
}

std::vector<ProbeState> SmallStates(int twice_j) {
  const auto dim = SpinDimension::FromTwiceJ(twice_j);
  std::vector<ProbeState> out = {CosineState(dim), NoonState(dim),
                                 FlatPhaseState(dim), SpinCoherentState(dim),
                                 GaussianState(dim, 0.4 * twice_j + 0.5)};
  if (dim.integer_spin()) out.push_back(HollandBurnettState(dim));
  return out;
}

std::string Name(const ProbeState& s, double delta) {
  std::ostringstream os;
  os << s.label() << "(2j=" << s.dim().twice_j() << ", delta=" << delta << ")";
  return os.str();
}

// 2 (1 - F^{1/2}) / h^2 from states at x - h and x + h.
double FidelityQfi(const std::function<MatrixXcd(double)>& family, double x,
                   double h) {
  return 2.0 * (1.0 - RootFidelity(family(x - h), family(x + h))) / (h * h);
}

void StateNormalization(Outcome& o) {
  for (int tj = 1; tj <= 10; ++tj) {
    for (const auto& s : SmallStates(tj)) {
      o.Require(std::abs(s.vector().squaredNorm() - 1.0) < 1e-12,
                Name(s, 0) + " not normalized");
    }
  }
}

void DensityStructure(Outcome& o) {
  for (int tj : {1, 4, 9}) {
    for (const auto& s : SmallStates(tj)) {
      const DephasedDensity rho = BuildDensity(s, {0.2, 0.7});
      const MatrixXcd& r = rho.entries();
      o.Require((r - r.adjoint()).cwiseAbs().maxCoeff() < 1e-14,
                Name(s, 0.2) + " not Hermitian");
      o.Require(std::abs(r.trace() - Complex(1.0)) < 1e-12,
                Name(s, 0.2) + " trace != 1");
      const Eigen::SelfAdjointEigenSolver<MatrixXcd> es(r);
      o.Require(es.eigenvalues().minCoeff() > -1e-12,
                Name(s, 0.2) + " not positive");
    }
  }
}

void ThetaInvariance(Outcome& o) {
  for (int tj : {3, 8}) {
    for (const auto& s : SmallStates(tj)) {
      const QfiReport a = ComputeQfiReport(s, {0.15, 0.0});
      const QfiReport b = ComputeQfiReport(s, {0.15, 0.9});
      o.Require(std::abs(a.f_theta - b.f_theta) <= 1e-9 * a.f_theta,
                Name(s, 0.15) + " F_theta depends on theta");
      o.Require(std::abs(a.f_delta - b.f_delta) <= 1e-9 * a.f_delta,
                Name(s, 0.15) + " F_delta depends on theta");
    }
  }
}

void FidelityOracle(Outcome& o) {
  for (int tj : {2, 5, 10}) {
    for (const auto& s : SmallStates(tj)) {
      for (double delta : {0.05, 0.5}) {
        const double f_theta = QfiPhase(BuildDensity(s, {delta, 0.0}));
        const double ref_theta = FidelityQfi(
            [&](double t) { return BuildDensity(s, {delta, t}).entries(); },
            0.0, 1e-4);
        o.Require(std::abs(f_theta - ref_theta) <= 1e-5 * std::max(1.0, f_theta),
                  Name(s, delta) + " F_theta vs fidelity");
        const double f_delta = QfiDiffusion(BuildDensity(s, {delta, 0.0}));
        const double ref_delta = FidelityQfi(
            [&](double d) { return BuildDensity(s, {d, 0.0}).entries(); },
            delta, 1e-3 * delta);
        o.Require(std::abs(f_delta - ref_delta) <= 1e-4 * std::max(1.0, f_delta),
                  Name(s, delta) + " F_delta vs fidelity");
      }
    }
  }
}

void SldEquations(Outcome& o) {
  for (int tj : {2, 7}) {
    for (const auto& s : SmallStates(tj)) {
      const DephasedDensity rho = BuildDensity(s, {0.3, 0.4});
      const EigenSystem eig = ComputeEigenSystem(rho);
      const MatrixXcd& r = rho.entries();
      const MatrixXcd lt = SldPhase(rho, eig);
      const MatrixXcd ld = SldDiffusion(rho, eig);
      const MatrixXcd et = 0.5 * (r * lt + lt * r) - rho.ThetaDerivative();
      const MatrixXcd ed = 0.5 * (r * ld + ld * r) - rho.DeltaDerivative();
      o.Require(et.cwiseAbs().maxCoeff() < 1e-10, Name(s, 0.3) + " theta SLD");
      o.Require(ed.cwiseAbs().maxCoeff() < 1e-10, Name(s, 0.3) + " delta SLD");
    }
  }
}

void KnownValues(Outcome& o) {
  const auto half = SpinDimension::FromTwiceJ(1);
  for (double d : {0.01, 0.1, 0.2512, 1.0}) {
    const double f = QfiPhase(BuildDensity(FlatPhaseState(half), {d, 0.0}));
    o.Require(std::abs(f - std::exp(-d)) < 1e-10, "single qubit at delta " +
                                                      std::to_string(d));
  }
  for (int tj : {2, 5, 8}) {
    const double f = QfiPhase(
        BuildDensity(NoonState(SpinDimension::FromTwiceJ(tj)), {0.0, 0.0}));
    o.Require(std::abs(f - tj * tj) < 1e-9 * tj * tj, "NOON Heisenberg value");
  }
}

void Compatibility(Outcome& o) {
  for (int tj : {4, 10}) {
    for (const auto& s : SmallStates(tj)) {
      for (double d : {0.01, 0.1}) {
        const QfiReport r = ComputeQfiReport(s, {d, 0.0});
        o.Require(std::abs(r.cross_im) < 1e-10, Name(s, d) + " cross term");
      }
    }
  }
}

void LogRoundTrip(Outcome& o, int twice_j, double delta) {
  const auto dim = SpinDimension::FromTwiceJ(twice_j);
  for (const auto& s : {FlatPhaseState(dim), CosineState(dim)}) {
    const DephasedDensity rho = BuildDensity(s, {delta, 0.0});
    const MatrixXcd back = HermitianExp(LogDensity(rho), -1.0);
    o.Require((back - rho.entries()).cwiseAbs().maxCoeff() < 1e-8,
              Name(s, delta) + " exp(-log rho) != rho");
  }
}

void Distributions(Outcome& o) {
  for (const auto& s : SmallStates(10)) {
    const PhaseDistribution c = ConditionalDistribution(s, 0.3, 1 << 12);
    const PhaseDistribution p = ConvolveWithDiffusion(c, 0.05);
    for (const auto* d : {&c, &p}) {
      o.Require(std::abs(d->Normalization() - 1.0) < 1e-9,
                Name(s, 0.05) + " normalization");
      o.Require(*std::min_element(d->density().begin(), d->density().end()) >= 0,
                Name(s, 0.05) + " negative density");
    }
    const double fc = ClassicalFisher(p);
    const double fq = QfiPhase(BuildDensity(s, {0.05, 0.0}));
    o.Require(fc <= fq + 1e-6, Name(s, 0.05) + " classical FI exceeds QFI");
  }
}

void FisherSumBoundHolds(Outcome& o) {
  for (int tj = 1; tj <= 10; ++tj) {
    for (const auto& s : SmallStates(tj)) {
      for (double d : {0.0, 0.01, 0.3}) {
        const double f = QfiPhase(BuildDensity(s, {d, 0.0}));
        o.Require(1.0 / f >= FisherSumBoundFor(tj, d) - 1e-9,
                  Name(s, d) + " beats delta + 1/N^2");
      }
    }
  }
}

void ShotNoise(Outcome& o, int total_n, int max_cluster) {
  for (double d : {0.01, 0.1}) {
    const ClusterPlan plan = BestPartition(total_n, d, max_cluster);
    const ShotNoiseReport r = CheckShotNoiseBounds(plan);
    o.Require(r.above_lower, "1/F below 2 sqrt(delta)/N at delta " +
                                 std::to_string(d));
    o.Require(plan.total_f >= total_n * std::exp(-d) * (1 - 1e-9),
              "plan below singles baseline");
  }
}

void SimdEquivalence(Outcome& o) {
  const auto& ref = simd::scalar_kernels();
  const auto& act = simd::active_kernels();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n : {1u, 3u, 8u, 17u, 64u}) {
    std::vector<double> amp(n), coh(n), lambda(n), sq(n * n);
    for (auto& x : amp) x = u(rng) - 0.5;
    for (auto& x : coh) x = u(rng);
    for (auto& x : lambda) x = u(rng);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k <= i; ++k) sq[i * n + k] = sq[k * n + i] = u(rng);
    }
    std::vector<double> a(n * n), b(n * n);
    ref.dephased_outer(amp.data(), coh.data(), n, a.data());
    act.dephased_outer(amp.data(), coh.data(), n, b.data());
    for (std::size_t i = 0; i < a.size(); ++i) {
      o.Require(std::abs(a[i] - b[i]) <= 1e-15, "dephased_outer mismatch");
    }
    const double p0 = ref.phase_pair_sum(lambda.data(), sq.data(), n, 1e-12);
    const double p1 = act.phase_pair_sum(lambda.data(), sq.data(), n, 1e-12);
    o.Require(std::abs(p0 - p1) <= 1e-12 * std::max(1.0, std::abs(p0)),
              "phase_pair_sum mismatch");
    const double d0 = ref.diffusion_pair_sum(lambda.data(), sq.data(), n, 1e-12);
    const double d1 = act.diffusion_pair_sum(lambda.data(), sq.data(), n, 1e-12);
    o.Require(std::abs(d0 - d1) <= 1e-12 * std::max(1.0, std::abs(d0)),
              "diffusion_pair_sum mismatch");
    std::vector<double> ang(2 * n + 3), c0(ang.size()), c1(ang.size());
    for (auto& x : ang) x = 6.0 * u(rng) - 3.0;
    ref.cosine_series(amp.data(), n, ang.data(), ang.size(), c0.data());
    act.cosine_series(amp.data(), n, ang.data(), ang.size(), c1.data());
    for (std::size_t i = 0; i < ang.size(); ++i) {
      o.Require(std::abs(c0[i] - c1[i]) <= 1e-12 * (1.0 + std::abs(c0[i])),
                "cosine_series mismatch");
    }
  }
}

void MeasurementChain(Outcome& o) {
  for (int tj : {40, 100, 200}) {
    const ProbeState s = CosineState(SpinDimension::FromTwiceJ(tj));
    for (double d : {0.003, 0.03}) {
      const double var = WrappedVariance(ConvolvedDistribution(s, {d, 0.0}), 0.0);
      const double inv_f = 1.0 / QfiPhase(BuildDensity(s, {d, 0.0}));
      const double floor = FisherSumBoundFor(tj, d);
      o.Require(var > inv_f - 1e-9, Name(s, d) + " variance below 1/F");
      o.Require(inv_f > floor - 1e-9, Name(s, d) + " 1/F below delta + 1/N^2");
    }
  }
  const ProbeState s = CosineState(SpinDimension::FromTwiceJ(200));
  const double fc = ClassicalFisher(ConvolvedDistribution(s, {0.03, 0.0}));
  const double fq = QfiPhase(BuildDensity(s, {0.03, 0.0}));
  o.Require(fc <= fq + 1e-6, "classical FI exceeds QFI at 2j=200");
}

void ConvolutionConsistency(Outcome& o) {
  const int g = 1 << 14;
  const ProbeState s = CosineState(SpinDimension::FromTwiceJ(40));
  const PhaseDistribution c = ConditionalDistribution(s, 0.0, g);
  const double delta = 0.03;
  const PhaseDistribution fft = ConvolveWithDiffusion(c, delta);
  const PhaseDistribution kernel = WrappedGaussianDistribution(delta, 0.0, g);
  // kernel[k] holds the density at angle -pi + k h; offset d = k - g/2.
  double worst = 0.0;
  const double h = c.spacing();
  for (int i = 0; i < g; i += 64) {
    double acc = 0.0;
    for (int k = 0; k < g; ++k) {
      const int off = ((i - k) % g + g) % g;  // angle difference index
      acc += c[k] * kernel[(off + g / 2) % g];
    }
    worst = std::max(worst, std::abs(acc * h - fft[i]));
  }
  o.Require(worst < 1e-8, "direct and Fourier convolution differ by " +
                              std::to_string(worst));
}

}  // namespace

double RootFidelity(const MatrixXcd& a, const MatrixXcd& b) {
  // Nuclear norm of sqrt(a) sqrt(b); eigenvalues of sqrt(a) b sqrt(a) lose
  // half the digits near rank deficiency.
  const Eigen::JacobiSVD<MatrixXcd> svd(PsdSqrt(a) * PsdSqrt(b));
  return svd.singularValues().sum();
}

std::vector<CheckResult> RunValidationSuite(bool quick, int threads) {
  std::vector<std::pair<std::string, Check>> checks = {
      {"state_normalization", StateNormalization},
      {"density_hermitian_unit_trace", DensityStructure},
      {"theta_invariance", ThetaInvariance},
      {"qfi_fidelity_oracle", FidelityOracle},
      {"sld_equations", SldEquations},
      {"known_values", KnownValues},
      {"compatibility", Compatibility},
      {"log_round_trip", [](Outcome& o) { LogRoundTrip(o, 10, 0.5); }},
      {"distributions", Distributions},
      {"fisher_sum_bound", FisherSumBoundHolds},
      {"shot_noise_bounds", [](Outcome& o) { ShotNoise(o, 8, 4); }},
      {"simd_equivalence", SimdEquivalence},
  };
  if (!quick) {
    checks.emplace_back("log_round_trip_large",
                        [](Outcome& o) { LogRoundTrip(o, 40, 0.4); });
    checks.emplace_back("measurement_chain", MeasurementChain);
    checks.emplace_back("convolution_consistency", ConvolutionConsistency);
    checks.emplace_back("shot_noise_bounds_large",
                        [](Outcome& o) { ShotNoise(o, 100, 8); });
  }
  (void)threads;
  std::vector<CheckResult> results;
  for (auto& [name, check] : checks) {
    Outcome o;
    try {
      check(o);
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail << "exception: " << e.what();
    }
    results.push_back({name, o.passed, o.detail.str()});
  }
  return results;
}

}  // namespace dephase
