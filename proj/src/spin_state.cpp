#include "dephase/spin_state.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace dephase {
namespace {

double LogBinomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

constexpr std::array<std::string_view, 6> kLabels = {
    "cosine", "noon", "flat", "gaussian", "coherent", "holland_burnett"};

}  // namespace

SpinDimension SpinDimension::FromTwiceJ(int twice_j) {
  if (twice_j < 1) {
    throw std::invalid_argument("twice_j must be >= 1, got " +
                                std::to_string(twice_j));
  }
  return SpinDimension(twice_j);
}

ProbeState::ProbeState(SpinDimension dim, std::vector<double> amplitudes,
                       std::string label)
    : dim_(dim), amplitudes_(std::move(amplitudes)), label_(std::move(label)) {
  if (static_cast<int>(amplitudes_.size()) != dim_.dim()) {
    throw std::invalid_argument("amplitude count " +
                                std::to_string(amplitudes_.size()) +
                                " does not match dimension " +
                                std::to_string(dim_.dim()));
  }
  double norm2 = 0.0;
  for (double a : amplitudes_) {
    if (!std::isfinite(a)) throw std::invalid_argument("non-finite amplitude");
    norm2 += a * a;
  }
  if (norm2 == 0.0) throw std::invalid_argument("all-zero amplitude profile");
  double scale = 1.0 / std::sqrt(norm2);
  const auto first =
      std::find_if(amplitudes_.begin(), amplitudes_.end(),
                   [](double a) { return a != 0.0; });
  if (*first < 0.0) scale = -scale;
  for (double& a : amplitudes_) a *= scale;
}

bool ProbeState::IsSymmetric(double tol) const {
  const std::size_t n = amplitudes_.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    if (std::abs(amplitudes_[i] - amplitudes_[n - 1 - i]) > tol) return false;
  }
  return true;
}

ProbeState CosineState(SpinDimension dim) {
  std::vector<double> amp(dim.dim());
  const double norm = 1.0 / std::sqrt(dim.j() + 0.5);
  const double twice_j_plus_one = dim.twice_j() + 1.0;
  for (int i = 0; i < dim.dim(); ++i) {
    amp[i] = norm * std::cos(std::numbers::pi * dim.m(i) / twice_j_plus_one);
  }
  // Enforce exact mirror symmetry against rounding in m.
  for (int i = 0; i < dim.dim() / 2; ++i) amp[dim.dim() - 1 - i] = amp[i];
  return ProbeState(dim, std::move(amp), "cosine");
}

ProbeState NoonState(SpinDimension dim) {
  std::vector<double> amp(dim.dim(), 0.0);
  amp.front() = std::numbers::sqrt2 / 2.0;
  amp.back() = std::numbers::sqrt2 / 2.0;
  return ProbeState(dim, std::move(amp), "noon");
}

ProbeState FlatPhaseState(SpinDimension dim) {
  return ProbeState(dim, std::vector<double>(dim.dim(), 1.0), "flat");
}

ProbeState GaussianState(SpinDimension dim, double width) {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw std::invalid_argument("gaussian width must be positive");
  }
  std::vector<double> amp(dim.dim());
  for (int i = 0; i < dim.dim(); ++i) {
    const double m = dim.m(i);
    amp[i] = std::exp(-m * m / (4.0 * width * width));
  }
  return ProbeState(dim, std::move(amp), "gaussian");
}

ProbeState SpinCoherentState(SpinDimension dim) {
  const int n = dim.twice_j();
  std::vector<double> amp(dim.dim());
  for (int i = 0; i < dim.dim(); ++i) {
    // index i = j + m
    amp[i] = std::exp(0.5 * LogBinomial(n, i) - 0.5 * n * std::numbers::ln2);
  }
  for (int i = 0; i < dim.dim() / 2; ++i) amp[dim.dim() - 1 - i] = amp[i];
  return ProbeState(dim, std::move(amp), "coherent");
}

ProbeState HollandBurnettState(SpinDimension dim) {
  if (!dim.integer_spin()) {
    throw std::invalid_argument(
        "Holland-Burnett state requires integer j (even twice_j)");
  }
  const int j = dim.twice_j() / 2;
  std::vector<double> amp(dim.dim(), 0.0);
  for (int i = 0; i < dim.dim(); ++i) {
    // i = j + m; nonzero only for even j + m.
    if (i % 2 != 0) continue;
    const int a = i / 2;            // (j + m) / 2
    const int b = (2 * j - i) / 2;  // (j - m) / 2
    // |d^j_{m0}(pi/2)|^2 = C(2a, a) C(2b, b) / 4^j, sign (-1)^a.
    const double log_sq =
        LogBinomial(2 * a, a) + LogBinomial(2 * b, b) - 2.0 * j * std::numbers::ln2;
    amp[i] = (a % 2 == 0 ? 1.0 : -1.0) * std::exp(0.5 * log_sq);
  }
  return ProbeState(dim, std::move(amp), "holland_burnett");
}

ProbeState CustomState(SpinDimension dim, std::span<const double> amplitudes,
                       std::string label) {
  return ProbeState(dim, std::vector<double>(amplitudes.begin(), amplitudes.end()),
                    std::move(label));
}

ProbeState MakeNamedState(std::string_view label, SpinDimension dim,
                          double width) {
  if (label == "cosine") return CosineState(dim);
  if (label == "noon") return NoonState(dim);
  if (label == "flat" || label == "phase") return FlatPhaseState(dim);
  if (label == "gaussian") {
    return GaussianState(dim, width > 0.0 ? width
                                          : std::sqrt(dim.particles()) / 2.0);
  }
  if (label == "coherent" || label == "spin_coherent") {
    return SpinCoherentState(dim);
  }
  if (label == "holland_burnett" || label == "hb") {
    return HollandBurnettState(dim);
  }
  throw std::invalid_argument("unknown state label '" + std::string(label) +
                              "'");
}

std::span<const std::string_view> NamedStateLabels() { return kLabels; }

Eigen::VectorXd JzDiagonal(SpinDimension dim) {
  Eigen::VectorXd diag(dim.dim());
  for (int i = 0; i < dim.dim(); ++i) diag[i] = dim.m(i);
  return diag;
}

}  // namespace dephase
