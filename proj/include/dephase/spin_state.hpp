#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace dephase {

// Spin j = N/2 stored as the integer 2j.
class SpinDimension {
 public:
  // Throws std::invalid_argument unless twice_j >= 1.
  static SpinDimension FromTwiceJ(int twice_j);

  int twice_j() const { return twice_j_; }
  int particles() const { return twice_j_; }
  int dim() const { return twice_j_ + 1; }
  double j() const { return 0.5 * twice_j_; }
  bool integer_spin() const { return twice_j_ % 2 == 0; }

  // Projection m for basis index 0..dim-1, ascending from -j.
  double m(int index) const { return index - 0.5 * twice_j_; }

  friend bool operator==(SpinDimension, SpinDimension) = default;

 private:
  explicit SpinDimension(int twice_j) : twice_j_(twice_j) {}
  int twice_j_;
};

// Real, unit-norm amplitude profile phi_m over m = -j..j. Immutable.
class ProbeState {
 public:
  // Normalizes `amplitudes` and applies the canonical global sign (first
  // nonzero amplitude positive). Throws std::invalid_argument on a length
  // mismatch, non-finite entries or an all-zero vector.
  ProbeState(SpinDimension dim, std::vector<double> amplitudes,
             std::string label);

  SpinDimension dim() const { return dim_; }
  std::span<const double> amplitudes() const { return amplitudes_; }
  double amplitude(int index) const { return amplitudes_[index]; }
  const std::string& label() const { return label_; }

  Eigen::Map<const Eigen::VectorXd> vector() const {
    return {amplitudes_.data(), static_cast<Eigen::Index>(amplitudes_.size())};
  }

  // phi_m == phi_{-m} to `tol`.
  bool IsSymmetric(double tol = 0.0) const;

 private:
  SpinDimension dim_;
  std::vector<double> amplitudes_;
  std::string label_;
};

ProbeState CosineState(SpinDimension dim);
ProbeState NoonState(SpinDimension dim);
ProbeState FlatPhaseState(SpinDimension dim);

// phi_m ∝ exp(-m^2 / (4 w^2)): the m-distribution phi_m^2 is a Gaussian of
// standard deviation w. Throws std::invalid_argument for w <= 0.
ProbeState GaussianState(SpinDimension dim, double width);

// phi_m = d^j_{m,j}(pi/2) = 2^-j sqrt(C(2j, j+m)).
ProbeState SpinCoherentState(SpinDimension dim);

// phi_m = d^j_{m,0}(pi/2); zero where j+m is odd. Integer j only.
ProbeState HollandBurnettState(SpinDimension dim);

// Arbitrary profile, normalized.
ProbeState CustomState(SpinDimension dim, std::span<const double> amplitudes,
                       std::string label = "custom");

// Named constructor used by the CLI and sweeps: cosine, noon, flat (alias
// phase), gaussian, coherent (alias spin_coherent), holland_burnett (alias hb).
// `width` is only read for gaussian. Throws std::invalid_argument on unknown
// labels.
ProbeState MakeNamedState(std::string_view label, SpinDimension dim,
                          double width = 0.0);

// Labels accepted by MakeNamedState, canonical spelling.
std::span<const std::string_view> NamedStateLabels();

// Diagonal of J_z: m = -j..j ascending.
Eigen::VectorXd JzDiagonal(SpinDimension dim);

}  // namespace dephase
