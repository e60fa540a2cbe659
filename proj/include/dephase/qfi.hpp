#pragma once

#include <complex>
#include <optional>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "dephase/asymptotics.hpp"
#include "dephase/spin_state.hpp"

namespace dephase {

// Phase theta (radians) and collective dephasing strength delta >= 0.
struct NoiseSetting {
  double delta = 0.0;
  double theta = 0.0;

  // Throws std::invalid_argument for negative or non-finite delta.
  void Validate() const;
};

// rho_{mm'} = exp(-delta (m-m')^2 / 2 - i (m-m') theta) phi_m phi_m'.
class DephasedDensity {
 public:
  SpinDimension dim() const { return dim_; }
  const NoiseSetting& setting() const { return setting_; }
  // True when theta == 0 and the matrix is real symmetric.
  bool is_real() const { return is_real_; }
  const Eigen::MatrixXcd& entries() const { return entries_; }
  // Real part; equals the full matrix when is_real().
  const Eigen::MatrixXd& real_entries() const { return real_entries_; }

  // d rho / d delta = -(m-m')^2 / 2 * rho, elementwise.
  Eigen::MatrixXcd DeltaDerivative() const;
  // d rho / d theta = -i [J_z, rho].
  Eigen::MatrixXcd ThetaDerivative() const;

 private:
  friend DephasedDensity BuildDensity(const ProbeState&, const NoiseSetting&);
  DephasedDensity(SpinDimension dim, NoiseSetting setting)
      : dim_(dim), setting_(setting) {}

  SpinDimension dim_;
  NoiseSetting setting_;
  bool is_real_ = false;
  Eigen::MatrixXcd entries_;
  Eigen::MatrixXd real_entries_;
};

DephasedDensity BuildDensity(const ProbeState& state,
                             const NoiseSetting& setting);

// Spectral decomposition rho = V diag(lambda) V^dagger with eigenvalues in
// descending order. Round-off negatives are clamped to zero; pairs whose
// eigenvalue sum is below `zero_threshold` are skipped by the pair sums.
class EigenSystem {
 public:
  const Eigen::VectorXd& values() const { return values_; }
  double zero_threshold() const { return zero_threshold_; }
  bool is_real() const {
    return std::holds_alternative<Eigen::MatrixXd>(vectors_);
  }
  const Eigen::MatrixXd& real_vectors() const {
    return std::get<Eigen::MatrixXd>(vectors_);
  }
  const Eigen::MatrixXcd& complex_vectors() const {
    return std::get<Eigen::MatrixXcd>(vectors_);
  }
  Eigen::MatrixXcd vectors() const;

  // Number of eigenvalues above the threshold.
  int rank() const;

  // V^dagger A V for a Hermitian A in the computational basis.
  Eigen::MatrixXcd ToEigenbasis(const Eigen::MatrixXcd& op) const;
  // V B V^dagger.
  Eigen::MatrixXcd FromEigenbasis(const Eigen::MatrixXcd& op) const;

 private:
  friend EigenSystem ComputeEigenSystem(const DephasedDensity&);
  Eigen::VectorXd values_;
  std::variant<Eigen::MatrixXd, Eigen::MatrixXcd> vectors_;
  double zero_threshold_ = 0.0;
};

// Throws NumericalError if the eigensolver fails to converge or the matrix is
// noticeably indefinite.
EigenSystem ComputeEigenSystem(const DephasedDensity& rho);

// F_theta = 2 sum (lambda_k - lambda_l)^2 / (lambda_k + lambda_l) |<k|J_z|l>|^2.
// Generator is J_z itself.
double QfiPhase(const DephasedDensity& rho, const EigenSystem& eig);
double QfiPhase(const DephasedDensity& rho);

// F_delta = 2 sum |<k| d rho/d delta |l>|^2 / (lambda_k + lambda_l).
// Throws DivergentInformation at delta == 0, where the true value is infinite.
double QfiDiffusion(const DephasedDensity& rho, const EigenSystem& eig);
double QfiDiffusion(const DephasedDensity& rho);

// Symmetric logarithmic derivatives in the computational basis, solving
//   {rho, L_theta} / 2 = -i [J_z, rho]     (this is j L_theta)
//   {rho, L_delta} / 2 = d rho / d delta   (this is j^2 L_Delta)
// Components on the kernel of rho are set to zero.
Eigen::MatrixXcd SldPhase(const DephasedDensity& rho, const EigenSystem& eig);
Eigen::MatrixXcd SldDiffusion(const DephasedDensity& rho,
                              const EigenSystem& eig);

// Im Tr(rho L_theta L_delta), the obstruction to jointly saturating both
// bounds.
double CompatibilityCrossTerm(const DephasedDensity& rho,
                              const EigenSystem& eig);

struct QfiReport {
  int twice_j = 0;
  double delta = 0.0;
  double theta = 0.0;
  std::string state;
  double f_theta = 0.0;
  // +infinity when delta == 0.
  double f_delta = 0.0;
  double cross_im = 0.0;
  AsymptoticPrediction predictions;
};

// One eigendecomposition shared by all quantities.
QfiReport ComputeQfiReport(const ProbeState& state,
                           const NoiseSetting& setting);

// F_theta or F_delta at theta = 0 together with its gradient with respect to
// the amplitude vector phi (taken as is, not renormalized). Uses
// dF = Tr(d rho G) at the optimal SLD, with
//   G_theta = 2i [J_z, L_theta] - L_theta^2
//   G_delta = 2 C o L_delta - L_delta^2,  C_{mm'} = -(m-m')^2 / 2,
// so that dF/dphi = 2 (K o G) phi with K the dephasing kernel.
struct ValueAndGradient {
  double value = 0.0;
  Eigen::VectorXd gradient;
};
ValueAndGradient QfiPhaseWithGradient(SpinDimension dim,
                                      const Eigen::VectorXd& amplitudes,
                                      double delta);
ValueAndGradient QfiDiffusionWithGradient(SpinDimension dim,
                                          const Eigen::VectorXd& amplitudes,
                                          double delta);

}  // namespace dephase
