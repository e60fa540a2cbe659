#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dephase/qfi.hpp"
#include "dephase/spin_state.hpp"

namespace dephase {

// Matrix functions of Hermitian matrices, computed by eigendecomposition.
Eigen::MatrixXcd HermitianExp(const Eigen::MatrixXcd& a, double scale = 1.0);

// H = -log rho. Throws SingularDensity (with the numerical rank) when any
// eigenvalue is at or below 1e-12 * trace.
Eigen::MatrixXcd LogDensity(const DephasedDensity& rho);

// Truncated series L = -2i sum_{n<=K} c_n ad_H^{2n-1}(J_z) for the phase SLD
// (in the j L_theta normalization), with tanh(y/2) = sum c_n y^{2n-1}.
struct TanhSeriesResult {
  Eigen::MatrixXcd sld;
  // Max-norm of {rho, L}/2 + i [J_z, rho] after each order, relative to
  // max|[J_z, rho]| (absolute when that vanishes).
  std::vector<double> residual_by_order;
  // Max-norm of each retained term.
  std::vector<double> term_norms;
  double spectral_spread = 0.0;  // max h - min h
  double coupled_spread = 0.0;   // max |h_k - h_l| over pairs coupled by J_z
  bool diverging = false;        // some term norm exceeded its predecessor
  bool converged = false;
};

TanhSeriesResult SldTanhSeries(const DephasedDensity& rho, int order);

// Coefficient c_n of y^{2n-1} in tanh(y/2), n >= 1.
double TanhHalfCoefficient(int n);

// {residual_by_order, spectral_spread, converged, ...}
std::string TanhSeriesReportJson(const TanhSeriesResult& result);

enum class KineticModel {
  // T = (1/2) ln(M / 2 pi) + P^2 / 2M with P the central difference.
  kFiniteDifference,
  // T = -log(K) + ln(j), K_{mm'} = exp(-delta (m-m')^2 / 2): the lattice
  // operator for which exp(-U/2) exp(-T) exp(-U/2) = rho holds exactly.
  kExactKernel,
};

enum class FirstOrderForm {
  // -{P,{P,U''}} / 48 M^2 + U'^2 / 24 M with discrete derivatives.
  kDerivative,
  // (1/12) [T,[T,U]] + (1/24) [U,[T,U]] evaluated with the chosen T.
  kCommutator,
};

// Operators on the grid x = m/j.
struct OperatorBundle {
  Eigen::MatrixXcd h;           // -log rho
  Eigen::VectorXd u;            // -ln(j phi_m^2), the diagonal of U
  Eigen::MatrixXcd t_kinetic;
  Eigen::MatrixXcd p_momentum;  // -i d/dx, central differences
  double mass = 0.0;            // delta j^2
  KineticModel kinetic = KineticModel::kFiniteDifference;
};

// Throws std::invalid_argument if any amplitude is zero or delta == 0.
// The log of rho is included only when `with_log` is set.
OperatorBundle BuildOperatorBundle(const ProbeState& state,
                                   const NoiseSetting& setting,
                                   KineticModel kinetic, bool with_log = true);

struct BchTerms {
  Eigen::MatrixXcd h0;
  Eigen::MatrixXcd h1;
};

BchTerms BchH0H1(const ProbeState& state, const NoiseSetting& setting,
                 KineticModel kinetic = KineticModel::kFiniteDifference,
                 FirstOrderForm form = FirstOrderForm::kDerivative);

// sqrt(Tr(rho E^2)) for Hermitian E: the size of E where rho has weight.
double DensityWeightedNorm(const DephasedDensity& rho,
                           const Eigen::MatrixXcd& e);

// First and second central differences of U on the grid x = m/j. Endpoint
// entries are zero.
Eigen::VectorXd PotentialFirstDerivative(const ProbeState& state);
Eigen::VectorXd PotentialSecondDerivative(const ProbeState& state);

// <-U''/4M^2> with weight phi^2, which equals -(1/M^2) int phi'^2 after
// integration by parts. Requires delta > 0 and no zero amplitudes.
double BohmianCorrection(const ProbeState& state, const NoiseSetting& setting);

// F_theta ~ (1/delta) (1 - (1/M) int phi'^2) with the integral taken from the
// Bohmian expectation.
double PerturbativeQfiPhase(const ProbeState& state,
                            const NoiseSetting& setting);

}  // namespace dephase
