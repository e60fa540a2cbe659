#include "dephase/operator_series.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "dephase/errors.hpp"

namespace dephase {
namespace {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kTermFloor = 1e-13;
constexpr double kConvergedTerm = 1e-10;

double MaxAbs(const MatrixXcd& a) { return a.cwiseAbs().maxCoeff(); }

MatrixXcd Commutator(const MatrixXcd& a, const MatrixXcd& b) {
  return a * b - b * a;
}

struct LogSpectrum {
  VectorXd h;  // -ln(lambda), ascending in h
  MatrixXcd vectors;
};

LogSpectrum LogOfDensity(const DephasedDensity& rho) {
  const EigenSystem eig = ComputeEigenSystem(rho);
  const VectorXd& lambda = eig.values();
  const double smallest = lambda[lambda.size() - 1];
  if (smallest <= eig.zero_threshold()) {
    std::ostringstream os;
    os << "density matrix is singular: numerical rank " << eig.rank() << " of "
       << lambda.size() << " (threshold " << eig.zero_threshold() << ")";
    throw SingularDensity(os.str(), eig.rank(), static_cast<int>(lambda.size()));
  }
  LogSpectrum s;
  s.h = -lambda.array().log();
  s.vectors = eig.vectors();
  return s;
}

MatrixXcd Assemble(const MatrixXcd& v, const VectorXd& d) {
  return v * d.cast<Complex>().asDiagonal() * v.adjoint();
}

void RequireNonzeroAmplitudes(const ProbeState& state) {
  for (double a : state.amplitudes()) {
    if (a == 0.0) {
      throw std::invalid_argument(
          "operator expansion needs nonzero amplitudes at every m");
    }
  }
}

VectorXd Potential(const ProbeState& state) {
  RequireNonzeroAmplitudes(state);
  const double j = state.dim().j();
  VectorXd u(state.dim().dim());
  for (int i = 0; i < u.size(); ++i) {
    const double a = state.amplitude(i);
    u[i] = -std::log(j * a * a);
  }
  return u;
}

MatrixXcd CentralDifference(int n, double j) {
  MatrixXcd d = MatrixXcd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    d(i, i + 1) = 0.5 * j;
    d(i + 1, i) = -0.5 * j;
  }
  return d;
}

MatrixXcd ExactKineticOperator(int n, double delta, double j) {
  MatrixXd k(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) k(a, b) = std::exp(-0.5 * delta * (a - b) * (a - b));
  }
  const Eigen::SelfAdjointEigenSolver<MatrixXd> solver(k);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigensolver failed on the dephasing kernel");
  }
  const VectorXd& w = solver.eigenvalues();
  if (w[0] <= 1e-14 * w[w.size() - 1]) {
    throw NumericalError(
        "dephasing kernel is numerically singular at this delta; use the "
        "finite-difference kinetic model");
  }
  const VectorXd t = -w.array().log() + std::log(j);
  const MatrixXd v = solver.eigenvectors();
  return (v * t.asDiagonal() * v.transpose()).cast<Complex>();
}

MatrixXcd PhaseRotation(SpinDimension dim, double theta) {
  VectorXd m = JzDiagonal(dim);
  Eigen::VectorXcd r(m.size());
  for (int i = 0; i < m.size(); ++i) r[i] = std::polar(1.0, -m[i] * theta);
  return r.asDiagonal();
}

MatrixXcd Rotate(const MatrixXcd& r, const MatrixXcd& a) {
  return r * a * r.adjoint();
}

}  // namespace

MatrixXcd HermitianExp(const MatrixXcd& a, double scale) {
  const Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(a);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigensolver failed in matrix exponential");
  }
  const VectorXd e = (scale * solver.eigenvalues()).array().exp();
  return Assemble(solver.eigenvectors(), e);
}

MatrixXcd LogDensity(const DephasedDensity& rho) {
  const LogSpectrum s = LogOfDensity(rho);
  return Assemble(s.vectors, s.h);
}

double TanhHalfCoefficient(int n) {
  if (n < 1) throw std::invalid_argument("series index must be >= 1");
  // tanh(y/2) = sum (-1)^{n+1} 4 lambda(2n) / pi^{2n} y^{2n-1},
  // lambda(s) = (1 - 2^{-s}) zeta(s).
  const double s = 2.0 * n;
  const double lambda = (1.0 - std::exp2(-s)) * std::riemann_zeta(s);
  const double sign = n % 2 == 1 ? 1.0 : -1.0;
  return sign * 4.0 * lambda / std::pow(std::numbers::pi, s);
}

TanhSeriesResult SldTanhSeries(const DephasedDensity& rho, int order) {
  if (order < 1) throw std::invalid_argument("series order must be >= 1");
  const LogSpectrum s = LogOfDensity(rho);
  const MatrixXcd h = Assemble(s.vectors, s.h);
  const VectorXd m = JzDiagonal(rho.dim());
  const MatrixXcd x = m.cast<Complex>().asDiagonal();
  const MatrixXcd& r = rho.entries();

  TanhSeriesResult out;
  out.spectral_spread = s.h.maxCoeff() - s.h.minCoeff();
  const MatrixXcd x_eig = s.vectors.adjoint() * x * s.vectors;
  const double x_scale = MaxAbs(x_eig);
  for (Eigen::Index l = 0; l < x_eig.cols(); ++l) {
    for (Eigen::Index k = 0; k < x_eig.rows(); ++k) {
      if (std::abs(x_eig(k, l)) > 1e-10 * x_scale) {
        out.coupled_spread =
            std::max(out.coupled_spread, std::abs(s.h[k] - s.h[l]));
      }
    }
  }

  const MatrixXcd target = Complex(0.0, 1.0) * Commutator(x, r);
  const double target_norm = MaxAbs(target);
  const double scale = target_norm > 0.0 ? target_norm : 1.0;

  out.sld = MatrixXcd::Zero(r.rows(), r.cols());
  MatrixXcd power = Commutator(h, x);  // ad_H^{2n-1}(X)
  for (int n = 1; n <= order; ++n) {
    if (n > 1) power = Commutator(h, Commutator(h, power));
    const MatrixXcd term = Complex(0.0, -2.0 * TanhHalfCoefficient(n)) * power;
    const double norm = MaxAbs(term);
    if (!std::isfinite(norm)) {
      out.diverging = true;
      break;
    }
    out.sld += term;
    out.term_norms.push_back(norm);
    const double floor = kTermFloor * std::max(1.0, MaxAbs(out.sld));
    if (n > 1 && norm > out.term_norms[n - 2] && norm > floor) {
      out.diverging = true;
    }
    const MatrixXcd residual = 0.5 * (r * out.sld + out.sld * r) + target;
    out.residual_by_order.push_back(MaxAbs(residual) / scale);
  }
  out.converged =
      !out.diverging && !out.term_norms.empty() &&
      out.term_norms.back() <= kConvergedTerm * std::max(1.0, MaxAbs(out.sld));
  return out;
}

std::string TanhSeriesReportJson(const TanhSeriesResult& result) {
  nlohmann::json j;
  j["residual_by_order"] = result.residual_by_order;
  j["term_norms"] = result.term_norms;
  j["spectral_spread"] = result.spectral_spread;
  j["coupled_spread"] = result.coupled_spread;
  j["diverging"] = result.diverging;
  j["converged"] = result.converged;
  return j.dump();
}

Eigen::VectorXd PotentialFirstDerivative(const ProbeState& state) {
  const VectorXd u = Potential(state);
  const double j = state.dim().j();
  VectorXd d = VectorXd::Zero(u.size());
  for (int i = 1; i + 1 < u.size(); ++i) d[i] = 0.5 * j * (u[i + 1] - u[i - 1]);
  return d;
}

Eigen::VectorXd PotentialSecondDerivative(const ProbeState& state) {
  const VectorXd u = Potential(state);
  const double j = state.dim().j();
  VectorXd d = VectorXd::Zero(u.size());
  for (int i = 1; i + 1 < u.size(); ++i) {
    d[i] = j * j * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
  }
  return d;
}

OperatorBundle BuildOperatorBundle(const ProbeState& state,
                                   const NoiseSetting& setting,
                                   KineticModel kinetic, bool with_log) {
  setting.Validate();
  if (setting.delta == 0.0) {
    throw std::invalid_argument("operator expansion needs delta > 0");
  }
  const SpinDimension dim = state.dim();
  const int n = dim.dim();
  const double j = dim.j();

  OperatorBundle b;
  b.kinetic = kinetic;
  b.mass = setting.delta * j * j;
  b.u = Potential(state);
  b.p_momentum = Complex(0.0, -1.0) * CentralDifference(n, j);
  if (kinetic == KineticModel::kFiniteDifference) {
    b.t_kinetic = b.p_momentum * b.p_momentum / (2.0 * b.mass);
    b.t_kinetic.diagonal().array() +=
        0.5 * std::log(b.mass / (2.0 * std::numbers::pi));
  } else {
    b.t_kinetic = ExactKineticOperator(n, setting.delta, j);
  }
  if (setting.theta != 0.0) {
    const MatrixXcd r = PhaseRotation(dim, setting.theta);
    b.t_kinetic = Rotate(r, b.t_kinetic);
    b.p_momentum = Rotate(r, b.p_momentum);
  }
  if (with_log) b.h = LogDensity(BuildDensity(state, setting));
  return b;
}

BchTerms BchH0H1(const ProbeState& state, const NoiseSetting& setting,
                 KineticModel kinetic, FirstOrderForm form) {
  const OperatorBundle b = BuildOperatorBundle(state, setting, kinetic, false);
  const MatrixXcd u = b.u.cast<Complex>().asDiagonal();
  BchTerms out;
  out.h0 = b.t_kinetic + u;
  if (form == FirstOrderForm::kCommutator) {
    const MatrixXcd tu = Commutator(b.t_kinetic, u);
    out.h1 = Commutator(b.t_kinetic, tu) / 12.0 + Commutator(u, tu) / 24.0;
    return out;
  }
  const VectorXd d1 = PotentialFirstDerivative(state);
  const VectorXd d2 = PotentialSecondDerivative(state);
  const MatrixXcd upp = d2.cast<Complex>().asDiagonal();
  const MatrixXcd& p = b.p_momentum;
  const MatrixXcd inner = p * upp + upp * p;
  const MatrixXcd outer = p * inner + inner * p;
  const double m = b.mass;
  out.h1 = -outer / (48.0 * m * m);
  out.h1.diagonal() += (d1.array().square() / (24.0 * m)).matrix().cast<Complex>();
  return out;
}

double DensityWeightedNorm(const DephasedDensity& rho, const MatrixXcd& e) {
  return std::sqrt(std::max(0.0, (rho.entries() * e * e).trace().real()));
}

double BohmianCorrection(const ProbeState& state, const NoiseSetting& setting) {
  setting.Validate();
  if (setting.delta == 0.0) {
    throw std::invalid_argument("Bohmian correction needs delta > 0");
  }
  const VectorXd d2 = PotentialSecondDerivative(state);
  const double j = state.dim().j();
  const double mass = setting.delta * j * j;
  double expectation = 0.0;
  for (int i = 0; i < d2.size(); ++i) {
    const double a = state.amplitude(i);
    expectation += a * a * d2[i];
  }
  return -expectation / (4.0 * mass * mass);
}

double PerturbativeQfiPhase(const ProbeState& state,
                            const NoiseSetting& setting) {
  const double j = state.dim().j();
  const double mass = setting.delta * j * j;
  return (1.0 + mass * BohmianCorrection(state, setting)) / setting.delta;
}

}  // namespace dephase
