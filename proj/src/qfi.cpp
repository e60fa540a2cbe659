#include "dephase/qfi.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "dephase/errors.hpp"
#include "dephase/simd/kernels.hpp"

namespace dephase {
namespace {

using Complex = std::complex<double>;

constexpr double kRelativeZero = 1e-12;
constexpr double kIndefiniteTolerance = 1e-9;

Eigen::VectorXd Coherences(int n, double delta) {
  Eigen::VectorXd c(n);
  for (int d = 0; d < n; ++d) c[d] = std::exp(-0.5 * delta * d * d);
  return c;
}

Eigen::MatrixXd RealDensity(const Eigen::VectorXd& amp, double delta) {
  const auto n = amp.size();
  const Eigen::VectorXd coherence = Coherences(static_cast<int>(n), delta);
  Eigen::MatrixXd rho(n, n);
  simd::active_kernels().dephased_outer(amp.data(), coherence.data(),
                                        static_cast<std::size_t>(n), rho.data());
  return rho;
}

// -(m - m')^2 / 2
Eigen::MatrixXd DiffusionWeights(int n) {
  Eigen::MatrixXd c(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) c(i, k) = -0.5 * (i - k) * (i - k);
  }
  return c;
}

template <class Matrix>
std::string DescribeSpectrum(const Matrix& m) {
  std::ostringstream os;
  const Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  os << "dim=" << m.rows() << " sigma_max=" << s[0]
     << " sigma_min=" << s[s.size() - 1];
  return os.str();
}

template <class Solver, class Matrix>
void Decompose(const Matrix& m, Eigen::VectorXd& values, Matrix& vectors) {
  Solver solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigensolver did not converge (" + DescribeSpectrum(m) +
                         ")");
  }
  // Eigen sorts ascending; store descending.
  values = solver.eigenvalues().reverse();
  vectors = solver.eigenvectors().rowwise().reverse();
}

// Pair weights in the eigenbasis, zero where lambda_k + lambda_l <= eps.
Eigen::MatrixXd PairRatio(const Eigen::VectorXd& lambda, double eps) {
  const auto n = lambda.size();
  Eigen::MatrixXd w(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double s = lambda[k] + lambda[l];
      w(k, l) = s > eps ? (lambda[k] - lambda[l]) / s : 0.0;
    }
  }
  return w;
}

Eigen::MatrixXd PairInverse(const Eigen::VectorXd& lambda, double eps) {
  const auto n = lambda.size();
  Eigen::MatrixXd w(n, n);
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double s = lambda[k] + lambda[l];
      w(k, l) = s > eps ? 1.0 / s : 0.0;
    }
  }
  return w;
}

struct RealSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  double eps = 0.0;
};

RealSpectrum DecomposeReal(const Eigen::MatrixXd& rho) {
  RealSpectrum s;
  Decompose<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>>(rho, s.values,
                                                            s.vectors);
  s.eps = kRelativeZero * rho.trace();
  for (auto& v : s.values) {
    if (v < -kIndefiniteTolerance) {
      throw NumericalError("density matrix is indefinite: eigenvalue " +
                           std::to_string(v));
    }
    if (v < 0.0) v = 0.0;
  }
  return s;
}

void RequirePositiveDelta(double delta) {
  if (delta == 0.0) {
    throw DivergentInformation(
        "diffusion QFI diverges at delta = 0 (pure state)");
  }
}

}  // namespace

void NoiseSetting::Validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("delta must be finite and >= 0");
  }
  if (!std::isfinite(theta)) throw std::invalid_argument("theta must be finite");
}

DephasedDensity BuildDensity(const ProbeState& state,
                             const NoiseSetting& setting) {
  setting.Validate();
  DephasedDensity rho(state.dim(), setting);
  rho.real_entries_ = RealDensity(state.vector(), setting.delta);
  rho.is_real_ = setting.theta == 0.0;
  const int n = state.dim().dim();
  if (rho.is_real_) {
    rho.entries_ = rho.real_entries_.cast<Complex>();
    return rho;
  }
  rho.entries_.resize(n, n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      rho.entries_(i, k) =
          rho.real_entries_(i, k) * std::polar(1.0, -(i - k) * setting.theta);
    }
  }
  rho.real_entries_ = rho.entries_.real();
  return rho;
}

Eigen::MatrixXcd DephasedDensity::DeltaDerivative() const {
  return DiffusionWeights(dim_.dim()).cast<Complex>().cwiseProduct(entries_);
}

Eigen::MatrixXcd DephasedDensity::ThetaDerivative() const {
  const Eigen::VectorXd m = JzDiagonal(dim_);
  const Eigen::MatrixXcd jz = m.cast<Complex>().asDiagonal();
  return Complex(0.0, -1.0) * (jz * entries_ - entries_ * jz);
}

Eigen::MatrixXcd EigenSystem::vectors() const {
  if (is_real()) return real_vectors().cast<Complex>();
  return complex_vectors();
}

int EigenSystem::rank() const {
  return static_cast<int>((values_.array() > zero_threshold_).count());
}

Eigen::MatrixXcd EigenSystem::ToEigenbasis(const Eigen::MatrixXcd& op) const {
  if (is_real()) {
    const auto& v = real_vectors();
    const Eigen::MatrixXd re = v.transpose() * op.real() * v;
    const Eigen::MatrixXd im = v.transpose() * op.imag() * v;
    Eigen::MatrixXcd out(re.rows(), re.cols());
    out.real() = re;
    out.imag() = im;
    return out;
  }
  const auto& v = complex_vectors();
  return v.adjoint() * op * v;
}

Eigen::MatrixXcd EigenSystem::FromEigenbasis(const Eigen::MatrixXcd& op) const {
  if (is_real()) {
    const auto& v = real_vectors();
    const Eigen::MatrixXd re = v * op.real() * v.transpose();
    const Eigen::MatrixXd im = v * op.imag() * v.transpose();
    Eigen::MatrixXcd out(re.rows(), re.cols());
    out.real() = re;
    out.imag() = im;
    return out;
  }
  const auto& v = complex_vectors();
  return v * op * v.adjoint();
}

EigenSystem ComputeEigenSystem(const DephasedDensity& rho) {
  EigenSystem eig;
  if (rho.is_real()) {
    RealSpectrum s = DecomposeReal(rho.real_entries());
    eig.values_ = std::move(s.values);
    eig.vectors_ = std::move(s.vectors);
    eig.zero_threshold_ = s.eps;
    return eig;
  }
  Eigen::MatrixXcd vectors;
  Decompose<Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>>(
      rho.entries(), eig.values_, vectors);
  eig.zero_threshold_ = kRelativeZero * rho.entries().trace().real();
  for (auto& v : eig.values_) {
    if (v < -kIndefiniteTolerance) {
      throw NumericalError("density matrix is indefinite: eigenvalue " +
                           std::to_string(v));
    }
    if (v < 0.0) v = 0.0;
  }
  eig.vectors_ = std::move(vectors);
  return eig;
}

double QfiPhase(const DephasedDensity& rho, const EigenSystem& eig) {
  const Eigen::VectorXd m = JzDiagonal(rho.dim());
  const auto n = static_cast<std::size_t>(m.size());
  Eigen::MatrixXd xsq;
  if (eig.is_real()) {
    const auto& v = eig.real_vectors();
    xsq = (v.transpose() * m.asDiagonal() * v).cwiseAbs2();
  } else {
    const auto& v = eig.complex_vectors();
    xsq = (v.adjoint() * m.cast<Complex>().asDiagonal() * v).cwiseAbs2();
  }
  return simd::active_kernels().phase_pair_sum(
      eig.values().data(), xsq.data(), n, eig.zero_threshold());
}

double QfiPhase(const DephasedDensity& rho) {
  return QfiPhase(rho, ComputeEigenSystem(rho));
}

double QfiDiffusion(const DephasedDensity& rho, const EigenSystem& eig) {
  RequirePositiveDelta(rho.setting().delta);
  const int n = rho.dim().dim();
  const Eigen::MatrixXd weights = DiffusionWeights(n);
  Eigen::MatrixXd dsq;
  if (eig.is_real()) {
    const auto& v = eig.real_vectors();
    const Eigen::MatrixXd d = weights.cwiseProduct(rho.real_entries());
    dsq = (v.transpose() * d * v).cwiseAbs2();
  } else {
    dsq = eig.ToEigenbasis(rho.DeltaDerivative()).cwiseAbs2();
  }
  return simd::active_kernels().diffusion_pair_sum(
      eig.values().data(), dsq.data(), static_cast<std::size_t>(n),
      eig.zero_threshold());
}

double QfiDiffusion(const DephasedDensity& rho) {
  return QfiDiffusion(rho, ComputeEigenSystem(rho));
}

Eigen::MatrixXcd SldPhase(const DephasedDensity& rho, const EigenSystem& eig) {
  const Eigen::VectorXd m = JzDiagonal(rho.dim());
  const Eigen::MatrixXcd x = eig.ToEigenbasis(m.cast<Complex>().asDiagonal());
  const Eigen::MatrixXd ratio = PairRatio(eig.values(), eig.zero_threshold());
  const Eigen::MatrixXcd l_eig =
      Complex(0.0, 2.0) * ratio.cast<Complex>().cwiseProduct(x);
  return eig.FromEigenbasis(l_eig);
}

Eigen::MatrixXcd SldDiffusion(const DephasedDensity& rho,
                              const EigenSystem& eig) {
  const Eigen::MatrixXcd d = eig.ToEigenbasis(rho.DeltaDerivative());
  const Eigen::MatrixXd inv = PairInverse(eig.values(), eig.zero_threshold());
  return eig.FromEigenbasis(2.0 * inv.cast<Complex>().cwiseProduct(d));
}

double CompatibilityCrossTerm(const DephasedDensity& rho,
                              const EigenSystem& eig) {
  const Eigen::MatrixXcd lt = SldPhase(rho, eig);
  const Eigen::MatrixXcd ld = SldDiffusion(rho, eig);
  return (rho.entries() * lt * ld).trace().imag();
}

QfiReport ComputeQfiReport(const ProbeState& state,
                           const NoiseSetting& setting) {
  const DephasedDensity rho = BuildDensity(state, setting);
  const EigenSystem eig = ComputeEigenSystem(rho);
  QfiReport r;
  r.twice_j = state.dim().twice_j();
  r.delta = setting.delta;
  r.theta = setting.theta;
  r.state = state.label();
  r.f_theta = QfiPhase(rho, eig);
  if (setting.delta == 0.0) {
    r.f_delta = std::numeric_limits<double>::infinity();
    r.cross_im = 0.0;
  } else {
    r.f_delta = QfiDiffusion(rho, eig);
    r.cross_im = CompatibilityCrossTerm(rho, eig);
  }
  r.predictions = Predict(state, setting.delta);
  return r;
}

ValueAndGradient QfiPhaseWithGradient(SpinDimension dim,
                                      const Eigen::VectorXd& amplitudes,
                                      double delta) {
  const int n = dim.dim();
  const Eigen::VectorXd coherence = Coherences(n, delta);
  const Eigen::MatrixXd rho = RealDensity(amplitudes, delta);
  const RealSpectrum s = DecomposeReal(rho);
  const Eigen::VectorXd m = JzDiagonal(dim);
  const Eigen::MatrixXd x = s.vectors.transpose() * m.asDiagonal() * s.vectors;
  const Eigen::MatrixXd xsq = x.cwiseAbs2();

  ValueAndGradient out;
  out.value = simd::active_kernels().phase_pair_sum(
      s.values.data(), xsq.data(), static_cast<std::size_t>(n), s.eps);

  // L_theta = i S with S real antisymmetric; G = -2 [J_z, S] + S^2.
  const Eigen::MatrixXd s_eig =
      2.0 * PairRatio(s.values, s.eps).cwiseProduct(x);
  const Eigen::MatrixXd sld = s.vectors * s_eig * s.vectors.transpose();
  Eigen::MatrixXd g = sld * sld;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) g(i, k) -= 2.0 * (m[i] - m[k]) * sld(i, k);
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) g(i, k) *= coherence[std::abs(i - k)];
  }
  out.gradient = 2.0 * g * amplitudes;
  return out;
}

ValueAndGradient QfiDiffusionWithGradient(SpinDimension dim,
                                          const Eigen::VectorXd& amplitudes,
                                          double delta) {
  RequirePositiveDelta(delta);
  const int n = dim.dim();
  const Eigen::VectorXd coherence = Coherences(n, delta);
  const Eigen::MatrixXd rho = RealDensity(amplitudes, delta);
  const RealSpectrum s = DecomposeReal(rho);
  const Eigen::MatrixXd weights = DiffusionWeights(n);
  const Eigen::MatrixXd d =
      s.vectors.transpose() * weights.cwiseProduct(rho) * s.vectors;
  const Eigen::MatrixXd dsq = d.cwiseAbs2();

  ValueAndGradient out;
  out.value = simd::active_kernels().diffusion_pair_sum(
      s.values.data(), dsq.data(), static_cast<std::size_t>(n), s.eps);

  const Eigen::MatrixXd l_eig = 2.0 * PairInverse(s.values, s.eps).cwiseProduct(d);
  const Eigen::MatrixXd sld = s.vectors * l_eig * s.vectors.transpose();
  Eigen::MatrixXd g = 2.0 * weights.cwiseProduct(sld) - sld * sld;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) g(i, k) *= coherence[std::abs(i - k)];
  }
  out.gradient = 2.0 * g * amplitudes;
  return out;
}

}  // namespace dephase
