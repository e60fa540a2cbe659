#include "dephase/probe_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>

#include "dephase/errors.hpp"
#include "dephase/measurement.hpp"
#include "dephase/parallel.hpp"

namespace dephase {
namespace {

using Eigen::VectorXd;

constexpr double kArmijo = 1e-4;
constexpr double kTieTolerance = 1e-9;

VectorXd Mirror(const VectorXd& v) { return v.reverse(); }

VectorXd Symmetrize(const VectorXd& v) { return 0.5 * (v + Mirror(v)); }

class Evaluator {
 public:
  Evaluator(Objective objective, SpinDimension dim, NoiseSetting setting)
      : objective_(objective), dim_(dim), setting_(setting) {
    if (objective_ == Objective::kPhaseVariance) {
      form_ = PhaseVarianceForm(dim_, setting_.delta);
    }
  }

  double Value(const VectorXd& x) const {
    switch (objective_) {
      case Objective::kPhaseQfi:
        return QfiPhase(BuildDensity(
            ProbeState(dim_, {x.data(), x.data() + x.size()}, "trial"),
            {setting_.delta, 0.0}));
      case Objective::kDiffusionQfi:
        return QfiDiffusion(BuildDensity(
            ProbeState(dim_, {x.data(), x.data() + x.size()}, "trial"),
            {setting_.delta, 0.0}));
      case Objective::kPhaseVariance:
        return x.dot(form_ * x) / x.squaredNorm();
    }
    return 0.0;
  }

  // Gradient of the objective as a function of the raw amplitudes, at a
  // unit-norm x.
  VectorXd AnalyticGradient(const VectorXd& x, double* value) const {
    ValueAndGradient vg;
    switch (objective_) {
      case Objective::kPhaseQfi:
        vg = QfiPhaseWithGradient(dim_, x, setting_.delta);
        break;
      case Objective::kDiffusionQfi:
        vg = QfiDiffusionWithGradient(dim_, x, setting_.delta);
        break;
      case Objective::kPhaseVariance: {
        const VectorXd qx = form_ * x;
        vg.value = x.dot(qx);
        vg.gradient = 2.0 * qx;
        break;
      }
    }
    if (value) *value = vg.value;
    return vg.gradient;
  }

  VectorXd FiniteDifferenceGradient(const VectorXd& x, double step,
                                    bool symmetric) const {
    const auto n = x.size();
    VectorXd g = VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index mirror = n - 1 - i;
      if (symmetric && mirror < i) break;
      const double h = x[i] != 0.0 ? step * std::abs(x[i]) : step;
      VectorXd plus = x;
      VectorXd minus = x;
      plus[i] += h;
      minus[i] -= h;
      if (symmetric && mirror != i) {
        plus[mirror] += h;
        minus[mirror] -= h;
      }
      const double d =
          (Value(plus / plus.norm()) - Value(minus / minus.norm())) / (2.0 * h);
      if (symmetric && mirror != i) {
        g[i] = 0.5 * d;
        g[mirror] = 0.5 * d;
      } else {
        g[i] = d;
      }
    }
    return g;
  }

 private:
  Objective objective_;
  SpinDimension dim_;
  NoiseSetting setting_;
  Eigen::MatrixXd form_;
};

struct Trajectory {
  VectorXd x;
  double value = 0.0;
  StartOutcome outcome;
};

Trajectory Ascend(const OptimizationProblem& p, const Evaluator& eval,
                  const ProbeState& start) {
  const double sign = Maximizes(p.objective) ? 1.0 : -1.0;
  const bool use_fd = p.gradient == GradientMethod::kFiniteDifference;

  auto score_and_grad = [&](const VectorXd& x, double& score) {
    VectorXd g;
    if (use_fd) {
      score = sign * eval.Value(x);
      g = eval.FiniteDifferenceGradient(x, p.tolerances.fd_step, p.symmetric);
    } else {
      double v = 0.0;
      g = eval.AnalyticGradient(x, &v);
      score = sign * v;
    }
    g *= sign;
    if (p.symmetric) g = Symmetrize(g);
    return VectorXd(g - x * x.dot(g));
  };

  VectorXd x = start.vector();
  if (p.symmetric) x = Symmetrize(x);
  if (x.norm() == 0.0) {
    throw std::invalid_argument("start '" + start.label() +
                                "' vanishes under symmetrization");
  }
  x.normalize();

  Trajectory t;
  t.outcome.label = start.label();
  double score = 0.0;
  VectorXd g = score_and_grad(x, score);
  t.outcome.initial_value = sign * score;

  VectorXd prev_x;
  VectorXd prev_g;
  double step = 0.0;
  int it = 0;
  bool converged = false;
  for (; it < p.tolerances.max_iterations; ++it) {
    const double gn = g.norm();
    if (gn < p.tolerances.gradient_norm) {
      converged = true;
      break;
    }
    if (prev_x.size() > 0) {
      const VectorXd s = x - prev_x;
      const VectorXd y = prev_g - g;
      const double sy = s.dot(y);
      step = sy != 0.0 ? std::abs(s.squaredNorm() / sy) : 0.1 / gn;
    } else {
      step = 0.1 / gn;
    }
    step = std::min(step, 1.0 / gn);

    bool accepted = false;
    VectorXd xn;
    double fn = 0.0;
    for (double trial = step; trial * gn > 1e-16; trial *= 0.5) {
      xn = (x + trial * g).normalized();
      fn = sign * eval.Value(xn);
      if (fn >= score + kArmijo * trial * gn * gn) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No representable ascent step: stationary up to rounding.
      converged = gn <= 1e-6 * (1.0 + std::abs(score));
      break;
    }
    prev_x = x;
    prev_g = g;
    x = xn;
    g = score_and_grad(x, score);
  }
  if (it == p.tolerances.max_iterations && g.norm() < p.tolerances.gradient_norm) {
    converged = true;
  }
  // Both QFIs are invariant under per-amplitude sign flips.
  if (p.objective != Objective::kPhaseVariance) x = x.cwiseAbs();
  t.x = x;
  t.value = sign * score;
  t.outcome.final_value = t.value;
  t.outcome.iterations = it;
  t.outcome.converged = converged;
  t.outcome.gradient_norm = g.norm();
  return t;
}

}  // namespace

std::string_view ObjectiveName(Objective objective) {
  switch (objective) {
    case Objective::kPhaseQfi:
      return "phase_qfi";
    case Objective::kDiffusionQfi:
      return "diffusion_qfi";
    case Objective::kPhaseVariance:
      return "phase_variance";
  }
  return "unknown";
}

Objective ParseObjective(std::string_view name) {
  if (name == "phase_qfi") return Objective::kPhaseQfi;
  if (name == "diffusion_qfi") return Objective::kDiffusionQfi;
  if (name == "phase_variance") return Objective::kPhaseVariance;
  throw std::invalid_argument("unknown objective '" + std::string(name) + "'");
}

bool Maximizes(Objective objective) {
  return objective != Objective::kPhaseVariance;
}

void OptimizationProblem::Validate() const {
  setting.Validate();
  if (starts.empty()) throw std::invalid_argument("no starting states");
  for (const auto& s : starts) {
    if (s.dim() != dim) {
      throw std::invalid_argument("start '" + s.label() +
                                  "' has the wrong dimension");
    }
  }
  if (tolerances.max_iterations < 0 || !(tolerances.gradient_norm > 0.0) ||
      !(tolerances.fd_step > 0.0)) {
    throw std::invalid_argument("tolerances must be positive");
  }
  if (objective == Objective::kDiffusionQfi && setting.delta == 0.0) {
    throw DivergentInformation("diffusion QFI is infinite at delta = 0");
  }
}

std::vector<ProbeState> DefaultStarts(SpinDimension dim) {
  return {CosineState(dim), NoonState(dim), FlatPhaseState(dim),
          GaussianState(dim, std::sqrt(dim.particles()) / 2.0)};
}

std::vector<ProbeState> RandomStarts(SpinDimension dim, int count,
                                     std::uint64_t seed, bool symmetric) {
  std::mt19937_64 rng(seed);
  std::vector<ProbeState> out;
  out.reserve(count);
  const int n = dim.dim();
  for (int c = 0; c < count; ++c) {
    std::vector<double> amp(n);
    for (double& a : amp) {
      a = 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
    }
    if (symmetric) {
      for (int i = 0; i < n / 2; ++i) amp[n - 1 - i] = amp[i];
    }
    out.emplace_back(dim, std::move(amp), "random_" + std::to_string(c));
  }
  return out;
}

double EvaluateObjective(Objective objective, SpinDimension dim,
                         const VectorXd& amplitudes,
                         const NoiseSetting& setting) {
  return Evaluator(objective, dim, setting).Value(amplitudes.normalized());
}

VectorXd ObjectiveGradient(Objective objective, SpinDimension dim,
                           const VectorXd& amplitudes,
                           const NoiseSetting& setting, GradientMethod method,
                           double fd_step) {
  const Evaluator eval(objective, dim, setting);
  if (method == GradientMethod::kFiniteDifference) {
    return eval.FiniteDifferenceGradient(amplitudes, fd_step, false);
  }
  return eval.AnalyticGradient(amplitudes, nullptr);
}

OptimizationResult Optimize(const OptimizationProblem& problem) {
  problem.Validate();
  const Evaluator eval(problem.objective, problem.dim, problem.setting);
  std::vector<std::optional<Trajectory>> runs(problem.starts.size());
  ParallelFor(static_cast<int>(runs.size()), problem.threads, [&](int i) {
    runs[i] = Ascend(problem, eval, problem.starts[i]);
  });

  const double sign = Maximizes(problem.objective) ? 1.0 : -1.0;
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    const double a = sign * runs[i]->value;
    const double b = sign * runs[best]->value;
    const double tol = kTieTolerance * std::max(1.0, std::abs(b));
    if (a > b + tol) {
      best = i;
    } else if (a >= b - tol &&
               std::abs(runs[i]->x[0]) < std::abs(runs[best]->x[0]) - 1e-12) {
      best = i;
    }
  }

  std::vector<StartOutcome> outcomes;
  outcomes.reserve(runs.size());
  for (const auto& r : runs) outcomes.push_back(r->outcome);
  const Trajectory& b = *runs[best];
  std::vector<double> amp(b.x.data(), b.x.data() + b.x.size());
  return OptimizationResult{
      ProbeState(problem.dim, std::move(amp), "optimized"),
      b.value,
      b.outcome.iterations,
      b.outcome.converged,
      b.outcome.label,
      std::move(outcomes)};
}

double OptimalQfi(SpinDimension dim, double delta, std::uint64_t seed) {
  OptimizationProblem p;
  p.dim = dim;
  p.setting = {delta, 0.0};
  p.objective = Objective::kPhaseQfi;
  p.starts = DefaultStarts(dim);
  for (auto& s : RandomStarts(dim, 20, seed)) p.starts.push_back(std::move(s));
  return Optimize(p).best_value;
}

double PhaseVarianceObjective(const ProbeState& state,
                              const NoiseSetting& setting) {
  return WrappedVariance(ConvolvedDistribution(state, setting), setting.theta);
}

Eigen::MatrixXd PhaseVarianceForm(SpinDimension dim, double delta) {
  const int n = dim.dim();
  Eigen::MatrixXd q(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int k = std::abs(a - b);
      const double base = k == 0 ? std::numbers::pi * std::numbers::pi / 3.0
                                 : 2.0 * (k % 2 == 0 ? 1.0 : -1.0) / (k * k);
      q(a, b) = base * std::exp(-0.5 * delta * k * k);
    }
  }
  return q;
}

}  // namespace dephase
