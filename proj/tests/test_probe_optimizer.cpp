#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dephase/errors.hpp"
#include "dephase/measurement.hpp"
#include "dephase/probe_optimizer.hpp"

using namespace dephase;

namespace {

constexpr double kPi = std::numbers::pi;

SpinDimension D(int tj) { return SpinDimension::FromTwiceJ(tj); }

OptimizationProblem Problem(int tj, double delta, Objective obj = Objective::kPhaseQfi) {
  OptimizationProblem p;
  p.dim = D(tj);
  p.setting = {delta, 0.0};
  p.objective = obj;
  p.starts = DefaultStarts(p.dim);
  return p;
}

}  // namespace

TEST_CASE("objective names") {
  for (auto o : {Objective::kPhaseQfi, Objective::kDiffusionQfi, Objective::kPhaseVariance}) {
    CHECK(ParseObjective(ObjectiveName(o)) == o);
  }
  CHECK_THROWS_AS(ParseObjective("entropy"), std::invalid_argument);
  CHECK(Maximizes(Objective::kPhaseQfi));
  CHECK_FALSE(Maximizes(Objective::kPhaseVariance));
}

TEST_CASE("noon is optimal without noise") {
  auto p = Problem(2, 0.0);
  const auto r = Optimize(p);
  CHECK(r.best_value == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(r.best_state.amplitude(0) == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-5));
  CHECK(std::abs(r.best_state.amplitude(1)) < 1e-5);
  CHECK(OptimalQfi(D(2), 0.0) == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("optimal qfi of small clusters") {
  for (double d : {0.01, 0.1, 0.5, 1.5}) {
    CHECK(OptimalQfi(D(1), d) == doctest::Approx(std::exp(-d)).epsilon(1e-10));
  }
  // At the first crossover a pair is worth exactly two singles.
  CHECK(OptimalQfi(D(2), 0.2512) == doctest::Approx(2 * std::exp(-0.2512)).epsilon(2e-3));
  CHECK(OptimalQfi(D(2), 0.2512) == doctest::Approx(1.5557).epsilon(2e-3));
}

TEST_CASE("best value dominates every start and ascent is monotone") {
  for (int tj : {3, 6, 10}) {
    for (double d : {0.02, 0.2}) {
      for (auto obj : {Objective::kPhaseQfi, Objective::kDiffusionQfi}) {
        auto p = Problem(tj, d, obj);
        for (auto& s : RandomStarts(p.dim, 3, 7)) p.starts.push_back(s);
        const auto r = Optimize(p);
        CHECK(r.starts.size() == p.starts.size());
        for (const auto& o : r.starts) {
          CHECK(o.final_value >= o.initial_value - 1e-12 * (1 + std::abs(o.initial_value)));
          CHECK(r.best_value >= o.final_value - 1e-9 * std::abs(o.final_value));
        }
        CHECK(std::abs(r.best_state.vector().norm() - 1.0) < 1e-12);
        CHECK(r.best_state.IsSymmetric(1e-12));
        const double direct = EvaluateObjective(obj, p.dim, r.best_state.vector(), p.setting);
        CHECK(direct == doctest::Approx(r.best_value).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("symmetry does not cost anything at small j") {
  for (int tj : {1, 2, 3, 4, 6}) {
    for (double d : {0.05, 0.3}) {
      auto sym = Problem(tj, d);
      for (auto& s : RandomStarts(sym.dim, 6, 11)) sym.starts.push_back(s);
      auto free = sym;
      free.symmetric = false;
      for (auto& s : RandomStarts(free.dim, 6, 12, false)) free.starts.push_back(s);
      CHECK(Optimize(free).best_value ==
            doctest::Approx(Optimize(sym).best_value).epsilon(1e-6));
    }
  }
}

TEST_CASE("analytic and finite difference gradients agree") {
  for (auto obj : {Objective::kPhaseQfi, Objective::kDiffusionQfi, Objective::kPhaseVariance}) {
    const auto s = GaussianState(D(8), 1.7);
    Eigen::VectorXd x = s.vector();
    x[2] *= 1.4;
    x.normalize();
    const NoiseSetting set{0.12, 0.0};
    const auto ga = ObjectiveGradient(obj, D(8), x, set, GradientMethod::kAnalytic, 1e-6);
    const auto gf = ObjectiveGradient(obj, D(8), x, set, GradientMethod::kFiniteDifference, 1e-6);
    const Eigen::VectorXd ta = ga - x * x.dot(ga);
    for (int i = 0; i < 9; ++i) CHECK(ta[i] == doctest::Approx(gf[i]).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("finite difference optimizer reaches the analytic optimum") {
  auto p = Problem(6, 0.1);
  const double a = Optimize(p).best_value;
  p.gradient = GradientMethod::kFiniteDifference;
  CHECK(Optimize(p).best_value == doctest::Approx(a).epsilon(1e-7));
}

TEST_CASE("large mass optimum stays close to the cosine state") {
  const auto p = Problem(80, 0.4);
  const auto r = Optimize(p);
  const double cosine = EvaluateObjective(Objective::kPhaseQfi, p.dim,
                                          CosineState(p.dim).vector(), p.setting);
  CHECK(r.best_value >= cosine);
  CHECK(r.best_value < 1.005 * cosine);
  CHECK((r.best_state.vector() - CosineState(p.dim).vector()).norm() < 0.05);
  for (int i = 0; i < 81; ++i) CHECK(r.best_state.amplitude(i) >= 0.0);
}

TEST_CASE("runs are deterministic and thread count does not matter") {
  auto p = Problem(10, 0.05);
  for (auto& s : RandomStarts(p.dim, 4, kDefaultOptimizerSeed)) p.starts.push_back(s);
  const auto a = Optimize(p);
  p.threads = 3;
  const auto b = Optimize(p);
  CHECK(a.best_value == b.best_value);
  CHECK(a.best_start == b.best_start);
  for (int i = 0; i < 11; ++i) CHECK(a.best_state.amplitude(i) == b.best_state.amplitude(i));
}

TEST_CASE("random starts") {
  const auto a = RandomStarts(D(7), 5, 99);
  const auto b = RandomStarts(D(7), 5, 99);
  const auto c = RandomStarts(D(7), 5, 100);
  CHECK(a.size() == 5);
  CHECK(a[3].label() == "random_3");
  for (int i = 0; i < 8; ++i) CHECK(a[2].amplitude(i) == b[2].amplitude(i));
  CHECK(a[0].amplitude(0) != c[0].amplitude(0));
  for (const auto& s : a) CHECK(s.IsSymmetric());
  CHECK_FALSE(RandomStarts(D(7), 1, 99, false)[0].IsSymmetric(1e-9));
}

TEST_CASE("phase variance objective") {
  const auto c = CosineState(D(200));
  const double n = 201.0;
  CHECK(PhaseVarianceObjective(c, {0.0, 0.0}) == doctest::Approx(kPi * kPi / (n * n)).epsilon(0.02));
  CHECK(PhaseVarianceObjective(FlatPhaseState(D(200)), {0.0, 0.0}) >
        PhaseVarianceObjective(c, {0.0, 0.0}));
  CHECK(PhaseVarianceObjective(c, {40.0, 0.0}) == doctest::Approx(kPi * kPi / 3).epsilon(1e-6));
  for (int tj : {4, 9, 30}) {
    for (double d : {0.0, 0.05, 0.8}) {
      for (const auto& s : {CosineState(D(tj)), SpinCoherentState(D(tj))}) {
        const auto q = PhaseVarianceForm(D(tj), d);
        CHECK(s.vector().dot(q * s.vector()) ==
              doctest::Approx(PhaseVarianceObjective(s, {d, 0.0})).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("minimizing the phase variance") {
  auto p = Problem(12, 0.01, Objective::kPhaseVariance);
  const auto r = Optimize(p);
  for (const auto& o : r.starts) CHECK(r.best_value <= o.initial_value + 1e-12);
  CHECK(r.best_value <= PhaseVarianceObjective(CosineState(p.dim), p.setting) + 1e-9);
  // The variance-optimal profile is the lowest eigenvector of the form.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(PhaseVarianceForm(p.dim, 0.01));
  CHECK(r.best_value == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-8));
}

TEST_CASE("problem validation") {
  auto p = Problem(4, 0.1);
  p.starts.clear();
  CHECK_THROWS_AS(Optimize(p), std::invalid_argument);
  p = Problem(4, 0.1);
  p.starts.push_back(CosineState(D(5)));
  CHECK_THROWS_AS(Optimize(p), std::invalid_argument);
  p = Problem(4, 0.1);
  p.tolerances.gradient_norm = 0.0;
  CHECK_THROWS_AS(Optimize(p), std::invalid_argument);
  p = Problem(4, 0.0, Objective::kDiffusionQfi);
  CHECK_THROWS_AS(Optimize(p), DivergentInformation);
  p = Problem(4, 0.1);
  p.starts = {CustomState(D(4), std::vector<double>{1, 0, 0, 0, -1})};
  CHECK_THROWS_AS(Optimize(p), std::invalid_argument);
}
