#include "dephase/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "dephase/errors.hpp"
#include "dephase/parallel.hpp"
#include "dephase/probe_optimizer.hpp"

namespace dephase {
namespace {

constexpr double kBracketLow = 1e-6;
constexpr double kBracketHigh = 2.0;

double AsymptoticClusterQfi(int size, double delta) {
  const ProbeState cosine = CosineState(SpinDimension::FromTwiceJ(size));
  return 1.0 / PredictInvFTheta(cosine, delta);
}

double ClusterQfi(int size, double delta, ClusterQfiCache& cache,
                  ClusterMethod& method) {
  if (size > kMaxExactCluster) {
    method = ClusterMethod::kAsymptotic;
    return AsymptoticClusterQfi(size, delta);
  }
  return cache.Get(size, delta);
}

}  // namespace

ClusterQfiCache::ClusterQfiCache()
    : ClusterQfiCache([](int twice_j, double delta) {
        return OptimalQfi(SpinDimension::FromTwiceJ(twice_j), delta);
      }) {}

ClusterQfiCache::ClusterQfiCache(Solver solver) : solver_(std::move(solver)) {}

double ClusterQfiCache::Get(int twice_j, double delta) {
  const Key key{twice_j, std::llround(delta * 1e6)};
  {
    std::shared_lock lock(mutex_);
    if (auto it = values_.find(key); it != values_.end()) return it->second;
  }
  // Evaluate at the rounded delta so the cached value does not depend on
  // which caller filled the slot.
  const double value = solver_(twice_j, static_cast<double>(key.second) * 1e-6);
  std::unique_lock lock(mutex_);
  auto [it, inserted] = values_.emplace(key, value);
  if (inserted) ++misses_;
  return it->second;
}

std::size_t ClusterQfiCache::size() const {
  std::shared_lock lock(mutex_);
  return values_.size();
}

std::size_t ClusterQfiCache::misses() const {
  std::shared_lock lock(mutex_);
  return misses_;
}

ClusterQfiCache& SharedClusterCache() {
  static ClusterQfiCache cache;
  return cache;
}

double CrossoverDelta(int n_small, int n_large, ClusterQfiCache& cache) {
  if (n_small < 1 || n_small >= n_large || n_large > 8) {
    throw std::invalid_argument("need 1 <= n_small < n_large <= 8");
  }
  auto gap = [&](double delta) {
    return cache.Get(n_large, delta) / n_large -
           cache.Get(n_small, delta) / n_small;
  };
  double lo = kBracketLow;
  double hi = kBracketHigh;
  double g_lo = gap(lo);
  const double g_hi = gap(hi);
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if ((g_lo > 0.0) == (g_hi > 0.0)) {
    std::ostringstream os;
    os << "no crossover between cluster sizes " << n_small << " and "
       << n_large << " on (" << kBracketLow << ", " << kBracketHigh << ")";
    throw NumericalError(os.str());
  }
  while (hi - lo > kCrossoverTolerance) {
    const double mid = 0.5 * (lo + hi);
    const double g = gap(mid);
    if (g == 0.0) return mid;
    if ((g > 0.0) == (g_lo > 0.0)) {
      lo = mid;
      g_lo = g;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ClusterPlan EvaluatePartition(int total_n, double delta, int cluster_size,
                              ClusterQfiCache& cache) {
  if (total_n < 1) throw std::invalid_argument("particle budget must be >= 1");
  if (cluster_size < 1 || cluster_size > total_n) {
    throw std::invalid_argument("cluster size must be in [1, N]");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("delta must be finite and >= 0");
  }
  ClusterPlan plan;
  plan.total_n = total_n;
  plan.delta = delta;
  plan.cluster_size = cluster_size;
  plan.count = total_n / cluster_size;
  plan.remainder = total_n % cluster_size;
  plan.method = ClusterMethod::kExact;
  plan.per_cluster_f = ClusterQfi(cluster_size, delta, cache, plan.method);
  plan.total_f = plan.count * plan.per_cluster_f;
  if (plan.remainder > 0) {
    plan.total_f += ClusterQfi(plan.remainder, delta, cache, plan.method);
  }
  plan.bounds = ComputeClusteringBounds(total_n, delta);
  return plan;
}

ClusterPlan BestPartition(int total_n, double delta, int max_cluster,
                          ClusterQfiCache& cache, int threads) {
  if (total_n < 1) throw std::invalid_argument("particle budget must be >= 1");
  if (max_cluster < 1) throw std::invalid_argument("max_cluster must be >= 1");
  const int sizes = std::min(max_cluster, total_n);
  std::vector<ClusterPlan> plans(sizes);
  ParallelFor(sizes, threads, [&](int i) {
    plans[i] = EvaluatePartition(total_n, delta, i + 1, cache);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < plans.size(); ++i) {
    const double tol = 1e-12 * std::max(1.0, plans[best].total_f);
    if (plans[i].total_f > plans[best].total_f + tol) best = i;
  }
  return plans[best];
}

ShotNoiseReport CheckShotNoiseBounds(const ClusterPlan& plan) {
  ShotNoiseReport r;
  r.inv_f = 1.0 / plan.total_f;
  r.lower = plan.bounds.lower;
  r.upper = plan.bounds.upper;
  r.above_lower = r.inv_f >= r.lower - 1e-12;
  r.ratio_to_upper = r.upper > 0.0 ? r.inv_f / r.upper : 0.0;
  return r;
}

std::string ClusterPlanJson(const ClusterPlan& plan) {
  nlohmann::ordered_json j;
  j["N"] = plan.total_n;
  j["delta"] = plan.delta;
  j["cluster_size"] = plan.cluster_size;
  j["nu"] = plan.nu();
  j["remainder"] = plan.remainder;
  j["per_cluster_f"] = plan.per_cluster_f;
  j["total_f"] = plan.total_f;
  j["bounds"] = {{"lower", plan.bounds.lower}, {"upper", plan.bounds.upper}};
  j["method"] = plan.method == ClusterMethod::kExact ? "exact" : "asymptotic";
  return j.dump();
}

}  // namespace dephase
