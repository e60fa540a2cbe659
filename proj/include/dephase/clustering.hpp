#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <shared_mutex>
#include <string>
#include <utility>

#include "dephase/asymptotics.hpp"

namespace dephase {

// Memoized optimal per-cluster QFI, keyed by (twice_j, round(delta * 1e6)).
// Safe for concurrent lookups; inserts take an exclusive lock.
class ClusterQfiCache {
 public:
  using Solver = std::function<double(int twice_j, double delta)>;

  // Defaults to OptimalQfi.
  ClusterQfiCache();
  explicit ClusterQfiCache(Solver solver);

  double Get(int twice_j, double delta);
  std::size_t size() const;
  std::size_t misses() const;

 private:
  using Key = std::pair<int, std::int64_t>;
  Solver solver_;
  mutable std::shared_mutex mutex_;
  std::map<Key, double> values_;
  std::size_t misses_ = 0;
};

// Process-wide cache used when none is passed explicitly.
ClusterQfiCache& SharedClusterCache();

inline constexpr double kCrossoverTolerance = 1e-5;
inline constexpr int kMaxExactCluster = 12;

// Root in (1e-6, 2) of F(n_large)/n_large - F(n_small)/n_small by bisection.
// Requires 1 <= n_small < n_large <= 8; throws NumericalError without a sign
// change.
double CrossoverDelta(int n_small, int n_large,
                      ClusterQfiCache& cache = SharedClusterCache());

enum class ClusterMethod { kExact, kAsymptotic };

struct ClusterPlan {
  int total_n = 0;
  double delta = 0.0;
  int cluster_size = 0;
  int count = 0;      // clusters of cluster_size
  int remainder = 0;  // size of one extra smaller cluster, 0 if none
  double per_cluster_f = 0.0;
  double total_f = 0.0;
  ClusterMethod method = ClusterMethod::kExact;
  ClusteringBounds bounds;

  int nu() const { return count + (remainder > 0 ? 1 : 0); }
};

// Scans cluster sizes 1..max_cluster and keeps the largest total F, ties to
// the smaller size. Sizes above kMaxExactCluster use the large-mass cosine
// prediction and mark the plan asymptotic.
ClusterPlan BestPartition(int total_n, double delta, int max_cluster,
                          ClusterQfiCache& cache = SharedClusterCache(),
                          int threads = 1);

// Total F of a fixed cluster size.
ClusterPlan EvaluatePartition(int total_n, double delta, int cluster_size,
                              ClusterQfiCache& cache = SharedClusterCache());

struct ShotNoiseReport {
  double inv_f = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool above_lower = false;    // 1/F >= 2 sqrt(delta)/N - 1e-12
  double ratio_to_upper = 0.0; // (1/F) / (2 pi sqrt(delta)/N)
};

ShotNoiseReport CheckShotNoiseBounds(const ClusterPlan& plan);

std::string ClusterPlanJson(const ClusterPlan& plan);

}  // namespace dephase
