#include "dephase/simd/kernels.hpp"

#include <cmath>

namespace dephase::simd {
namespace {

void DephasedOuter(const double* amp, const double* coherence, std::size_t n,
                   double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t lag = i > k ? i - k : k - i;
      out[i * n + k] = coherence[lag] * amp[i] * amp[k];
    }
  }
}

double PhasePairSum(const double* lambda, const double* xsq, std::size_t n,
                    double eps) {
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      const double s = lambda[k] + lambda[l];
      if (s <= eps) continue;
      const double d = lambda[k] - lambda[l];
      total += d * d / s * xsq[k * n + l];
    }
  }
  return 2.0 * total;
}

double DiffusionPairSum(const double* lambda, const double* dsq, std::size_t n,
                        double eps) {
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      const double s = lambda[k] + lambda[l];
      if (s <= eps) continue;
      total += dsq[k * n + l] / s;
    }
  }
  return 2.0 * total;
}

void CosineSeries(const double* c, std::size_t ncoef, const double* angle,
                  std::size_t nangle, double* out) {
  for (std::size_t g = 0; g < nangle; ++g) {
    const double y = std::cos(angle[g]);
    double b1 = 0.0;
    double b2 = 0.0;
    for (std::size_t k = ncoef; k-- > 1;) {
      const double b0 = 2.0 * c[k] + 2.0 * y * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    out[g] = (ncoef > 0 ? c[0] : 0.0) + y * b1 - b2;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::kScalar, "scalar", &DephasedOuter,
                                 &PhasePairSum, &DiffusionPairSum,
                                 &CosineSeries};
  return table;
}

}  // namespace dephase::simd
