// Compiled with -mavx2 -mfma. Nothing here may run before the dispatcher has
// confirmed CPU support.
#include <immintrin.h>

#include <cmath>

#include "dephase/simd/kernels.hpp"

namespace dephase::simd {
namespace {

inline double HorizontalSum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

void DephasedOuter(const double* amp, const double* coherence, std::size_t n,
                   double* out) {
  // Upper triangle with contiguous coherence lags, then mirror.
  for (std::size_t i = 0; i < n; ++i) {
    const __m256d ai = _mm256_set1_pd(amp[i]);
    double* row = out + i * n;
    std::size_t k = i;
    for (; k + 4 <= n; k += 4) {
      const __m256d a = _mm256_loadu_pd(amp + k);
      const __m256d c = _mm256_loadu_pd(coherence + (k - i));
      _mm256_storeu_pd(row + k, _mm256_mul_pd(_mm256_mul_pd(c, ai), a));
    }
    for (; k < n; ++k) row[k] = coherence[k - i] * amp[i] * amp[k];
  }
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) out[i * n + k] = out[k * n + i];
  }
}

double PhasePairSum(const double* lambda, const double* xsq, std::size_t n,
                    double eps) {
  const __m256d veps = _mm256_set1_pd(eps);
  __m256d acc = _mm256_setzero_pd();
  double tail = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const __m256d lk = _mm256_set1_pd(lambda[k]);
    const double* row = xsq + k * n;
    std::size_t l = 0;
    for (; l + 4 <= n; l += 4) {
      const __m256d ll = _mm256_loadu_pd(lambda + l);
      const __m256d s = _mm256_add_pd(lk, ll);
      const __m256d d = _mm256_sub_pd(lk, ll);
      const __m256d keep = _mm256_cmp_pd(s, veps, _CMP_GT_OQ);
      const __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), s, keep);
      const __m256d w = _mm256_div_pd(_mm256_mul_pd(d, d), safe);
      const __m256d term = _mm256_mul_pd(w, _mm256_loadu_pd(row + l));
      acc = _mm256_add_pd(acc, _mm256_and_pd(term, keep));
    }
    for (; l < n; ++l) {
      const double s = lambda[k] + lambda[l];
      if (s <= eps) continue;
      const double d = lambda[k] - lambda[l];
      tail += d * d / s * row[l];
    }
  }
  return 2.0 * (HorizontalSum(acc) + tail);
}

double DiffusionPairSum(const double* lambda, const double* dsq, std::size_t n,
                        double eps) {
  const __m256d veps = _mm256_set1_pd(eps);
  __m256d acc = _mm256_setzero_pd();
  double tail = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const __m256d lk = _mm256_set1_pd(lambda[k]);
    const double* row = dsq + k * n;
    std::size_t l = 0;
    for (; l + 4 <= n; l += 4) {
      const __m256d s = _mm256_add_pd(lk, _mm256_loadu_pd(lambda + l));
      const __m256d keep = _mm256_cmp_pd(s, veps, _CMP_GT_OQ);
      const __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), s, keep);
      const __m256d term = _mm256_div_pd(_mm256_loadu_pd(row + l), safe);
      acc = _mm256_add_pd(acc, _mm256_and_pd(term, keep));
    }
    for (; l < n; ++l) {
      const double s = lambda[k] + lambda[l];
      if (s <= eps) continue;
      tail += row[l] / s;
    }
  }
  return 2.0 * (HorizontalSum(acc) + tail);
}

void CosineSeries(const double* c, std::size_t ncoef, const double* angle,
                  std::size_t nangle, double* out) {
  const double c0 = ncoef > 0 ? c[0] : 0.0;
  std::size_t g = 0;
  for (; g + 4 <= nangle; g += 4) {
    const __m256d y = _mm256_setr_pd(std::cos(angle[g]), std::cos(angle[g + 1]),
                                     std::cos(angle[g + 2]),
                                     std::cos(angle[g + 3]));
    const __m256d two_y = _mm256_add_pd(y, y);
    __m256d b1 = _mm256_setzero_pd();
    __m256d b2 = _mm256_setzero_pd();
    for (std::size_t k = ncoef; k-- > 1;) {
      // b0 = 2 c_k + 2 y b1 - b2
      const __m256d b0 = _mm256_fmadd_pd(
          two_y, b1, _mm256_sub_pd(_mm256_set1_pd(2.0 * c[k]), b2));
      b2 = b1;
      b1 = b0;
    }
    const __m256d r =
        _mm256_sub_pd(_mm256_fmadd_pd(y, b1, _mm256_set1_pd(c0)), b2);
    _mm256_storeu_pd(out + g, r);
  }
  for (; g < nangle; ++g) {
    const double y = std::cos(angle[g]);
    double b1 = 0.0;
    double b2 = 0.0;
    for (std::size_t k = ncoef; k-- > 1;) {
      const double b0 = std::fma(2.0 * y, b1, 2.0 * c[k] - b2);
      b2 = b1;
      b1 = b0;
    }
    out[g] = std::fma(y, b1, c0) - b2;
  }
}

}  // namespace

extern const KernelTable kAvx2Table;
const KernelTable kAvx2Table{Isa::kAvx2, "avx2", &DephasedOuter, &PhasePairSum,
                             &DiffusionPairSum, &CosineSeries};

}  // namespace dephase::simd
