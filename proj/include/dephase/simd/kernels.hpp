#pragma once

#include <cstddef>
#include <string_view>

namespace dephase::simd {

enum class Isa { kScalar, kAvx2 };

// Data-parallel inner loops used by the density, QFI and phase-distribution
// code. Every variant must agree with the scalar reference to rounding.
// Square matrices are n x n, contiguous, and symmetric where noted, so the
// storage order does not matter.
struct KernelTable {
  Isa isa;
  std::string_view name;

  // out(i, k) = coherence[|i - k|] * amp[i] * amp[k]
  void (*dephased_outer)(const double* amp, const double* coherence,
                         std::size_t n, double* out);

  // 2 * sum over (k, l) with lambda_k + lambda_l > eps of
  // (lambda_k - lambda_l)^2 / (lambda_k + lambda_l) * xsq(k, l).
  // xsq is symmetric.
  double (*phase_pair_sum)(const double* lambda, const double* xsq,
                           std::size_t n, double eps);

  // 2 * sum over (k, l) with lambda_k + lambda_l > eps of
  // dsq(k, l) / (lambda_k + lambda_l). dsq is symmetric.
  double (*diffusion_pair_sum)(const double* lambda, const double* dsq,
                               std::size_t n, double eps);

  // out[g] = c[0] + 2 * sum_{k >= 1} c[k] * cos(k * angle[g]), evaluated by
  // Clenshaw recurrence.
  void (*cosine_series)(const double* c, std::size_t ncoef,
                        const double* angle, std::size_t nangle, double* out);
};

const KernelTable& scalar_kernels();

// nullptr when the build has no AVX2 variant or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

// Best table for this CPU. DEPHASE_SIMD=scalar in the environment forces the
// reference path.
const KernelTable& active_kernels();

}  // namespace dephase::simd
