#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dephase/simd/kernels.hpp"

using namespace dephase::simd;

namespace {

std::vector<double> Uniform(std::size_t n, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

std::vector<double> SymmetricSquare(std::size_t n, unsigned seed) {
  auto v = Uniform(n * n, 0.0, 2.0, seed);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) v[i * n + k] = v[k * n + i];
  }
  return v;
}

const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 16, 17, 31, 64, 101, 201};

}  // namespace

TEST_CASE("active table is usable") {
  const auto& t = active_kernels();
  CHECK(t.dephased_outer != nullptr);
  CHECK(t.phase_pair_sum != nullptr);
  CHECK(scalar_kernels().isa == Isa::kScalar);
  if (avx2_kernels()) CHECK(avx2_kernels()->isa == Isa::kAvx2);
}

TEST_CASE("scalar reference against naive loops") {
  const auto& s = scalar_kernels();
  const std::size_t n = 9;
  auto amp = Uniform(n, -1, 1, 3);
  auto coh = Uniform(n, 0, 1, 4);
  std::vector<double> out(n * n);
  s.dephased_outer(amp.data(), coh.data(), n, out.data());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t d = i > k ? i - k : k - i;
      CHECK(out[i * n + k] == doctest::Approx(coh[d] * amp[i] * amp[k]));
    }
  }
  auto lam = Uniform(n, 0, 1, 5);
  lam[2] = 0.0;
  lam[3] = 0.0;
  auto x = SymmetricSquare(n, 6);
  double p = 0, q = 0;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      const double sum = lam[k] + lam[l];
      if (sum <= 1e-12) continue;
      p += 2 * (lam[k] - lam[l]) * (lam[k] - lam[l]) / sum * x[k * n + l];
      q += 2 * x[k * n + l] / sum;
    }
  }
  CHECK(s.phase_pair_sum(lam.data(), x.data(), n, 1e-12) == doctest::Approx(p));
  CHECK(s.diffusion_pair_sum(lam.data(), x.data(), n, 1e-12) == doctest::Approx(q));
  std::vector<double> c = Uniform(6, -1, 1, 7);
  std::vector<double> ang = Uniform(13, -3.2, 3.2, 8);
  std::vector<double> cs(13);
  s.cosine_series(c.data(), c.size(), ang.data(), ang.size(), cs.data());
  for (std::size_t g = 0; g < 13; ++g) {
    double r = c[0];
    for (std::size_t k = 1; k < c.size(); ++k) r += 2 * c[k] * std::cos(k * ang[g]);
    CHECK(cs[g] == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const KernelTable* v = avx2_kernels();
  if (v == nullptr) {
    MESSAGE("AVX2 variant unavailable on this machine; skipped");
    return;
  }
  const auto& s = scalar_kernels();
  for (std::size_t n : kSizes) {
    CAPTURE(n);
    auto amp = Uniform(n, -1, 1, 11 + n);
    auto coh = Uniform(n, 0, 1, 12 + n);
    std::vector<double> a(n * n), b(n * n);
    s.dephased_outer(amp.data(), coh.data(), n, a.data());
    v->dephased_outer(amp.data(), coh.data(), n, b.data());
    for (std::size_t i = 0; i < n * n; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-15));

    auto lam = Uniform(n, 0, 1, 13 + n);
    if (n > 3) lam[n / 2] = lam[n - 1] = 0.0;
    auto x = SymmetricSquare(n, 14 + n);
    const double ps = s.phase_pair_sum(lam.data(), x.data(), n, 1e-12);
    const double pv = v->phase_pair_sum(lam.data(), x.data(), n, 1e-12);
    CHECK(std::abs(ps - pv) <= 1e-13 * (1 + std::abs(ps)));
    const double ds = s.diffusion_pair_sum(lam.data(), x.data(), n, 1e-12);
    const double dv = v->diffusion_pair_sum(lam.data(), x.data(), n, 1e-12);
    CHECK(std::abs(ds - dv) <= 1e-13 * (1 + std::abs(ds)));

    auto c = Uniform(n, -1, 1, 15 + n);
    auto ang = Uniform(n * 3 + 1, -3.2, 3.2, 16 + n);
    std::vector<double> cs(ang.size()), cv(ang.size());
    s.cosine_series(c.data(), c.size(), ang.data(), ang.size(), cs.data());
    v->cosine_series(c.data(), c.size(), ang.data(), ang.size(), cv.data());
    for (std::size_t g = 0; g < ang.size(); ++g) {
      CHECK(std::abs(cs[g] - cv[g]) <= 1e-12 * (1 + std::abs(cs[g])));
    }
  }
}

TEST_CASE("pair sums skip vanishing pairs") {
  for (const KernelTable* t : {&scalar_kernels(), avx2_kernels()}) {
    if (t == nullptr) continue;
    std::vector<double> lam(8, 0.0);
    std::vector<double> x(64, 1.0);
    CHECK(t->phase_pair_sum(lam.data(), x.data(), 8, 1e-12) == 0.0);
    CHECK(t->diffusion_pair_sum(lam.data(), x.data(), 8, 1e-12) == 0.0);
  }
}
