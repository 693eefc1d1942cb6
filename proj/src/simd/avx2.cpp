// AVX2 + FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// is only entered after a runtime CPU check.

#include "lefgpd/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace lefgpd::simd {
namespace {

// exp(x) by Cody-Waite reduction x = k ln2 + r, |r| <= ln2/2, and a degree-13
// Taylor polynomial in r. Relative error stays within a few ulp.
inline __m256d exp_pd(__m256d x) {
  const __m256d lower = _mm256_set1_pd(-708.0);
  const __m256d upper = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lower, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lower), upper);

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);

  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);

  // 1/j! for j = 13 down to 0.
  static constexpr double kInvFact[14] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
      1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
      1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
      1.0,                1.0};
  __m256d p = _mm256_set1_pd(kInvFact[0]);
  for (int j = 1; j < 14; ++j) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(kInvFact[j]));

  const __m128i k32 = _mm256_cvtpd_epi32(k);
  __m256i k64 = _mm256_cvtepi32_epi64(k32);
  k64 = _mm256_add_epi64(k64, _mm256_set1_epi64x(1023));
  const __m256d scale = _mm256_castsi256_pd(_mm256_slli_epi64(k64, 52));
  const __m256d result = _mm256_mul_pd(p, scale);
  return _mm256_andnot_pd(underflow, result);
}

void exp_batch_avx2(const double* x, std::size_t count, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(x + i)));
  }
  if (i < count) {
    alignas(32) double tmp[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = 0; i + j < count; ++j) tmp[j] = x[i + j];
    alignas(32) double res[4];
    _mm256_store_pd(res, exp_pd(_mm256_load_pd(tmp)));
    for (std::size_t j = 0; i + j < count; ++j) out[i + j] = res[j];
  }
}

inline __m256d image_sum_pd(__m256d d, __m256d neg_inv_4tau, __m256d radius, int m_lo,
                            int m_hi) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d sum = _mm256_setzero_pd();
  for (int m = m_lo; m <= m_hi; ++m) {
    const __m256d u = _mm256_add_pd(d, _mm256_set1_pd(static_cast<double>(m)));
    const __m256d inside = _mm256_cmp_pd(_mm256_andnot_pd(sign_mask, u), radius, _CMP_LE_OQ);
    const __m256d e = exp_pd(_mm256_mul_pd(_mm256_mul_pd(u, u), neg_inv_4tau));
    sum = _mm256_add_pd(sum, _mm256_and_pd(inside, e));
  }
  return sum;
}

void gaussian_image_sum_avx2(const double* d, std::size_t count, double inv_4tau,
                             double radius, int m_lo, int m_hi, double* out) {
  const __m256d neg_c = _mm256_set1_pd(-inv_4tau);
  const __m256d rad = _mm256_set1_pd(radius);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    _mm256_storeu_pd(out + i, image_sum_pd(_mm256_loadu_pd(d + i), neg_c, rad, m_lo, m_hi));
  }
  if (i < count) {
    alignas(32) double tmp[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = 0; i + j < count; ++j) tmp[j] = d[i + j];
    alignas(32) double res[4];
    _mm256_store_pd(res, image_sum_pd(_mm256_load_pd(tmp), neg_c, rad, m_lo, m_hi));
    for (std::size_t j = 0; i + j < count; ++j) out[i + j] = res[j];
  }
}

double pairwise_leaf_avx2(const double* x, std::size_t count) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (std::size_t j = 0; i + j < count; ++j) lanes[j] += x[i + j];
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double pairwise_sum_avx2(const double* x, std::size_t count) {
  if (count <= detail::kPairwiseLeaf) return pairwise_leaf_avx2(x, count);
  const std::size_t half = detail::pairwise_split(count);
  return pairwise_sum_avx2(x, half) + pairwise_sum_avx2(x + half, count - half);
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Isa::Avx2, "avx2", &exp_batch_avx2, &gaussian_image_sum_avx2,
                                 &pairwise_sum_avx2};
  return &table;
}

}  // namespace lefgpd::simd
