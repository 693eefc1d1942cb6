#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference
// implementation and, where the target allows, an AVX2+FMA variant. The
// variant is chosen once at startup; LEFGPD_SIMD=scalar forces the reference
// path.

#include <cstddef>
#include <span>
#include <string_view>

namespace lefgpd::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;

  // out[i] = exp(x[i]); inputs below the double underflow threshold give 0.
  void (*exp_batch)(const double* x, std::size_t count, double* out);

  // out[i] = sum over integer images m in [m_lo, m_hi] with |d[i] + m| <= radius
  // of exp(-(d[i] + m)^2 * inv_4tau), images visited in increasing m.
  void (*gaussian_image_sum)(const double* d, std::size_t count, double inv_4tau,
                             double radius, int m_lo, int m_hi, double* out);

  // Pairwise summation. Leaves of up to 32 values are reduced with four
  // interleaved accumulators combined as (a0 + a1) + (a2 + a3); both variants
  // follow exactly this order and agree bit for bit.
  double (*pairwise_sum)(const double* x, std::size_t count);
};

const KernelTable& scalar_kernels();

// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2_kernels();

// The table selected for this process.
const KernelTable& active_kernels();

inline double pairwise_sum(std::span<const double> x) {
  return active_kernels().pairwise_sum(x.data(), x.size());
}

namespace detail {
inline constexpr std::size_t kPairwiseLeaf = 32;
// Split point used by both variants; a multiple of four below count.
inline std::size_t pairwise_split(std::size_t count) {
  return ((count / 2) + 3) & ~std::size_t{3};
}
}  // namespace detail

}  // namespace lefgpd::simd
