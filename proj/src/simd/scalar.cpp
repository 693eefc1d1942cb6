#include "lefgpd/simd/kernels.hpp"

#include <cmath>

namespace lefgpd::simd {
namespace {

void exp_batch_scalar(const double* x, std::size_t count, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = x[i] < -708.0 ? 0.0 : std::exp(x[i]);
  }
}

void gaussian_image_sum_scalar(const double* d, std::size_t count, double inv_4tau,
                               double radius, int m_lo, int m_hi, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    double sum = 0.0;
    for (int m = m_lo; m <= m_hi; ++m) {
      const double u = d[i] + m;
      if (std::abs(u) <= radius) {
        const double arg = -(u * u) * inv_4tau;
        sum += arg < -708.0 ? 0.0 : std::exp(arg);
      }
    }
    out[i] = sum;
  }
}

double pairwise_leaf(const double* x, std::size_t count) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    for (int j = 0; j < 4; ++j) acc[j] += x[i + j];
  }
  for (std::size_t j = 0; i + j < count; ++j) acc[j] += x[i + j];
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double pairwise_sum_scalar(const double* x, std::size_t count) {
  if (count <= detail::kPairwiseLeaf) return pairwise_leaf(x, count);
  const std::size_t half = detail::pairwise_split(count);
  return pairwise_sum_scalar(x, half) + pairwise_sum_scalar(x + half, count - half);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::Scalar, "scalar", &exp_batch_scalar,
                                 &gaussian_image_sum_scalar, &pairwise_sum_scalar};
  return table;
}

}  // namespace lefgpd::simd
