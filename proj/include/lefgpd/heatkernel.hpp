#pragma once

// Exact heat kernels on flat models.
//
// The torus kernel is the periodized Gaussian
//   K_tau(x, y) = sum_{m in Z^n} (4 pi tau)^{-n/2} exp(-|x - y + m|^2 / (4 tau)),
// which factors over the axes; each axis factor is a truncated image sum.
// Model kernels of constant-coefficient elliptic operators are inverse
// Fourier transforms of exp(-q(xi)) computed by quadrature on a frequency box.

#include <complex>
#include <limits>
#include <functional>
#include <span>
#include <vector>

#include "lefgpd/geometry.hpp"

namespace lefgpd {

struct HeatTime {
  double t = 1.0;
  int s = 1;
  double tau = 1.0;

  // tau = t^(2s).
  static HeatTime from_t(double t, int s = 1);
};

// ---------------------------------------------------------------------------
// Theta kernel on T^n.

inline constexpr double kThetaRelativeTail = 1e-12;

struct ThetaKernel {
  TorusGeometry geom;
  double tau = 0.0;
  double truncation_radius = 0.0;
};

// Relative bound on the truncated images for one evaluation in dimension n.
double theta_tail_bound(double tau, double radius, int n);

// Smallest radius >= max(8 sqrt(tau), 1.5), in steps of 1/4, meeting the
// relative tail target.
double required_truncation_radius(double tau, int n);

ThetaKernel make_theta_kernel(const TorusGeometry& geom, double tau);

// Throws TruncationTooSmall if the kernel's radius misses the tail target.
double theta_kernel_eval(const ThetaKernel& k, const Vector& x, const Vector& y);

// Batched axis factors: out[i] = sum of exp(-(d[i] + m)^2 / (4 tau)) over images
// with |d[i] + m| <= radius; d must already be centered in [-1/2, 1/2).
void theta_axis_factors(std::span<const double> d, double tau, double radius, std::span<double> out);

double theta_normalization(double tau, int n);

// Heat kernel of q(xi) = a |xi|^2 on R^n at time `time`.
double gaussian_heat_kernel(std::span<const double> x, double diffusion, double time);

// ---------------------------------------------------------------------------
// Spectral side on T^n.

// Fourier coefficients on the modes |k_i| <= cutoff, first axis fastest.
struct FourierCoefficients {
  int dim = 1;
  int cutoff = 0;
  std::vector<std::complex<double>> values;

  FourierCoefficients(int dim, int cutoff);
  std::size_t size() const { return values.size(); }
  IntVector mode(std::size_t flat_index) const;
};

// Multiplies mode k by exp(-4 pi^2 |k|^2 tau).
void apply_heat(FourierCoefficients& c, double tau);

// Str(T e^{-tau Delta}) for the de Rham complex and an affine map, summed over
// the Fourier modes fixed by A^T.
std::complex<double> spectral_supertrace(const TorusMap& map, const HeatTime& ht);

// ---------------------------------------------------------------------------
// Constant-coefficient model operators.

struct SymbolTerm {
  std::vector<int> alpha;
  Matrix coeff;
};

struct EllipticSymbol {
  int dim = 1;
  int half_order = 1;
  std::vector<SymbolTerm> terms;

  int rank() const;
  // q(xi) = sum_alpha a_alpha xi^alpha.
  Matrix evaluate(std::span<const double> xi) const;
  // Smallest eigenvalue of q over the unit-sphere sample; throws
  // EllipticityFailure naming the worst direction if it is not positive.
  double ellipticity_constant() const;
  void validate() const;

  // Sum over axes of a * xi_j^(2s), the diagonal symbol with coefficient a.
  static EllipticSymbol diagonal(int dim, int half_order, const Matrix& a);
};

// Deterministic sample of 1024 unit directions (the two points of S^0 for n = 1).
std::vector<Vector> unit_sphere_sample(int n);

class ModelKernel {
 public:
  explicit ModelKernel(EllipticSymbol symbol);
  ModelKernel(EllipticSymbol symbol, double box_half_width, int samples_per_axis);

  const EllipticSymbol& symbol() const { return symbol_; }
  double box_half_width() const { return box_; }
  int samples_per_axis() const { return samples_; }

  Matrix evaluate(std::span<const double> x) const;

  // Kernel on the tensor grid axis_points^dim (first axis fastest).
  std::vector<Matrix> evaluate_grid(std::span<const double> axis_points) const;

 private:
  void tabulate();

  EllipticSymbol symbol_;
  double box_ = 0.0;
  int samples_ = 0;
  std::vector<double> nodes_;
  std::vector<Matrix> table_;
};

Matrix model_kernel(const EllipticSymbol& sym, std::span<const double> x);

struct TotalIntegral {
  Matrix value;
  double tail_estimate = 0.0;
  double box_half_width = 0.0;
};

inline constexpr double kModelTailTarget = 1e-10;

TotalIntegral model_kernel_total_integral(const EllipticSymbol& sym);

using SymbolField = std::function<EllipticSymbol(const Vector& position)>;

// Kernel of exp(-sum a_alpha(t X + m) d^alpha) with coefficients frozen at
// t * base + m, evaluated at `displacement`. Lower-order terms are zero.
Matrix rescaled_symbol_kernel(const SymbolField& field, const Vector& m, double t,
                              const Vector& base, const Vector& displacement);

}  // namespace lefgpd
