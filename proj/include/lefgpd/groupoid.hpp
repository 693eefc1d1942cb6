#pragma once

// The relative tangent groupoid of a finite fixed-point set M in a torus V.
//
// For t > 0 its elements are triples (v1, v2, t) in V x V x (0, 1]; over a
// fixed point m the t = 0 fiber is T_mV + T_mV. Kernels are stored already
// reduced, i.e. as functions of the groupoid element, so equivariance holds by
// construction. Trace functionals integrate the diagonal, and their rescaled
// t -> 0 limits integrate boundary values over each tangent space.

#include <functional>
#include <limits>
#include <span>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lefgpd/geometry.hpp"
#include "lefgpd/superalgebra.hpp"

namespace lefgpd {

// Local chart of the deformation space: the first `tangential` coordinates
// are kept, the remaining `normal` ones are measured from `center` and divided
// by t.
struct DeformationChart {
  int tangential = 0;
  int normal = 1;
  Vector center;
  double domain_radius = std::numeric_limits<double>::infinity();

  DeformationChart(int tangential, int normal);
  DeformationChart(int tangential, int normal, Vector center, double domain_radius);

  Vector forward(const Vector& v, double t) const;
  Vector inverse(const Vector& coords, double t) const;
};

struct GroupoidPoint {
  Vector x;
  Vector y;
  double t = 0.0;
};

// (v1, v2, t) -> ((v1 - m) / t, (v2 - m) / t, t), defined for |v - m|_inf < 1/2.
GroupoidPoint groupoid_chart_forward(const Vector& m, const Vector& v1, const Vector& v2, double t);

// Functions on the deformation space given by their t > 0 values and their
// boundary values at the normal fiber over m.
struct DeformationFunction {
  std::function<double(const Vector& v, double t)> bulk;
  std::function<double(const Vector& normal, const Vector& m)> boundary;
};

// Multivariate polynomial with exact shifting and homogeneous parts.
class Polynomial {
 public:
  explicit Polynomial(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  void add_term(std::vector<int> exponents, double coeff);
  double operator()(const Vector& x) const;

  // q(X) = p(m + X).
  Polynomial shifted(const Vector& m) const;
  // Degree-d homogeneous part evaluated at X.
  double homogeneous_part(int degree, const Vector& x) const;
  int lowest_degree() const;

 private:
  int dim_;
  std::map<std::vector<int>, double> terms_;
};

// f(v) on V x (0, 1] and f(m) on the normal fiber.
DeformationFunction lift_smooth(std::function<double(const Vector&)> f);

// f(v) / t^r on V x (0, 1] and X^r(f) / r! on the normal fiber over m. The
// polynomial must vanish to order r at m.
DeformationFunction rescale_vanishing(const Polynomial& f, int order, const Vector& m);

using BulkKernel = std::function<GradedEndomorphism(const Vector& v1, const Vector& v2, double t)>;
using BoundaryKernel =
    std::function<GradedEndomorphism(const Vector& x, const Vector& y, const FixedPointRecord& m)>;

struct DeformationKernel {
  int dim = 1;
  BulkKernel bulk;
  BoundaryKernel boundary;
  bool translation_invariant_at_0 = false;
  // The bulk returns t^-r times the smooth section (r = n for geometric heat
  // kernels, r = 0 for sections stored in chart normalization).
  int jacobian_exponent = 0;
};

// Largest |boundary(X, Y) - boundary(X - Y, 0)| over a deterministic sample.
double translation_invariance_defect(const DeformationKernel& k,
                                     const std::vector<FixedPointRecord>& fixed_points,
                                     int samples = 64);

// A family of kernels indexed by the source point; on the pair groupoid the
// reduced kernel is k_P(v1, v2) = P_{v2}(v1, v2).
using KernelFamily = std::function<BulkKernel(const Vector& source)>;
BulkKernel reduced_kernel(const KernelFamily& family);

enum class TraceKind { Trace, Supertrace };

double trace_t(const DeformationKernel& k, double t, const QuadratureGrid& grid);
double supertrace_t(const DeformationKernel& k, double t, const QuadratureGrid& grid);

inline constexpr double kBoundaryIncrementTolerance = 1e-10;

// Integral over R^n by Gauss-Legendre on growing cubes [-L, L]^n, L doubling,
// stopping when a shell adds less than the tolerance. The integrand returns a
// fixed-length vector of values integrated componentwise.
std::vector<double> integrate_expanding_cubes(
    int n, std::size_t components, const std::function<void(const Vector&, std::span<double>)>& f);

double trace_0(const DeformationKernel& k, const std::vector<FixedPointRecord>& fixed_points);
double supertrace_0(const DeformationKernel& k, const std::vector<FixedPointRecord>& fixed_points);

// bulk (v1, v2, t) -> zeta(v1) k(phi(v1), v2, t),
// boundary (X, Y, m) -> zeta_m k(dphi_m X, Y, m).
DeformationKernel twist_by_map(const DeformationKernel& k, const TorusMap& map, const Zeta& zeta);

inline constexpr double kTwistCrossCheckTolerance = 1e-8;

struct TwistTrace {
  // Quadrature of str(zeta_m k(dphi_m X, X)) over each tangent space.
  double direct = 0.0;
  // sum_m |det(dphi_m - 1)|^-1 str(zeta_m * integral of k(X, 0)).
  double determinant_formula = 0.0;
};

// Throws CrossCheckFailure when the two evaluations differ by more than the
// tolerance.
TwistTrace trace_0_of_twist(const DeformationKernel& k, const TorusMap& map, const Zeta& zeta,
                            const std::vector<FixedPointRecord>& fixed_points);

struct Extrapolation {
  double limit = 0.0;
  double slope = 0.0;
};

// One Richardson step on the last two rungs assuming f(t) = f0 + c t + o(t).
Extrapolation richardson_extrapolate(std::span<const double> t, std::span<const double> f);

struct TraceLadder {
  std::vector<double> t_values;
  std::vector<double> values;
  std::vector<double> residuals;
  // log(e_i / e_{i+1}) / log(t_i / t_{i+1}) with e_i = |f_i - limit|.
  std::vector<double> observed_rates;
  double extrapolated = 0.0;
  std::string method = "richardson-1";
};

// t_max * ratio^j for j = 0..rungs-1.
std::vector<double> geometric_ladder(double t_max, double ratio, int rungs);

// Throws UnboundedLadder when |f| grows monotonically by more than 10x.
void check_bounded(std::span<const double> values);

// f(t) = t^-(n - r) Str_t(k) on each rung, grid refined so that h <= t / 3.
TraceLadder rescaled_limit(const DeformationKernel& k, std::span<const double> t_values,
                           int base_grid, TraceKind kind = TraceKind::Supertrace);

}  // namespace lefgpd
