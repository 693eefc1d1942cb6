#pragma once

// Three-way check of the Lefschetz fixed point formula on flat tori: the
// heat-kernel supertrace Str(T e^{-tau Delta}) computed geometrically and
// spectrally, the fixed-point sum, and the alternating trace on cohomology.

#include <optional>
#include <string>
#include <vector>

#include "lefgpd/error.hpp"
#include "lefgpd/geometry.hpp"
#include "lefgpd/groupoid.hpp"
#include "lefgpd/heatkernel.hpp"
#include "lefgpd/superalgebra.hpp"

namespace lefgpd {

struct LadderSpec {
  double t_max = 0.2;
  double ratio = 0.5;
  int rungs = 4;
};

struct Tolerances {
  double spectral = 1e-10;
  double geometric = 1e-4;
};

struct VerificationConfig {
  TorusGeometry geom;
  TorusMap map = TorusMap::circle(1, 0.0);
  Zeta zeta;
  int s = 1;
  LadderSpec ladder;
  Tolerances tolerances;

  // Throws SchemaViolation on rungs < 4, tau_max > 1/4, s != 1 (the de Rham
  // Laplacian has order 2) or mismatched dimensions.
  void validate() const;
};

struct FixedPointContribution {
  FixedPointRecord record;
  double local_supertrace = 0.0;
  double contribution = 0.0;
};

struct RungRow {
  double t = 0.0;
  double tau = 0.0;
  int grid_points = 0;
  double str_geometric = 0.0;
  std::optional<double> str_spectral;
  double running_error = 0.0;
};

struct Verdict {
  bool geometric = false;
  std::optional<bool> spectral;
  std::optional<bool> spectral_t_independent;
  std::optional<bool> cohomological;
  bool pass = false;
};

struct ReportError {
  ErrorKind kind;
  std::string message;
};

struct ConvergenceReport {
  std::vector<RungRow> rows;
  double geometric_extrapolated = 0.0;
  std::vector<double> extrapolation_residuals;
  std::optional<double> spectral;
  double fixed_point_side = 0.0;
  // Unset when a custom zeta is supplied.
  std::optional<double> cohomological;
  // Str_0 of the twisted boundary kernel by direct quadrature and by the
  // determinant formula.
  std::optional<TwistTrace> boundary;
  std::vector<FixedPointContribution> fixed_points;
  Verdict verdict;
  std::optional<ReportError> error;
};

std::vector<FixedPointContribution> fixed_point_contributions(const TorusMap& map, const Zeta& zeta,
                                                              const TorusGeometry& geom);

// sum over fixed points of |det(dphi_m - 1)|^-1 str(zeta_m).
double fixed_point_side(const TorusMap& map, const Zeta& zeta, const TorusGeometry& geom);

// Alternating trace of the pullback on de Rham cohomology: det(I - A) for
// affine maps, 1 - degree for circle maps.
double cohomological_side(const TorusMap& map, const TorusGeometry& geom);

// Topological degree round(lift(1) - lift(0)).
int circle_degree(const CircleMap& map);

// Grid points per axis so that the spacing is at most sqrt(tau) / 3.
int resolved_grid(int base, double tau);

inline constexpr double kMaxHeatTime = 0.25;

// Quadrature of str(zeta(v)) K_tau(phi(v), v) over the torus.
double geometric_supertrace(const TorusMap& map, const Zeta& zeta, const TorusGeometry& geom,
                            const HeatTime& ht, int grid_points);

// Share of the absolute geometric integrand within radius_factor * sqrt(tau)
// of the fixed-point set.
double localization_fraction(const TorusMap& map, const Zeta& zeta, const TorusGeometry& geom,
                             const HeatTime& ht, int grid_points, double radius_factor = 10.0);

// The torus heat kernel as a section over the groupoid: bulk is the theta
// kernel at tau = t^2 (geometric normalization, exponent n), boundary is
// the Gaussian model kernel k0(X - Y) at unit time.
DeformationKernel heat_deformation_kernel(const TorusGeometry& geom);

// Never throws on math-domain failures; they land in report.error.
ConvergenceReport verify(const VerificationConfig& config);

// Largest |(d T - T d) e| over basis forms e = e^{2 pi i k.x} dx^I with
// |k_i| <= cutoff.
double commutation_check(const TorusMap& map, const TorusGeometry& geom, int mode_cutoff);

}  // namespace lefgpd
