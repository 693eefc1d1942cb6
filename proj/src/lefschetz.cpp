#include "lefgpd/lefschetz.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>

#include "lefgpd/parallel.hpp"

namespace lefgpd {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSpectralFlatness = 1e-12;
constexpr double kIntegerAgreement = 1e-8;
}  // namespace

void VerificationConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::SchemaViolation, what); };
  if (geom.dim < 1) fail("dimension must be >= 1");
  if (geom.grid_size < 2) fail("grid_size must be >= 2");
  if (map.dim() != geom.dim) fail("map dimension does not match the torus dimension");
  if (s != 1) fail("s must be 1: the de Rham Laplacian has order 2");
  if (ladder.rungs < 4) fail("t_ladder.rungs must be >= 4");
  if (!(ladder.ratio > 0.0 && ladder.ratio < 1.0)) fail("t_ladder.ratio must lie in (0, 1)");
  if (!(ladder.t_max > 0.0 && ladder.t_max <= 1.0)) fail("t_ladder.t_max must lie in (0, 1]");
  if (std::pow(ladder.t_max, 2 * s) > kMaxHeatTime) fail("t_max^(2s) must be <= 0.25");
  if (!(tolerances.spectral > 0.0) || !(tolerances.geometric > 0.0)) fail("tolerances must be positive");
}

std::vector<FixedPointContribution> fixed_point_contributions(const TorusMap& map, const Zeta& zeta,
                                                              const TorusGeometry& geom) {
  std::vector<FixedPointContribution> out;
  for (auto& rec : find_fixed_points(map, geom)) {
    FixedPointContribution c;
    c.local_supertrace = supertrace(zeta(map, rec.location));
    c.contribution = rec.weight * c.local_supertrace;
    c.record = std::move(rec);
    out.push_back(std::move(c));
  }
  return out;
}

double fixed_point_side(const TorusMap& map, const Zeta& zeta, const TorusGeometry& geom) {
  double total = 0.0;
  for (const auto& c : fixed_point_contributions(map, zeta, geom)) total += c.contribution;
  return total;
}

int circle_degree(const CircleMap& map) {
  return static_cast<int>(std::lround(map.lift(1.0) - map.lift(0.0)));
}

double cohomological_side(const TorusMap& map, const TorusGeometry& geom) {
  if (map.dim() != geom.dim) throw Error(ErrorKind::InvalidArgument, "map dimension does not match the torus");
  if (!map.is_affine()) return 1.0 - circle_degree(map.as_circle());
  // Harmonic p-forms are the constant ones; the pullback acts on them by
  // Lambda^p(A^T) and the shift acts trivially.
  return supertrace(exterior_algebra_action(map.as_affine().matrix.cast<double>().transpose()));
}

int resolved_grid(int base, double tau) {
  return std::max(base, static_cast<int>(std::ceil(3.0 / std::sqrt(tau))));
}

namespace {

// Fills w * str(zeta(v)) * K_tau(phi(v), v) for a run of grid nodes.
class GeometricIntegrand {
 public:
  GeometricIntegrand(const TorusMap& map, const Zeta& zeta, const HeatTime& ht, const QuadratureGrid& grid)
      : map_(map), zeta_(zeta), grid_(grid), tau_(ht.tau), n_(grid.dim()) {
    if (map.dim() != n_) throw Error(ErrorKind::InvalidArgument, "map dimension does not match the grid");
    if (!(tau_ > 0.0 && tau_ <= kMaxHeatTime)) {
      throw Error(ErrorKind::InvalidArgument, "geometric supertrace needs 0 < tau <= 0.25");
    }
    radius_ = required_truncation_radius(tau_, n_);
    scale_ = grid.weight() * theta_normalization(tau_, n_);
    if (map.is_affine() && zeta.is_de_rham()) {
      constant_str_ = supertrace(zeta(map, Vector::Zero(n_)));
    }
  }

  void operator()(std::size_t begin, std::span<double> out) const {
    const std::size_t len = out.size();
    std::vector<double> disp(len * n_), factors(len * n_), str(len);
    Vector x(n_);
    for (std::size_t i = 0; i < len; ++i) {
      grid_.node(begin + i, x.data());
      const Vector y = map_.lift(x);
      for (int a = 0; a < n_; ++a) disp[a * len + i] = centered(y(a) - x(a));
      str[i] = constant_str_ ? *constant_str_ : supertrace(zeta_(map_, x));
    }
    for (int a = 0; a < n_; ++a) {
      theta_axis_factors({disp.data() + a * len, len}, tau_, radius_, {factors.data() + a * len, len});
    }
    for (std::size_t i = 0; i < len; ++i) {
      double v = scale_ * str[i];
      for (int a = 0; a < n_; ++a) v *= factors[a * len + i];
      out[i] = v;
    }
  }

 private:
  const TorusMap& map_;
  const Zeta& zeta_;
  const QuadratureGrid& grid_;
  double tau_;
  int n_;
  double radius_ = 0.0;
  double scale_ = 0.0;
  std::optional<double> constant_str_;
};

}  // namespace

double geometric_supertrace(const TorusMap& map, const Zeta& zeta, const TorusGeometry& geom,
                            const HeatTime& ht, int grid_points) {
  const QuadratureGrid grid(geom.dim, grid_points);
  const GeometricIntegrand integrand(map, zeta, ht, grid);
  return deterministic_sum(grid.size(), integrand);
}

double localization_fraction(const TorusMap& map, const Zeta& zeta, const TorusGeometry& geom,
                             const HeatTime& ht, int grid_points, double radius_factor) {
  const QuadratureGrid grid(geom.dim, grid_points);
  const GeometricIntegrand integrand(map, zeta, ht, grid);
  const auto fps = find_fixed_points(map, geom);
  const double radius = radius_factor * std::sqrt(ht.tau);
  auto near = [&](std::size_t index) {
    const Vector x = grid.node(index);
    for (const auto& fp : fps) {
      if (torus_distance(x, fp.location) <= radius) return true;
    }
    return false;
  };
  const double total = deterministic_sum(grid.size(), [&](std::size_t begin, std::span<double> out) {
    integrand(begin, out);
    for (double& v : out) v = std::abs(v);
  });
  const double local = deterministic_sum(grid.size(), [&](std::size_t begin, std::span<double> out) {
    integrand(begin, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = near(begin + i) ? std::abs(out[i]) : 0.0;
  });
  return total > 0.0 ? local / total : 1.0;
}

DeformationKernel heat_deformation_kernel(const TorusGeometry& geom) {
  DeformationKernel k;
  k.dim = geom.dim;
  k.jacobian_exponent = geom.dim;
  k.translation_invariant_at_0 = true;
  k.bulk = [geom](const Vector& v1, const Vector& v2, double t) {
    const ThetaKernel theta = make_theta_kernel(geom, t * t);
    return GradedEndomorphism::scalar(theta_kernel_eval(theta, v1, v2));
  };
  k.boundary = [](const Vector& x, const Vector& y, const FixedPointRecord&) {
    const Vector d = x - y;
    return GradedEndomorphism::scalar(gaussian_heat_kernel({d.data(), static_cast<std::size_t>(d.size())}, 1.0, 1.0));
  };
  return k;
}

ConvergenceReport verify(const VerificationConfig& config) {
  ConvergenceReport report;
  try {
    config.validate();
    const auto& map = config.map;
    const auto& geom = config.geom;

    report.fixed_points = fixed_point_contributions(map, config.zeta, geom);
    for (const auto& c : report.fixed_points) report.fixed_point_side += c.contribution;
    if (config.zeta.is_de_rham()) report.cohomological = cohomological_side(map, geom);

    const bool spectral_available = map.is_affine() && config.zeta.is_de_rham();
    const auto ladder = geometric_ladder(config.ladder.t_max, config.ladder.ratio, config.ladder.rungs);
    std::vector<double> geometric;
    for (double t : ladder) {
      const HeatTime ht = HeatTime::from_t(t, config.s);
      RungRow row;
      row.t = t;
      row.tau = ht.tau;
      row.grid_points = resolved_grid(geom.grid_size, ht.tau);
      row.str_geometric = geometric_supertrace(map, config.zeta, geom, ht, row.grid_points);
      if (spectral_available) row.str_spectral = spectral_supertrace(map, ht).real();
      row.running_error = std::abs(row.str_geometric - report.fixed_point_side);
      geometric.push_back(row.str_geometric);
      report.rows.push_back(row);
    }
    check_bounded(geometric);
    const Extrapolation ex = richardson_extrapolate(ladder, geometric);
    report.geometric_extrapolated = ex.limit;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
      report.extrapolation_residuals.push_back(geometric[i] - (ex.limit + ex.slope * ladder[i]));
    }

    Verdict& v = report.verdict;
    v.geometric = std::abs(report.geometric_extrapolated - report.fixed_point_side) <= config.tolerances.geometric;
    if (spectral_available) {
      report.spectral = report.rows.front().str_spectral;
      double spread = 0.0;
      for (const auto& row : report.rows) spread = std::max(spread, std::abs(*row.str_spectral - *report.spectral));
      v.spectral = std::abs(*report.spectral - report.fixed_point_side) <= config.tolerances.spectral;
      v.spectral_t_independent = spread < kSpectralFlatness;
    }
    if (report.cohomological) {
      v.cohomological = std::abs(*report.cohomological - report.fixed_point_side) <=
                        std::max(config.tolerances.spectral, kIntegerAgreement);
    }
    v.pass = v.geometric && v.spectral.value_or(true) && v.spectral_t_independent.value_or(true);

    if (!report.fixed_points.empty()) {
      std::vector<FixedPointRecord> records;
      for (const auto& c : report.fixed_points) records.push_back(c.record);
      report.boundary = trace_0_of_twist(heat_deformation_kernel(geom), map, config.zeta, records);
    } else {
      report.boundary = TwistTrace{0.0, 0.0};
    }
  } catch (const Error& e) {
    report.error = ReportError{e.kind(), e.what()};
    report.verdict.pass = false;
  }
  return report;
}

// ---------------------------------------------------------------------------

namespace {

// Position of j in the sorted union {j} + I, or -1 if j is already in I.
int wedge_position(int j, const std::vector<int>& multi) {
  int pos = 0;
  for (int i : multi) {
    if (i == j) return -1;
    if (i < j) ++pos;
  }
  return pos;
}

int index_of(const std::vector<std::vector<int>>& basis, const std::vector<int>& multi) {
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis[i] == multi) return static_cast<int>(i);
  }
  return -1;
}

// Exterior derivative without the 2 pi i factor: the coefficient vector of
// sum_j k_j dx^j ^ omega for omega of degree p.
Vector wedge_with_mode(const DeRhamBundleData& bundle, int p, const Vector& k, const Vector& coeffs) {
  const auto& src = bundle.basis[p];
  const auto& dst = bundle.basis[p + 1];
  Vector out = Vector::Zero(static_cast<Eigen::Index>(dst.size()));
  for (std::size_t a = 0; a < src.size(); ++a) {
    if (coeffs(a) == 0.0) continue;
    for (int j = 0; j < bundle.n; ++j) {
      const int pos = wedge_position(j, src[a]);
      if (pos < 0) continue;
      std::vector<int> merged = src[a];
      merged.insert(merged.begin() + pos, j);
      const double sign = pos % 2 == 0 ? 1.0 : -1.0;
      out(index_of(dst, merged)) += sign * k(j) * coeffs(a);
    }
  }
  return out;
}

// Affine maps: T(e^{2 pi i k.x} w) = e^{2 pi i k.b} e^{2 pi i (A^T k).x} Lambda(A^T) w
// and d multiplies by 2 pi i k. Both sides share the phase and the 2 pi i,
// leaving integer arithmetic that is exact in double precision.
double affine_commutation(const AffineMap& map, int cutoff) {
  const int n = static_cast<int>(map.matrix.rows());
  const DeRhamBundleData bundle(n);
  const Matrix at = map.matrix.cast<double>().transpose();
  std::vector<Matrix> lambda;
  for (int p = 0; p <= n; ++p) lambda.push_back(exterior_power_action(at, p));

  const FourierCoefficients modes(n, cutoff);
  double worst = 0.0;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const Vector k = modes.mode(m).cast<double>();
    const Vector image = at * k;
    for (int p = 0; p < n; ++p) {
      for (std::size_t a = 0; a < bundle.basis[p].size(); ++a) {
        const Vector e = Vector::Unit(static_cast<Eigen::Index>(bundle.basis[p].size()), static_cast<Eigen::Index>(a));
        const Vector d_after_t = wedge_with_mode(bundle, p, image, lambda[p] * e);
        const Vector t_after_d = lambda[p + 1] * wedge_with_mode(bundle, p, k, e);
        worst = std::max(worst, (d_after_t - t_after_d).cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};
struct FftwBufferDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

// Circle maps: 0-forms f = e^{2 pi i k x}. d(T f) is obtained by spectral
// differentiation of the sampled pullback f(phi(x)); T(d f) = f'(phi(x)) phi'(x) dx
// is evaluated in closed form. On 1-forms both sides vanish.
double circle_commutation(const CircleMap& map, int cutoff) {
  double bandwidth = std::abs(map.degree) * cutoff;
  for (const auto& term : map.terms) {
    bandwidth += cutoff * 2.0 * kPi * std::abs(term.amplitude) * std::abs(term.frequency);
  }
  int samples = 4096;
  while (samples < 8 * (bandwidth + 64)) samples *= 2;

  std::unique_ptr<fftw_complex, FftwBufferDeleter> buf(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * samples)));
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> forward(
      fftw_plan_dft_1d(samples, buf.get(), buf.get(), FFTW_FORWARD, FFTW_ESTIMATE));
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> backward(
      fftw_plan_dft_1d(samples, buf.get(), buf.get(), FFTW_BACKWARD, FFTW_ESTIMATE));

  double worst = 0.0;
  for (int k = -cutoff; k <= cutoff; ++k) {
    // exp(2 pi i k lift) has its spectrum within a Bessel band around degree * k;
    // anything outside is roundoff and would be amplified by differentiation.
    double width = 0.0;
    for (const auto& term : map.terms) width += 2.0 * kPi * std::abs(k * term.amplitude) * std::abs(term.frequency);
    const double band = 2.0 * width + 64.0;
    for (int i = 0; i < samples; ++i) {
      const double x = static_cast<double>(i) / samples;
      const std::complex<double> v = std::polar(1.0, 2.0 * kPi * k * map.lift(x));
      buf.get()[i][0] = v.real();
      buf.get()[i][1] = v.imag();
    }
    fftw_execute(forward.get());
    for (int j = 0; j < samples; ++j) {
      int freq = j <= samples / 2 ? j : j - samples;
      if (2 * j == samples) freq = 0;
      const std::complex<double> c =
          std::abs(freq - static_cast<double>(map.degree) * k) <= band ? std::complex<double>(buf.get()[j][0], buf.get()[j][1])
                                                                        : 0.0;
      const std::complex<double> dc = c * std::complex<double>(0.0, 2.0 * kPi * freq) / static_cast<double>(samples);
      buf.get()[j][0] = dc.real();
      buf.get()[j][1] = dc.imag();
    }
    fftw_execute(backward.get());
    for (int i = 0; i < samples; ++i) {
      const double x = static_cast<double>(i) / samples;
      const std::complex<double> d_after_t(buf.get()[i][0], buf.get()[i][1]);
      const std::complex<double> t_after_d = std::complex<double>(0.0, 2.0 * kPi * k) *
                                             std::polar(1.0, 2.0 * kPi * k * map.lift(x)) * map.lift_derivative(x);
      worst = std::max(worst, std::abs(d_after_t - t_after_d));
    }
  }
  return worst;
}

}  // namespace

double commutation_check(const TorusMap& map, const TorusGeometry& geom, int mode_cutoff) {
  if (map.dim() != geom.dim) throw Error(ErrorKind::InvalidArgument, "map dimension does not match the torus");
  if (mode_cutoff < 0) throw Error(ErrorKind::InvalidArgument, "mode cutoff must be >= 0");
  if (map.is_affine()) return affine_commutation(map.as_affine(), mode_cutoff);
  return circle_commutation(map.as_circle(), mode_cutoff);
}

}  // namespace lefgpd
