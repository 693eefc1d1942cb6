// Acceptance checks AC1..AC8. One line per criterion; exit status is the
// number of failed criteria.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "lefgpd/groupoid.hpp"
#include "lefgpd/heatkernel.hpp"
#include "lefgpd/lefschetz.hpp"
#include "lefgpd/superalgebra.hpp"

using namespace lefgpd;
namespace fs = std::filesystem;

namespace {

constexpr double kExact = 1e-10;
constexpr double kGeometric = 1e-4;
constexpr double kNonlinearGeometric = 1e-3;
constexpr double kNonlinearFixedPoint = 1e-8;
constexpr double kNoFixedPointDecay = 1e-6;
constexpr double kModelMass = 1e-8;
constexpr double kQuarticOracle = 1e-8;
constexpr double kRescaledLimit = 1e-4;
constexpr double kRateBand = 0.1;
constexpr double kPoisson = 1e-10;
constexpr double kNormalization = 1e-8;
constexpr double kSemigroupRelative = 1e-14;
constexpr double kDeterminantIdentity = 1e-10;
constexpr double kSpectralFlat = 1e-12;
constexpr double kTwistPaths = 1e-8;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

IntMatrix scalar_matrix(std::int64_t v) {
  IntMatrix m(1, 1);
  m << v;
  return m;
}

VerificationConfig config(const TorusMap& map, int grid, double t_max, double ratio, int rungs) {
  VerificationConfig c;
  c.geom = TorusGeometry(map.dim(), grid);
  c.map = map;
  c.ladder = {t_max, ratio, rungs};
  return c;
}

std::string run_capture(const std::string& cmd) {
  std::string out;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return out;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  ::pclose(pipe);
  return out;
}

// ---------------------------------------------------------------------------

Outcome ac1() {
  Outcome o;
  IntMatrix a(2, 2);
  a << 2, 1, 1, 1;
  const auto start = Clock::now();
  // t from 0.2 to 0.025: tau from 0.04 to 0.000625.
  const auto r = verify(config(TorusMap::affine(a), 32, 0.2, 0.5, 4));
  const double elapsed = seconds_since(start);
  o.require(!r.error, "no error");
  if (r.error) return o;
  o.require(std::abs(r.fixed_point_side + 1.0) < kExact, "fixed_point_side");
  o.require(r.spectral && std::abs(*r.spectral + 1.0) < kExact, "spectral");
  o.require(r.cohomological && std::abs(*r.cohomological + 1.0) < kExact, "cohomological");
  o.require(std::abs(r.geometric_extrapolated + 1.0) <= kGeometric, "geometric");
  o.require(std::abs(r.rows.front().tau - 0.04) < 1e-15 && std::abs(r.rows.back().tau - 0.000625) < 1e-15, "tau range");
  o.require(elapsed < 30.0, "runtime");
  o.note(fmt::format("fps={:.12g} spectral={:.12g} coh={:.12g} geo={:.10f} in {:.2f}s", r.fixed_point_side,
                     r.spectral.value_or(NAN), r.cohomological.value_or(NAN), r.geometric_extrapolated, elapsed));
  return o;
}

Outcome ac2() {
  Outcome o;
  const std::vector<std::pair<std::int64_t, double>> cases = {{2, -1.0}, {3, -2.0}, {-1, 2.0}};
  for (const auto& [a, expected] : cases) {
    const auto start = Clock::now();
    const auto r = verify(config(TorusMap::affine(scalar_matrix(a)), 32, 0.2, 0.5, 4));
    const double elapsed = seconds_since(start);
    const std::string tag = fmt::format("A=[{}]", a);
    o.require(!r.error, tag + " no error");
    if (r.error) continue;
    o.require(std::abs(r.fixed_point_side - expected) < kExact, tag + " fixed_point_side");
    o.require(r.spectral && std::abs(*r.spectral - expected) < kExact, tag + " spectral");
    o.require(r.cohomological && std::abs(*r.cohomological - expected) < kExact, tag + " cohomological");
    o.require(std::abs(r.geometric_extrapolated - expected) <= kGeometric, tag + " geometric");
    o.require(r.verdict.pass, tag + " verdict");
    o.require(elapsed < 5.0, tag + " runtime");
    o.note(fmt::format("{} -> {:+.10f} ({:.2f}s)", tag, r.geometric_extrapolated, elapsed));
  }
  return o;
}

Outcome ac3() {
  Outcome o;
  const auto start = Clock::now();
  const auto r = verify(config(TorusMap::circle(-1, 0.0, {{1, 0.05}}), 64, 0.2, 0.5, 6));
  const double elapsed = seconds_since(start);
  o.require(!r.error, "no error");
  if (r.error) return o;
  o.require(std::abs(r.geometric_extrapolated - 2.0) <= kNonlinearGeometric, "geometric");
  o.require(r.cohomological && *r.cohomological == 2.0, "cohomological exact");
  o.require(std::abs(r.fixed_point_side - 2.0) <= kNonlinearFixedPoint, "fixed_point_side");
  o.require(elapsed < 10.0, "runtime");
  o.note(fmt::format("geo={:.10f} coh={} fps={:.12g} in {:.2f}s", r.geometric_extrapolated,
                     r.cohomological.value_or(NAN), r.fixed_point_side, elapsed));
  return o;
}

Outcome ac4() {
  Outcome o;
  const auto map = TorusMap::circle(1, 0.25, {{1, 0.1}});
  const TorusGeometry geom(1, 64);
  const double fps = fixed_point_side(map, Zeta{}, geom);
  o.require(find_fixed_points(map, geom).empty() && fps == 0.0, "empty fixed-point sum");
  const double tau = 0.0025;
  const double str = geometric_supertrace(map, Zeta{}, geom, HeatTime{std::sqrt(tau), 1, tau}, resolved_grid(64, tau));
  o.require(std::abs(str) < kNoFixedPointDecay, "|Str_t| at tau = 0.0025");
  o.note(fmt::format("fps={} |Str_t|={:.3e}", fps, std::abs(str)));
  return o;
}

double quartic_oracle(double x) {
  auto f = [x](double xi) { return std::exp(-std::pow(xi, 4)) * std::cos(x * xi); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 8.0, 20, 1e-15) / M_PI;
}

Outcome ac5() {
  Outcome o;
  const Matrix one = Matrix::Constant(1, 1, 1.0);
  const double t2 = model_kernel_total_integral(EllipticSymbol::diagonal(1, 1, one)).value(0, 0);
  const double t4 = model_kernel_total_integral(EllipticSymbol::diagonal(1, 2, one)).value(0, 0);
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 2.0;
  const Matrix tm = model_kernel_total_integral(EllipticSymbol::diagonal(1, 1, a)).value;
  const double tm_err = (tm - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff();
  o.require(std::abs(t2 - 1.0) <= kModelMass, "order 2 integral");
  o.require(std::abs(t4 - 1.0) <= kModelMass, "order 4 integral");
  o.require(tm_err <= kModelMass, "diag(1,2) integral");
  const ModelKernel quartic(EllipticSymbol::diagonal(1, 2, one));
  double worst = 0.0;
  for (double x : {0.0, 1.0, 2.0}) {
    worst = std::max(worst, std::abs(quartic.evaluate(std::span<const double>(&x, 1))(0, 0) - quartic_oracle(x)));
  }
  o.require(worst <= kQuarticOracle, "quartic kernel vs adaptive quadrature");
  o.note(fmt::format("|I2-1|={:.2e} |I4-1|={:.2e} |M-I|={:.2e} oracle gap={:.2e}", std::abs(t2 - 1.0),
                     std::abs(t4 - 1.0), tm_err, worst));
  return o;
}

DeformationKernel gaussian_kernel(bool perturbed) {
  DeformationKernel k;
  k.dim = 1;
  k.bulk = [perturbed](const Vector& v1, const Vector&, double t) {
    const double s = centered(v1(0));
    const double g = std::exp(-2.0 * s * s / (t * t));
    return GradedEndomorphism::scalar(perturbed ? g * (1.0 + s * s / t) : g);
  };
  return k;
}

Outcome ac6() {
  Outcome o;
  const double target = std::sqrt(M_PI / 2.0);
  const auto t = geometric_ladder(0.2, 0.5, 6);
  const auto plain = rescaled_limit(gaussian_kernel(false), t, 64, TraceKind::Trace);
  o.require(std::abs(plain.extrapolated - target) <= kRescaledLimit, "Gaussian ladder limit");
  // The plain Gaussian is already flat in t; its O(t) rate is observed on a
  // perturbed kernel with f(t) = sqrt(pi/2)(1 + t/4).
  const auto perturbed = rescaled_limit(gaussian_kernel(true), t, 64, TraceKind::Trace);
  bool rates_ok = std::abs(perturbed.extrapolated - target) <= kRescaledLimit;
  for (double r : perturbed.observed_rates) rates_ok = rates_ok && std::abs(r - 1.0) <= kRateBand;
  o.require(rates_ok, "O(t) residual decay");
  DeformationKernel constant;
  constant.dim = 1;
  constant.bulk = [](const Vector&, const Vector&, double) { return GradedEndomorphism::scalar(1.0); };
  bool flagged = false;
  try {
    rescaled_limit(constant, t, 64, TraceKind::Trace);
  } catch (const Error& e) {
    flagged = e.kind() == ErrorKind::UnboundedLadder;
  }
  o.require(flagged, "k = 1 flags UnboundedLadder");
  o.note(fmt::format("limit={:.10f} (target {:.10f}) perturbed rates {:.4f}..{:.4f}", plain.extrapolated, target,
                     perturbed.observed_rates.front(), perturbed.observed_rates.back()));
  return o;
}

Outcome ac7() {
  Outcome o;
  // Poisson summation.
  double poisson = 0.0;
  for (double tau : {0.000625, 0.0025, 0.01, 0.04, 0.25}) {
    const auto k = make_theta_kernel(TorusGeometry(1, 16), tau);
    for (double d : {0.0, 0.13, 0.25, 0.5, 0.77}) {
      double fourier = 1.0;
      for (int j = 1; j < 400; ++j) fourier += 2.0 * std::exp(-4.0 * M_PI * M_PI * j * j * tau) * std::cos(2.0 * M_PI * j * d);
      Vector x(1), y(1);
      x << d;
      y << 0.0;
      poisson = std::max(poisson, std::abs(theta_kernel_eval(k, x, y) - fourier) / std::max(1.0, fourier));
    }
  }
  o.require(poisson <= kPoisson, "Poisson summation");

  // Normalization.
  double norm = 0.0;
  for (double tau : {0.0025, 0.04, 0.25}) {
    const auto k = make_theta_kernel(TorusGeometry(2, 16), tau);
    const QuadratureGrid g(2, 96);
    const Vector y = Vector::Constant(2, 0.2);
    double total = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) total += g.weight() * theta_kernel_eval(k, g.node(i), y);
    norm = std::max(norm, std::abs(total - 1.0));
  }
  o.require(norm <= kNormalization, "normalization");

  // Semigroup law on Fourier coefficients.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FourierCoefficients c(2, 8);
  for (auto& v : c.values) v = {u(rng), u(rng)};
  FourierCoefficients two = c;
  FourierCoefficients single = c;
  apply_heat(two, 0.002);
  apply_heat(two, 0.003);
  apply_heat(single, 0.005);
  double semigroup = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    semigroup = std::max(semigroup, std::abs(two.values[i] - single.values[i]) / std::abs(single.values[i]));
  }
  o.require(semigroup <= kSemigroupRelative, "semigroup law");

  // Exterior-power determinant identity.
  double identity = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 5;
    Matrix b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b(i, j) = 2.0 * u(rng);
    identity = std::max(identity, std::abs(supertrace(exterior_algebra_action(b.transpose())) -
                                           (Matrix::Identity(n, n) - b).determinant()));
  }
  o.require(identity <= kDeterminantIdentity, "exterior determinant identity");

  // Spectral t-independence across 8 rungs.
  IntMatrix cat(2, 2);
  cat << 2, 1, 1, 1;
  const auto map = TorusMap::affine(cat, Vector::Constant(2, 0.3));
  double spread = 0.0;
  const double first = spectral_supertrace(map, HeatTime::from_t(0.2)).real();
  for (double t : geometric_ladder(0.2, 0.5, 8)) {
    spread = std::max(spread, std::abs(spectral_supertrace(map, HeatTime::from_t(t)).real() - first));
  }
  o.require(spread <= kSpectralFlat, "spectral t-independence");

  // trace_0_of_twist dual paths.
  double twist = 0.0;
  for (const auto& m : {TorusMap::affine(cat), TorusMap::affine(scalar_matrix(3)), TorusMap::circle(-1, 0.0, {{1, 0.05}})}) {
    const TorusGeometry geom(m.dim(), 16);
    const auto tr = trace_0_of_twist(heat_deformation_kernel(geom), m, Zeta{}, find_fixed_points(m, geom));
    twist = std::max(twist, std::abs(tr.direct - tr.determinant_formula));
  }
  o.require(twist <= kTwistPaths, "trace_0_of_twist cross-check");

  o.note(fmt::format("poisson={:.1e} norm={:.1e} semigroup={:.1e} det-id={:.1e} spectral={:.1e} twist={:.1e}",
                     poisson, norm, semigroup, identity, spread, twist));
  return o;
}

Outcome ac8() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("lefgpd_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path cat = dir / "cat.json";
  std::ofstream(cat) << R"({"dimension": 2, "map": {"type": "affine", "matrix": [[2, 1], [1, 1]]}, "grid_size": 32})";
  const fs::path circle = dir / "circle.json";
  std::ofstream(circle) << R"({"dimension": 1, "map": {"type": "circle_fourier", "degree": -1, "terms": [{"frequency": 1, "amplitude": 0.05}]}})";
  for (const fs::path& cfg : {cat, circle}) {
    const std::string args = std::string(" ") + LEFGPD_BINARY + " sweep --config " + cfg.string() +
                             " --t-max 0.2 --ratio 0.5 --rungs 6";
    const std::string baseline = run_capture("LEFGPD_THREADS=1" + args);
    o.require(baseline.rfind("t,tau,", 0) == 0, cfg.filename().string() + " produced a table");
    for (const char* threads : {"1", "2", "4", "8"}) {
      const std::string again = run_capture(std::string("LEFGPD_THREADS=") + threads + args);
      o.require(again == baseline, cfg.filename().string() + " with LEFGPD_THREADS=" + threads);
    }
  }
  fs::remove_all(dir);
  o.note("sweep output compared across LEFGPD_THREADS=1,2,4,8");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 cat map three-way agreement", ac1},
      {"AC2 1-d affine suite", ac2},
      {"AC3 nonlinear circle map", ac3},
      {"AC4 map without fixed points", ac4},
      {"AC5 model kernel mass and quartic oracle", ac5},
      {"AC6 rescaled limit ladder", ac6},
      {"AC7 property suites", ac7},
      {"AC8 sweep determinism across threads", ac8},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
