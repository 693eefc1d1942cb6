#include "lefgpd/heatkernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lefgpd/error.hpp"
#include "lefgpd/simd/kernels.hpp"

namespace lefgpd {

namespace {
constexpr double kPi = std::numbers::pi;
}

HeatTime HeatTime::from_t(double t, int s) {
  if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidArgument, "t must lie in (0, 1]");
  if (s < 1) throw Error(ErrorKind::InvalidArgument, "half-order s must be >= 1");
  return HeatTime{t, s, std::pow(t, 2 * s)};
}

double theta_tail_bound(double tau, double radius, int n) {
  // Excluded images on one side sit at |u| > radius; the sum of their weights
  // is at most exp(-R^2/4tau) (1 + 2 tau / R). The axis factor is at least its
  // largest term, exp(-1/(16 tau)), since |d| <= 1/2.
  const double per_axis =
      2.0 * (1.0 + 2.0 * tau / radius) * std::exp(-(radius * radius - 0.25) / (4.0 * tau));
  return std::expm1(n * std::log1p(per_axis));
}

double required_truncation_radius(double tau, int n) {
  double r = std::max(8.0 * std::sqrt(tau), 1.5);
  while (theta_tail_bound(tau, r, n) > kThetaRelativeTail) r += 0.25;
  return r;
}

ThetaKernel make_theta_kernel(const TorusGeometry& geom, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "heat time must be positive");
  return ThetaKernel{geom, tau, required_truncation_radius(tau, geom.dim)};
}

double theta_normalization(double tau, int n) { return std::pow(4.0 * kPi * tau, -0.5 * n); }

void theta_axis_factors(std::span<const double> d, double tau, double radius, std::span<double> out) {
  const int reach = static_cast<int>(std::ceil(radius + 0.5));
  simd::active_kernels().gaussian_image_sum(d.data(), d.size(), 1.0 / (4.0 * tau), radius, -reach,
                                            reach, out.data());
}

double theta_kernel_eval(const ThetaKernel& k, const Vector& x, const Vector& y) {
  if (!(k.tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "heat time must be positive");
  const int n = k.geom.dim;
  const double bound = theta_tail_bound(k.tau, k.truncation_radius, n);
  if (bound > kThetaRelativeTail) {
    throw Error(ErrorKind::TruncationTooSmall,
                "radius " + std::to_string(k.truncation_radius) + " leaves relative tail " +
                    std::to_string(bound));
  }
  std::vector<double> d(static_cast<std::size_t>(n)), f(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) d[i] = centered(x(i) - y(i));
  theta_axis_factors(d, k.tau, k.truncation_radius, f);
  double value = theta_normalization(k.tau, n);
  for (double v : f) value *= v;
  return value;
}

double gaussian_heat_kernel(std::span<const double> x, double diffusion, double time) {
  double sq = 0.0;
  for (double v : x) sq += v * v;
  const double dt = diffusion * time;
  return std::pow(4.0 * kPi * dt, -0.5 * static_cast<double>(x.size())) * std::exp(-sq / (4.0 * dt));
}

FourierCoefficients::FourierCoefficients(int dim_, int cutoff_) : dim(dim_), cutoff(cutoff_) {
  std::size_t count = 1;
  for (int i = 0; i < dim; ++i) count *= static_cast<std::size_t>(2 * cutoff + 1);
  values.assign(count, {0.0, 0.0});
}

IntVector FourierCoefficients::mode(std::size_t flat_index) const {
  IntVector k(dim);
  const auto width = static_cast<std::size_t>(2 * cutoff + 1);
  for (int i = 0; i < dim; ++i) {
    k(i) = static_cast<std::int64_t>(flat_index % width) - cutoff;
    flat_index /= width;
  }
  return k;
}

void apply_heat(FourierCoefficients& c, double tau) {
  std::vector<double> arg(c.size()), mult(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    arg[i] = -4.0 * kPi * kPi * static_cast<double>(c.mode(i).squaredNorm()) * tau;
  }
  simd::active_kernels().exp_batch(arg.data(), arg.size(), mult.data());
  for (std::size_t i = 0; i < c.size(); ++i) c.values[i] *= mult[i];
}

std::complex<double> spectral_supertrace(const TorusMap& map, const HeatTime& ht) {
  if (!map.is_affine()) {
    throw Error(ErrorKind::InvalidArgument, "spectral supertrace needs an affine map");
  }
  const auto& a = map.as_affine();
  const auto n = a.matrix.rows();
  const IntMatrix id = IntMatrix::Identity(n, n);
  // On the mode e^{2 pi i k.x} dx^I the operator T e^{-tau Delta} moves k to
  // A^T k, so only modes with A^T k = k contribute, each with
  // e^{2 pi i k.b} * sum_p (-1)^p tr Lambda^p(A^T) * e^{-4 pi^2 |k|^2 tau}.
  const std::int64_t det_i_minus_a = integer_determinant(id - a.matrix);
  if (det_i_minus_a == 0) return {0.0, 0.0};

  // A^T - I invertible: the zero mode is the only fixed mode.
  std::vector<IntVector> fixed_modes{IntVector::Zero(n)};
  std::complex<double> total{0.0, 0.0};
  for (const auto& k : fixed_modes) {
    const double phase = 2.0 * kPi * k.cast<double>().dot(a.shift);
    const double damping = std::exp(-4.0 * kPi * kPi * static_cast<double>(k.squaredNorm()) * ht.tau);
    total += std::polar(1.0, phase) * static_cast<double>(det_i_minus_a) * damping;
  }
  return total;
}

// ---------------------------------------------------------------------------

int EllipticSymbol::rank() const {
  return terms.empty() ? 0 : static_cast<int>(terms.front().coeff.rows());
}

Matrix EllipticSymbol::evaluate(std::span<const double> xi) const {
  Matrix q = Matrix::Zero(rank(), rank());
  for (const auto& term : terms) {
    double mono = 1.0;
    for (int j = 0; j < dim; ++j) mono *= std::pow(xi[j], term.alpha[j]);
    q += mono * term.coeff;
  }
  return q;
}

std::vector<Vector> unit_sphere_sample(int n) {
  std::vector<Vector> out;
  if (n == 1) {
    out.push_back(Vector::Constant(1, 1.0));
    out.push_back(Vector::Constant(1, -1.0));
    return out;
  }
  constexpr int kCount = 1024;
  if (n == 2) {
    for (int k = 0; k < kCount; ++k) {
      const double a = 2.0 * kPi * k / kCount;
      Vector v(2);
      v << std::cos(a), std::sin(a);
      out.push_back(v);
    }
    return out;
  }
  if (n == 3) {
    // Fibonacci lattice.
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < kCount; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / kCount;
      const double r = std::sqrt(1.0 - z * z);
      Vector v(3);
      v << r * std::cos(golden * k), r * std::sin(golden * k), z;
      out.push_back(v);
    }
    return out;
  }
  // Higher dimensions: coordinate axes plus a fixed quasi-random set.
  for (int i = 0; i < n; ++i) {
    out.push_back(Vector::Unit(n, i));
    out.push_back(-Vector::Unit(n, i));
  }
  for (int k = static_cast<int>(out.size()); k < kCount; ++k) {
    Vector v(n);
    for (int j = 0; j < n; ++j) v(j) = std::sin(12.9898 * (k + 1) + 78.233 * (j + 1)) ;
    out.push_back(v.normalized());
  }
  return out;
}

namespace {

double min_eigenvalue(const Matrix& m) {
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::string describe(const Vector& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(v(i));
  }
  return s + ")";
}

Matrix exp_negative_symmetric(const Matrix& q) {
  if (q.rows() == 1) return Matrix::Constant(1, 1, std::exp(-q(0, 0)));
  Eigen::SelfAdjointEigenSolver<Matrix> es(q);
  const Vector e = (-es.eigenvalues().array()).exp().matrix();
  return es.eigenvectors() * e.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

void EllipticSymbol::validate() const {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "symbol dimension must be >= 1");
  if (half_order < 1) throw Error(ErrorKind::InvalidArgument, "half-order must be >= 1");
  if (terms.empty()) throw Error(ErrorKind::EllipticityFailure, "symbol has no terms");
  const int r = rank();
  for (const auto& term : terms) {
    if (static_cast<int>(term.alpha.size()) != dim) {
      throw Error(ErrorKind::InvalidArgument, "multi-index length does not match dimension");
    }
    int order = 0;
    for (int a : term.alpha) {
      if (a < 0) throw Error(ErrorKind::InvalidArgument, "negative multi-index entry");
      order += a;
    }
    if (order != 2 * half_order) {
      throw Error(ErrorKind::InvalidArgument, "every term must have |alpha| = 2s");
    }
    if (term.coeff.rows() != r || term.coeff.cols() != r) {
      throw Error(ErrorKind::InvalidArgument, "coefficient matrices must share one square size");
    }
    if ((term.coeff - term.coeff.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw Error(ErrorKind::EllipticityFailure, "coefficient matrix is not symmetric");
    }
    if (!(min_eigenvalue(term.coeff) > 0.0)) {
      throw Error(ErrorKind::EllipticityFailure, "coefficient matrix is not positive definite");
    }
  }
  (void)ellipticity_constant();
}

double EllipticSymbol::ellipticity_constant() const {
  double worst = std::numeric_limits<double>::infinity();
  Vector worst_dir;
  for (const auto& dir : unit_sphere_sample(dim)) {
    const double lam = min_eigenvalue(evaluate({dir.data(), static_cast<std::size_t>(dim)}));
    if (lam < worst) {
      worst = lam;
      worst_dir = dir;
    }
  }
  if (!(worst > 1e-12)) {
    throw Error(ErrorKind::EllipticityFailure,
                "q(xi) is not positive definite along direction " + describe(worst_dir) +
                    " (min eigenvalue " + std::to_string(worst) + ")");
  }
  return worst;
}

EllipticSymbol EllipticSymbol::diagonal(int dim, int half_order, const Matrix& a) {
  EllipticSymbol sym{dim, half_order, {}};
  for (int j = 0; j < dim; ++j) {
    std::vector<int> alpha(static_cast<std::size_t>(dim), 0);
    alpha[j] = 2 * half_order;
    sym.terms.push_back({alpha, a});
  }
  return sym;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kBoxSymbolFloor = 36.0;
constexpr double kBoxEdgeTolerance = 1e-14;

int default_samples(int dim) {
  if (dim == 1) return 1 << 12;
  if (dim == 2) return 1 << 9;
  throw Error(ErrorKind::InvalidArgument, "model kernels are supported in dimensions 1 and 2");
}

}  // namespace

ModelKernel::ModelKernel(EllipticSymbol symbol) : symbol_(std::move(symbol)) {
  symbol_.validate();
  const double c = symbol_.ellipticity_constant();
  // q >= c |xi|^{2s} >= floor on the box boundary; 5% margin for the sampled c.
  box_ = 1.05 * std::pow(kBoxSymbolFloor / c, 1.0 / (2.0 * symbol_.half_order));
  samples_ = default_samples(symbol_.dim);
  tabulate();
}

ModelKernel::ModelKernel(EllipticSymbol symbol, double box_half_width, int samples_per_axis)
    : symbol_(std::move(symbol)), box_(box_half_width), samples_(samples_per_axis) {
  symbol_.validate();
  if (symbol_.dim > 2) default_samples(symbol_.dim);
  if (!(box_ > 0.0) || samples_ < 2) {
    throw Error(ErrorKind::InvalidArgument, "frequency box needs positive width and >= 2 samples");
  }
  tabulate();
}

void ModelKernel::tabulate() {
  const int n = symbol_.dim;
  const double h = 2.0 * box_ / samples_;
  nodes_.resize(static_cast<std::size_t>(samples_));
  for (int j = 0; j < samples_; ++j) nodes_[j] = -box_ + (j + 0.5) * h;

  // exp(-q) on the box edge must be negligible.
  double edge = 0.0;
  for (const auto& dir : unit_sphere_sample(n)) {
    const Vector xi = dir * (box_ / dir.cwiseAbs().maxCoeff());
    const Matrix e = exp_negative_symmetric(symbol_.evaluate({xi.data(), static_cast<std::size_t>(n)}));
    edge = std::max(edge, e.cwiseAbs().maxCoeff());
  }
  if (edge > kBoxEdgeTolerance) {
    throw Error(ErrorKind::FrequencyBoxTooSmall,
                "exp(-q) reaches " + std::to_string(edge) + " on the box edge");
  }

  const std::size_t count = n == 1 ? nodes_.size() : nodes_.size() * nodes_.size();
  table_.resize(count);
  double xi[2];
  for (std::size_t i = 0; i < count; ++i) {
    xi[0] = nodes_[i % nodes_.size()];
    if (n == 2) xi[1] = nodes_[i / nodes_.size()];
    table_[i] = exp_negative_symmetric(symbol_.evaluate({xi, static_cast<std::size_t>(n)}));
  }
}

Matrix ModelKernel::evaluate(std::span<const double> x) const {
  const int n = symbol_.dim;
  const int r = symbol_.rank();
  const double h = 2.0 * box_ / samples_;
  const double scale = std::pow(h / (2.0 * kPi), n);
  Matrix acc = Matrix::Zero(r, r);
  const std::size_t m = nodes_.size();
  for (std::size_t i = 0; i < table_.size(); ++i) {
    double phase = x[0] * nodes_[i % m];
    if (n == 2) phase += x[1] * nodes_[i / m];
    acc += std::cos(phase) * table_[i];
  }
  return scale * acc;
}

std::vector<Matrix> ModelKernel::evaluate_grid(std::span<const double> axis) const {
  const int n = symbol_.dim;
  const int r = symbol_.rank();
  const double h = 2.0 * box_ / samples_;
  const double scale = std::pow(h / (2.0 * kPi), n);
  const std::size_t m = nodes_.size();
  const std::size_t p = axis.size();

  if (n == 1) {
    std::vector<Matrix> out(p, Matrix::Zero(r, r));
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t j = 0; j < m; ++j) out[a] += std::cos(axis[a] * nodes_[j]) * table_[j];
      out[a] *= scale;
    }
    return out;
  }

  // Separable pass over the second axis, then the first.
  using CMatrix = Eigen::MatrixXcd;
  std::vector<CMatrix> partial(m * p, CMatrix::Zero(r, r));
  for (std::size_t b = 0; b < p; ++b) {
    for (std::size_t j2 = 0; j2 < m; ++j2) {
      const std::complex<double> w = std::polar(1.0, axis[b] * nodes_[j2]);
      for (std::size_t j1 = 0; j1 < m; ++j1) partial[b * m + j1] += w * table_[j2 * m + j1];
    }
  }
  std::vector<Matrix> out(p * p, Matrix::Zero(r, r));
  for (std::size_t b = 0; b < p; ++b) {
    for (std::size_t a = 0; a < p; ++a) {
      CMatrix acc = CMatrix::Zero(r, r);
      for (std::size_t j1 = 0; j1 < m; ++j1) acc += std::polar(1.0, axis[a] * nodes_[j1]) * partial[b * m + j1];
      out[b * p + a] = scale * acc.real();
    }
  }
  return out;
}

Matrix model_kernel(const EllipticSymbol& sym, std::span<const double> x) {
  return ModelKernel(sym).evaluate(x);
}

TotalIntegral model_kernel_total_integral(const EllipticSymbol& sym) {
  const ModelKernel kernel(sym);
  const int n = sym.dim;
  // Trapezoid in X. Its aliasing error is exp(-q) at 2 pi / hx = 2 L, far
  // outside the box; the images of the discretized kernel repeat at
  // pi * samples / L, which caps the usable X box.
  const double hx = kPi / kernel.box_half_width();
  const double image_period = kPi * kernel.samples_per_axis() / kernel.box_half_width();
  const double max_width = std::min(256.0, 0.4 * image_period);

  Matrix previous;
  double tail = std::numeric_limits<double>::infinity();
  for (double width = 4.0; width <= max_width; width *= 2.0) {
    const int half = static_cast<int>(std::ceil(width / hx));
    std::vector<double> axis;
    for (int j = -half; j <= half; ++j) axis.push_back(j * hx);
    const auto values = kernel.evaluate_grid(axis);
    Matrix sum = Matrix::Zero(sym.rank(), sym.rank());
    for (const auto& v : values) sum += v;
    sum *= std::pow(hx, n);
    if (previous.size() != 0) {
      tail = (sum - previous).cwiseAbs().maxCoeff();
      if (tail < 0.1 * kModelTailTarget) return {sum, tail, width};
    }
    previous = sum;
  }
  throw Error(ErrorKind::NonDecayingBoundary,
              "model kernel integral did not settle; last increment " + std::to_string(tail));
}

Matrix rescaled_symbol_kernel(const SymbolField& field, const Vector& m, double t, const Vector& base,
                              const Vector& displacement) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidArgument, "t must lie in [0, 1]");
  const Vector position = m + t * base;
  return model_kernel(field(position), {displacement.data(), static_cast<std::size_t>(displacement.size())});
}

}  // namespace lefgpd
