#include "lefgpd/groupoid.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <string>

#include "lefgpd/error.hpp"
#include "lefgpd/parallel.hpp"

namespace lefgpd {

DeformationChart::DeformationChart(int tangential_, int normal_)
    : DeformationChart(tangential_, normal_, Vector::Zero(tangential_ + normal_),
                       std::numeric_limits<double>::infinity()) {}

DeformationChart::DeformationChart(int tangential_, int normal_, Vector center_, double domain_radius_)
    : tangential(tangential_), normal(normal_), center(std::move(center_)), domain_radius(domain_radius_) {
  if (tangential < 0 || normal < 0 || tangential + normal == 0 || center.size() != tangential + normal) {
    throw Error(ErrorKind::InvalidArgument, "chart splitting does not match the center");
  }
}

Vector DeformationChart::forward(const Vector& v, double t) const {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "chart_forward needs t > 0");
  if (v.size() != center.size() || (v - center).cwiseAbs().maxCoeff() >= domain_radius) {
    throw Error(ErrorKind::OutOfChart, "point outside the chart domain");
  }
  Vector out = v;
  for (int i = tangential; i < tangential + normal; ++i) out(i) = (v(i) - center(i)) / t;
  return out;
}

Vector DeformationChart::inverse(const Vector& coords, double t) const {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "chart inverse needs t > 0");
  Vector out = coords;
  for (int i = tangential; i < tangential + normal; ++i) out(i) = center(i) + t * coords(i);
  return out;
}

GroupoidPoint groupoid_chart_forward(const Vector& m, const Vector& v1, const Vector& v2, double t) {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "groupoid chart needs t > 0");
  if ((v1 - m).cwiseAbs().maxCoeff() >= 0.5 || (v2 - m).cwiseAbs().maxCoeff() >= 0.5) {
    throw Error(ErrorKind::OutOfChart, "point farther than 1/2 from the fixed point");
  }
  return {(v1 - m) / t, (v2 - m) / t, t};
}

// ---------------------------------------------------------------------------

void Polynomial::add_term(std::vector<int> exponents, double coeff) {
  if (static_cast<int>(exponents.size()) != dim_) {
    throw Error(ErrorKind::InvalidArgument, "exponent vector length does not match dimension");
  }
  terms_[std::move(exponents)] += coeff;
}

double Polynomial::operator()(const Vector& x) const {
  double sum = 0.0;
  for (const auto& [exps, c] : terms_) {
    double mono = c;
    for (int i = 0; i < dim_; ++i) mono *= std::pow(x(i), exps[i]);
    sum += mono;
  }
  return sum;
}

Polynomial Polynomial::shifted(const Vector& m) const {
  Polynomial out(dim_);
  for (const auto& [exps, c] : terms_) {
    // prod_i (m_i + X_i)^{a_i} expanded binomially.
    std::vector<int> k(static_cast<std::size_t>(dim_), 0);
    while (true) {
      double coeff = c;
      for (int i = 0; i < dim_; ++i) {
        coeff *= static_cast<double>(binomial(exps[i], k[i])) * std::pow(m(i), exps[i] - k[i]);
      }
      if (coeff != 0.0) out.add_term(k, coeff);
      int axis = 0;
      while (axis < dim_ && ++k[axis] > exps[axis]) k[axis++] = 0;
      if (axis == dim_) break;
    }
  }
  return out;
}

double Polynomial::homogeneous_part(int degree, const Vector& x) const {
  double sum = 0.0;
  for (const auto& [exps, c] : terms_) {
    int d = 0;
    for (int e : exps) d += e;
    if (d != degree) continue;
    double mono = c;
    for (int i = 0; i < dim_; ++i) mono *= std::pow(x(i), exps[i]);
    sum += mono;
  }
  return sum;
}

int Polynomial::lowest_degree() const {
  int best = std::numeric_limits<int>::max();
  for (const auto& [exps, c] : terms_) {
    if (std::abs(c) < 1e-14) continue;
    int d = 0;
    for (int e : exps) d += e;
    best = std::min(best, d);
  }
  return best;
}

DeformationFunction lift_smooth(std::function<double(const Vector&)> f) {
  return {[f](const Vector& v, double) { return f(v); }, [f](const Vector&, const Vector& m) { return f(m); }};
}

DeformationFunction rescale_vanishing(const Polynomial& f, int order, const Vector& m) {
  const Polynomial local = f.shifted(m);
  if (local.lowest_degree() < order) {
    throw Error(ErrorKind::InvalidArgument,
                "polynomial does not vanish to order " + std::to_string(order) + " at m");
  }
  // For f vanishing to order r, X^r(f) / r! is the degree-r part of f(m + X).
  return {[f, order](const Vector& v, double t) { return f(v) / std::pow(t, order); },
          [local, order](const Vector& x, const Vector&) { return local.homogeneous_part(order, x); }};
}

// ---------------------------------------------------------------------------

double translation_invariance_defect(const DeformationKernel& k,
                                     const std::vector<FixedPointRecord>& fixed_points, int samples) {
  double worst = 0.0;
  const int n = k.dim;
  for (const auto& fp : fixed_points) {
    for (int s = 0; s < samples; ++s) {
      Vector x(n), y(n);
      for (int i = 0; i < n; ++i) {
        x(i) = 3.0 * std::sin(1.7 * s + 0.9 * i + 0.3);
        y(i) = 2.0 * std::cos(2.3 * s + 1.1 * i);
      }
      const GradedEndomorphism a = k.boundary(x, y, fp);
      const GradedEndomorphism b = k.boundary(x - y, Vector::Zero(n), fp);
      for (std::size_t p = 0; p < a.blocks().size(); ++p) {
        worst = std::max(worst, (a.blocks()[p] - b.blocks()[p]).cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

BulkKernel reduced_kernel(const KernelFamily& family) {
  return [family](const Vector& v1, const Vector& v2, double t) { return family(v2)(v1, v2, t); };
}

namespace {

double diagonal_functional(const DeformationKernel& k, double t, const QuadratureGrid& grid, TraceKind kind) {
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "trace_t needs t > 0");
  if (grid.dim() != k.dim) throw Error(ErrorKind::InvalidArgument, "grid dimension mismatch");
  const double w = grid.weight();
  return deterministic_sum(grid.size(), [&](std::size_t begin, std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Vector v = grid.node(begin + i);
      const GradedEndomorphism value = k.bulk(v, v, t);
      out[i] = w * (kind == TraceKind::Trace ? value.trace() : supertrace(value));
    }
  });
}

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

template <std::size_t N>
GaussRule make_gauss_rule() {
  using Rule = boost::math::quadrature::gauss<double, N>;
  GaussRule rule;
  const auto& a = Rule::abscissa();
  const auto& w = Rule::weights();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      rule.nodes.push_back(0.0);
      rule.weights.push_back(w[i]);
      continue;
    }
    rule.nodes.push_back(-a[i]);
    rule.weights.push_back(w[i]);
    rule.nodes.push_back(a[i]);
    rule.weights.push_back(w[i]);
  }
  return rule;
}

const GaussRule& gauss_rule(int n) {
  static const GaussRule fine = make_gauss_rule<64>();
  static const GaussRule coarse = make_gauss_rule<24>();
  return n <= 2 ? fine : coarse;
}

// Tensor Gauss rule on a box, accumulated into `acc`.
void integrate_box(int n, const std::vector<std::pair<double, double>>& box, std::size_t components,
                   const std::function<void(const Vector&, std::span<double>)>& f, std::vector<double>& acc) {
  const GaussRule& rule = gauss_rule(n);
  const std::size_t q = rule.nodes.size();
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= q;
  std::vector<double> values(components);
  Vector x(n);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      const std::size_t j = rest % q;
      rest /= q;
      const double half = 0.5 * (box[i].second - box[i].first);
      const double mid = 0.5 * (box[i].second + box[i].first);
      x(i) = mid + half * rule.nodes[j];
      w *= half * rule.weights[j];
    }
    f(x, values);
    for (std::size_t c = 0; c < components; ++c) acc[c] += w * values[c];
  }
}

}  // namespace

double trace_t(const DeformationKernel& k, double t, const QuadratureGrid& grid) {
  return diagonal_functional(k, t, grid, TraceKind::Trace);
}

double supertrace_t(const DeformationKernel& k, double t, const QuadratureGrid& grid) {
  return diagonal_functional(k, t, grid, TraceKind::Supertrace);
}

std::vector<double> integrate_expanding_cubes(
    int n, std::size_t components, const std::function<void(const Vector&, std::span<double>)>& f) {
  std::vector<double> total(components, 0.0);
  integrate_box(n, std::vector<std::pair<double, double>>(static_cast<std::size_t>(n), {-1.0, 1.0}),
                components, f, total);

  double last_increment = std::numeric_limits<double>::infinity();
  for (double half = 2.0; half <= 4096.0; half *= 2.0) {
    const std::pair<double, double> pieces[3] = {{-half, -half / 2}, {-half / 2, half / 2}, {half / 2, half}};
    std::vector<double> shell(components, 0.0);
    std::size_t combos = 1;
    for (int i = 0; i < n; ++i) combos *= 3;
    for (std::size_t c = 0; c < combos; ++c) {
      std::vector<std::pair<double, double>> box(static_cast<std::size_t>(n));
      std::size_t rest = c;
      bool inner = true;
      for (int i = 0; i < n; ++i) {
        const std::size_t which = rest % 3;
        rest /= 3;
        box[i] = pieces[which];
        inner = inner && which == 1;
      }
      if (!inner) integrate_box(n, box, components, f, shell);
    }
    last_increment = 0.0;
    for (std::size_t c = 0; c < components; ++c) {
      total[c] += shell[c];
      last_increment = std::max(last_increment, std::abs(shell[c]));
    }
    if (!std::isfinite(last_increment)) break;
    if (last_increment < kBoundaryIncrementTolerance) return total;
  }
  throw Error(ErrorKind::NonDecayingBoundary,
              "tangent-space integral did not settle; last shell added " + std::to_string(last_increment));
}

namespace {

double boundary_functional(const DeformationKernel& k, const std::vector<FixedPointRecord>& fixed_points,
                           TraceKind kind) {
  if (!k.boundary) throw Error(ErrorKind::InvalidArgument, "kernel has no boundary values");
  double total = 0.0;
  for (const auto& fp : fixed_points) {
    const auto integral = integrate_expanding_cubes(k.dim, 1, [&](const Vector& x, std::span<double> out) {
      const GradedEndomorphism value = k.boundary(x, x, fp);
      out[0] = kind == TraceKind::Trace ? value.trace() : supertrace(value);
    });
    total += integral[0];
  }
  return total;
}

std::vector<double> flatten(const GradedEndomorphism& g) {
  std::vector<double> out;
  for (const auto& b : g.blocks()) out.insert(out.end(), b.data(), b.data() + b.size());
  return out;
}

GradedEndomorphism unflatten(const GradedEndomorphism& shape, std::span<const double> values) {
  std::vector<Matrix> blocks;
  std::size_t offset = 0;
  for (const auto& b : shape.blocks()) {
    Matrix m(b.rows(), b.cols());
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), m.size(), m.data());
    offset += static_cast<std::size_t>(m.size());
    blocks.push_back(std::move(m));
  }
  return GradedEndomorphism(std::move(blocks));
}

}  // namespace

double trace_0(const DeformationKernel& k, const std::vector<FixedPointRecord>& fixed_points) {
  return boundary_functional(k, fixed_points, TraceKind::Trace);
}

double supertrace_0(const DeformationKernel& k, const std::vector<FixedPointRecord>& fixed_points) {
  return boundary_functional(k, fixed_points, TraceKind::Supertrace);
}

DeformationKernel twist_by_map(const DeformationKernel& k, const TorusMap& map, const Zeta& zeta) {
  if (map.dim() != k.dim) throw Error(ErrorKind::InvalidArgument, "map and kernel dimensions differ");
  DeformationKernel out;
  out.dim = k.dim;
  out.jacobian_exponent = k.jacobian_exponent;
  out.translation_invariant_at_0 = false;
  out.bulk = [k, map, zeta](const Vector& v1, const Vector& v2, double t) {
    return zeta(map, v1) * k.bulk(apply_map(map, v1), v2, t);
  };
  if (k.boundary) {
    out.boundary = [k, map, zeta](const Vector& x, const Vector& y, const FixedPointRecord& fp) {
      return zeta(map, fp.location) * k.boundary(fp.differential * x, y, fp);
    };
  }
  return out;
}

TwistTrace trace_0_of_twist(const DeformationKernel& k, const TorusMap& map, const Zeta& zeta,
                            const std::vector<FixedPointRecord>& fixed_points) {
  if (!k.translation_invariant_at_0) {
    throw Error(ErrorKind::InvalidArgument, "trace_0_of_twist needs a translation-invariant boundary");
  }
  for (const auto& fp : fixed_points) {
    if (!fp.simple) throw Error(ErrorKind::NonSimpleFixedPoint, "fixed point is not simple");
  }

  TwistTrace result;
  const Vector zero = Vector::Zero(k.dim);
  for (const auto& fp : fixed_points) {
    // Str_0 of the twisted boundary zeta_m k(dphi_m X, X), zeta_m hoisted.
    const GradedEndomorphism zeta_m = zeta(map, fp.location);
    const double str_m = supertrace(zeta_m);
    result.direct += integrate_expanding_cubes(k.dim, 1, [&](const Vector& x, std::span<double> out) {
      const GradedEndomorphism b = k.boundary(fp.differential * x, x, fp);
      out[0] = b.is_scalar() ? b.blocks()[0](0, 0) * str_m : supertrace(zeta_m * b);
    })[0];

    const GradedEndomorphism shape = k.boundary(zero, zero, fp);
    const std::size_t components = flatten(shape).size();
    const auto integral = integrate_expanding_cubes(k.dim, components, [&](const Vector& x, std::span<double> out) {
      const auto flat = flatten(k.boundary(x, zero, fp));
      std::copy(flat.begin(), flat.end(), out.begin());
    });
    const GradedEndomorphism mass = unflatten(shape, integral);
    result.determinant_formula += fp.weight * supertrace(zeta_m * mass);
  }

  if (std::abs(result.direct - result.determinant_formula) > kTwistCrossCheckTolerance) {
    throw Error(ErrorKind::CrossCheckFailure,
                "direct quadrature " + std::to_string(result.direct) + " vs determinant formula " +
                    std::to_string(result.determinant_formula));
  }
  return result;
}

// ---------------------------------------------------------------------------

Extrapolation richardson_extrapolate(std::span<const double> t, std::span<const double> f) {
  if (t.size() < 2 || t.size() != f.size()) {
    throw Error(ErrorKind::InvalidArgument, "extrapolation needs at least two rungs");
  }
  const std::size_t last = t.size() - 1;
  const double slope = (f[last - 1] - f[last]) / (t[last - 1] - t[last]);
  return {f[last] - slope * t[last], slope};
}

std::vector<double> geometric_ladder(double t_max, double ratio, int rungs) {
  if (!(t_max > 0.0 && t_max <= 1.0)) throw Error(ErrorKind::InvalidArgument, "t_max must lie in (0, 1]");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorKind::InvalidArgument, "ratio must lie in (0, 1)");
  if (rungs < 1) throw Error(ErrorKind::InvalidArgument, "ladder needs at least one rung");
  std::vector<double> t(static_cast<std::size_t>(rungs));
  for (int j = 0; j < rungs; ++j) t[j] = t_max * std::pow(ratio, j);
  return t;
}

void check_bounded(std::span<const double> values) {
  if (values.size() < 2) return;
  bool monotone = true;
  for (std::size_t i = 1; i < values.size(); ++i) monotone = monotone && std::abs(values[i]) >= std::abs(values[i - 1]);
  if (monotone && std::abs(values.back()) > 10.0 * std::abs(values.front())) {
    throw Error(ErrorKind::UnboundedLadder,
                "|f| grew monotonically from " + std::to_string(values.front()) + " to " +
                    std::to_string(values.back()));
  }
}

TraceLadder rescaled_limit(const DeformationKernel& k, std::span<const double> t_values, int base_grid,
                           TraceKind kind) {
  if (t_values.size() < 5) throw Error(ErrorKind::InvalidArgument, "rescaled limit needs at least 5 rungs");
  const double ratio = t_values[1] / t_values[0];
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorKind::InvalidArgument, "ladder must decrease");
  for (std::size_t i = 1; i < t_values.size(); ++i) {
    if (std::abs(t_values[i] / t_values[i - 1] - ratio) > 1e-12 * ratio) {
      throw Error(ErrorKind::InvalidArgument, "ladder must be geometric");
    }
  }

  TraceLadder ladder;
  ladder.t_values.assign(t_values.begin(), t_values.end());
  const int exponent = k.dim - k.jacobian_exponent;
  for (double t : t_values) {
    const int points = std::max(base_grid, static_cast<int>(std::ceil(3.0 / t)));
    const QuadratureGrid grid(k.dim, points);
    const double raw = kind == TraceKind::Trace ? trace_t(k, t, grid) : supertrace_t(k, t, grid);
    ladder.values.push_back(std::pow(t, -exponent) * raw);
  }
  check_bounded(ladder.values);

  const Extrapolation ex = richardson_extrapolate(ladder.t_values, ladder.values);
  ladder.extrapolated = ex.limit;
  for (std::size_t i = 0; i < t_values.size(); ++i) {
    ladder.residuals.push_back(ladder.values[i] - (ex.limit + ex.slope * t_values[i]));
  }
  for (std::size_t i = 0; i + 1 < t_values.size(); ++i) {
    const double e0 = std::abs(ladder.values[i] - ex.limit);
    const double e1 = std::abs(ladder.values[i + 1] - ex.limit);
    ladder.observed_rates.push_back(std::log(e0 / e1) / std::log(t_values[i] / t_values[i + 1]));
  }
  return ladder;
}

}  // namespace lefgpd
