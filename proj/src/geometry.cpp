#include "lefgpd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lefgpd/error.hpp"

namespace lefgpd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kCircleScanPoints = 4096;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, what);
}

}  // namespace

TorusGeometry::TorusGeometry(int dim_, int grid_size_) : dim(dim_), grid_size(grid_size_) {
  require(dim >= 1, "torus dimension must be >= 1");
  require(grid_size >= 2, "grid size must be >= 2");
}

QuadratureGrid::QuadratureGrid(int dim, int points_per_axis) : dim_(dim), n_(points_per_axis) {
  require(dim >= 1, "grid dimension must be >= 1");
  require(points_per_axis >= 2, "grid needs at least 2 points per axis");
  size_ = 1;
  for (int i = 0; i < dim; ++i) size_ *= static_cast<std::size_t>(n_);
  weight_ = std::pow(static_cast<double>(n_), -dim);
}

void QuadratureGrid::node(std::size_t flat_index, double* out) const {
  for (int axis = 0; axis < dim_; ++axis) {
    out[axis] = static_cast<double>(flat_index % n_) / n_;
    flat_index /= n_;
  }
}

Vector QuadratureGrid::node(std::size_t flat_index) const {
  Vector x(dim_);
  node(flat_index, x.data());
  return x;
}

double CircleMap::lift(double x) const {
  double value = degree * x + constant;
  for (const auto& term : terms) value += term.amplitude * std::sin(kTwoPi * term.frequency * x);
  return value;
}

double CircleMap::lift_derivative(double x) const {
  double value = degree;
  for (const auto& term : terms) {
    value += term.amplitude * kTwoPi * term.frequency * std::cos(kTwoPi * term.frequency * x);
  }
  return value;
}

double CircleMap::lift_second_derivative(double x) const {
  double value = 0.0;
  for (const auto& term : terms) {
    const double w = kTwoPi * term.frequency;
    value -= term.amplitude * w * w * std::sin(w * x);
  }
  return value;
}

TorusMap TorusMap::affine(IntMatrix matrix, Vector shift) {
  if (matrix.rows() == 0 || matrix.rows() != matrix.cols()) {
    throw Error(ErrorKind::DegenerateMap, "affine map needs a nonempty square integer matrix");
  }
  if (shift.size() != matrix.rows()) {
    throw Error(ErrorKind::DegenerateMap, "shift vector size does not match the matrix");
  }
  return TorusMap(AffineMap{std::move(matrix), wrap_unit(shift)});
}

TorusMap TorusMap::affine(IntMatrix matrix) {
  const auto n = matrix.rows();
  return affine(std::move(matrix), Vector::Zero(n));
}

TorusMap TorusMap::circle(int degree, double constant, std::vector<FourierTerm> terms) {
  return TorusMap(CircleMap{degree, constant, std::move(terms)});
}

int TorusMap::dim() const {
  if (is_affine()) return static_cast<int>(as_affine().matrix.rows());
  return 1;
}

Vector TorusMap::lift(const Vector& x) const {
  if (is_affine()) {
    const auto& a = as_affine();
    return a.matrix.cast<double>() * x + a.shift;
  }
  Vector y(1);
  y(0) = as_circle().lift(x(0));
  return y;
}

double wrap_unit(double x) {
  double r = x - std::floor(x);
  // floor can round x - floor(x) up to exactly 1 for tiny negative x.
  return r >= 1.0 ? 0.0 : r;
}

Vector wrap_unit(const Vector& x) {
  Vector r(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) r(i) = wrap_unit(x(i));
  return r;
}

double centered(double x) { return x - std::floor(x + 0.5); }

Vector apply_map(const TorusMap& map, const Vector& x) { return wrap_unit(map.lift(x)); }

Matrix differential_at(const TorusMap& map, const Vector& x) {
  if (map.is_affine()) return map.as_affine().matrix.cast<double>();
  Matrix d(1, 1);
  d(0, 0) = map.as_circle().lift_derivative(x(0));
  return d;
}

double torus_distance(const Vector& x, const Vector& y) {
  double sq = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = centered(x(i) - y(i));
    sq += d * d;
  }
  return std::sqrt(sq);
}

std::int64_t integer_determinant(const IntMatrix& m) {
  const auto n = m.rows();
  if (n == 0) return 1;
  IntMatrix a = m;
  std::int64_t sign = 1;
  std::int64_t prev = 1;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      Eigen::Index swap = -1;
      for (Eigen::Index i = k + 1; i < n; ++i) {
        if (a(i, k) != 0) {
          swap = i;
          break;
        }
      }
      if (swap < 0) return 0;
      a.row(k).swap(a.row(swap));
      sign = -sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      for (Eigen::Index j = k + 1; j < n; ++j) {
        a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
      }
    }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

SmithForm smith_normal_form(const IntMatrix& m) {
  const auto rows = m.rows();
  const auto cols = m.cols();
  IntMatrix d = m;
  IntMatrix u = IntMatrix::Identity(rows, rows);
  IntMatrix v = IntMatrix::Identity(cols, cols);
  const auto steps = std::min(rows, cols);

  for (Eigen::Index t = 0; t < steps; ++t) {
    while (true) {
      Eigen::Index pi = -1, pj = -1;
      std::int64_t best = 0;
      for (Eigen::Index i = t; i < rows; ++i) {
        for (Eigen::Index j = t; j < cols; ++j) {
          const std::int64_t a = std::abs(d(i, j));
          if (a != 0 && (best == 0 || a < best)) {
            best = a;
            pi = i;
            pj = j;
          }
        }
      }
      if (pi < 0) return {u, d, v};

      if (pi != t) {
        d.row(t).swap(d.row(pi));
        u.row(t).swap(u.row(pi));
      }
      if (pj != t) {
        d.col(t).swap(d.col(pj));
        v.col(t).swap(v.col(pj));
      }

      bool clean = true;
      for (Eigen::Index i = t + 1; i < rows; ++i) {
        const std::int64_t q = d(i, t) / d(t, t);
        if (q != 0) {
          d.row(i) -= q * d.row(t);
          u.row(i) -= q * u.row(t);
        }
        if (d(i, t) != 0) clean = false;
      }
      for (Eigen::Index j = t + 1; j < cols; ++j) {
        const std::int64_t q = d(t, j) / d(t, t);
        if (q != 0) {
          d.col(j) -= q * d.col(t);
          v.col(j) -= q * v.col(t);
        }
        if (d(t, j) != 0) clean = false;
      }
      if (!clean) continue;

      // Divisibility: fold an offending row into the pivot row and retry.
      Eigen::Index offending = -1;
      for (Eigen::Index i = t + 1; i < rows && offending < 0; ++i) {
        for (Eigen::Index j = t + 1; j < cols; ++j) {
          if (d(i, j) % d(t, t) != 0) {
            offending = i;
            break;
          }
        }
      }
      if (offending < 0) break;
      d.row(t) += d.row(offending);
      u.row(t) += u.row(offending);
    }
    if (d(t, t) < 0) {
      d.row(t) *= -1;
      u.row(t) *= -1;
    }
  }
  return {u, d, v};
}

namespace {

FixedPointRecord make_record(const Vector& location, const Matrix& differential) {
  FixedPointRecord rec;
  rec.location = location;
  rec.differential = differential;
  const auto n = differential.rows();
  rec.det_minus_identity = (differential - Matrix::Identity(n, n)).determinant();
  rec.simple = std::abs(rec.det_minus_identity) >= kSimplicityTolerance;
  if (!rec.simple) {
    throw Error(ErrorKind::NonSimpleFixedPoint,
                "|det(dphi - I)| = " + std::to_string(std::abs(rec.det_minus_identity)) +
                    " below tolerance at a fixed point");
  }
  rec.weight = 1.0 / std::abs(rec.det_minus_identity);
  return rec;
}

// Solves (A - I) x = -b mod Z^n through the Smith form of A - I.
std::vector<FixedPointRecord> affine_fixed_points(const AffineMap& map) {
  const auto n = map.matrix.rows();
  const IntMatrix shifted = map.matrix - IntMatrix::Identity(n, n);
  const SmithForm snf = smith_normal_form(shifted);
  const Vector rhs = snf.left.cast<double>() * (-map.shift);

  bool continuum = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (snf.diagonal(i, i) != 0) continue;
    const double frac = rhs(i) - std::round(rhs(i));
    if (std::abs(frac) > 1e-12) return {};
    continuum = true;
  }
  if (continuum) {
    throw Error(ErrorKind::NonSimpleFixedPoint,
                "det(A - I) = 0 and the fixed set is positive-dimensional");
  }

  std::vector<std::vector<double>> options(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int64_t d = snf.diagonal(i, i);
    for (std::int64_t k = 0; k < d; ++k) {
      options[i].push_back((rhs(i) + static_cast<double>(k)) / static_cast<double>(d));
    }
  }

  const Matrix differential = map.matrix.cast<double>();
  const Matrix right = snf.right.cast<double>();
  std::vector<FixedPointRecord> out;
  std::vector<std::size_t> counter(static_cast<std::size_t>(n), 0);
  Vector y(n);
  while (true) {
    for (Eigen::Index i = 0; i < n; ++i) y(i) = options[i][counter[i]];
    out.push_back(make_record(wrap_unit(Vector(right * y)), differential));
    Eigen::Index axis = 0;
    while (axis < n && ++counter[axis] == options[axis].size()) counter[axis++] = 0;
    if (axis == n) break;
  }
  return out;
}

double refine_circle_root(const CircleMap& map, double lo, double hi, double target) {
  auto g = [&](double x) { return map.lift(x) - x - target; };
  double glo = g(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    const double slope = map.lift_derivative(x) - 1.0;
    if (slope == 0.0) break;
    const double next = x - g(x) / slope;
    if (!(std::abs(next - x) < 1e-10)) break;
    x = next;
  }
  return x;
}

std::vector<FixedPointRecord> circle_fixed_points(const CircleMap& map) {
  std::vector<FixedPointRecord> out;
  auto g = [&](double x) { return map.lift(x) - x; };
  double x0 = 0.0;
  double g0 = g(x0);
  for (int i = 0; i < kCircleScanPoints; ++i) {
    const double x1 = static_cast<double>(i + 1) / kCircleScanPoints;
    const double g1 = g(x1);
    // Integers j hit on (x0, x1]: increasing g gives j in (g0, g1],
    // decreasing g gives j in [g1, g0).
    double first, last;
    if (g1 >= g0) {
      first = std::floor(g0) + 1.0;
      last = std::floor(g1);
    } else {
      first = std::ceil(g1);
      last = std::ceil(g0) - 1.0;
    }
    for (double j = first; j <= last; j += 1.0) {
      const double root = g1 == j ? x1 : refine_circle_root(map, x0, x1, j);
      Vector loc(1);
      loc(0) = wrap_unit(root);
      Matrix diff(1, 1);
      diff(0, 0) = map.lift_derivative(root);
      out.push_back(make_record(loc, diff));
    }
    x0 = x1;
    g0 = g1;
  }
  return out;
}

}  // namespace

std::vector<FixedPointRecord> find_fixed_points(const TorusMap& map, const TorusGeometry& geom) {
  require(map.dim() == geom.dim, "map dimension does not match the torus");
  auto out = map.is_affine() ? affine_fixed_points(map.as_affine()) : circle_fixed_points(map.as_circle());
  std::sort(out.begin(), out.end(), [](const FixedPointRecord& a, const FixedPointRecord& b) {
    return std::lexicographical_compare(a.location.begin(), a.location.end(), b.location.begin(), b.location.end());
  });
  return out;
}

}  // namespace lefgpd
