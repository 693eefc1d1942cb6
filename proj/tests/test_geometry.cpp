#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "lefgpd/geometry.hpp"

using namespace lefgpd;

namespace {

IntMatrix int_matrix(std::initializer_list<std::initializer_list<std::int64_t>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  IntMatrix m(n, n);
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (auto v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

// Fixed points of x -> Ax + b on T^2 by brute force: x = (A - I)^-1 (k - b)
// for integer k in a box, reduced mod 1 and deduplicated.
std::set<std::pair<long, long>> brute_force_affine_2d(const IntMatrix& a, const Vector& b) {
  Eigen::Matrix2d m = a.cast<double>() - Eigen::Matrix2d::Identity();
  const Eigen::Matrix2d inv = m.inverse();
  std::set<std::pair<long, long>> found;
  const int box = 12;
  for (int k0 = -box; k0 <= box; ++k0) {
    for (int k1 = -box; k1 <= box; ++k1) {
      Eigen::Vector2d x = inv * (Eigen::Vector2d(k0, k1) - b);
      for (int i = 0; i < 2; ++i) x(i) -= std::floor(x(i));
      found.insert({std::lround(x(0) * 1e6) % 1000000, std::lround(x(1) * 1e6) % 1000000});
    }
  }
  return found;
}

// Zeros of lift(x) - x mod 1 by dense sign scan and bisection.
std::vector<double> brute_force_circle(const CircleMap& c) {
  const int samples = 200000;
  std::vector<double> roots;
  auto g = [&](double x) { return c.lift(x) - x; };
  for (int i = 0; i < samples; ++i) {
    double lo = static_cast<double>(i) / samples;
    double hi = static_cast<double>(i + 1) / samples;
    const double glo = g(lo);
    const double ghi = g(hi);
    const double k = std::floor(std::max(glo, ghi));
    if (!(std::min(glo, ghi) <= k && k < std::max(glo, ghi)) && glo != k) continue;
    if (glo == k) {
      roots.push_back(lo);
      continue;
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((g(lo) - k) * (g(mid) - k) <= 0) hi = mid;
      else lo = mid;
    }
    roots.push_back(0.5 * (lo + hi));
  }
  return roots;
}

}  // namespace

TEST_CASE("torus geometry validates its inputs") {
  CHECK_ERROR_KIND(TorusGeometry(0, 16), ErrorKind::InvalidArgument);
  CHECK_ERROR_KIND(TorusGeometry(2, 1), ErrorKind::InvalidArgument);
  CHECK(TorusGeometry::total_measure() == 1.0);
}

TEST_CASE("quadrature grid nodes and weights") {
  QuadratureGrid g(2, 4);
  CHECK(g.size() == 16);
  CHECK(g.weight() == doctest::Approx(1.0 / 16));
  const Vector x = g.node(5);
  CHECK(x(0) == doctest::Approx(0.25));
  CHECK(x(1) == doctest::Approx(0.25));
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) total += g.weight();
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("wrap and centered representatives") {
  CHECK(wrap_unit(1.25) == doctest::Approx(0.25));
  CHECK(wrap_unit(-0.25) == doctest::Approx(0.75));
  CHECK(centered(0.75) == doctest::Approx(-0.25));
  CHECK(centered(0.5) == doctest::Approx(-0.5));
  CHECK(torus_distance(Vector::Constant(1, 0.05), Vector::Constant(1, 0.95)) == doctest::Approx(0.1));
}

TEST_CASE("malformed affine maps are rejected") {
  IntMatrix rect(2, 3);
  rect.setZero();
  CHECK_ERROR_KIND(TorusMap::affine(rect), ErrorKind::DegenerateMap);
  CHECK_ERROR_KIND(TorusMap::affine(IntMatrix::Identity(2, 2), Vector::Zero(3)), ErrorKind::DegenerateMap);
}

TEST_CASE("affine fixed points match the brute-force lattice scan") {
  const std::vector<IntMatrix> mats = {int_matrix({{2, 1}, {1, 1}}), int_matrix({{3, 1}, {1, 2}}),
                                       int_matrix({{0, -1}, {1, 0}}), int_matrix({{-2, 1}, {3, 4}}),
                                       int_matrix({{2, 0}, {0, 3}}), int_matrix({{1, 2}, {3, 1}})};
  const std::vector<Vector> shifts = {Vector::Zero(2), (Vector(2) << 0.3, 0.7).finished()};
  const TorusGeometry geom(2, 32);
  for (const auto& a : mats) {
    for (const auto& b : shifts) {
      const auto oracle = brute_force_affine_2d(a, b);
      const auto fps = find_fixed_points(TorusMap::affine(a, b), geom);
      const auto det = integer_determinant(a - IntMatrix::Identity(2, 2));
      CHECK(fps.size() == static_cast<std::size_t>(std::llabs(det)));
      CHECK(fps.size() == oracle.size());
      std::set<std::pair<long, long>> got;
      for (const auto& f : fps) {
        CHECK(f.simple);
        CHECK(f.weight == doctest::Approx(1.0 / std::llabs(det)));
        CHECK(f.det_minus_identity == doctest::Approx(static_cast<double>(det)));
        const Vector img = apply_map(TorusMap::affine(a, b), f.location);
        CHECK(torus_distance(img, f.location) < 1e-12);
        got.insert({std::lround(f.location(0) * 1e6) % 1000000, std::lround(f.location(1) * 1e6) % 1000000});
      }
      CHECK(got == oracle);
    }
  }
}

TEST_CASE("1-d affine fixed points") {
  const TorusGeometry geom(1, 32);
  auto fps = find_fixed_points(TorusMap::affine(int_matrix({{3}})), geom);
  REQUIRE(fps.size() == 2);
  CHECK(fps[0].location(0) == doctest::Approx(0.0));
  CHECK(fps[1].location(0) == doctest::Approx(0.5));
  CHECK(find_fixed_points(TorusMap::affine(int_matrix({{-1}})), geom).size() == 2);
  CHECK(find_fixed_points(TorusMap::affine(int_matrix({{2}})), geom).size() == 1);
}

TEST_CASE("identity-type maps: translations have no fixed points, identity is non-simple") {
  const TorusGeometry geom(1, 32);
  CHECK(find_fixed_points(TorusMap::affine(int_matrix({{1}}), Vector::Constant(1, 0.3)), geom).empty());
  CHECK_ERROR_KIND(find_fixed_points(TorusMap::affine(int_matrix({{1}})), geom), ErrorKind::NonSimpleFixedPoint);
  // A = diag(1, 2) fixes the circle x_2 = 0.
  CHECK_ERROR_KIND(find_fixed_points(TorusMap::affine(int_matrix({{1, 0}, {0, 2}})), TorusGeometry(2, 16)),
                   ErrorKind::NonSimpleFixedPoint);
  CHECK(find_fixed_points(TorusMap::affine(int_matrix({{1, 0}, {0, 2}}), (Vector(2) << 0.5, 0.0).finished()),
                          TorusGeometry(2, 16))
            .empty());
}

TEST_CASE("circle fixed points match a dense scan") {
  const TorusGeometry geom(1, 64);
  const std::vector<CircleMap> maps = {
      {-1, 0.0, {{1, 0.05}}}, {2, 0.1, {{1, 0.05}, {2, 0.02}}}, {3, 0.0, {{1, 0.1}}},
      {-2, 0.37, {{3, 0.01}}}, {1, 0.25, {{1, 0.1}}},         {0, 0.4, {{1, 0.1}}}};
  for (const auto& c : maps) {
    const auto fps = find_fixed_points(TorusMap::circle(c.degree, c.constant, c.terms), geom);
    auto oracle = brute_force_circle(c);
    // Collapse bisection duplicates at shared sample endpoints.
    for (double& r : oracle) r = wrap_unit(r) > 1.0 - 1e-9 ? 0.0 : wrap_unit(r);
    std::sort(oracle.begin(), oracle.end());
    oracle.erase(std::unique(oracle.begin(), oracle.end(), [](double a, double b) { return b - a < 1e-7; }),
                 oracle.end());
    REQUIRE(fps.size() == oracle.size());
    for (std::size_t i = 0; i < fps.size(); ++i) {
      CHECK(fps[i].location(0) == doctest::Approx(oracle[i]).epsilon(1e-9));
      CHECK(std::abs(c.lift(fps[i].location(0)) - fps[i].location(0) -
                     std::round(c.lift(fps[i].location(0)) - fps[i].location(0))) < 1e-12);
      CHECK(fps[i].weight == doctest::Approx(1.0 / std::abs(fps[i].det_minus_identity)));
    }
  }
}

TEST_CASE("degree -1 circle map has fixed points near 0 and 1/2") {
  const auto fps = find_fixed_points(TorusMap::circle(-1, 0.0, {{1, 0.05}}), TorusGeometry(1, 64));
  REQUIRE(fps.size() == 2);
  CHECK(fps[0].location(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(fps[1].location(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("differential of maps") {
  const auto circle = TorusMap::circle(2, 0.0, {{1, 0.1}});
  const Vector x = Vector::Constant(1, 0.3);
  const double h = 1e-6;
  const double fd = (circle.lift(Vector::Constant(1, 0.3 + h))(0) - circle.lift(Vector::Constant(1, 0.3 - h))(0)) / (2 * h);
  CHECK(differential_at(circle, x)(0, 0) == doctest::Approx(fd).epsilon(1e-8));
  const auto cat = TorusMap::affine(int_matrix({{2, 1}, {1, 1}}));
  CHECK(differential_at(cat, Vector::Zero(2)).isApprox(Eigen::Matrix2d((Eigen::Matrix2d() << 2, 1, 1, 1).finished())));
}

TEST_CASE("integer determinant agrees with floating point on random matrices") {
  std::uniform_int_distribution<int> entry(-5, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 4;
    IntMatrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = entry(testing::rng());
    CHECK(static_cast<double>(integer_determinant(m)) == doctest::Approx(m.cast<double>().determinant()).epsilon(1e-9));
  }
}

TEST_CASE("smith normal form") {
  std::uniform_int_distribution<int> entry(-6, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 3;
    IntMatrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = entry(testing::rng());
    const SmithForm s = smith_normal_form(m);
    CHECK(s.left * m * s.right == s.diagonal);
    CHECK(std::llabs(integer_determinant(s.left)) == 1);
    CHECK(std::llabs(integer_determinant(s.right)) == 1);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) CHECK(s.diagonal(i, j) == 0);
      }
      CHECK(s.diagonal(i, i) >= 0);
      if (i + 1 < n && s.diagonal(i, i) != 0) CHECK(s.diagonal(i + 1, i + 1) % s.diagonal(i, i) == 0);
    }
    CHECK(std::llabs(integer_determinant(m)) == std::llabs(integer_determinant(s.diagonal)));
  }
}
