#pragma once

// Flat model manifolds: the unit torus R^n / Z^n (n = 1 is the circle), its
// self-maps, their fixed points, and the periodic trapezoid rule.

#include <Eigen/Dense>
#include <cstdint>
#include <variant>
#include <vector>

namespace lefgpd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

inline constexpr double kSimplicityTolerance = 1e-8;
inline constexpr double kFixedPointTolerance = 1e-10;

struct TorusGeometry {
  int dim = 1;
  int grid_size = 64;

  TorusGeometry() = default;
  TorusGeometry(int dim_, int grid_size_);

  // Lebesgue measure on the unit lattice torus.
  static constexpr double total_measure() { return 1.0; }
};

// Uniform nodes {k/N}^n with equal weights N^-n. Nodes are generated on demand
// from a flat index, first axis fastest.
class QuadratureGrid {
 public:
  QuadratureGrid(int dim, int points_per_axis);

  int dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  std::size_t size() const { return size_; }
  double weight() const { return weight_; }
  double spacing() const { return 1.0 / n_; }

  void node(std::size_t flat_index, double* out) const;
  Vector node(std::size_t flat_index) const;

 private:
  int dim_;
  int n_;
  std::size_t size_;
  double weight_;
};

struct AffineMap {
  IntMatrix matrix;
  Vector shift;
};

// Sine perturbation term amplitude * sin(2 pi frequency x).
struct FourierTerm {
  int frequency = 1;
  double amplitude = 0.0;
};

// Circle map with lift x -> degree * x + constant + sum of sine terms.
struct CircleMap {
  int degree = 1;
  double constant = 0.0;
  std::vector<FourierTerm> terms;

  double lift(double x) const;
  double lift_derivative(double x) const;
  double lift_second_derivative(double x) const;
};

class TorusMap {
 public:
  static TorusMap affine(IntMatrix matrix, Vector shift);
  static TorusMap affine(IntMatrix matrix);
  static TorusMap circle(int degree, double constant, std::vector<FourierTerm> terms = {});

  int dim() const;
  bool is_affine() const { return std::holds_alternative<AffineMap>(data_); }
  const AffineMap& as_affine() const { return std::get<AffineMap>(data_); }
  const CircleMap& as_circle() const { return std::get<CircleMap>(data_); }

  // Lifted image (not reduced mod 1).
  Vector lift(const Vector& x) const;

 private:
  explicit TorusMap(std::variant<AffineMap, CircleMap> data) : data_(std::move(data)) {}
  std::variant<AffineMap, CircleMap> data_;
};

struct FixedPointRecord {
  Vector location;
  Matrix differential;
  // det(differential - I), signed.
  double det_minus_identity = 0.0;
  double weight = 0.0;
  bool simple = false;
};

// Reduces every coordinate to [0, 1).
Vector wrap_unit(const Vector& x);
double wrap_unit(double x);
// Representative of x in [-1/2, 1/2).
double centered(double x);

Vector apply_map(const TorusMap& map, const Vector& x);
Matrix differential_at(const TorusMap& map, const Vector& x);
double torus_distance(const Vector& x, const Vector& y);

// All fixed points on the fundamental domain. Throws NonSimpleFixedPoint when a
// fixed point fails the simplicity test or the fixed set is not isolated, and
// DegenerateMap for malformed maps.
std::vector<FixedPointRecord> find_fixed_points(const TorusMap& map, const TorusGeometry& geom);

// Integer determinant by fraction-free elimination.
std::int64_t integer_determinant(const IntMatrix& m);

// U * M * V = D with U, V unimodular and D diagonal, each diagonal entry
// dividing the next.
struct SmithForm {
  IntMatrix left;
  IntMatrix diagonal;
  IntMatrix right;
};
SmithForm smith_normal_form(const IntMatrix& m);

}  // namespace lefgpd
