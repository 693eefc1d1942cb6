#pragma once

// Z/2-graded endomorphisms of the exterior algebra and the de Rham bundle map.

#include <functional>
#include <vector>

#include "lefgpd/geometry.hpp"

namespace lefgpd {

// Strictly increasing index tuples of length p from {0..n-1}, lexicographic.
std::vector<std::vector<int>> multi_indices(int n, int p);

std::size_t binomial(int n, int p);

// Degree-indexed blocks; block p acts on the degree-p summand and carries the
// sign (-1)^p in the supertrace. A single 1x1 degree-0 block is a scalar and
// multiplies any other endomorphism blockwise.
class GradedEndomorphism {
 public:
  GradedEndomorphism() = default;
  explicit GradedEndomorphism(std::vector<Matrix> blocks);

  static GradedEndomorphism identity(int n);
  static GradedEndomorphism zero(int n);
  static GradedEndomorphism scalar(double value);

  const std::vector<Matrix>& blocks() const { return blocks_; }
  std::vector<Matrix>& blocks() { return blocks_; }
  int top_degree() const { return static_cast<int>(blocks_.size()) - 1; }
  bool is_scalar() const;

  // Full (ungraded) trace.
  double trace() const;

 private:
  std::vector<Matrix> blocks_;
};

GradedEndomorphism operator*(const GradedEndomorphism& a, const GradedEndomorphism& b);
GradedEndomorphism operator+(const GradedEndomorphism& a, const GradedEndomorphism& b);
GradedEndomorphism operator-(const GradedEndomorphism& a, const GradedEndomorphism& b);
GradedEndomorphism operator*(double s, const GradedEndomorphism& a);

// [a, b] = ab - ba for even endomorphisms.
GradedEndomorphism supercommutator(const GradedEndomorphism& a, const GradedEndomorphism& b);

double supertrace(const GradedEndomorphism& g);

// Basis of each Lambda^p in lexicographic multi-index order.
struct DeRhamBundleData {
  int n;
  std::vector<std::vector<std::vector<int>>> basis;

  explicit DeRhamBundleData(int n);
  std::size_t total_rank() const;
};

// Matrix of Lambda^p(B) in the lexicographic basis; entry (I, J) is the minor
// det B[I, J].
Matrix exterior_power_action(const Matrix& b, int p);

// All blocks Lambda^p(B), p = 0..n.
GradedEndomorphism exterior_algebra_action(const Matrix& b);

// Pullback action on forms: blocks Lambda^p(dphi(x)^T).
GradedEndomorphism zeta_de_rham(const TorusMap& map, const Vector& x);

// User-supplied bundle map field x -> zeta(x).
using ZetaField = std::function<GradedEndomorphism(const Vector& x)>;

// The bundle map used by the verification: the de Rham pullback unless a field
// is supplied. A custom field is not checked to commute with d.
struct Zeta {
  ZetaField custom;

  bool is_de_rham() const { return !custom; }
  GradedEndomorphism operator()(const TorusMap& map, const Vector& x) const {
    return custom ? custom(x) : zeta_de_rham(map, x);
  }
};

}  // namespace lefgpd
