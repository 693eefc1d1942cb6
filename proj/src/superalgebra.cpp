#include "lefgpd/superalgebra.hpp"

#include <string>

#include "lefgpd/error.hpp"

namespace lefgpd {

std::size_t binomial(int n, int p) {
  if (p < 0 || p > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= p; ++i) r = r * static_cast<std::size_t>(n - p + i) / static_cast<std::size_t>(i);
  return r;
}

std::vector<std::vector<int>> multi_indices(int n, int p) {
  std::vector<std::vector<int>> out;
  if (p < 0 || p > n) return out;
  std::vector<int> idx(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    int i = p - 1;
    while (i >= 0 && idx[i] == n - p + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < p; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

GradedEndomorphism::GradedEndomorphism(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    if (b.rows() != b.cols()) throw Error(ErrorKind::InvalidArgument, "graded block must be square");
  }
}

GradedEndomorphism GradedEndomorphism::identity(int n) {
  std::vector<Matrix> blocks;
  for (int p = 0; p <= n; ++p) {
    const auto r = static_cast<Eigen::Index>(binomial(n, p));
    blocks.push_back(Matrix::Identity(r, r));
  }
  return GradedEndomorphism(std::move(blocks));
}

GradedEndomorphism GradedEndomorphism::zero(int n) {
  std::vector<Matrix> blocks;
  for (int p = 0; p <= n; ++p) {
    const auto r = static_cast<Eigen::Index>(binomial(n, p));
    blocks.push_back(Matrix::Zero(r, r));
  }
  return GradedEndomorphism(std::move(blocks));
}

GradedEndomorphism GradedEndomorphism::scalar(double value) {
  return GradedEndomorphism({Matrix::Constant(1, 1, value)});
}

bool GradedEndomorphism::is_scalar() const {
  return blocks_.size() == 1 && blocks_[0].rows() == 1;
}

double GradedEndomorphism::trace() const {
  double t = 0.0;
  for (const auto& b : blocks_) t += b.trace();
  return t;
}

namespace {

template <class Op>
GradedEndomorphism blockwise(const GradedEndomorphism& a, const GradedEndomorphism& b, Op op) {
  if (a.blocks().size() != b.blocks().size()) {
    throw Error(ErrorKind::InvalidArgument, "graded endomorphisms have different top degree");
  }
  std::vector<Matrix> out;
  out.reserve(a.blocks().size());
  for (std::size_t p = 0; p < a.blocks().size(); ++p) {
    if (a.blocks()[p].rows() != b.blocks()[p].rows()) {
      throw Error(ErrorKind::InvalidArgument, "block " + std::to_string(p) + " size mismatch");
    }
    out.push_back(op(a.blocks()[p], b.blocks()[p]));
  }
  return GradedEndomorphism(std::move(out));
}

}  // namespace

GradedEndomorphism operator*(double s, const GradedEndomorphism& a) {
  std::vector<Matrix> out;
  out.reserve(a.blocks().size());
  for (const auto& b : a.blocks()) out.push_back(s * b);
  return GradedEndomorphism(std::move(out));
}

GradedEndomorphism operator*(const GradedEndomorphism& a, const GradedEndomorphism& b) {
  if (a.is_scalar()) return a.blocks()[0](0, 0) * b;
  if (b.is_scalar()) return b.blocks()[0](0, 0) * a;
  return blockwise(a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x * y; });
}

GradedEndomorphism operator+(const GradedEndomorphism& a, const GradedEndomorphism& b) {
  return blockwise(a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x + y; });
}

GradedEndomorphism operator-(const GradedEndomorphism& a, const GradedEndomorphism& b) {
  return blockwise(a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x - y; });
}

GradedEndomorphism supercommutator(const GradedEndomorphism& a, const GradedEndomorphism& b) {
  return a * b - b * a;
}

double supertrace(const GradedEndomorphism& g) {
  double s = 0.0;
  for (std::size_t p = 0; p < g.blocks().size(); ++p) {
    const double t = g.blocks()[p].trace();
    s += (p % 2 == 0) ? t : -t;
  }
  return s;
}

DeRhamBundleData::DeRhamBundleData(int n_) : n(n_) {
  for (int p = 0; p <= n; ++p) basis.push_back(multi_indices(n, p));
}

std::size_t DeRhamBundleData::total_rank() const {
  std::size_t r = 0;
  for (const auto& b : basis) r += b.size();
  return r;
}

Matrix exterior_power_action(const Matrix& b, int p) {
  const int n = static_cast<int>(b.rows());
  if (b.rows() != b.cols()) throw Error(ErrorKind::InvalidArgument, "exterior power needs a square matrix");
  if (p < 0 || p > n) throw Error(ErrorKind::InvalidArgument, "degree out of range");
  const auto idx = multi_indices(n, p);
  const auto r = static_cast<Eigen::Index>(idx.size());
  Matrix out(r, r);
  Matrix minor(p, p);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < r; ++j) {
      for (int a = 0; a < p; ++a) {
        for (int c = 0; c < p; ++c) minor(a, c) = b(idx[i][a], idx[j][c]);
      }
      out(i, j) = p == 0 ? 1.0 : minor.determinant();
    }
  }
  return out;
}

GradedEndomorphism exterior_algebra_action(const Matrix& b) {
  std::vector<Matrix> blocks;
  for (int p = 0; p <= b.rows(); ++p) blocks.push_back(exterior_power_action(b, p));
  return GradedEndomorphism(std::move(blocks));
}

GradedEndomorphism zeta_de_rham(const TorusMap& map, const Vector& x) {
  return exterior_algebra_action(differential_at(map, x).transpose());
}

}  // namespace lefgpd
