#pragma once

// Inner-product-space primitives. Vectors are Eigen column vectors; sets of
// vectors are stored as the columns of a dense matrix.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>

#include "oblmp/errors.hpp"

namespace oblmp {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RealOf = typename Eigen::NumTraits<Scalar>::Real;

/// Relative tolerance used when extracting an orthonormal basis from a
/// redundant spanning set.
inline constexpr double kDefaultRedundancyTol = 1e-8;

/// <f, g>, conjugate-linear in the first argument: <c f, g> = conj(c) <f, g>.
template <typename DerivedF, typename DerivedG>
auto inner(const Eigen::MatrixBase<DerivedF>& f, const Eigen::MatrixBase<DerivedG>& g) {
  if (f.size() != g.size()) {
    throw DimensionMismatch("inner product operands", static_cast<long>(f.size()),
                            static_cast<long>(g.size()));
  }
  // Eigen's dot() conjugates its left operand.
  return f.dot(g);
}

template <typename Derived>
auto norm(const Eigen::MatrixBase<Derived>& f) {
  return f.norm();
}

/// Columns are orthonormal to within 1e-10.
template <typename Scalar>
class OrthonormalSet {
 public:
  using Real = RealOf<Scalar>;

  OrthonormalSet() = default;
  explicit OrthonormalSet(Index dim) : vectors_(dim, 0) {}
  OrthonormalSet(Matrix<Scalar> vectors, Real tol_used)
      : vectors_(std::move(vectors)), tol_used_(tol_used) {}

  const Matrix<Scalar>& vectors() const { return vectors_; }
  auto vector(Index i) const { return vectors_.col(i); }
  Index size() const { return vectors_.cols(); }
  Index dim() const { return vectors_.rows(); }
  bool empty() const { return vectors_.cols() == 0; }
  Real tol_used() const { return tol_used_; }

  /// max_ij |<q_i, q_j> - delta_ij|.
  Real orthonormality_defect() const {
    if (empty()) return Real(0);
    const Matrix<Scalar> gram = vectors_.adjoint() * vectors_;
    return (gram - Matrix<Scalar>::Identity(size(), size())).cwiseAbs().maxCoeff();
  }

 private:
  Matrix<Scalar> vectors_;
  Real tol_used_ = Real(0);
};

/// Modified Gram-Schmidt with column pivoting and one reorthogonalization pass.
///
/// At each step the remaining candidate with the largest residual norm is
/// taken next. A candidate whose residual (after the reorthogonalization
/// pass) is <= tol * max input norm is discarded; since candidates are taken
/// in decreasing residual order this also ends the sweep. `m_max` caps the
/// number of vectors returned.
template <typename Derived>
OrthonormalSet<typename Derived::Scalar> mgs_orthonormalize(
    const Eigen::MatrixBase<Derived>& vs, RealOf<typename Derived::Scalar> tol = kDefaultRedundancyTol,
    std::optional<Index> m_max = std::nullopt) {
  using Scalar = typename Derived::Scalar;
  using Real = RealOf<Scalar>;
  if (!(tol > Real(0))) throw Error("mgs_orthonormalize: tol must be positive");

  const Index n = vs.rows();
  const Index count = vs.cols();
  if (count == 0) return OrthonormalSet<Scalar>(n);

  const Real max_norm = vs.colwise().norm().maxCoeff();
  if (max_norm == Real(0)) return OrthonormalSet<Scalar>(Matrix<Scalar>(n, 0), tol);
  const Real threshold = tol * max_norm;

  Index cap = count;
  if (m_max) cap = std::min(cap, std::max<Index>(*m_max, 0));

  Matrix<Scalar> residual = vs;
  Matrix<Scalar> q(n, std::min(cap, n));
  std::vector<bool> used(static_cast<std::size_t>(count), false);
  Index m = 0;

  while (m < q.cols()) {
    Index pick = -1;
    Real best = Real(-1);
    for (Index j = 0; j < count; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const Real r = residual.col(j).norm();
      if (r > best) {
        best = r;
        pick = j;
      }
    }
    if (pick < 0) break;
    used[static_cast<std::size_t>(pick)] = true;

    Vector<Scalar> v = residual.col(pick);
    for (Index j = 0; j < m; ++j) v -= q.col(j) * q.col(j).dot(v);
    const Real vn = v.norm();
    if (vn <= threshold) break;

    q.col(m) = v / vn;
    for (Index j = 0; j < count; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      residual.col(j) -= q.col(m) * q.col(m).dot(residual.col(j));
    }
    ++m;
  }
  return OrthonormalSet<Scalar>(q.leftCols(m), tol);
}

/// Sum_i psi_i <psi_i, f>. An empty basis projects everything to zero.
template <typename Scalar, typename Derived>
Vector<Scalar> orthogonal_project(const OrthonormalSet<Scalar>& basis,
                                  const Eigen::MatrixBase<Derived>& f) {
  if (basis.empty()) return Vector<Scalar>::Zero(f.size());
  if (basis.dim() != f.size()) {
    throw DimensionMismatch("orthogonal_project", static_cast<long>(basis.dim()),
                            static_cast<long>(f.size()));
  }
  return basis.vectors() * (basis.vectors().adjoint() * f);
}

}  // namespace oblmp
