#pragma once

// Oblique projectors onto span{v_i} along a known background subspace.
//
// Atoms are made background-free, u = v - P_bg v, and a set of dual
// (measurement) vectors w_i, biorthogonal to the selected u's, is grown one
// atom at a time. The projector then acts as E f = sum_i v_i <w_i, f>.

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "oblmp/errors.hpp"
#include "oblmp/linalg.hpp"

namespace oblmp {

/// Orthonormal basis of the background subspace plus the size of the
/// spanning set it was extracted from.
template <typename Scalar>
class BackgroundModel {
 public:
  using Real = RealOf<Scalar>;

  BackgroundModel() = default;

  BackgroundModel(OrthonormalSet<Scalar> psi, Index source_count)
      : psi_(std::move(psi)), source_count_(source_count) {
    if (psi_.size() > source_count_) {
      throw Error("background model: basis larger than its spanning set");
    }
  }

  /// No background. Oblique projection degenerates to orthogonal projection.
  static BackgroundModel empty(Index dim) { return BackgroundModel(OrthonormalSet<Scalar>(dim), 0); }

  /// Orthonormalizes the columns of `sources`, dropping numerically redundant ones.
  template <typename Derived>
  static BackgroundModel from_sources(const Eigen::MatrixBase<Derived>& sources,
                                      Real tol = kDefaultRedundancyTol,
                                      std::optional<Index> m_cap = std::nullopt) {
    return BackgroundModel(mgs_orthonormalize(sources, tol, m_cap), sources.cols());
  }

  const OrthonormalSet<Scalar>& psi() const { return psi_; }
  Index size() const { return psi_.size(); }
  Index source_count() const { return source_count_; }
  bool empty() const { return psi_.empty(); }

 private:
  OrthonormalSet<Scalar> psi_;
  Index source_count_ = 0;
};

/// u_l = v_l - sum_n psi_n <psi_n, v_l> for every column of `atoms`.
template <typename Scalar, typename Derived>
Matrix<Scalar> subtract_background(const Eigen::MatrixBase<Derived>& atoms,
                                   const BackgroundModel<Scalar>& bg) {
  if (bg.empty()) return atoms;
  const auto& psi = bg.psi().vectors();
  if (psi.rows() != atoms.rows()) {
    throw DimensionMismatch("background vs atoms", static_cast<long>(psi.rows()),
                            static_cast<long>(atoms.rows()));
  }
  return atoms - psi * (psi.adjoint() * atoms);
}

struct ExtendOptions {
  /// Absolute threshold on |q_{k+1}|. Unset: 1e-10 times the largest norm
  /// among the selected u's and the new one.
  std::optional<double> dependence_tol;
  /// Mutation-testing hook: flips the sign of the correction applied to the
  /// existing duals. Never set outside of verification runs.
  bool fault_flip_update_sign = false;
};

inline constexpr double kDependenceRelTol = 1e-10;

/// Selected background-free atoms u_i, an orthonormal basis q_j of their span
/// and the duals w_i with <w_i, u_j> = delta_ij.
template <typename Scalar>
class DualSet {
 public:
  using Real = RealOf<Scalar>;

  DualSet() = default;

  static DualSet init(const Vector<Scalar>& u1, Index index = 0) {
    const Real n = u1.norm();
    if (!(n > Real(0))) throw DegenerateAtom("init_dual: zero atom");
    DualSet ds;
    ds.reserve(u1.size(), 4);
    ds.u_.col(0) = u1;
    ds.q_.col(0) = u1 / n;
    ds.w_.col(0) = u1 / (n * n);
    ds.selected_.push_back(index);
    ds.max_u_norm_ = n;
    ds.k_ = 1;
    return ds;
  }

  /// Adds u_new: q = u_new - P_{W_k} u_new (MGS plus one reorthogonalization
  /// pass), w_new = q / |q|^2, and w_i <- w_i - w_new <u_new, w_i>.
  void extend(const Vector<Scalar>& u_new, Index index, const ExtendOptions& opts = {}) {
    if (k_ == 0) {
      *this = init(u_new, index);
      return;
    }
    if (u_new.size() != dim()) {
      throw DimensionMismatch("extend_duals", static_cast<long>(dim()),
                              static_cast<long>(u_new.size()));
    }
    Vector<Scalar> q = u_new;
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < k_; ++j) q -= q_.col(j) * q_.col(j).dot(q);
    }
    const Real qn = q.norm();
    const Real scale = std::max(max_u_norm_, u_new.norm());
    const Real tol = opts.dependence_tol ? Real(*opts.dependence_tol) : Real(kDependenceRelTol) * scale;
    if (!(qn > tol)) throw DependentAtom(static_cast<double>(qn), static_cast<double>(tol));

    const Vector<Scalar> w_new = q / (qn * qn);
    // a_i = <u_new, w_i^k>
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> a = u_new.adjoint() * w_.leftCols(k_);
    if (opts.fault_flip_update_sign) {
      w_.leftCols(k_) += w_new * a;
    } else {
      w_.leftCols(k_) -= w_new * a;
    }

    if (k_ == u_.cols()) reserve(dim(), 2 * k_);
    u_.col(k_) = u_new;
    q_.col(k_) = q / qn;
    w_.col(k_) = w_new;
    selected_.push_back(index);
    max_u_norm_ = scale;
    ++k_;
  }

  Index size() const { return k_; }
  Index dim() const { return u_.rows(); }
  bool empty() const { return k_ == 0; }

  const std::vector<Index>& selected_indices() const { return selected_; }
  auto u() const { return u_.leftCols(k_); }
  auto q() const { return q_.leftCols(k_); }
  auto w() const { return w_.leftCols(k_); }

 private:
  void reserve(Index dim, Index capacity) {
    if (u_.rows() == 0) {
      u_.resize(dim, capacity);
      q_.resize(dim, capacity);
      w_.resize(dim, capacity);
    } else {
      u_.conservativeResize(Eigen::NoChange, capacity);
      q_.conservativeResize(Eigen::NoChange, capacity);
      w_.conservativeResize(Eigen::NoChange, capacity);
    }
  }

  std::vector<Index> selected_;
  Matrix<Scalar> u_, q_, w_;
  Index k_ = 0;
  Real max_u_norm_ = Real(0);
};

template <typename Scalar>
DualSet<Scalar> init_dual(const Vector<Scalar>& u1, Index index = 0) {
  return DualSet<Scalar>::init(u1, index);
}

template <typename Scalar>
DualSet<Scalar> extend_duals(DualSet<Scalar> ds, const Vector<Scalar>& u_new, Index index = -1,
                             const ExtendOptions& opts = {}) {
  ds.extend(u_new, index < 0 ? ds.size() : index, opts);
  return ds;
}

/// E f = sum_i v_i <w_i, f>, with `recon_atoms` holding the v_i as columns in
/// selection order.
template <typename Scalar, typename DerivedV, typename DerivedF>
Vector<Scalar> apply_oblique(const DualSet<Scalar>& ds, const Eigen::MatrixBase<DerivedV>& recon_atoms,
                             const Eigen::MatrixBase<DerivedF>& f) {
  if (recon_atoms.cols() != ds.size()) {
    throw DimensionMismatch("apply_oblique: reconstruction atoms vs duals",
                            static_cast<long>(ds.size()), static_cast<long>(recon_atoms.cols()));
  }
  if (ds.empty()) return Vector<Scalar>::Zero(recon_atoms.rows());
  if (f.size() != ds.dim()) {
    throw DimensionMismatch("apply_oblique: signal", static_cast<long>(ds.dim()),
                            static_cast<long>(f.size()));
  }
  const Vector<Scalar> c = ds.w().adjoint() * f;
  return recon_atoms * c;
}

// ---------------------------------------------------------------------------
// Closed-form oracles. These go through a pivoted factorization of the Gram
// matrix U^H U and share no code with the recursive updates above.

/// cond(U^H U) = (sigma_max / sigma_min)^2 of U. Infinite if U is singular.
template <typename Derived>
double gram_condition(const Eigen::MatrixBase<Derived>& u) {
  if (u.cols() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix<typename Derived::Scalar>> svd(u);
  const auto& s = svd.singularValues();
  const double smax = static_cast<double>(s(0));
  const double smin = static_cast<double>(s(s.size() - 1));
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  const double r = smax / smin;
  return r * r;
}

/// Columns of U (U^H U)^{-1}: the unique duals inside span(U).
template <typename Derived>
Matrix<typename Derived::Scalar> oracle_duals(const Eigen::MatrixBase<Derived>& u_sel) {
  using Scalar = typename Derived::Scalar;
  const Index k = u_sel.cols();
  if (k == 0) return Matrix<Scalar>(u_sel.rows(), 0);
  const Matrix<Scalar> gram = u_sel.adjoint() * u_sel;
  Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(gram);
  if (qr.rank() < k) throw SingularGram(gram_condition(u_sel));
  return u_sel * qr.solve(Matrix<Scalar>::Identity(k, k));
}

template <typename Scalar>
struct ObliqueOracleResult {
  Vector<Scalar> projection;
  Vector<Scalar> coeffs;
  double gram_condition = 1.0;
  bool rank_deficient = false;
};

struct OracleOptions {
  /// When false, a rank-deficient Gram matrix still yields the basic
  /// solution of the pivoted factorization (flagged) instead of throwing.
  bool require_full_rank = true;
};

/// V (U^H U)^{-1} U^H f with U the background-free version of V.
template <typename Scalar, typename DerivedV, typename DerivedF>
ObliqueOracleResult<Scalar> oracle_oblique_projection(const Eigen::MatrixBase<DerivedV>& recon_atoms,
                                                      const BackgroundModel<Scalar>& bg,
                                                      const Eigen::MatrixBase<DerivedF>& f,
                                                      const OracleOptions& opts = {}) {
  if (f.size() != recon_atoms.rows()) {
    throw DimensionMismatch("oracle_oblique_projection: signal", static_cast<long>(recon_atoms.rows()),
                            static_cast<long>(f.size()));
  }
  ObliqueOracleResult<Scalar> out;
  const Index k = recon_atoms.cols();
  if (k == 0) {
    out.projection = Vector<Scalar>::Zero(f.size());
    out.coeffs = Vector<Scalar>(0);
    return out;
  }
  const Matrix<Scalar> u = subtract_background(recon_atoms, bg);
  const Matrix<Scalar> gram = u.adjoint() * u;
  Eigen::ColPivHouseholderQR<Matrix<Scalar>> qr(gram);
  out.gram_condition = gram_condition(u);
  out.rank_deficient = qr.rank() < k;
  if (out.rank_deficient && opts.require_full_rank) throw SingularGram(out.gram_condition);
  out.coeffs = qr.solve(Vector<Scalar>(u.adjoint() * f));
  out.projection = recon_atoms * out.coeffs;
  return out;
}

}  // namespace oblmp
