#pragma once

// Sampled spline dictionaries, the power-law background family and random
// test signals for the separation experiments.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "oblmp/linalg.hpp"

namespace oblmp {

/// Uniform sampling grid with n_points samples on [a, b], endpoints included.
struct GridSpec {
  double a = 0.0;
  double b = 4.0;
  Index n_points = 2049;

  double step() const { return (b - a) / static_cast<double>(n_points - 1); }
  Eigen::VectorXd points() const { return Eigen::VectorXd::LinSpaced(n_points, a, b); }
  void validate() const;
};

/// Which translates of a spline are kept near the ends of [a, b].
enum class BoundaryPolicy {
  /// Every translate whose support meets (a, b).
  intersecting,
  /// Only translates with at least half of their support inside [a, b].
  half_support_inside,
};

struct SplineSpec {
  double knot_step = 0.065;
  int degree = 3;
  /// Support of each atom is (degree + 1) * knot_step * support_scale;
  /// translates are always spaced knot_step apart.
  int support_scale = 1;
  BoundaryPolicy boundary = BoundaryPolicy::intersecting;

  /// Cubic B-spline basis with the given knot spacing.
  static SplineSpec basis(double knot_step) { return {knot_step, 3, 1, BoundaryPolicy::intersecting}; }
  /// Cubic B-splines of twice the basis support, translated by knot_step.
  static SplineSpec double_support(double knot_step) {
    return {knot_step, 3, 2, BoundaryPolicy::half_support_inside};
  }
};

struct Dictionary {
  Eigen::MatrixXd atoms;             ///< one sampled atom per column
  std::vector<double> support_start; ///< left end of each atom's (untruncated) support
  double support_length = 0.0;
  GridSpec grid;
  SplineSpec spec;

  Index size() const { return atoms.cols(); }
};

/// B-spline of degree knots.size() - 2 on the given non-decreasing knots,
/// by the Cox-de Boor recursion. Half-open convention on every knot span.
double cox_de_boor(std::span<const double> knots, double x);

Dictionary bspline_dictionary(const GridSpec& grid, const SplineSpec& spec);

/// eta_i(x) = (x + 1)^(-exponent_step * i), i = 1..n, one per column.
Eigen::MatrixXd background_family(const GridSpec& grid, int n, double exponent_step = 0.05);

struct SparseSignal {
  Eigen::VectorXd signal;
  std::vector<Index> indices;  ///< ascending
  Eigen::VectorXd coeffs;      ///< coeffs(i) multiplies atom indices[i]
};

struct SparseSignalOptions {
  /// Standard normal draws with |c| below this are redrawn.
  double min_abs_coeff = 0.1;
  /// Test hook: every coefficient is 1.
  bool unit_coeffs = false;
};

/// n_atoms distinct atoms chosen uniformly; deterministic in `seed`.
SparseSignal random_sparse_signal(const Eigen::MatrixXd& atoms, Index n_atoms, std::uint64_t seed,
                                  const SparseSignalOptions& opts = {});

/// Standard normal combination of the columns of `sources`, rescaled to norm
/// amplitude * reference_norm.
Eigen::VectorXd random_background_component(const Eigen::MatrixXd& sources, std::uint64_t seed,
                                            double amplitude, double reference_norm);

/// max_{i != j} |<a_i, a_j>| / (|a_i| |a_j|).
double coherence(const Eigen::MatrixXd& atoms);

/// Number of singular values above rel_tol * sigma_max.
Index numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

}  // namespace oblmp
