#include "oblmp/dictionaries.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "oblmp/errors.hpp"

namespace oblmp {

void GridSpec::validate() const {
  if (!(b > a)) throw Error("grid: need b > a");
  if (n_points < 2) throw Error("grid: need at least 2 points");
}

double cox_de_boor(std::span<const double> knots, double x) {
  const std::size_t m = knots.size();
  if (m < 2) throw Error("cox_de_boor: need at least two knots");
  const std::size_t degree = m - 2;
  // Degree-zero indicators on every span, then raise the degree in place.
  std::vector<double> b(m - 1, 0.0);
  for (std::size_t i = 0; i + 1 < m; ++i) b[i] = (knots[i] <= x && x < knots[i + 1]) ? 1.0 : 0.0;
  for (std::size_t p = 1; p <= degree; ++p) {
    for (std::size_t i = 0; i + p + 1 < m; ++i) {
      double left = 0.0;
      double right = 0.0;
      const double dl = knots[i + p] - knots[i];
      const double dr = knots[i + p + 1] - knots[i + 1];
      if (dl > 0.0) left = (x - knots[i]) / dl * b[i];
      if (dr > 0.0) right = (knots[i + p + 1] - x) / dr * b[i + 1];
      b[i] = left + right;
    }
  }
  return b[0];
}

Dictionary bspline_dictionary(const GridSpec& grid, const SplineSpec& spec) {
  grid.validate();
  if (!(spec.knot_step > 0.0)) throw Error("spline: knot_step must be positive");
  if (spec.degree < 0) throw Error("spline: negative degree");
  if (spec.support_scale < 1) throw Error("spline: support_scale must be >= 1");
  const double width = grid.b - grid.a;
  if (!(spec.knot_step * spec.support_scale < width)) {
    throw Error("spline: knot_step * support_scale must be smaller than the interval");
  }

  const double h = spec.knot_step;
  const double spacing = h * spec.support_scale;
  const double support = spacing * (spec.degree + 1);
  const int reach = (spec.degree + 1) * spec.support_scale;
  // Translate j has support [a + j h, a + j h + support].
  const int j_last = static_cast<int>(std::ceil(width / h)) - 1;

  Dictionary dict;
  dict.grid = grid;
  dict.spec = spec;
  dict.support_length = support;
  std::vector<int> translates;
  for (int j = -reach + 1; j <= j_last; ++j) {
    const double lo = grid.a + j * h;
    const double hi = lo + support;
    if (!(hi > grid.a && lo < grid.b)) continue;
    if (spec.boundary == BoundaryPolicy::half_support_inside) {
      const double centre = lo + 0.5 * support;
      if (centre < grid.a || centre > grid.b) continue;
    }
    translates.push_back(j);
  }

  const Eigen::VectorXd x = grid.points();
  dict.atoms = Eigen::MatrixXd::Zero(grid.n_points, static_cast<Index>(translates.size()));
  std::vector<double> knots(static_cast<std::size_t>(spec.degree + 2));
  for (std::size_t c = 0; c < translates.size(); ++c) {
    const double lo = grid.a + translates[c] * h;
    for (std::size_t i = 0; i < knots.size(); ++i) knots[i] = lo + static_cast<double>(i) * spacing;
    for (Index r = 0; r < x.size(); ++r) {
      if (x(r) < knots.front() || x(r) >= knots.back()) continue;
      dict.atoms(r, static_cast<Index>(c)) = cox_de_boor(knots, x(r));
    }
    dict.support_start.push_back(lo);
  }
  return dict;
}

Eigen::MatrixXd background_family(const GridSpec& grid, int n, double exponent_step) {
  grid.validate();
  if (n < 1) throw Error("background family: need n >= 1");
  const Eigen::VectorXd x = grid.points();
  Eigen::MatrixXd eta(grid.n_points, n);
  for (int i = 1; i <= n; ++i) {
    eta.col(i - 1) = (x.array() + 1.0).pow(-exponent_step * i).matrix();
  }
  return eta;
}

SparseSignal random_sparse_signal(const Eigen::MatrixXd& atoms, Index n_atoms, std::uint64_t seed,
                                  const SparseSignalOptions& opts) {
  const Index L = atoms.cols();
  if (n_atoms < 0 || n_atoms > L) throw Error("random_sparse_signal: n_atoms exceeds dictionary size");
  std::mt19937_64 rng(seed);

  // Partial Fisher-Yates.
  std::vector<Index> pool(static_cast<std::size_t>(L));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < n_atoms; ++i) {
    std::uniform_int_distribution<Index> pick(i, L - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  SparseSignal out;
  out.indices.assign(pool.begin(), pool.begin() + n_atoms);
  std::sort(out.indices.begin(), out.indices.end());

  std::normal_distribution<double> normal(0.0, 1.0);
  out.coeffs.resize(n_atoms);
  for (Index i = 0; i < n_atoms; ++i) {
    double c = 1.0;
    if (!opts.unit_coeffs) {
      do {
        c = normal(rng);
      } while (std::abs(c) < opts.min_abs_coeff);
    }
    out.coeffs(i) = c;
  }
  out.signal = Eigen::VectorXd::Zero(atoms.rows());
  for (Index i = 0; i < n_atoms; ++i) out.signal += out.coeffs(i) * atoms.col(out.indices[static_cast<std::size_t>(i)]);
  return out;
}

Eigen::VectorXd random_background_component(const Eigen::MatrixXd& sources, std::uint64_t seed,
                                            double amplitude, double reference_norm) {
  if (sources.cols() == 0) throw Error("random_background_component: no sources");
  if (amplitude == 0.0 || reference_norm == 0.0) return Eigen::VectorXd::Zero(sources.rows());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd coeffs(sources.cols());
  for (Index i = 0; i < coeffs.size(); ++i) coeffs(i) = normal(rng);
  Eigen::VectorXd f2 = sources * coeffs;
  const double n = f2.norm();
  if (!(n > 0.0)) throw Error("random_background_component: degenerate draw");
  return f2 * (amplitude * reference_norm / n);
}

double coherence(const Eigen::MatrixXd& atoms) {
  const Eigen::VectorXd norms = atoms.colwise().norm().transpose();
  Eigen::MatrixXd gram = atoms.transpose() * atoms;
  double best = 0.0;
  for (Index i = 0; i < gram.rows(); ++i) {
    for (Index j = i + 1; j < gram.cols(); ++j) {
      if (norms(i) == 0.0 || norms(j) == 0.0) continue;
      best = std::max(best, std::abs(gram(i, j)) / (norms(i) * norms(j)));
    }
  }
  return best;
}

Index numerical_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return static_cast<Index>((s.array() > rel_tol * s(0)).count());
}

}  // namespace oblmp
