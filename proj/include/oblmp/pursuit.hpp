#pragma once

// Oblique Matching Pursuit.
//
// Candidates gamma_l start as the background-free atoms u_l and are kept
// orthogonal to the span of the atoms selected so far. The next atom
// maximizes |<gamma_l, f>| / |gamma_l|^2, which is |<w_l, f>| for the dual the
// atom would receive. Because every candidate dual is orthogonal to the
// selected reconstruction atoms this equals the consistency error
// |<w_l, f - E_k f>|.
//
// Hand trace (dictionary e1, e2, e3; background (1,1,0)/sqrt2; f = (3,1,4)):
//   u = (.5,-.5,0), (-.5,.5,0), e3      values 2, 2, 4   -> select 3, c = [4]
//   gamma_1, gamma_2 unchanged           values 2, 2      -> select 1, c = [4, 2]
//   gamma_2 = u_2 + u_1 = 0                               -> exhausted
//   f^2 = (2, 0, 4), f - f^2 = (1, 1, 0) lies in the background.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "oblmp/errors.hpp"
#include "oblmp/linalg.hpp"
#include "oblmp/oblique.hpp"

namespace oblmp {

enum class TieBreak { smallest_index, largest_index };

enum class StopReason { tolerance_reached, max_iters, dictionary_exhausted };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::tolerance_reached: return "tolerance_reached";
    case StopReason::max_iters: return "max_iters";
    case StopReason::dictionary_exhausted: return "dictionary_exhausted";
  }
  return "unknown";
}

struct PursuitConfig {
  /// Absolute stopping tolerance on the selection functional. When unset the
  /// tolerance is delta_relative times the first selected value, floored at
  /// delta_floor_relative * |f| / max_l |u_l|.
  std::optional<double> delta;
  double delta_relative = 1e-8;
  double delta_floor_relative = 1e-10;
  /// Defaults to the dictionary size.
  std::optional<Index> max_iters;
  /// Candidates with |gamma_l| <= gamma_zero_relative * max_l |u_l| are never selected.
  double gamma_zero_relative = 1e-10;
  TieBreak tie_break = TieBreak::smallest_index;
  /// Values within this relative distance of the maximum count as tied.
  double tie_relative = 1e-12;

  void validate(Index dictionary_size) const {
    if (delta && !(*delta > 0.0)) throw Error("pursuit config: delta must be positive");
    if (!(delta_relative > 0.0)) throw Error("pursuit config: delta_relative must be positive");
    if (!(gamma_zero_relative > 0.0)) throw Error("pursuit config: gamma_zero_relative must be positive");
    if (max_iters && (*max_iters < 1 || *max_iters > dictionary_size)) {
      throw Error("pursuit config: max_iters must lie in [1, dictionary size]");
    }
  }
};

template <typename Scalar>
struct PursuitState {
  using Real = RealOf<Scalar>;

  Matrix<Scalar> u;       ///< background-free atoms, one per column
  Matrix<Scalar> gammas;  ///< candidate residuals; columns of selected atoms are zeroed
  std::vector<Index> remaining;
  DualSet<Scalar> duals;
  Vector<Scalar> coeffs;
  Real gamma_zero_tol = Real(0);
  Real dependence_tol = Real(0);

  Index k() const { return duals.size(); }
};

template <typename Scalar>
PursuitState<Scalar> make_pursuit_state(Matrix<Scalar> u, const PursuitConfig& cfg) {
  PursuitState<Scalar> s;
  const auto max_norm = u.cols() > 0 ? u.colwise().norm().maxCoeff() : RealOf<Scalar>(0);
  s.gamma_zero_tol = RealOf<Scalar>(cfg.gamma_zero_relative) * max_norm;
  s.dependence_tol = RealOf<Scalar>(kDependenceRelTol) * max_norm;
  s.gammas = u;
  s.u = std::move(u);
  s.remaining.resize(static_cast<std::size_t>(s.u.cols()));
  for (Index l = 0; l < s.u.cols(); ++l) s.remaining[static_cast<std::size_t>(l)] = l;
  s.coeffs.resize(0);
  return s;
}

struct Selection {
  Index index = -1;
  double value = 0.0;
};

/// Candidate values |<gamma_l, f>| / |gamma_l|^2 for the remaining atoms;
/// excluded (numerically zero) candidates get -1.
template <typename Scalar, typename DerivedF>
std::vector<double> candidate_values(const PursuitState<Scalar>& state, const Eigen::MatrixBase<DerivedF>& f) {
  std::vector<double> values(state.remaining.size(), -1.0);
  for (std::size_t i = 0; i < state.remaining.size(); ++i) {
    const auto g = state.gammas.col(state.remaining[i]);
    const auto n2 = g.squaredNorm();
    if (std::sqrt(n2) <= state.gamma_zero_tol) continue;
    values[i] = static_cast<double>(std::abs(g.dot(f)) / n2);
  }
  return values;
}

/// Picks the largest value; ties (within cfg.tie_relative) go by cfg.tie_break.
/// nullopt when no candidate is usable.
inline std::optional<Selection> pick_best(const std::vector<Index>& indices, const std::vector<double>& values,
                                          const PursuitConfig& cfg) {
  double best = -1.0;
  for (double v : values) best = std::max(best, v);
  if (best < 0.0) return std::nullopt;
  const double floor = best * (1.0 - cfg.tie_relative);
  std::optional<Selection> pick;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (values[i] < 0.0 || values[i] < floor) continue;
    const bool take = !pick || (cfg.tie_break == TieBreak::smallest_index ? indices[i] < pick->index
                                                                          : indices[i] > pick->index);
    if (take) pick = Selection{indices[i], values[i]};
  }
  return pick;
}

template <typename Scalar, typename DerivedF>
std::optional<Selection> select_next(const PursuitState<Scalar>& state, const Eigen::MatrixBase<DerivedF>& f,
                                     const PursuitConfig& cfg = {}) {
  if (f.size() != state.u.rows()) {
    throw DimensionMismatch("select_next: signal", static_cast<long>(state.u.rows()),
                            static_cast<long>(f.size()));
  }
  return pick_best(state.remaining, candidate_values(state, f), cfg);
}

/// c_i <- c_i - c_new * cross_i, then appends c_new. cross_i = <w_i^k, u_new>.
template <typename Scalar>
Vector<Scalar> update_coefficients(const Vector<Scalar>& coeffs, Scalar c_new, const Vector<Scalar>& cross) {
  if (coeffs.size() != cross.size()) {
    throw DimensionMismatch("update_coefficients", static_cast<long>(cross.size()),
                            static_cast<long>(coeffs.size()));
  }
  Vector<Scalar> out(coeffs.size() + 1);
  out.head(coeffs.size()) = coeffs - c_new * cross;
  out(coeffs.size()) = c_new;
  return out;
}

/// Same update with the cross terms taken from the duals before u_new was added.
template <typename Scalar>
Vector<Scalar> update_coefficients(const Vector<Scalar>& coeffs, Scalar c_new, const DualSet<Scalar>& ds_before,
                                   const Vector<Scalar>& u_new) {
  if (ds_before.empty()) return update_coefficients(coeffs, c_new, Vector<Scalar>(0));
  const Vector<Scalar> cross = ds_before.w().adjoint() * u_new;
  return update_coefficients(coeffs, c_new, cross);
}

/// gamma_l <- gamma_l - q_new <q_new, gamma_l> for every remaining candidate,
/// then one reorthogonalization pass against all of state.duals.q().
template <typename Scalar>
void orthogonalize_candidates(PursuitState<Scalar>& state, const Vector<Scalar>& q_new) {
  if (state.remaining.empty()) return;
  // Column gather keeps the work proportional to the remaining candidates.
  const Index n = state.gammas.rows();
  Matrix<Scalar> g(n, static_cast<Index>(state.remaining.size()));
  for (std::size_t i = 0; i < state.remaining.size(); ++i) g.col(static_cast<Index>(i)) = state.gammas.col(state.remaining[i]);
  g -= q_new * (q_new.adjoint() * g);
  if (!state.duals.empty()) {
    const auto q = state.duals.q();
    g -= q * (q.adjoint() * g);
  }
  for (std::size_t i = 0; i < state.remaining.size(); ++i) state.gammas.col(state.remaining[i]) = g.col(static_cast<Index>(i));
}

struct PursuitDiagnostics {
  double first_value = 0.0;
  double delta_used = 0.0;
  /// Largest functional value when the run stopped (0 if nothing was left to score).
  double final_max_value = 0.0;
  std::vector<double> step_values;
};

template <typename Scalar>
struct SeparationResult {
  Vector<Scalar> reconstruction;
  std::vector<Index> selected_indices;
  Vector<Scalar> coeffs;
  Index iterations = 0;
  StopReason stop_reason = StopReason::dictionary_exhausted;
  PursuitDiagnostics diagnostics;
};

/// Called after every completed step with the updated state.
template <typename Scalar>
using StepObserver = std::function<void(const PursuitState<Scalar>&)>;

template <typename Scalar, typename DerivedV, typename DerivedF>
SeparationResult<Scalar> oblmp(const Eigen::MatrixBase<DerivedV>& dict_atoms, const BackgroundModel<Scalar>& bg,
                               const Eigen::MatrixBase<DerivedF>& f, const PursuitConfig& cfg = {},
                               const StepObserver<Scalar>& observer = {}) {
  const Index L = dict_atoms.cols();
  if (L == 0) throw EmptyDictionary();
  if (f.size() != dict_atoms.rows()) {
    throw DimensionMismatch("oblmp: signal vs dictionary rows", static_cast<long>(dict_atoms.rows()),
                            static_cast<long>(f.size()));
  }
  cfg.validate(L);
  const Index max_iters = cfg.max_iters.value_or(L);
  const Vector<Scalar> signal = f;

  PursuitState<Scalar> state = make_pursuit_state<Scalar>(subtract_background(dict_atoms, bg), cfg);
  const double max_u = L > 0 ? static_cast<double>(state.u.colwise().norm().maxCoeff()) : 0.0;

  SeparationResult<Scalar> res;
  std::optional<double> delta = cfg.delta;
  while (true) {
    const auto sel = select_next(state, signal, cfg);
    if (!sel) {
      res.stop_reason = StopReason::dictionary_exhausted;
      res.diagnostics.final_max_value = 0.0;
      break;
    }
    if (!delta) {
      const double floor = cfg.delta_floor_relative * static_cast<double>(signal.norm()) / max_u;
      delta = std::max(cfg.delta_relative * sel->value, floor);
    }
    if (state.k() == 0) res.diagnostics.first_value = sel->value;
    res.diagnostics.final_max_value = sel->value;
    if (sel->value < *delta) {
      res.stop_reason = StopReason::tolerance_reached;
      break;
    }
    if (state.k() == max_iters) {
      res.stop_reason = StopReason::max_iters;
      break;
    }

    const Vector<Scalar> u_new = state.u.col(sel->index);
    const Vector<Scalar> cross =
        state.duals.empty() ? Vector<Scalar>(0) : Vector<Scalar>(state.duals.w().adjoint() * u_new);
    ExtendOptions ext;
    ext.dependence_tol = static_cast<double>(state.dependence_tol);
    state.duals.extend(u_new, sel->index, ext);
    const Scalar c_new = state.duals.w().col(state.k() - 1).dot(signal);

    state.coeffs = update_coefficients(state.coeffs, c_new, cross);

    std::erase(state.remaining, sel->index);
    state.gammas.col(sel->index).setZero();
    orthogonalize_candidates(state, Vector<Scalar>(state.duals.q().col(state.k() - 1)));
    res.diagnostics.step_values.push_back(sel->value);
    if (observer) observer(state);
  }
  res.diagnostics.delta_used = delta.value_or(0.0);
  res.selected_indices = state.duals.selected_indices();
  res.coeffs = state.coeffs;
  res.iterations = state.k();
  res.reconstruction = Vector<Scalar>::Zero(signal.size());
  for (Index i = 0; i < state.k(); ++i) {
    res.reconstruction += state.coeffs(i) * dict_atoms.col(res.selected_indices[static_cast<std::size_t>(i)]);
  }
  return res;
}

/// Optimized Orthogonal Matching Pursuit, written directly on the atoms with
/// a QR of the selected set. Shares the selection functional, tie rule and
/// stopping rule of oblmp; with an empty background both produce the same
/// selections and coefficients.
template <typename Scalar, typename DerivedV, typename DerivedF>
SeparationResult<Scalar> oomp(const Eigen::MatrixBase<DerivedV>& dict_atoms, const Eigen::MatrixBase<DerivedF>& f,
                              const PursuitConfig& cfg = {}) {
  using Real = RealOf<Scalar>;
  const Index L = dict_atoms.cols();
  if (L == 0) throw EmptyDictionary();
  if (f.size() != dict_atoms.rows()) {
    throw DimensionMismatch("oomp: signal vs dictionary rows", static_cast<long>(dict_atoms.rows()),
                            static_cast<long>(f.size()));
  }
  cfg.validate(L);
  const Index n = dict_atoms.rows();
  const Index max_iters = cfg.max_iters.value_or(L);
  const Vector<Scalar> signal = f;
  const Matrix<Scalar> v = dict_atoms;
  const Real max_v = v.colwise().norm().maxCoeff();
  const Real zero_tol = Real(cfg.gamma_zero_relative) * max_v;

  std::vector<Index> selected;
  std::vector<Index> remaining;
  for (Index l = 0; l < L; ++l) remaining.push_back(l);

  SeparationResult<Scalar> res;
  std::optional<double> delta = cfg.delta;
  while (true) {
    if (remaining.empty()) {
      res.stop_reason = StopReason::dictionary_exhausted;
      res.diagnostics.final_max_value = 0.0;
      break;
    }
    // Orthonormal basis of the selected atoms from a fresh Householder QR.
    Matrix<Scalar> basis(n, 0);
    if (!selected.empty()) {
      Matrix<Scalar> vs(n, static_cast<Index>(selected.size()));
      for (std::size_t i = 0; i < selected.size(); ++i) vs.col(static_cast<Index>(i)) = v.col(selected[i]);
      Eigen::HouseholderQR<Matrix<Scalar>> qr(vs);
      basis = qr.householderQ() * Matrix<Scalar>::Identity(n, vs.cols());
    }
    std::vector<double> values(remaining.size(), -1.0);
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      Vector<Scalar> g = v.col(remaining[i]);
      for (int pass = 0; pass < 2 && basis.cols() > 0; ++pass) g -= basis * (basis.adjoint() * g);
      const Real n2 = g.squaredNorm();
      if (std::sqrt(n2) <= zero_tol) continue;
      values[i] = static_cast<double>(std::abs(g.dot(signal)) / n2);
    }
    const auto sel = pick_best(remaining, values, cfg);
    if (!sel) {
      res.stop_reason = StopReason::dictionary_exhausted;
      res.diagnostics.final_max_value = 0.0;
      break;
    }
    if (!delta) {
      const double floor = cfg.delta_floor_relative * static_cast<double>(signal.norm()) / static_cast<double>(max_v);
      delta = std::max(cfg.delta_relative * sel->value, floor);
    }
    if (selected.empty()) res.diagnostics.first_value = sel->value;
    res.diagnostics.final_max_value = sel->value;
    if (sel->value < *delta) {
      res.stop_reason = StopReason::tolerance_reached;
      break;
    }
    if (static_cast<Index>(selected.size()) == max_iters) {
      res.stop_reason = StopReason::max_iters;
      break;
    }
    selected.push_back(sel->index);
    std::erase(remaining, sel->index);
    res.diagnostics.step_values.push_back(sel->value);
  }

  res.diagnostics.delta_used = delta.value_or(0.0);
  res.selected_indices = selected;
  res.iterations = static_cast<Index>(selected.size());
  if (selected.empty()) {
    res.coeffs = Vector<Scalar>(0);
    res.reconstruction = Vector<Scalar>::Zero(n);
    return res;
  }
  Matrix<Scalar> vs(n, static_cast<Index>(selected.size()));
  for (std::size_t i = 0; i < selected.size(); ++i) vs.col(static_cast<Index>(i)) = v.col(selected[i]);
  res.coeffs = vs.colPivHouseholderQr().solve(signal);
  res.reconstruction = vs * res.coeffs;
  return res;
}

}  // namespace oblmp
