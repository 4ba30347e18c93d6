#include "oblmp/properties.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <sstream>

#include "oblmp/pursuit.hpp"

namespace oblmp {
namespace {

using cd = std::complex<double>;

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t property, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(property), static_cast<std::uint32_t>(index)};
    gen_.seed(seq);
  }

  Index uniform(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(gen_); }
  double real() { return normal_(gen_); }

  template <typename S>
  S scalar() {
    if constexpr (std::is_same_v<S, cd>) {
      const double re = real();
      return {re, real()};
    } else {
      return real();
    }
  }

  template <typename S>
  Matrix<S> matrix(Index rows, Index cols) {
    Matrix<S> m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = scalar<S>();
    return m;
  }

  template <typename S>
  Vector<S> vector(Index n) {
    return matrix<S>(n, 1).col(0);
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct Tracker {
  PropertyOutcome out;

  Tracker(std::string name, double tol) {
    out.name = std::move(name);
    out.tolerance = tol;
  }

  void record(long case_index, double value) {
    ++out.cases;
    if (!(value <= out.tolerance)) {
      if (out.passed) out.failing_case = case_index;
      out.passed = false;
    }
    if (std::isnan(value) || value > out.worst) out.worst = value;
  }

  void fail(long case_index, const std::string& why) {
    ++out.cases;
    if (out.passed) {
      out.failing_case = case_index;
      out.detail = why;
    }
    out.passed = false;
  }
};

long case_count(const VerifyConfig& cfg, long base) {
  return std::max(1L, static_cast<long>(std::lround(base * cfg.scale)));
}

double rel(double err, double ref) { return ref > 0.0 ? err / ref : err; }

// Random problem: dictionary V (n x L), background of m vectors, and
// background-free atoms U with Gram condition at most max_cond. Dimensions
// stay within n <= 50, and L <= 10 unless asked otherwise.
template <typename S>
struct Instance {
  Matrix<S> v;
  BackgroundModel<S> bg;
  Matrix<S> u;
};

template <typename S>
Instance<S> random_instance(Rng& rng, Index max_atoms = 10, double max_cond = 1e6) {
  while (true) {
    const Index L = rng.uniform(1, max_atoms);
    const Index m = rng.uniform(0, 3);
    const Index n = rng.uniform(L + m + 1, 50);
    Instance<S> inst;
    inst.v = rng.matrix<S>(n, L);
    // Some instances get coherent atoms.
    if (L > 1 && rng.uniform(0, 3) == 0) {
      const double mix = 0.5 + 0.45 * std::abs(rng.real()) / (1.0 + std::abs(rng.real()));
      for (Index j = 1; j < L; ++j) inst.v.col(j) = mix * inst.v.col(0) + (1.0 - mix) * inst.v.col(j);
    }
    inst.bg = m > 0 ? BackgroundModel<S>::from_sources(rng.matrix<S>(n, m)) : BackgroundModel<S>::empty(n);
    inst.u = subtract_background(inst.v, inst.bg);
    if (gram_condition(inst.u) <= max_cond) return inst;
  }
}

template <typename S>
DualSet<S> build_duals(const Matrix<S>& u, const VerifyConfig& cfg) {
  ExtendOptions opts;
  opts.fault_flip_update_sign = cfg.inject_sign_fault;
  DualSet<S> ds;
  for (Index j = 0; j < u.cols(); ++j) ds.extend(Vector<S>(u.col(j)), j, opts);
  return ds;
}

template <typename S>
double biorthogonality_defect(const DualSet<S>& ds) {
  const Matrix<S> g = ds.w().adjoint() * ds.u();
  return (g - Matrix<S>::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

// -------------------------------------------------------------------------

PropertyOutcome inner_hermitian(const VerifyConfig& cfg) {
  Tracker t("inner_hermitian", 1e-12);
  for (long c = 0; c < case_count(cfg, 1000); ++c) {
    Rng rng(cfg.seed, 1, static_cast<std::uint64_t>(c));
    const Index n = rng.uniform(1, 50);
    const Vector<cd> f = rng.vector<cd>(n);
    const Vector<cd> g = rng.vector<cd>(n);
    const cd a = inner(f, g);
    const cd b = std::conj(inner(g, f));
    t.record(c, rel(std::abs(a - b), f.norm() * g.norm()));
    // Conjugate-linear in the first slot.
    const cd s(0.0, 1.0);
    const Vector<cd> sf = s * f;
    t.record(c, rel(std::abs(inner(sf, g) - std::conj(s) * a), f.norm() * g.norm()));
  }
  return t.out;
}

PropertyOutcome projector_idempotent(const VerifyConfig& cfg) {
  Tracker t("projector_idempotent", 1e-10);
  for (long c = 0; c < case_count(cfg, 500); ++c) {
    Rng rng(cfg.seed, 2, static_cast<std::uint64_t>(c));
    const Index n = rng.uniform(2, 50);
    const Index m = rng.uniform(0, n);
    const auto basis = mgs_orthonormalize(rng.matrix<double>(n, m));
    const Vector<double> f = rng.vector<double>(n);
    const Vector<double> pf = orthogonal_project(basis, f);
    const Vector<double> ppf = orthogonal_project(basis, pf);
    t.record(c, rel((ppf - pf).norm(), f.norm()));
    if (!basis.empty()) t.record(c, rel((basis.vectors().transpose() * (f - pf)).cwiseAbs().maxCoeff(), f.norm()));
  }
  return t.out;
}

PropertyOutcome mgs_orthonormal(const VerifyConfig& cfg) {
  Tracker t("mgs_orthonormal", 1e-10);
  for (long c = 0; c < case_count(cfg, 1000); ++c) {
    Rng rng(cfg.seed, 3, static_cast<std::uint64_t>(c));
    const Index n = rng.uniform(1, 40);
    const Index cols = rng.uniform(0, 12);
    Matrix<double> vs = rng.matrix<double>(n, cols);
    // Rank-deficient inputs: repeat or combine earlier columns.
    for (Index j = 1; j < cols; ++j) {
      const Index r = rng.uniform(0, 3);
      if (r == 0) vs.col(j) = vs.col(rng.uniform(0, j - 1)) * 2.0;
      if (r == 1) vs.col(j) = vs.col(0) - vs.col(j - 1);
    }
    const auto set = mgs_orthonormalize(vs);
    if (set.size() > std::min(n, cols)) t.fail(c, "more vectors than the input rank allows");
    t.record(c, static_cast<double>(set.orthonormality_defect()));
    // The retained span reproduces every input column.
    if (cols > 0) {
      const double scale = vs.colwise().norm().maxCoeff();
      for (Index j = 0; j < cols; ++j) {
        const Vector<double> r = vs.col(j) - orthogonal_project(set, Vector<double>(vs.col(j)));
        if (r.norm() > 1e-7 * std::max(scale, 1e-300) && scale > 0) t.fail(c, "input column outside the retained span");
      }
    }
  }
  return t.out;
}

PropertyOutcome mgs_reorthogonalization(const VerifyConfig& cfg) {
  Tracker t("mgs_reorthogonalization", 1e-10);
  for (long c = 0; c < case_count(cfg, 200); ++c) {
    Rng rng(cfg.seed, 4, static_cast<std::uint64_t>(c));
    const Index n = rng.uniform(6, 50);
    const Index k = rng.uniform(2, 5);
    const Vector<double> base = rng.vector<double>(n).normalized();
    Matrix<double> vs(n, k);
    // Pairwise coherence about 1 - 1e-6.
    for (Index j = 0; j < k; ++j) {
      Vector<double> p = rng.vector<double>(n);
      p -= base * base.dot(p);
      vs.col(j) = (base + 1e-3 * p.normalized()).normalized();
    }
    const Matrix<double> g0 = vs.transpose() * vs;
    double coh = 0.0;
    for (Index i = 0; i < k; ++i)
      for (Index j = i + 1; j < k; ++j) coh = std::max(coh, g0(i, j));
    if (coh < 1.0 - 1e-5) t.fail(c, "generator produced low coherence");
    const auto set = mgs_orthonormalize(vs);
    if (set.size() != k) t.fail(c, "coherent but independent vector dropped");
    t.record(c, static_cast<double>(set.orthonormality_defect()));
  }
  return t.out;
}

PropertyOutcome biorthogonality(const VerifyConfig& cfg) {
  Tracker t("biorthogonality", 1e-8);
  for (long c = 0; c < case_count(cfg, 500); ++c) {
    Rng rng(cfg.seed, 5, static_cast<std::uint64_t>(c));
    const auto inst = random_instance<double>(rng);
    const auto ds = build_duals(inst.u, cfg);
    t.record(c, biorthogonality_defect(ds));
    // q must be orthonormal to 1e-10, i.e. 100x tighter than the tracker tolerance.
    const Matrix<double> qtq = ds.q().transpose() * ds.q();
    t.record(c, (qtq - Matrix<double>::Identity(ds.size(), ds.size())).cwiseAbs().maxCoeff() * 100.0);
    // Duals stay inside span{q}.
    const Matrix<double> w = ds.w();
    const Matrix<double> resid = w - ds.q() * (ds.q().transpose() * w);
    t.record(c, rel(resid.norm(), w.norm()));
  }
  return t.out;
}

template <typename S>
PropertyOutcome oracle_duals_match(const VerifyConfig& cfg, const char* name, std::uint64_t pid) {
  Tracker t(name, 1e-8);
  for (long c = 0; c < case_count(cfg, 500); ++c) {
    Rng rng(cfg.seed, pid, static_cast<std::uint64_t>(c));
    const auto inst = random_instance<S>(rng);
    const auto ds = build_duals(inst.u, cfg);
    const Matrix<S> w_oracle = oracle_duals(inst.u);
    double worst = 0.0;
    for (Index j = 0; j < w_oracle.cols(); ++j) {
      worst = std::max(worst, rel((ds.w().col(j) - w_oracle.col(j)).norm(), w_oracle.col(j).norm()));
    }
    t.record(c, worst);
  }
  return t.out;
}

// Idempotency, annihilation, fixed points and consistency of E = sum v_i <w_i, .>.
PropertyOutcome oblique_projector(const VerifyConfig& cfg, const std::string& which) {
  Tracker t("oblique_" + which, 1e-8);
  for (long c = 0; c < case_count(cfg, 300); ++c) {
    Rng rng(cfg.seed, 7, static_cast<std::uint64_t>(c));
    const auto inst = random_instance<double>(rng);
    const auto ds = build_duals(inst.u, cfg);
    const Vector<double> f = rng.vector<double>(inst.v.rows());
    const Vector<double> ef = apply_oblique(ds, inst.v, f);
    if (which == "idempotent") {
      t.record(c, rel((apply_oblique(ds, inst.v, ef) - ef).norm(), f.norm()));
    } else if (which == "annihilation") {
      for (Index i = 0; i < inst.bg.size(); ++i) {
        t.record(c, apply_oblique(ds, inst.v, Vector<double>(inst.bg.psi().vector(i))).norm());
      }
    } else if (which == "fixed_points") {
      for (Index j = 0; j < inst.v.cols(); ++j) {
        const Vector<double> vj = inst.v.col(j);
        t.record(c, rel((apply_oblique(ds, inst.v, vj) - vj).norm(), vj.norm()));
      }
    } else {
      for (Index i = 0; i < ds.size(); ++i) {
        const Vector<double> wi = ds.w().col(i);
        t.record(c, rel(std::abs(wi.dot(ef) - wi.dot(f)), f.norm() * wi.norm()));
      }
    }
  }
  return t.out;
}

// Pursuit instances: larger dictionaries, signal mixing a sparse part, a
// background part and a little generic content.
struct PursuitInstance {
  Instance<double> inst;
  Vector<double> f;
};

PursuitInstance random_pursuit_instance(Rng& rng, bool with_background = true) {
  PursuitInstance p;
  while (true) {
    p.inst = random_instance<double>(rng);
    if (with_background || p.inst.bg.empty()) break;
    p.inst.bg = BackgroundModel<double>::empty(p.inst.v.rows());
    p.inst.u = p.inst.v;
    break;
  }
  const Index n = p.inst.v.rows();
  const Index L = p.inst.v.cols();
  p.f = Vector<double>::Zero(n);
  const Index s = rng.uniform(1, L);
  for (Index i = 0; i < s; ++i) p.f += rng.real() * p.inst.v.col(rng.uniform(0, L - 1));
  for (Index i = 0; i < p.inst.bg.size(); ++i) p.f += rng.real() * p.inst.bg.psi().vector(i);
  if (rng.uniform(0, 1) == 0) p.f += 0.05 * rng.vector<double>(n);
  return p;
}

PropertyOutcome propositions(const VerifyConfig& cfg, const std::string& which) {
  const double tol = which == "prop1_independence" ? 0.0 : 1e-8;
  Tracker t(which, tol);
  for (long c = 0; c < case_count(cfg, 300); ++c) {
    Rng rng(cfg.seed, 8, static_cast<std::uint64_t>(c));
    const auto p = random_pursuit_instance(rng);
    const auto& v = p.inst.v;
    double prop2 = 0.0;
    StepObserver<double> obs = [&](const PursuitState<double>& st) {
      for (Index l : st.remaining) {
        const auto g = st.gammas.col(l);
        const double gn = g.norm();
        if (gn <= st.gamma_zero_tol) continue;
        for (Index sel : st.duals.selected_indices()) {
          prop2 = std::max(prop2, std::abs(g.dot(v.col(sel))) / (gn * v.col(sel).norm()));
        }
      }
    };
    SeparationResult<double> res;
    try {
      res = oblmp(v, p.inst.bg, p.f, PursuitConfig{}, obs);
    } catch (const DependentAtom& e) {
      if (which == "prop1_independence") t.fail(c, e.what());
      continue;
    }
    if (which == "prop1_independence") {
      t.record(c, 0.0);
    } else if (which == "prop2_orthogonality") {
      t.record(c, prop2);
    } else {
      const Index k = res.iterations;
      Matrix<double> joint(v.rows(), k + p.inst.bg.size());
      for (Index i = 0; i < k; ++i) joint.col(i) = v.col(res.selected_indices[static_cast<std::size_t>(i)]);
      if (!p.inst.bg.empty()) joint.rightCols(p.inst.bg.size()) = p.inst.bg.psi().vectors();
      if (joint.cols() == 0) {
        t.record(c, 0.0);
        continue;
      }
      Eigen::JacobiSVD<Matrix<double>> svd(joint);
      const auto& s = svd.singularValues();
      const double ratio = s(s.size() - 1) / s(0);
      // Recorded as the shortfall below the threshold, so 0 means the property holds.
      t.record(c, ratio > 1e-8 ? 0.0 : 1.0);
    }
  }
  return t.out;
}

PropertyOutcome criterion_equivalence(const VerifyConfig& cfg) {
  Tracker t("criterion_equivalence", 0.0);
  PursuitConfig pc;
  long c = 0;
  for (long inst_no = 0; c < case_count(cfg, 200); ++inst_no) {
    Rng rng(cfg.seed, 9, static_cast<std::uint64_t>(inst_no));
    const auto p = random_pursuit_instance(rng);
    auto state = make_pursuit_state<double>(p.inst.u, pc);
    const Vector<double> f = p.f;
    double first = 0.0;
    // Walk the pursuit and compare both criteria at every step.
    while (c < case_count(cfg, 200)) {
      const auto sel = select_next(state, f, pc);
      if (!sel) break;
      // Only steps the pursuit would take; below delta both criteria score noise.
      if (state.k() == 0) first = sel->value;
      if (sel->value < pc.delta_relative * first) break;
      Matrix<double> recon(f.size(), state.k());
      for (Index i = 0; i < state.k(); ++i) recon.col(i) = p.inst.v.col(state.duals.selected_indices()[static_cast<std::size_t>(i)]);
      const Vector<double> resid = f - apply_oblique(state.duals, recon, f);
      std::vector<double> values(state.remaining.size(), -1.0);
      for (std::size_t i = 0; i < state.remaining.size(); ++i) {
        const auto g = state.gammas.col(state.remaining[i]);
        const double n2 = g.squaredNorm();
        if (std::sqrt(n2) <= state.gamma_zero_tol) continue;
        values[i] = std::abs(g.dot(resid)) / n2;
      }
      const auto alt = pick_best(state.remaining, values, pc);
      if (!alt || alt->index != sel->index) {
        std::ostringstream os;
        os << "instance " << inst_no << ": functional picks " << sel->index << ", residual criterion picks "
           << (alt ? alt->index : -1);
        os << " (value " << sel->value << ", alt " << (alt ? alt->value : -1.0) << ", step " << state.k() << ")";
        t.fail(c, os.str());
      } else {
        t.record(c, 0.0);
      }
      ++c;
      const Vector<double> u_new = state.u.col(sel->index);
      const Vector<double> cross =
          state.duals.empty() ? Vector<double>(0) : Vector<double>(state.duals.w().transpose() * u_new);
      ExtendOptions ext;
      ext.dependence_tol = state.dependence_tol;
      state.duals.extend(u_new, sel->index, ext);
      state.coeffs = update_coefficients(state.coeffs, state.duals.w().col(state.k() - 1).dot(f), cross);
      std::erase(state.remaining, sel->index);
      state.gammas.col(sel->index).setZero();
      orthogonalize_candidates(state, Vector<double>(state.duals.q().col(state.k() - 1)));
    }
  }
  return t.out;
}

PropertyOutcome oomp_reduction(const VerifyConfig& cfg) {
  Tracker t("oomp_reduction", 1e-10);
  for (long c = 0; c < case_count(cfg, 100); ++c) {
    Rng rng(cfg.seed, 10, static_cast<std::uint64_t>(c));
    const auto p = random_pursuit_instance(rng, false);
    const auto bg = BackgroundModel<double>::empty(p.inst.v.rows());
    const auto a = oblmp(p.inst.v, bg, p.f);
    const auto b = oomp<double>(p.inst.v, p.f);
    if (a.selected_indices != b.selected_indices) {
      t.fail(c, "selection sequences differ");
      continue;
    }
    t.record(c, rel((a.coeffs - b.coeffs).cwiseAbs().maxCoeff(), std::max(1.0, b.coeffs.cwiseAbs().maxCoeff())));
  }
  return t.out;
}

PropertyOutcome oracle_reconstruction(const VerifyConfig& cfg) {
  Tracker t("oracle_reconstruction", 1e-7);
  for (long c = 0; c < case_count(cfg, 500); ++c) {
    Rng rng(cfg.seed, 11, static_cast<std::uint64_t>(c));
    const auto p = random_pursuit_instance(rng);
    const auto res = oblmp(p.inst.v, p.inst.bg, p.f);
    Matrix<double> sel(p.f.size(), res.iterations);
    for (Index i = 0; i < res.iterations; ++i) sel.col(i) = p.inst.v.col(res.selected_indices[static_cast<std::size_t>(i)]);
    const auto oracle = oracle_oblique_projection(sel, p.inst.bg, p.f);
    if (oracle.gram_condition > 1e8) continue;
    t.record(c, rel((res.reconstruction - oracle.projection).norm(), std::max(oracle.projection.norm(), 1e-300)));
  }
  return t.out;
}

PropertyOutcome monotone_consistency(const VerifyConfig& cfg) {
  Tracker t("monotone_consistency", 1e-8);
  for (long c = 0; c < case_count(cfg, 200); ++c) {
    Rng rng(cfg.seed, 12, static_cast<std::uint64_t>(c));
    const auto p = random_pursuit_instance(rng);
    double worst = 0.0;
    StepObserver<double> obs = [&](const PursuitState<double>& st) {
      Vector<double> fk = Vector<double>::Zero(p.f.size());
      for (Index i = 0; i < st.k(); ++i) fk += st.coeffs(i) * p.inst.v.col(st.duals.selected_indices()[static_cast<std::size_t>(i)]);
      const Vector<double> r = p.f - fk;
      for (Index i = 0; i < st.k(); ++i) {
        const auto wi = st.duals.w().col(i);
        worst = std::max(worst, rel(std::abs(wi.dot(r)), p.f.norm() * wi.norm()));
      }
    };
    oblmp(p.inst.v, p.inst.bg, p.f, PursuitConfig{}, obs);
    t.record(c, worst);
  }
  return t.out;
}

using Runner = std::function<PropertyOutcome(const VerifyConfig&)>;

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> r = {
      {"inner_hermitian", inner_hermitian},
      {"projector_idempotent", projector_idempotent},
      {"mgs_orthonormal", mgs_orthonormal},
      {"mgs_reorthogonalization", mgs_reorthogonalization},
      {"biorthogonality", biorthogonality},
      {"oracle_duals", [](const VerifyConfig& c) { return oracle_duals_match<double>(c, "oracle_duals", 6); }},
      {"oracle_duals_complex",
       [](const VerifyConfig& c) { return oracle_duals_match<cd>(c, "oracle_duals_complex", 13); }},
      {"oblique_idempotent", [](const VerifyConfig& c) { return oblique_projector(c, "idempotent"); }},
      {"oblique_annihilation", [](const VerifyConfig& c) { return oblique_projector(c, "annihilation"); }},
      {"oblique_fixed_points", [](const VerifyConfig& c) { return oblique_projector(c, "fixed_points"); }},
      {"oblique_consistency", [](const VerifyConfig& c) { return oblique_projector(c, "consistency"); }},
      {"prop1_independence", [](const VerifyConfig& c) { return propositions(c, "prop1_independence"); }},
      {"prop2_orthogonality", [](const VerifyConfig& c) { return propositions(c, "prop2_orthogonality"); }},
      {"prop3_trivial_intersection",
       [](const VerifyConfig& c) { return propositions(c, "prop3_trivial_intersection"); }},
      {"criterion_equivalence", criterion_equivalence},
      {"oomp_reduction", oomp_reduction},
      {"oracle_reconstruction", oracle_reconstruction},
      {"monotone_consistency", monotone_consistency},
  };
  return r;
}

}  // namespace

std::vector<std::string> property_names() {
  std::vector<std::string> names;
  for (const auto& [n, _] : registry()) names.push_back(n);
  return names;
}

PropertyOutcome run_property(const std::string& name, const VerifyConfig& cfg) {
  for (const auto& [n, run] : registry()) {
    if (n != name) continue;
    PropertyOutcome out;
    try {
      out = run(cfg);
    } catch (const Error& e) {
      out.name = name;
      out.passed = false;
      out.detail = std::string("unexpected error: ") + e.what();
    }
    if (!out.passed && out.detail.empty()) {
      std::ostringstream os;
      os << "worst " << out.worst << " exceeds " << out.tolerance;
      out.detail = os.str();
    }
    return out;
  }
  throw Error("unknown property: " + name);
}

std::vector<PropertyOutcome> run_property_suite(const VerifyConfig& cfg) {
  std::vector<PropertyOutcome> out;
  for (const auto& name : property_names()) out.push_back(run_property(name, cfg));
  return out;
}

}  // namespace oblmp
