#include "oblmp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <random>

#include "oblmp/matrix_io.hpp"

namespace oblmp {

std::string_view to_string(BackgroundSource s) {
  return s == BackgroundSource::retained_basis ? "retained_basis" : "eta_family";
}

BackgroundSource background_source_from_string(std::string_view s) {
  if (s == "retained_basis" || s == "psi") return BackgroundSource::retained_basis;
  if (s == "eta_family" || s == "eta") return BackgroundSource::eta_family;
  throw Error("unknown background source '" + std::string(s) + "'");
}

std::uint64_t derive_seed(std::uint64_t seed, int test_id, Index index, int stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(test_id), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double relative_error(const Eigen::VectorXd& x, const Eigen::VectorXd& ref) {
  const double d = ref.norm();
  return d > 0.0 ? (x - ref).norm() / d : (x - ref).norm();
}

/// sigma_min / sigma_max of [V_sel | Psi].
double trivial_intersection_ratio(const Eigen::MatrixXd& atoms, const std::vector<Index>& selected,
                                  const BackgroundModel<double>& bg) {
  const Index k = static_cast<Index>(selected.size());
  if (k == 0) return 1.0;
  Eigen::MatrixXd m(atoms.rows(), k + bg.size());
  for (Index i = 0; i < k; ++i) m.col(i) = atoms.col(selected[static_cast<std::size_t>(i)]);
  if (bg.size() > 0) m.rightCols(bg.size()) = bg.psi().vectors();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  return s(0) > 0.0 ? s(s.size() - 1) / s(0) : 0.0;
}

nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["test_id"] = c.test_id;
  j["n_signals"] = c.n_signals;
  j["seed"] = c.seed;
  j["grid"] = {{"a", c.grid.a}, {"b", c.grid.b}, {"n_points", c.grid.n_points}};
  j["knot_step"] = c.knot_step;
  j["n_eta"] = c.n_eta;
  j["exponent_step"] = c.exponent_step;
  j["bg_tol"] = c.bg_tol;
  j["m_cap"] = c.m_cap ? nlohmann::ordered_json(*c.m_cap) : nlohmann::ordered_json(nullptr);
  j["atoms_per_signal"] = c.atoms_per_signal;
  j["background_amplitude"] = c.background_amplitude;
  j["background_source"] = std::string(to_string(c.background_source));
  j["success_threshold"] = c.success_threshold;
  j["delta"] = c.pursuit.delta ? nlohmann::ordered_json(*c.pursuit.delta) : nlohmann::ordered_json(nullptr);
  j["delta_relative"] = c.pursuit.delta_relative;
  j["delta_floor_relative"] = c.pursuit.delta_floor_relative;
  j["gamma_zero_relative"] = c.pursuit.gamma_zero_relative;
  j["max_iters"] = c.pursuit.max_iters ? nlohmann::ordered_json(*c.pursuit.max_iters)
                                       : nlohmann::ordered_json(nullptr);
  j["prop2_tol"] = kProp2Tol;
  j["prop3_tol"] = kProp3Tol;
  return j;
}

}  // namespace

nlohmann::ordered_json ExperimentReport::to_json() const {
  nlohmann::ordered_json j;
  j["test_id"] = config.test_id;
  j["n_signals"] = n_signals();
  j["n_success"] = n_success;
  j["n_baseline_success"] = n_baseline_success;
  j["propositions_hold"] = propositions_hold;
  j["config"] = config_json(config);
  j["dictionary"] = {{"atoms", dictionary.atoms},
                     {"coherence", dictionary.coherence},
                     {"background_free_coherence", dictionary.background_free_coherence},
                     {"rank", dictionary.rank},
                     {"basis_rank", dictionary.basis_rank},
                     {"joint_rank", dictionary.joint_rank}};
  j["background"] = {{"n_sources", background.n_sources},
                     {"m", background.m},
                     {"truncation_residual", background.truncation_residual}};
  j["baseline"] = {{"method", "oblique projection onto the whole dictionary"},
                   {"gram_condition", baseline_condition},
                   {"n_success", n_baseline_success},
                   {"n_fail", n_signals() - n_baseline_success}};
  auto& recs = j["records"] = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json o;
    o["index"] = r.index;
    o["seed"] = r.seed;
    o["selected_count"] = r.selected_count;
    o["relative_error"] = r.relative_error;
    o["success"] = r.success;
    o["support_recovered"] = r.support_recovered;
    o["stop_reason"] = std::string(oblmp::to_string(r.stop_reason));
    if (!r.failure.empty()) o["failure"] = r.failure;
    o["background_residual"] = r.background_residual;
    o["baseline_error"] = r.baseline_error;
    o["baseline_success"] = r.baseline_success;
    o["baseline_rank_deficient"] = r.baseline_rank_deficient;
    o["prop1_ok"] = r.prop1_ok;
    o["prop2_max"] = r.prop2_max;
    o["prop3_ratio"] = r.prop3_ratio;
    recs.push_back(std::move(o));
  }
  j["generated_at"] = generated_at;
  return j;
}

std::string report_fingerprint(const ExperimentReport& report) {
  auto j = report.to_json();
  j.erase("generated_at");
  return j.dump();
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.test_id != 1 && cfg.test_id != 2) throw Error("experiment: test id must be 1 or 2");
  if (cfg.n_signals < 0) throw Error("experiment: negative signal count");

  ExperimentReport report;
  report.config = cfg;
  report.generated_at = utc_timestamp();

  const SplineSpec basis_spec = SplineSpec::basis(cfg.knot_step);
  const SplineSpec spec = cfg.test_id == 1 ? basis_spec : SplineSpec::double_support(cfg.knot_step);
  const Dictionary dict = bspline_dictionary(cfg.grid, spec);
  const Eigen::MatrixXd eta = background_family(cfg.grid, cfg.n_eta, cfg.exponent_step);
  const auto bg = BackgroundModel<double>::from_sources(eta, cfg.bg_tol, cfg.m_cap);
  const Eigen::MatrixXd& v = dict.atoms;
  const Eigen::MatrixXd u = subtract_background(v, bg);

  report.dictionary.atoms = dict.size();
  report.dictionary.coherence = coherence(v);
  report.dictionary.background_free_coherence = coherence(u);
  report.dictionary.rank = numerical_rank(v);
  if (cfg.test_id == 1) {
    report.dictionary.basis_rank = report.dictionary.rank;
    report.dictionary.joint_rank = report.dictionary.rank;
  } else {
    const Eigen::MatrixXd basis = bspline_dictionary(cfg.grid, basis_spec).atoms;
    Eigen::MatrixXd joint(v.rows(), v.cols() + basis.cols());
    joint << v, basis;
    report.dictionary.basis_rank = numerical_rank(basis);
    report.dictionary.joint_rank = numerical_rank(joint);
  }
  report.background.n_sources = cfg.n_eta;
  report.background.m = bg.size();
  for (Index i = 0; i < eta.cols(); ++i) {
    const Eigen::VectorXd r = eta.col(i) - orthogonal_project(bg.psi(), eta.col(i));
    report.background.truncation_residual =
        std::max(report.background.truncation_residual, r.norm() / eta.col(i).norm());
  }
  report.baseline_condition = gram_condition(u);

  const Eigen::MatrixXd& bg_sources =
      cfg.background_source == BackgroundSource::retained_basis ? bg.psi().vectors() : eta;
  if (bg_sources.cols() == 0) throw Error("experiment: background model is empty");

  if (cfg.plot_dir) std::filesystem::create_directories(*cfg.plot_dir);
  const Eigen::VectorXd x = cfg.grid.points();

  for (Index s = 0; s < cfg.n_signals; ++s) {
    SignalRecord rec;
    rec.index = s;
    rec.seed = derive_seed(cfg.seed, cfg.test_id, s, 0);
    const auto sparse = random_sparse_signal(v, cfg.atoms_per_signal, rec.seed);
    const Eigen::VectorXd& f1 = sparse.signal;
    const Eigen::VectorXd f2 = random_background_component(
        bg_sources, derive_seed(cfg.seed, cfg.test_id, s, 1), cfg.background_amplitude, f1.norm());
    const Eigen::VectorXd f = f1 + f2;
    if (f2.norm() > 0.0) rec.background_residual = (f2 - orthogonal_project(bg.psi(), f2)).norm() / f2.norm();

    // Remaining candidates must stay orthogonal to every selected atom.
    StepObserver<double> observer;
    if (cfg.check_propositions) {
      observer = [&](const PursuitState<double>& st) {
        const auto& sel = st.duals.selected_indices();
        for (Index l : st.remaining) {
          const auto g = st.gammas.col(l);
          const double gn = g.norm();
          if (gn <= st.gamma_zero_tol) continue;
          for (Index i : sel) {
            const double ratio = std::abs(g.dot(v.col(i))) / (gn * v.col(i).norm());
            rec.prop2_max = std::max(rec.prop2_max, ratio);
          }
        }
      };
    }

    Eigen::VectorXd recon = Eigen::VectorXd::Zero(f.size());
    std::vector<Index> selected;
    try {
      const auto res = oblmp(v, bg, f, cfg.pursuit, observer);
      recon = res.reconstruction;
      selected = res.selected_indices;
      rec.stop_reason = res.stop_reason;
    } catch (const DependentAtom& e) {
      // Only reachable if a nonzero selection value failed to give an
      // independent dual.
      rec.prop1_ok = false;
      rec.failure = e.what();
    } catch (const Error& e) {
      rec.failure = e.what();
    }
    rec.selected_count = static_cast<Index>(selected.size());
    rec.relative_error = relative_error(recon, f1);
    rec.success = rec.failure.empty() && rec.relative_error <= cfg.success_threshold;
    rec.support_recovered = std::all_of(sparse.indices.begin(), sparse.indices.end(), [&](Index i) {
      return std::find(selected.begin(), selected.end(), i) != selected.end();
    });
    // Adding columns never raises sigma_min, so the final selection bounds every step.
    if (cfg.check_propositions) rec.prop3_ratio = trivial_intersection_ratio(v, selected, bg);

    OracleOptions loose;
    loose.require_full_rank = false;
    const auto base = oracle_oblique_projection(v, bg, f, loose);
    rec.baseline_error = relative_error(base.projection, f1);
    rec.baseline_rank_deficient = base.rank_deficient;
    rec.baseline_success = std::isfinite(rec.baseline_error) && rec.baseline_error <= cfg.success_threshold;

    if (cfg.plot_dir) {
      MatrixFile pf;
      pf.data.resize(f.size(), 6);
      pf.data << x, f, f1, f2, recon, base.projection;
      pf.column_names = {"x", "f1_plus_f2", "f1", "f2", "oblmp", "baseline"};
      pf.metadata = {{"kind", "plot"}, {"test", std::to_string(cfg.test_id)}, {"signal", std::to_string(s)}};
      char name[32];
      std::snprintf(name, sizeof(name), "signal_%03ld.csv", static_cast<long>(s));
      write_matrix_csv(*cfg.plot_dir / name, pf);
    }

    report.n_success += rec.success ? 1 : 0;
    report.n_baseline_success += rec.baseline_success ? 1 : 0;
    if (cfg.check_propositions) {
      report.propositions_hold = report.propositions_hold && rec.prop1_ok && rec.prop2_max <= kProp2Tol &&
                                 rec.prop3_ratio > kProp3Tol;
    }
    report.records.push_back(std::move(rec));
  }
  return report;
}

}  // namespace oblmp
