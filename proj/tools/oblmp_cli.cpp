// oblmp: separate signals from a known background, run the spline
// experiments, generate dictionaries and run the invariant suites.
//
// Every option can also be set through an environment variable named
// OBLMP_<OPTION>, e.g. OBLMP_MAX_ITERS=10. The command line wins over the
// environment.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "oblmp/experiment.hpp"
#include "oblmp/matrix_io.hpp"
#include "oblmp/properties.hpp"
#include "oblmp/separate.hpp"

namespace {

enum Exit : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kNumerical = 3,
  kVerification = 4,
  kDimension = 5,
  kEmptyDictionary = 6,
};

struct PursuitFlags {
  std::optional<double> delta;
  double delta_relative = 1e-8;
  std::optional<oblmp::Index> max_iters;
  oblmp::Index m_cap = -1;  // -1: subcommand default, 0: no cap
  double bg_tol = oblmp::kDefaultRedundancyTol;

  oblmp::PursuitConfig pursuit() const {
    oblmp::PursuitConfig pc;
    pc.delta = delta;
    pc.delta_relative = delta_relative;
    pc.max_iters = max_iters;
    return pc;
  }

  std::optional<oblmp::Index> cap(std::optional<oblmp::Index> fallback) const {
    if (m_cap < 0) return fallback;
    if (m_cap == 0) return std::nullopt;
    return m_cap;
  }
};

void add_pursuit_flags(CLI::App* app, PursuitFlags& f) {
  app->add_option("--delta", f.delta, "absolute stopping tolerance on the selection functional")
      ->envname("OBLMP_DELTA")
      ->check(CLI::PositiveNumber);
  app->add_option("--delta-relative", f.delta_relative, "stopping tolerance relative to the first selected value")
      ->envname("OBLMP_DELTA_RELATIVE")
      ->check(CLI::PositiveNumber);
  app->add_option("--max-iters", f.max_iters, "maximum number of selected atoms")
      ->envname("OBLMP_MAX_ITERS")
      ->check(CLI::PositiveNumber);
  app->add_option("--m-cap", f.m_cap, "cap on the background basis size (0: no cap)")
      ->envname("OBLMP_M_CAP")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--bg-tol", f.bg_tol, "relative redundancy tolerance for the background basis")
      ->envname("OBLMP_BG_TOL")
      ->check(CLI::PositiveNumber);
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw oblmp::IoError("cannot write " + out);
  f << text << '\n';
  if (!f) throw oblmp::IoError("write failed: " + out);
}

void emit_matrix(const oblmp::MatrixFile& m, const std::string& out) {
  if (out.empty() || out == "-") {
    oblmp::write_matrix_csv(std::cout, m);
  } else {
    oblmp::write_matrix_csv(std::filesystem::path(out), m);
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oblique matching pursuit: signal splitting against a known background"};
  app.require_subcommand(1);

  std::string out;
  std::uint64_t seed = 1;
  int grid_points = 2049;
  double knot_step = 0.065;

  // separate
  auto* sep = app.add_subcommand("separate", "split a signal; writes a JSON result");
  std::string signal_path, dict_path, bg_path;
  PursuitFlags sep_flags;
  sep->add_option("signal", signal_path, "signal file (one column)")->required();
  sep->add_option("dictionary", dict_path, "dictionary file (one atom per column)")->required();
  sep->add_option("background", bg_path, "background spanning set (one vector per column)")->required();
  add_pursuit_flags(sep, sep_flags);
  sep->add_option("--out", out, "output file (default stdout)")->envname("OBLMP_OUT");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a spline separation experiment");
  int test_id = 1;
  oblmp::Index n_signals = 100;
  double success_threshold = 1e-2;
  double amplitude = 1.0;
  std::string plot_dir;
  std::string bg_source = "retained_basis";
  PursuitFlags exp_flags;
  exp->add_option("test_id", test_id, "1: B-spline basis, 2: double-support dictionary")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  exp->add_option("--n-signals", n_signals, "number of random signals")
      ->envname("OBLMP_N_SIGNALS")
      ->check(CLI::PositiveNumber);
  exp->add_option("--seed", seed, "run seed")->envname("OBLMP_SEED");
  exp->add_option("--success-threshold", success_threshold, "relative error counted as a success")
      ->envname("OBLMP_SUCCESS_THRESHOLD")
      ->check(CLI::PositiveNumber);
  exp->add_option("--grid-points", grid_points, "samples on [0,4]")
      ->envname("OBLMP_GRID_POINTS")
      ->check(CLI::Range(2, 1 << 24));
  exp->add_option("--knot-step", knot_step, "spline knot spacing")
      ->envname("OBLMP_KNOT_STEP")
      ->check(CLI::PositiveNumber);
  exp->add_option("--amplitude", amplitude, "background norm relative to the sparse part")
      ->envname("OBLMP_AMPLITUDE")
      ->check(CLI::NonNegativeNumber);
  exp->add_option("--background-sources", bg_source,
                  "draw backgrounds from the retained basis (retained_basis) or from all eta_i (eta_family)")
      ->envname("OBLMP_BACKGROUND_SOURCES")
      ->check(CLI::IsMember({"retained_basis", "eta_family", "psi", "eta"}));
  exp->add_option("--plot-data", plot_dir, "write per-signal plot columns into this directory")
      ->envname("OBLMP_PLOT_DATA");
  add_pursuit_flags(exp, exp_flags);
  exp->add_option("--out", out, "report file (default stdout)")->envname("OBLMP_OUT");

  // dict-gen
  auto* gen = app.add_subcommand("dict-gen", "write a sampled dictionary");
  std::string kind;
  int n_eta = 50;
  gen->add_option("kind", kind, "bspline, bspline2x or background")
      ->required()
      ->check(CLI::IsMember({"bspline", "bspline2x", "background"}));
  gen->add_option("--grid-points", grid_points, "samples on [0,4]")
      ->envname("OBLMP_GRID_POINTS")
      ->check(CLI::Range(2, 1 << 24));
  gen->add_option("--knot-step", knot_step, "spline knot spacing")
      ->envname("OBLMP_KNOT_STEP")
      ->check(CLI::PositiveNumber);
  gen->add_option("--n-eta", n_eta, "number of background functions")
      ->envname("OBLMP_N_ETA")
      ->check(CLI::PositiveNumber);
  gen->add_option("--out", out, "output file (default stdout)")->envname("OBLMP_OUT");

  // verify
  auto* ver = app.add_subcommand("verify", "run the randomized invariant suites");
  double scale = 1.0;
  bool inject_fault = false;
  std::string only;
  ver->add_option("--seed", seed, "suite seed")->envname("OBLMP_SEED");
  ver->add_option("--scale", scale, "multiplier on the number of cases")
      ->envname("OBLMP_SCALE")
      ->check(CLI::PositiveNumber);
  ver->add_option("--property", only, "run a single property")->envname("OBLMP_PROPERTY");
  ver->add_flag("--inject-fault", inject_fault, "flip the sign of the dual update")->envname("OBLMP_INJECT_FAULT");
  ver->add_option("--out", out, "JSON summary file")->envname("OBLMP_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*sep) {
      oblmp::SeparateOptions opts;
      opts.pursuit = sep_flags.pursuit();
      opts.bg_tol = sep_flags.bg_tol;
      opts.m_cap = sep_flags.cap(std::nullopt);
      const auto inputs = oblmp::load_separate_inputs(signal_path, dict_path, bg_path);
      emit(oblmp::separate(inputs, opts).dump(2), out);
      return kOk;
    }

    if (*exp) {
      oblmp::ExperimentConfig cfg;
      cfg.test_id = test_id;
      cfg.n_signals = n_signals;
      cfg.seed = seed;
      cfg.success_threshold = success_threshold;
      cfg.grid.n_points = grid_points;
      cfg.knot_step = knot_step;
      cfg.background_amplitude = amplitude;
      cfg.background_source = oblmp::background_source_from_string(bg_source);
      cfg.bg_tol = exp_flags.bg_tol;
      cfg.m_cap = exp_flags.cap(cfg.m_cap);
      cfg.pursuit = exp_flags.pursuit();
      if (!plot_dir.empty()) cfg.plot_dir = plot_dir;
      const auto report = oblmp::run_experiment(cfg);
      emit(report.to_json().dump(2), out);
      std::cerr << "test " << test_id << ": " << report.n_success << "/" << report.n_signals()
                << " separated, baseline " << report.n_baseline_success << "/" << report.n_signals()
                << ", propositions " << (report.propositions_hold ? "hold" : "VIOLATED") << '\n';
      return report.propositions_hold ? kOk : kNumerical;
    }

    if (*gen) {
      oblmp::GridSpec grid;
      grid.n_points = grid_points;
      oblmp::MatrixFile m;
      m.metadata["kind"] = kind;
      m.metadata["a"] = fmt(grid.a);
      m.metadata["b"] = fmt(grid.b);
      if (kind == "background") {
        m.data = oblmp::background_family(grid, n_eta, 0.05);
        m.column_names = oblmp::numbered_columns("eta", n_eta);
        m.metadata["exponent_step"] = "0.05";
      } else {
        const auto spec = kind == "bspline" ? oblmp::SplineSpec::basis(knot_step)
                                            : oblmp::SplineSpec::double_support(knot_step);
        const auto dict = oblmp::bspline_dictionary(grid, spec);
        m.data = dict.atoms;
        m.column_names = oblmp::numbered_columns("atom", dict.size());
        m.metadata["knot_step"] = fmt(knot_step);
        m.metadata["support_scale"] = std::to_string(spec.support_scale);
        m.metadata["stride"] = fmt(knot_step);
        m.metadata["boundary"] =
            spec.boundary == oblmp::BoundaryPolicy::half_support_inside ? "half_support_inside" : "intersecting";
      }
      emit_matrix(m, out);
      return kOk;
    }

    if (*ver) {
      oblmp::VerifyConfig vc;
      vc.seed = seed;
      vc.scale = scale;
      vc.inject_sign_fault = inject_fault;
      std::vector<oblmp::PropertyOutcome> results;
      if (only.empty()) {
        results = oblmp::run_property_suite(vc);
      } else {
        results.push_back(oblmp::run_property(only, vc));
      }
      bool all = true;
      nlohmann::ordered_json summary = nlohmann::ordered_json::array();
      for (const auto& r : results) {
        all = all && r.passed;
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  cases=" << r.cases << " worst=" << r.worst
                  << " tol=" << r.tolerance;
        if (!r.passed) {
          std::cout << "  seed=" << seed << " case=" << r.failing_case << "  " << r.detail;
        }
        std::cout << '\n';
        summary.push_back({{"name", r.name},
                           {"passed", r.passed},
                           {"cases", r.cases},
                           {"worst", r.worst},
                           {"tolerance", r.tolerance},
                           {"seed", seed},
                           {"failing_case", r.failing_case},
                           {"detail", r.detail}});
      }
      if (!out.empty()) emit(summary.dump(2), out);
      return all ? kOk : kVerification;
    }
  } catch (const oblmp::ParseError& e) {
    std::cerr << "oblmp: parse error: " << e.what() << '\n';
    return kIo;
  } catch (const oblmp::IoError& e) {
    std::cerr << "oblmp: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "oblmp: " << e.what() << '\n';
    return kIo;
  } catch (const oblmp::DimensionMismatch& e) {
    std::cerr << "oblmp: " << e.what() << '\n';
    return kDimension;
  } catch (const oblmp::EmptyDictionary& e) {
    std::cerr << "oblmp: " << e.what() << '\n';
    return kEmptyDictionary;
  } catch (const oblmp::DependentAtom& e) {
    std::cerr << "oblmp: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const oblmp::SingularGram& e) {
    std::cerr << "oblmp: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const oblmp::DegenerateAtom& e) {
    std::cerr << "oblmp: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const oblmp::Error& e) {
    std::cerr << "oblmp: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
