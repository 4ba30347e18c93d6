// One line per acceptance criterion; exit status 0 iff every criterion passes.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "oblmp/experiment.hpp"
#include "oblmp/properties.hpp"

using namespace oblmp;

namespace {

// Pinned limits.
constexpr double kOracleSeconds = 30.0;
constexpr double kExperiment1Seconds = 120.0;
constexpr double kExperiment2Seconds = 300.0;
constexpr Index kSignals = 100;
constexpr Index kExperiment1Required = 100;
constexpr Index kExperiment2Required = 80;
constexpr double kLargeCondition = 1e12;
constexpr std::uint64_t kSeed = 1;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  std::cout << "criterion " << id << " " << (pass ? "PASS" : "FAIL") << "  " << title << "  [" << detail << "]"
            << std::endl;
  if (!pass) ++failures;
}

std::string describe(const std::vector<PropertyOutcome>& outs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const auto& o = outs[i];
    os << (i ? "; " : "") << o.name << " " << (o.passed ? "ok" : "FAILED") << " cases=" << o.cases
       << " worst=" << o.worst << " tol=" << o.tolerance;
    if (!o.passed) os << " case=" << o.failing_case << " " << o.detail;
  }
  return os.str();
}

bool all_pass(const std::vector<PropertyOutcome>& outs) {
  for (const auto& o : outs)
    if (!o.passed) return false;
  return true;
}

std::vector<PropertyOutcome> run(const std::vector<std::string>& names, const VerifyConfig& cfg) {
  std::vector<PropertyOutcome> out;
  for (const auto& n : names) out.push_back(run_property(n, cfg));
  return out;
}

}  // namespace

int main() {
  VerifyConfig vc;
  vc.seed = kSeed;

  {
    const auto t0 = Clock::now();
    const auto outs = run({"oracle_duals", "oracle_reconstruction"}, vc);
    const double secs = seconds_since(t0);
    std::ostringstream os;
    os << describe(outs) << "; " << secs << " s (limit " << kOracleSeconds << ")";
    report(1, "recursive duals and OBLMP reconstruction match the closed-form oracle",
           all_pass(outs) && secs < kOracleSeconds, os.str());
  }
  {
    const auto outs =
        run({"oblique_idempotent", "oblique_annihilation", "oblique_fixed_points", "oblique_consistency"}, vc);
    report(2, "oblique projector invariants", all_pass(outs), describe(outs));
  }

  ExperimentConfig e1;
  e1.test_id = 1;
  e1.n_signals = kSignals;
  e1.seed = kSeed;
  auto t1 = Clock::now();
  const auto rep1 = run_experiment(e1);
  const double secs1 = seconds_since(t1);

  ExperimentConfig e2 = e1;
  e2.test_id = 2;
  auto t2 = Clock::now();
  const auto rep2 = run_experiment(e2);
  const double secs2 = seconds_since(t2);

  {
    const auto outs = run({"prop1_independence", "prop2_orthogonality", "prop3_trivial_intersection"}, vc);
    double prop2 = 0.0;
    double prop3 = 1.0;
    for (const auto* rep : {&rep1, &rep2}) {
      for (const auto& r : rep->records) {
        prop2 = std::max(prop2, r.prop2_max);
        prop3 = std::min(prop3, r.prop3_ratio);
      }
    }
    std::ostringstream os;
    os << describe(outs) << "; experiment runs: test 1 " << (rep1.propositions_hold ? "hold" : "VIOLATED")
       << ", test 2 " << (rep2.propositions_hold ? "hold" : "VIOLATED") << ", max prop2 " << prop2
       << ", min sigma ratio " << prop3;
    report(3, "propositions 1-3 on random instances and on every experiment run",
           all_pass(outs) && rep1.propositions_hold && rep2.propositions_hold, os.str());
  }
  {
    const auto outs = run({"oomp_reduction"}, vc);
    report(4, "empty background reduces to OOMP", all_pass(outs), describe(outs));
  }
  {
    const auto outs = run({"criterion_equivalence"}, vc);
    report(5, "residual criterion and functional pick the same atom", all_pass(outs), describe(outs));
  }
  {
    const Index baseline_fail = rep1.n_signals() - rep1.n_baseline_success;
    std::ostringstream os;
    os << rep1.n_success << "/" << rep1.n_signals() << " separated (need " << kExperiment1Required
       << "); baseline failed " << baseline_fail << "/" << rep1.n_signals() << ", Gram condition "
       << rep1.baseline_condition << "; " << secs1 << " s (limit " << kExperiment1Seconds << ")";
    const bool pass = rep1.n_signals() == kSignals && rep1.n_success >= kExperiment1Required &&
                      2 * baseline_fail > rep1.n_signals() && rep1.baseline_condition > kLargeCondition &&
                      secs1 < kExperiment1Seconds;
    report(6, "experiment 1: B-spline basis", pass, os.str());
  }
  {
    std::ostringstream os;
    os << rep2.n_success << "/" << rep2.n_signals() << " separated (need " << kExperiment2Required
       << "); dictionary " << rep2.dictionary.atoms << " atoms, coherence " << rep2.dictionary.coherence << "; "
       << secs2 << " s (limit " << kExperiment2Seconds << ")";
    const bool pass =
        rep2.n_signals() == kSignals && rep2.n_success >= kExperiment2Required && secs2 < kExperiment2Seconds;
    report(7, "experiment 2: double-support dictionary", pass, os.str());
  }
  {
    const auto again1 = run_experiment(e1);
    const auto again2 = run_experiment(e2);
    const bool same1 = report_fingerprint(again1) == report_fingerprint(rep1);
    const bool same2 = report_fingerprint(again2) == report_fingerprint(rep2);
    std::ostringstream os;
    os << "test 1 " << (same1 ? "identical" : "DIFFERS") << ", test 2 " << (same2 ? "identical" : "DIFFERS");
    report(8, "same seed, same report", same1 && same2, os.str());
  }
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
