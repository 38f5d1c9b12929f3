#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mtdiff/diffusion.hpp"
#include "mtdiff/experiments.hpp"
#include "mtdiff/network.hpp"
#include "mtdiff/results.hpp"
#include "mtdiff/scenario.hpp"

using namespace mtdiff;

namespace {

const std::filesystem::path kScenarios = MTDIFF_SCENARIO_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double value(const ResultTable& t, const std::string& experiment, AgentId k, double alpha, const std::string& metric) {
  const auto r = t.find(experiment, k, alpha, metric);
  if (!r) throw std::runtime_error("missing result " + experiment + "/" + metric);
  return r->value;
}

double stderr_of(const ResultTable& t, const std::string& experiment, AgentId k, double alpha, const std::string& metric) {
  return t.find(experiment, k, alpha, metric)->std_error;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome t1_lms_moments() {
  const std::size_t seeds = 2000;
  const double mu = 0.05;
  const Pmf bernoulli({0.7, 0.3});
  std::vector<double> finals;
  for (std::size_t s = 0; s < seeds; ++s) {
    Rng rng(s, 1);
    double w = 0.0;
    for (int i = 0; i < 1000; ++i) w = lms_step(w, static_cast<double>(bernoulli.sample(rng)), mu);
    finals.push_back(w);
  }
  double mean = 0.0;
  for (double x : finals) mean += x / seeds;
  double var = 0.0;
  for (double x : finals) var += (x - mean) * (x - mean) / (seeds - 1);
  const double expected_mean = (1.0 - std::pow(0.95, 1000)) * 0.3;
  const double expected_var = mu / (2.0 - mu) * 0.21;
  const double se = std::sqrt(var / seeds);
  const bool pass = std::abs(mean - expected_mean) <= 3.0 * se && std::abs(var / expected_var - 1.0) <= 0.1;
  return {pass, fmt("mean %.5f (expected %.5f, 3se %.5f), variance ratio %.4f", mean, expected_mean, 3 * se,
                    var / expected_var)};
}

Outcome t2_beta() {
  double worst = 0.0;
  const auto id = beta_factor(CombinationMatrix::from_dense(Eigen::MatrixXd::Identity(35, 35)));
  for (double b : id.beta) worst = std::max(worst, std::abs(b - 0.5));
  const auto uni = beta_factor(CombinationMatrix::from_dense(Eigen::MatrixXd::Constant(35, 35, 1.0 / 35)));
  double worst_uniform = 0.0;
  for (double b : uni.beta) worst_uniform = std::max(worst_uniform, std::abs(b - 1.0 / 70));
  Rng rng(2024);
  int violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t s = 2 + rng.index(14);
    Eigen::MatrixXd a(s, s);
    for (std::size_t k = 0; k < s; ++k) {
      for (std::size_t l = 0; l < s; ++l) a(k, l) = (l == k || rng.uniform() < 0.4) ? 0.05 + rng.uniform() : 0.0;
      a.row(k) /= a.row(k).sum();
    }
    for (double b : beta_factor(CombinationMatrix::from_dense(a)).beta) {
      violations += b < 1.0 / (2.0 * s) - 1e-6 || b > 0.5 + 1e-6;
    }
  }
  const bool pass = worst <= 1e-6 && worst_uniform <= 1e-6 && violations == 0;
  return {pass, fmt("identity dev %.2e, uniform dev %.2e, random-matrix bound violations %.0f", worst, worst_uniform,
                    violations)};
}

Outcome t3_steady_state_variance() {
  TheoryCheckConfig cfg;
  cfg.workers = workers();
  const auto r = theory_check(theory_check_graph(), cfg);
  const double ew = r.max_relative_error_w();
  const double ez = r.max_relative_error_z();
  return {ew <= 0.1 && ez <= 0.1,
          fmt("max relative error w %.4f, z %.4f over %.0f samples per entry", ew, ez, static_cast<double>(r.samples))};
}

Outcome t4_symmetry(const ScenarioSpec& fig5) {
  RunOptions o = default_options(fig5);
  o.alphas = {0.0};
  o.runs = 5000;
  o.horizon = 1000;
  o.agents.clear();
  for (AgentId k = 0; k < fig5.graph.size(); ++k) o.agents.push_back(k);
  o.workers = workers();
  const auto t = run_steady_state_error(fig5, o);
  double worst = 0.0;
  for (const auto& r : t.rows()) worst = std::max(worst, std::abs(r.value - 0.75));
  return {worst <= 0.02, fmt("max |P(e) - 0.75| = %.4f over %.0f agents", worst, static_cast<double>(t.rows().size()))};
}

Outcome t5_orderings(const ResultTable& t) {
  const std::string e = "steady_state_error";
  bool pass = true;
  std::string detail = "(a)";
  for (AgentId k : {0u, 3u, 12u, 17u}) {
    const double at01 = value(t, e, k, 0.1, "error");
    const double at04 = value(t, e, k, 0.4, "error");
    pass = pass && at04 <= at01;
    detail += fmt(" agent %.0f: %.4f -> %.4f;", static_cast<double>(k + 1), at01, at04);
  }
  auto gap = [&](AgentId better, AgentId worse) {
    const double d = value(t, e, worse, 0.3, "error") - value(t, e, better, 0.3, "error");
    const double se = std::hypot(stderr_of(t, e, worse, 0.3, "error"), stderr_of(t, e, better, 0.3, "error"));
    pass = pass && d > 3.0 * se;
    detail += fmt(" agent %.0f vs %.0f gap %.4f (3se %.4f);", static_cast<double>(better + 1),
                  static_cast<double>(worse + 1), d, 3.0 * se);
  };
  detail += " (b)";
  gap(0, 12);
  gap(3, 17);
  return {pass, detail};
}

Outcome t6_clustering_rules() {
  ScenarioSpec spec = load_scenario(kScenarios / "fig3_circle.json");
  RunOptions o = default_options(spec);
  o.runs = 50;
  o.agents = {0};
  o.workers = workers();
  spec.engine.rule = ClusteringRule::isolated;
  const double isolated = run_tracking_accuracy(spec, o, 500, 2400).rows().at(0).value;
  spec.engine.rule = ClusteringRule::naive;
  const double naive = run_tracking_accuracy(spec, o, 500, 2400).rows().at(0).value;
  return {isolated > naive && isolated > 0.8,
          fmt("hub correct fraction: isolated rule %.4f, naive rule %.4f", isolated, naive)};
}

struct PiaCalibration {
  GammaCalibration gamma;
  RunOptions fresh;
};

PiaCalibration calibrate(const ScenarioSpec& spec) {
  const auto& ex = spec.experiment;
  PiaCalibration c{calibrate_gamma_empirical(spec, ex.horizon, ex.calibration_runs, ex.type1_target, spec.seed, workers()),
                   default_options(spec)};
  c.fresh.seed = spec.seed + ex.calibration_runs;
  c.fresh.workers = workers();
  return c;
}

Outcome t7_calibration(const ScenarioSpec& fig7, const PiaCalibration& cal) {
  RunOptions o = cal.fresh;
  o.agents = {0, 3, 6, 12, 17};
  o.runs = 5000;
  const auto t1 = run_type1_error(fig7, cal.gamma.gamma, o);
  o.runs = 500;
  o.alphas = {1e-3};
  const auto t2 = run_type2_error(fig7, cal.gamma.gamma, o);
  bool pass = true;
  std::string detail;
  for (AgentId k : o.agents) {
    const double a = value(t1, "type1_error", k, 0.0, "type1");
    const double b = value(t2, "type2_error", k, 1e-3, "type2");
    pass = pass && std::abs(a - 0.1) <= 0.015 && std::abs(b - 0.9) <= 0.04;
    detail += fmt("agent %.0f type-I %.4f type-II %.4f; ", static_cast<double>(k + 1), a, b);
  }
  return {pass, detail};
}

Outcome t8_balancing(ScenarioSpec fig7, const PiaCalibration& cal) {
  const AgentId hub = 6;
  RunOptions o = cal.fresh;
  o.agents = {hub};
  o.alphas = {0.3};
  o.runs = fig7.experiment.type2_runs;
  const double finite = value(run_type2_error(fig7, cal.gamma.gamma, o), "type2_error", hub, 0.3, "type2");
  fig7.engine.delta = std::numeric_limits<double>::infinity();
  const PiaCalibration open = calibrate(fig7);
  const double unbounded = value(run_type2_error(fig7, open.gamma.gamma, o), "type2_error", hub, 0.3, "type2");
  return {unbounded - finite >= 0.2,
          fmt("agent %.0f type-II at alpha 0.3: delta=inf %.4f, delta=0.2 %.4f", static_cast<double>(hub + 1), unbounded,
              finite)};
}

bool sandwich(double lower, double lower_se, double empirical, double empirical_se, double upper, double upper_se) {
  return lower <= empirical + 3.0 * std::hypot(lower_se, empirical_se) &&
         empirical <= upper + 3.0 * std::hypot(upper_se, empirical_se);
}

Outcome t9_bounds(const ScenarioSpec& fig5, const ResultTable& ia_errors) {
  const std::vector<double> alphas = {0.1, 0.2, 0.3};
  const std::vector<AgentId> agents = {0, 3};
  RunOptions o = default_options(fig5);
  o.alphas = alphas;
  o.agents = agents;
  o.runs = 5000;
  o.workers = workers();
  const auto ia = run_bounds_ia(fig5, o);
  bool pass = true;
  std::string detail = "IA:";
  for (AgentId k : agents) {
    for (double a : alphas) {
      const double lo = value(ia, "bounds_ia", k, a, "bound_lower");
      const double up = value(ia, "bounds_ia", k, a, "bound_upper");
      const double em = value(ia_errors, "steady_state_error", k, a, "error");
      pass = pass && sandwich(lo, stderr_of(ia, "bounds_ia", k, a, "bound_lower"), em,
                              stderr_of(ia_errors, "steady_state_error", k, a, "error"), up,
                              stderr_of(ia, "bounds_ia", k, a, "bound_upper"));
      detail += fmt(" agent %.0f alpha %.1f:", static_cast<double>(k + 1), a) + fmt(" %.4f <= %.4f <= %.4f;", lo, em, up);
    }
  }

  const ScenarioSpec fig8 = load_scenario(kScenarios / "fig8.json");
  const PiaCalibration cal = calibrate(fig8);
  RunOptions e = cal.fresh;
  e.alphas = alphas;
  e.agents = agents;
  e.runs = fig8.experiment.type2_runs;
  const auto empirical = run_type2_error(fig8, cal.gamma.gamma, e);
  RunOptions b = e;
  b.runs = 5000;
  const auto pia = run_bounds_pia(fig8, b, fig8.experiment.type1_target);
  detail += "; PIA:";
  for (AgentId k : agents) {
    for (double a : alphas) {
      const double lo = value(pia, "bounds_pia", k, a, "bound_lower");
      const double up = value(pia, "bounds_pia", k, a, "bound_upper");
      const double em = value(empirical, "type2_error", k, a, "type2");
      pass = pass && sandwich(lo, stderr_of(pia, "bounds_pia", k, a, "bound_lower"), em,
                              stderr_of(empirical, "type2_error", k, a, "type2"), up,
                              stderr_of(pia, "bounds_pia", k, a, "bound_upper"));
      detail += fmt(" agent %.0f alpha %.1f:", static_cast<double>(k + 1), a) + fmt(" %.4f <= %.4f <= %.4f;", lo, em, up);
    }
  }
  return {pass, detail};
}

ResultTable scenario_results(const std::string& file, std::size_t worker_count) {
  const ScenarioSpec spec = load_scenario(kScenarios / file);
  RunOptions o = default_options(spec);
  o.workers = worker_count;
  o.runs = 40;
  o.horizon = std::min<std::size_t>(o.horizon, 400);
  if (spec.ia_schedule) {
    o.horizon = spec.experiment.horizon;
    o.runs = 8;
    return run_tracking_accuracy(spec, o, 1, o.horizon);
  }
  o.alphas = {0.1, 0.3};
  if (spec.mode == Mode::informed) return run_steady_state_error(spec, o);
  const auto cal = calibrate_gamma_empirical(spec, o.horizon, 100, spec.experiment.type1_target, spec.seed, worker_count);
  ResultTable t = cal.table(spec);
  t.append(run_type2_error(spec, cal.gamma, o));
  return t;
}

Outcome t10_determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "mtdiff_acceptance";
  std::filesystem::create_directories(dir);
  bool pass = true;
  std::string detail;
  for (const char* file : {"fig3_circle.json", "fig5.json", "fig6.json", "fig7.json", "fig8.json"}) {
    emit_results(scenario_results(file, 1), dir / "serial.csv");
    emit_results(scenario_results(file, 8), dir / "parallel.csv");
    const std::string serial = slurp(dir / "serial.csv");
    const bool same = !serial.empty() && serial == slurp(dir / "parallel.csv");
    pass = pass && same;
    detail += std::string(file) + (same ? " identical; " : " DIFFERS; ");
  }
  std::filesystem::remove_all(dir);
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> only(argv + 1, argv + argc);
  int failures = 0;
  int ran = 0;
  auto report = [&](const char* id, double limit_seconds, const std::function<Outcome()>& fn) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) return;
    ++ran;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_seconds > 0 && secs > limit_seconds) {
      o.pass = false;
      o.detail += fmt(" [runtime limit %.0f s exceeded]", limit_seconds);
    }
    failures += !o.pass;
    std::printf("%s %s %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  const ScenarioSpec fig5 = load_scenario(kScenarios / "fig5.json");
  const ScenarioSpec fig7 = load_scenario(kScenarios / "fig7.json");
  std::optional<ResultTable> ia_errors;
  auto informed_errors = [&]() -> const ResultTable& {
    if (!ia_errors) {
      RunOptions o = default_options(fig5);
      o.alphas = {0.1, 0.2, 0.3, 0.4};
      o.agents = {0, 3, 12, 17};
      o.runs = 5000;
      o.horizon = 1000;
      o.workers = workers();
      ia_errors = run_steady_state_error(fig5, o);
    }
    return *ia_errors;
  };
  std::optional<PiaCalibration> cal;
  auto fig7_calibration = [&]() -> const PiaCalibration& {
    if (!cal) cal = calibrate(fig7);
    return *cal;
  };

  report("T1", 5, t1_lms_moments);
  report("T2", 30, t2_beta);
  report("T3", 120, t3_steady_state_variance);
  report("T4", 120, [&] { return t4_symmetry(fig5); });
  report("T5", 0, [&] { return t5_orderings(informed_errors()); });
  report("T6", 0, t6_clustering_rules);
  report("T7", 0, [&] { return t7_calibration(fig7, fig7_calibration()); });
  report("T8", 0, [&] { return t8_balancing(fig7, fig7_calibration()); });
  report("T9", 0, [&] { return t9_bounds(fig5, informed_errors()); });
  report("T10", 0, t10_determinism);

  std::printf("%d of %d criteria failed\n", failures, ran);
  return failures == 0 ? 0 : 1;
}
