#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mtdiff/error.hpp"
#include "mtdiff/experiments.hpp"
#include "mtdiff/results.hpp"
#include "mtdiff/scenario.hpp"

namespace {

using namespace mtdiff;

struct Common {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> horizon;
  std::string alphas;
  std::string agents;
  std::string out;
  std::size_t workers = 1;
  std::string rule;
  std::string delta;
  bool smooth = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_scenario = true) {
  auto* s = cmd->add_option("--scenario", c.scenario, "Scenario JSON file");
  if (needs_scenario) s->required();
  cmd->add_option("--seed", c.seed, "Base seed (replica r uses seed + r)");
  cmd->add_option("--runs", c.runs, "Monte Carlo runs");
  cmd->add_option("--horizon", c.horizon, "Steps before the decision");
  cmd->add_option("--alphas", c.alphas, "Comma-separated alpha values");
  cmd->add_option("--agents", c.agents, "Comma-separated 1-based agent ids, or 'all'");
  cmd->add_option("--out", c.out, "Output CSV path (stdout when omitted)");
  cmd->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--rule", c.rule, "Clustering rule override: isolated, naive, oracle, none");
  cmd->add_option("--delta", c.delta, "PIA clustering threshold override (number or inf)");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    if (!cell.empty()) out.push_back(cell);
  }
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used == s.size()) return x;
  } catch (const std::exception&) {
  }
  throw ValidationError(what + ": '" + s + "' is not a number");
}

ScenarioSpec load(const Common& c) {
  ScenarioSpec spec = load_scenario(c.scenario);
  for (const std::string& w : spec.warnings) std::cerr << "warning: " << w << '\n';
  if (!c.rule.empty()) {
    if (c.rule == "isolated") {
      spec.engine.rule = ClusteringRule::isolated;
    } else if (c.rule == "naive") {
      spec.engine.rule = ClusteringRule::naive;
    } else if (c.rule == "oracle") {
      spec.engine.rule = ClusteringRule::oracle;
    } else if (c.rule == "none") {
      spec.engine.rule = ClusteringRule::none;
    } else {
      throw ValidationError("--rule: expected isolated, naive, oracle or none");
    }
  }
  if (!c.delta.empty()) {
    spec.engine.delta = c.delta == "inf" ? std::numeric_limits<double>::infinity() : parse_number(c.delta, "--delta");
    spec.engine.validate(spec.graph.size());
  }
  return spec;
}

RunOptions options(const ScenarioSpec& spec, const Common& c) {
  RunOptions o = default_options(spec);
  if (c.seed) o.seed = *c.seed;
  if (c.runs) o.runs = *c.runs;
  if (c.horizon) o.horizon = *c.horizon;
  if (!c.alphas.empty()) {
    o.alphas.clear();
    for (const std::string& a : split_list(c.alphas)) {
      o.alphas.push_back(parse_number(a, "--alphas"));
      spec.check_alpha(o.alphas.back());
    }
  }
  if (!c.agents.empty() && c.agents != "all") {
    o.agents.clear();
    for (const std::string& a : split_list(c.agents)) {
      const double k = parse_number(a, "--agents");
      if (k < 1 || k > static_cast<double>(spec.graph.size()) || k != std::floor(k)) {
        throw ValidationError("--agents: no agent " + a);
      }
      o.agents.push_back(static_cast<AgentId>(k) - 1);
    }
  } else if (c.agents == "all") {
    o.agents.resize(spec.graph.size());
    for (AgentId k = 0; k < o.agents.size(); ++k) o.agents[k] = k;
  }
  o.workers = c.workers;
  return o;
}

void emit(ResultTable table, const Common& c) {
  if (table.metadata.tool_version.empty()) table.metadata.tool_version = library_version();
  if (c.smooth) table = smooth_along_alpha(table);
  if (c.out.empty()) {
    write_csv(std::cout, table);
  } else {
    emit_results(table, c.out);
  }
}

void write_trajectory(std::ostream& out, const ScenarioSpec& spec, const Trajectory& t) {
  const bool informed = spec.mode == Mode::informed;
  const std::size_t dim = t.final_states.empty() ? 0 : t.final_states.front().w.size();
  out << "step,agent,cluster,decision";
  for (std::size_t r = 1; r <= dim; ++r) out << ",w" << r;
  for (std::size_t r = 1; r <= dim; ++r) out << ",z" << r;
  out << '\n';
  for (const StateSnapshot& s : t.snapshots) {
    for (AgentId k = 0; k < t.agents; ++k) {
      const int d = t.decision(s.step, k);
      out << s.step << ',' << k + 1 << ',' << spec.graph.cluster(k) << ',' << (informed ? d + 1 : d);
      for (double x : s.w[k]) out << ',' << format_number(x);
      for (double x : s.z[k]) out << ',' << format_number(x);
      out << '\n';
    }
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Multi-task adaptive diffusion networks: simulation and error-probability experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", library_version());

  Common c;
  std::size_t stride = 1;
  double type1 = -1.0;
  std::optional<std::size_t> calibration_runs;
  std::optional<double> beta_override;

  auto* simulate = app.add_subcommand("simulate", "Run one trajectory and dump the agents' status");
  add_common(simulate, c);
  simulate->add_option("--stride", stride, "Dump every stride-th step")->check(CLI::PositiveNumber);

  auto* sweep_ia = app.add_subcommand("sweep-ia", "Steady-state error probability of informed agents");
  add_common(sweep_ia, c);
  sweep_ia->add_flag("--smooth", c.smooth, "3-point moving average along alpha (plotting only)");

  auto* calibrate = app.add_subcommand("calibrate-gamma", "Per-agent thresholds for a type-I error target");
  add_common(calibrate, c);
  calibrate->add_option("--type1", type1, "Type-I error target");

  auto* sweep_pia = app.add_subcommand("sweep-pia", "Calibrate gamma, check type-I error, sweep type-II error");
  add_common(sweep_pia, c);
  sweep_pia->add_option("--type1", type1, "Type-I error target");
  sweep_pia->add_option("--calibration-runs", calibration_runs, "H0 runs for calibration and type-I check");
  sweep_pia->add_flag("--smooth", c.smooth, "3-point moving average along alpha (plotting only)");

  auto* bounds_ia = app.add_subcommand("bounds-ia", "Gaussian-model error bounds for informed agents");
  add_common(bounds_ia, c);
  bounds_ia->add_option("--beta", beta_override, "Override beta_k(A) in the lower bound");

  auto* bounds_pia = app.add_subcommand("bounds-pia", "Gaussian-model type-II bounds for partially informed agents");
  add_common(bounds_pia, c);
  bounds_pia->add_option("--type1", type1, "Type-I error target");
  bounds_pia->add_option("--beta", beta_override, "Override beta_k(A) in the lower bound");

  auto* beta = app.add_subcommand("beta", "Variance-reduction factors of the combination matrix");
  add_common(beta, c);

  auto* theory = app.add_subcommand("theory-check", "Steady-state variance check against the Gaussian model");
  add_common(theory, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (simulate->parsed()) {
    const ScenarioSpec spec = load(c);
    const RunOptions o = options(spec, c);
    RecordOptions record;
    record.state_stride = stride;
    const std::size_t horizon = c.horizon ? *c.horizon
                                : spec.mode == Mode::informed && spec.ia_schedule
                                    ? std::min(spec.ia_schedule->covered_until(), o.horizon)
                                    : o.horizon;
    const double alpha = o.alphas.front();
    const Trajectory t = spec.mode == Mode::informed ? run_ia(ia_problem(spec, alpha), horizon, o.seed, record)
                                                     : run_pia(pia_problem(spec, alpha), horizon, o.seed, record);
    if (c.out.empty()) {
      write_trajectory(std::cout, spec, t);
    } else {
      std::ofstream out(c.out, std::ios::binary);
      if (!out) throw ValidationError("cannot write " + c.out);
      write_trajectory(out, spec, t);
    }
  } else if (sweep_ia->parsed()) {
    const ScenarioSpec spec = load(c);
    emit(run_steady_state_error(spec, options(spec, c)), c);
  } else if (calibrate->parsed()) {
    const ScenarioSpec spec = load(c);
    const RunOptions o = options(spec, c);
    const double target = type1 > 0 ? type1 : spec.experiment.type1_target;
    const std::size_t runs = c.runs ? *c.runs : spec.experiment.calibration_runs;
    emit(calibrate_gamma_empirical(spec, o.horizon, runs, target, o.seed, o.workers).table(spec), c);
  } else if (sweep_pia->parsed()) {
    const ScenarioSpec spec = load(c);
    RunOptions o = options(spec, c);
    const double target = type1 > 0 ? type1 : spec.experiment.type1_target;
    const std::size_t cal = calibration_runs ? *calibration_runs : spec.experiment.calibration_runs;
    const GammaCalibration g = calibrate_gamma_empirical(spec, o.horizon, cal, target, o.seed, o.workers);
    ResultTable table = g.table(spec);
    RunOptions fresh = o;
    fresh.runs = cal;
    fresh.seed = o.seed + cal;
    table.append(run_type1_error(spec, g.gamma, fresh));
    fresh.runs = c.runs ? *c.runs : spec.experiment.type2_runs;
    table.append(run_type2_error(spec, g.gamma, fresh));
    emit(table, c);
  } else if (bounds_ia->parsed()) {
    const ScenarioSpec spec = load(c);
    emit(run_bounds_ia(spec, options(spec, c), beta_override), c);
  } else if (bounds_pia->parsed()) {
    const ScenarioSpec spec = load(c);
    const double target = type1 > 0 ? type1 : spec.experiment.type1_target;
    emit(run_bounds_pia(spec, options(spec, c), target, beta_override), c);
  } else if (beta->parsed()) {
    const ScenarioSpec spec = load(c);
    const RunOptions o = options(spec, c);
    const NeighborSets sets = spec.engine.rule == ClusteringRule::none ? spec.graph.all_neighbors()
                                                                       : spec.graph.all_effective_neighbors();
    const BetaFactors b = beta_factor(
        combination_from_sets(spec.graph, sets, spec.engine.resolved_self_weights(spec.graph.size())));
    ResultTable table;
    table.metadata = metadata_for(spec);
    for (AgentId k : o.agents) table.add({"beta", k, 0.0, "beta", b.beta[k], 0.0, 1, o.seed});
    std::cerr << "extrapolated down to mu = " << b.mu_used << " with " << b.truncation_j << " terms\n";
    emit(table, c);
  } else if (theory->parsed()) {
    TheoryCheckConfig cfg;
    if (c.seed) cfg.seed = *c.seed;
    if (c.runs) cfg.seeds = *c.runs;
    if (c.horizon) cfg.burn_in = *c.horizon;
    cfg.workers = c.workers;
    Graph graph = theory_check_graph();
    if (!c.scenario.empty()) graph = load(c).graph;
    const TheoryCheckResult r = theory_check(graph, cfg);
    std::fprintf(stderr, "max relative error: w %.4f, z %.4f over %zu samples per cell\n",
                 r.max_relative_error_w(), r.max_relative_error_z(), r.samples);
    emit(r.table(cfg.seed), c);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mtdiff::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const mtdiff::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  }
}
