#include "mtdiff/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "mtdiff/error.hpp"
#include "mtdiff/theory.hpp"

namespace mtdiff {

ResultMetadata metadata_for(const ScenarioSpec& spec) { return {hash_hex(spec.hash), library_version()}; }

namespace {

double binomial_se(double p, std::size_t n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n)); }

void check_agents(const ScenarioSpec& spec, const std::vector<AgentId>& agents) {
  if (agents.empty()) throw ValidationError("agent subset is empty");
  for (AgentId k : agents) {
    if (k >= spec.graph.size()) throw ValidationError("no agent " + std::to_string(k + 1) + " in the graph");
  }
}

void check_runs(const RunOptions& opts) {
  if (opts.runs == 0) throw ValidationError("number of runs must be positive");
  if (opts.horizon == 0) throw ValidationError("horizon must be positive");
  if (opts.alphas.empty()) throw ValidationError("alpha list is empty");
}

RecordOptions final_state_only() {
  RecordOptions r;
  r.decisions = false;
  return r;
}

// D(w_k(n) || p0) for every agent of one H0 or H1 replica.
std::vector<double> final_statistics(const PiaProblem& problem, std::size_t horizon, std::uint64_t seed) {
  const Trajectory t = run_pia(problem, horizon, seed, final_state_only());
  std::vector<double> d(t.final_states.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = kl_divergence(t.final_states[k].w, problem.null_pmf);
  return d;
}

// stats[r][k] over `runs` replicas seeded seed + r.
std::vector<std::vector<double>> replica_statistics(const PiaProblem& problem, std::size_t horizon, std::size_t runs,
                                                    std::uint64_t seed, std::size_t workers) {
  std::vector<std::vector<double>> stats(runs);
  parallel_for(runs, workers, [&](std::size_t r) { stats[r] = final_statistics(problem, horizon, seed + r); });
  return stats;
}

ResultTable threshold_table(const ScenarioSpec& spec, const std::vector<double>& gamma, const RunOptions& opts,
                            bool alternative) {
  check_runs(opts);
  check_agents(spec, opts.agents);
  if (gamma.size() != spec.graph.size()) throw ValidationError("need one threshold per agent");
  ResultTable table;
  table.metadata = metadata_for(spec);
  const std::vector<double> alphas = alternative ? opts.alphas : std::vector<double>{0.0};
  for (double alpha : alphas) {
    const PiaProblem problem = alternative ? alternative_pia_problem(spec, alpha) : null_pia_problem(spec);
    const auto stats = replica_statistics(problem, opts.horizon, opts.runs, opts.seed, opts.workers);
    for (AgentId k : opts.agents) {
      std::size_t count = 0;
      for (const auto& d : stats) count += alternative ? d[k] < gamma[k] : d[k] >= gamma[k];
      const double p = static_cast<double>(count) / static_cast<double>(opts.runs);
      table.add({alternative ? "type2_error" : "type1_error", k, alpha, alternative ? "type2" : "type1", p,
                 binomial_se(p, opts.runs), opts.runs, opts.seed});
    }
  }
  table.sort();
  return table;
}

double relative_error(double measured, double predicted) { return std::abs(measured - predicted) / predicted; }

}  // namespace

RunOptions default_options(const ScenarioSpec& spec) {
  RunOptions o;
  o.horizon = spec.experiment.horizon;
  o.runs = spec.experiment.runs;
  o.alphas = spec.experiment.alphas;
  if (o.alphas.empty()) o.alphas = {spec.alpha_min};
  o.agents = spec.experiment.agents;
  if (o.agents.empty()) {
    o.agents.resize(spec.graph.size());
    std::iota(o.agents.begin(), o.agents.end(), AgentId{0});
  }
  o.seed = spec.seed;
  return o;
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first;
  std::mutex guard;
  auto work = [&] {
    for (std::size_t i = next++; i < count && !stop; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!first) first = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

ResultTable run_steady_state_error(const ScenarioSpec& spec, const RunOptions& opts) {
  check_runs(opts);
  check_agents(spec, opts.agents);
  ResultTable table;
  table.metadata = metadata_for(spec);
  for (double alpha : opts.alphas) {
    const IaProblem problem = steady_ia_problem(spec, alpha);
    std::vector<std::vector<int>> decisions(opts.runs);
    parallel_for(opts.runs, opts.workers, [&](std::size_t r) {
      const Trajectory t = run_ia(problem, opts.horizon, opts.seed + r, final_state_only());
      decisions[r].resize(t.final_states.size());
      for (std::size_t k = 0; k < decisions[r].size(); ++k) decisions[r][k] = t.final_states[k].last_decision;
    });
    for (AgentId k : opts.agents) {
      const auto truth = static_cast<int>(spec.true_hypothesis(k));
      std::size_t errors = 0;
      for (const auto& d : decisions) errors += d[k] != truth;
      const double p = static_cast<double>(errors) / static_cast<double>(opts.runs);
      table.add({"steady_state_error", k, alpha, "error", p, binomial_se(p, opts.runs), opts.runs, opts.seed});
    }
  }
  table.sort();
  return table;
}

ResultTable GammaCalibration::table(const ScenarioSpec& spec) const {
  ResultTable t;
  t.metadata = metadata_for(spec);
  for (AgentId k = 0; k < gamma.size(); ++k) t.add({"gamma_calibration", k, 0.0, "gamma", gamma[k], 0.0, runs, seed});
  t.sort();
  return t;
}

GammaCalibration calibrate_gamma_empirical(const ScenarioSpec& spec, std::size_t horizon, std::size_t runs,
                                           double type1_target, std::uint64_t seed, std::size_t workers) {
  if (!(type1_target > 0.0 && type1_target < 1.0)) throw ValidationError("type-I target must lie in (0, 1)");
  if (static_cast<double>(runs) < 10.0 / type1_target) {
    throw ValidationError("calibration needs at least 10 / type1_target = " +
                          std::to_string(static_cast<std::size_t>(std::ceil(10.0 / type1_target))) + " runs");
  }
  if (horizon == 0) throw ValidationError("horizon must be positive");
  const auto stats = replica_statistics(null_pia_problem(spec), horizon, runs, seed, workers);
  GammaCalibration out{std::vector<double>(spec.graph.size()), type1_target, runs, seed};
  std::vector<double> column(runs);
  for (AgentId k = 0; k < spec.graph.size(); ++k) {
    for (std::size_t r = 0; r < runs; ++r) column[r] = stats[r][k];
    out.gamma[k] = empirical_quantile(column, 1.0 - type1_target);
  }
  return out;
}

ResultTable run_type1_error(const ScenarioSpec& spec, const std::vector<double>& gamma, const RunOptions& opts) {
  return threshold_table(spec, gamma, opts, false);
}

ResultTable run_type2_error(const ScenarioSpec& spec, const std::vector<double>& gamma, const RunOptions& opts) {
  return threshold_table(spec, gamma, opts, true);
}

BetaFactors scenario_beta(const ScenarioSpec& spec) {
  const CombinationMatrix a = combination_from_sets(spec.graph, spec.graph.all_effective_neighbors(),
                                                    spec.engine.resolved_self_weights(spec.graph.size()));
  return beta_factor(a);
}

ResultTable run_bounds_ia(const ScenarioSpec& spec, const RunOptions& opts, std::optional<double> beta_override) {
  check_runs(opts);
  check_agents(spec, opts.agents);
  if (spec.mode != Mode::informed) throw ValidationError("scenario '" + spec.name + "' is not informed-agent");
  const BetaFactors beta = scenario_beta(spec);
  const std::size_t na = opts.agents.size();
  std::vector<std::pair<double, double>> est(opts.alphas.size() * na);
  parallel_for(est.size(), opts.workers, [&](std::size_t task) {
    const double alpha = opts.alphas[task / na];
    const AgentId k = opts.agents[task % na];
    const IaBoundInput in{spec.hypotheses_at(alpha), spec.true_hypothesis(k), spec.engine.mu, beta.beta[k]};
    Rng rng(opts.seed, task);
    const double lower = bound_error_ia(in, BoundKind::lower, beta_override, opts.runs, rng);
    const double upper = bound_error_ia(in, BoundKind::upper, std::nullopt, opts.runs, rng);
    est[task] = {lower, upper};
  });
  ResultTable table;
  table.metadata = metadata_for(spec);
  for (std::size_t task = 0; task < est.size(); ++task) {
    const double alpha = opts.alphas[task / na];
    const AgentId k = opts.agents[task % na];
    const auto [lower, upper] = est[task];
    table.add({"bounds_ia", k, alpha, "bound_lower", lower, binomial_se(lower, opts.runs), opts.runs, opts.seed});
    table.add({"bounds_ia", k, alpha, "bound_upper", upper, binomial_se(upper, opts.runs), opts.runs, opts.seed});
  }
  table.sort();
  return table;
}

ResultTable run_bounds_pia(const ScenarioSpec& spec, const RunOptions& opts, double type1_target,
                           std::optional<double> beta_override) {
  check_runs(opts);
  check_agents(spec, opts.agents);
  if (spec.mode != Mode::partially_informed) {
    throw ValidationError("scenario '" + spec.name + "' is not partially-informed");
  }
  const BetaFactors beta = scenario_beta(spec);
  const std::size_t na = opts.agents.size();
  std::vector<std::pair<PiaBoundResult, PiaBoundResult>> est(opts.alphas.size() * na);
  parallel_for(est.size(), opts.workers, [&](std::size_t task) {
    const double alpha = opts.alphas[task / na];
    const AgentId k = opts.agents[task % na];
    const PiaBoundInput in{spec.null_at(), spec.alternative_for(k, alpha), spec.engine.mu, beta.beta[k]};
    Rng rng(opts.seed, task);
    const auto lower = bound_error_pia(in, BoundKind::lower, beta_override, type1_target, opts.runs, rng);
    const auto upper = bound_error_pia(in, BoundKind::upper, std::nullopt, type1_target, opts.runs, rng);
    est[task] = {lower, upper};
  });
  ResultTable table;
  table.metadata = metadata_for(spec);
  for (std::size_t task = 0; task < est.size(); ++task) {
    const double alpha = opts.alphas[task / na];
    const AgentId k = opts.agents[task % na];
    const auto& [lower, upper] = est[task];
    const std::size_t n = opts.runs;
    table.add({"bounds_pia", k, alpha, "bound_lower", lower.type2, binomial_se(lower.type2, n), n, opts.seed});
    table.add({"bounds_pia", k, alpha, "bound_upper", upper.type2, binomial_se(upper.type2, n), n, opts.seed});
    table.add({"bounds_pia", k, alpha, "gamma_lower", lower.gamma, 0.0, n, opts.seed});
    table.add({"bounds_pia", k, alpha, "gamma_upper", upper.gamma, 0.0, n, opts.seed});
  }
  table.sort();
  return table;
}

ResultTable run_tracking_accuracy(const ScenarioSpec& spec, const RunOptions& opts, std::size_t from,
                                  std::size_t to) {
  check_runs(opts);
  check_agents(spec, opts.agents);
  if (!(from >= 1 && from <= to && to <= opts.horizon)) throw ValidationError("tracking window must lie in [1, horizon]");
  ResultTable table;
  table.metadata = metadata_for(spec);
  for (double alpha : opts.alphas) {
    const IaProblem problem = ia_problem(spec, alpha);
    std::vector<std::vector<double>> correct(opts.runs);
    parallel_for(opts.runs, opts.workers, [&](std::size_t r) {
      const Trajectory t = run_ia(problem, opts.horizon, opts.seed + r);
      correct[r].assign(spec.graph.size(), 0.0);
      for (AgentId k = 0; k < spec.graph.size(); ++k) {
        std::size_t hits = 0;
        for (std::size_t i = from; i <= to; ++i) {
          hits += static_cast<std::size_t>(t.decision(i, k)) == problem.schedule.hypothesis(spec.graph.cluster(k), i);
        }
        correct[r][k] = static_cast<double>(hits) / static_cast<double>(to - from + 1);
      }
    });
    for (AgentId k : opts.agents) {
      double sum = 0.0;
      double sq = 0.0;
      for (const auto& c : correct) {
        sum += c[k];
        sq += c[k] * c[k];
      }
      const double n = static_cast<double>(opts.runs);
      const double mean = sum / n;
      const double var = opts.runs > 1 ? std::max(sq - n * mean * mean, 0.0) / (n - 1.0) : 0.0;
      table.add({"tracking", k, alpha, "correct", mean, std::sqrt(var / n), opts.runs, opts.seed});
    }
  }
  table.sort();
  return table;
}

BetaFit fit_beta_ia(const ScenarioSpec& spec, AgentId agent, const std::vector<double>& empirical,
                    const RunOptions& opts, std::size_t grid_points) {
  check_runs(opts);
  if (empirical.size() != opts.alphas.size()) throw ValidationError("need one empirical value per alpha");
  if (grid_points < 2) throw ValidationError("grid needs at least two points");
  check_agents(spec, {agent});
  const double lo = 0.5 / static_cast<double>(spec.graph.size());
  BetaFit best{0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double beta = lo + (0.5 - lo) * static_cast<double>(g) / static_cast<double>(grid_points - 1);
    double loss = 0.0;
    for (std::size_t i = 0; i < opts.alphas.size(); ++i) {
      const IaBoundInput in{spec.hypotheses_at(opts.alphas[i]), spec.true_hypothesis(agent), spec.engine.mu, beta};
      Rng rng(opts.seed, i);
      const double e = bound_error_ia(in, BoundKind::lower, beta, opts.runs, rng) - empirical[i];
      loss += e * e;
    }
    if (loss < best.loss) best = {beta, loss};
  }
  return best;
}

double TheoryCheckResult::max_relative_error_w() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, relative_error(r.var_w, r.predicted_w));
  return m;
}

double TheoryCheckResult::max_relative_error_z() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, relative_error(r.var_z, r.predicted_z));
  return m;
}

ResultTable TheoryCheckResult::table(std::uint64_t seed) const {
  ResultTable t;
  t.metadata.tool_version = library_version();
  for (const auto& r : rows) {
    const std::string c = std::to_string(r.component + 1);
    t.add({"theory_check", r.agent, 0.0, "var_w_" + c, r.var_w, 0.0, samples, seed});
    t.add({"theory_check", r.agent, 0.0, "predicted_w_" + c, r.predicted_w, 0.0, samples, seed});
    t.add({"theory_check", r.agent, 0.0, "var_z_" + c, r.var_z, 0.0, samples, seed});
    t.add({"theory_check", r.agent, 0.0, "predicted_z_" + c, r.predicted_z, 0.0, samples, seed});
  }
  for (AgentId k = 0; k < beta.size(); ++k) t.add({"theory_check", k, 0.0, "beta", beta[k], 0.0, samples, seed});
  t.sort();
  return t;
}

Graph theory_check_graph() {
  std::vector<std::pair<AgentId, AgentId>> edges;
  for (AgentId k = 0; k < 10; ++k) {
    for (AgentId offset : {1u, 2u, 3u}) edges.emplace_back(k, (k + offset) % 10);
  }
  return Graph(10, std::vector<int>(10, 1), edges);
}

TheoryCheckResult theory_check(const Graph& graph, const TheoryCheckConfig& cfg) {
  if (cfg.seeds < 2) throw ValidationError("theory check needs at least two seeds");
  if (!graph.connected()) throw ValidationError("theory check needs a connected graph");
  const std::size_t m = cfg.alphabet;
  const Pmf uniform(std::vector<double>(m, 1.0 / static_cast<double>(m)));

  EngineConfig config;
  config.mu = cfg.mu;
  config.mode = Mode::partially_informed;
  config.rule = ClusteringRule::oracle;
  config.self_weights.assign(graph.size(), cfg.self_weight);
  const PiaProblem problem{graph, uniform, PiaSchedule{{PiaEpoch{kForever, false, {}}}}, config};

  RecordOptions record;
  record.decisions = false;
  record.snapshot_steps = {cfg.burn_in};
  for (std::size_t off : cfg.extra_snapshots) record.snapshot_steps.push_back(cfg.burn_in + off);
  const std::size_t horizon = *std::max_element(record.snapshot_steps.begin(), record.snapshot_steps.end());

  // Per replica: sum and sum of squares of w and z over its snapshots, laid
  // out as [agent][component].
  struct Moments {
    std::vector<double> sw, sw2, sz, sz2;
  };
  std::vector<Moments> parts(cfg.seeds);
  const std::size_t cells = graph.size() * m;
  parallel_for(cfg.seeds, cfg.workers, [&](std::size_t r) {
    const Trajectory t = run_pia(problem, horizon, cfg.seed + r, record);
    Moments mo{std::vector<double>(cells), std::vector<double>(cells), std::vector<double>(cells),
               std::vector<double>(cells)};
    for (const StateSnapshot& s : t.snapshots) {
      for (AgentId k = 0; k < graph.size(); ++k) {
        for (std::size_t c = 0; c < m; ++c) {
          const double w = s.w[k][c];
          const double z = s.z[k][c];
          mo.sw[k * m + c] += w;
          mo.sw2[k * m + c] += w * w;
          mo.sz[k * m + c] += z;
          mo.sz2[k * m + c] += z * z;
        }
      }
    }
    parts[r] = std::move(mo);
  });

  Moments total{std::vector<double>(cells), std::vector<double>(cells), std::vector<double>(cells),
                std::vector<double>(cells)};
  for (const Moments& p : parts) {
    for (std::size_t i = 0; i < cells; ++i) {
      total.sw[i] += p.sw[i];
      total.sw2[i] += p.sw2[i];
      total.sz[i] += p.sz[i];
      total.sz2[i] += p.sz2[i];
    }
  }

  TheoryCheckResult out;
  out.samples = cfg.seeds * record.snapshot_steps.size();
  const double n = static_cast<double>(out.samples);
  auto variance = [n](double s, double s2) { return (s2 - s * s / n) / (n - 1.0); };
  const auto beta = beta_factor(combination_from_sets(graph, graph.all_effective_neighbors(), config.self_weights));
  out.beta = beta.beta;
  const Eigen::MatrixXd lambda = lambda_matrix(uniform, StatisticModel::indicators(m));
  for (AgentId k = 0; k < graph.size(); ++k) {
    for (std::size_t c = 0; c < m; ++c) {
      const std::size_t i = k * m + c;
      const double l = lambda(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
      out.rows.push_back({k, c, variance(total.sw[i], total.sw2[i]), cfg.mu * beta.beta[k] * l,
                          variance(total.sz[i], total.sz2[i]), cfg.mu * l / 2.0});
    }
  }
  return out;
}

}  // namespace mtdiff
