#pragma once

// Monte Carlo experiments over a scenario. Replica r of an experiment uses
// seed base + r; replicas may run on several workers and are aggregated in
// replica order, so the worker count never changes a result.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "mtdiff/results.hpp"
#include "mtdiff/scenario.hpp"

namespace mtdiff {

struct RunOptions {
  std::size_t horizon = 1000;
  std::size_t runs = 5000;
  std::vector<double> alphas;
  std::vector<AgentId> agents;  // 0-based; experiments reject an empty list
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

/// Horizon, runs, alphas, agents and seed taken from the scenario; an
/// unspecified agent list becomes every agent.
RunOptions default_options(const ScenarioSpec& spec);

/// Hash of the scenario source and the library version.
ResultMetadata metadata_for(const ScenarioSpec& spec);

/// Calls fn(i) for i in [0, count) on up to `workers` threads. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Informed agents, steady-state setup: metric "error" is the fraction of runs
/// whose decision at step `horizon` differs from the agent's true hypothesis.
ResultTable run_steady_state_error(const ScenarioSpec& spec, const RunOptions& opts);

struct GammaCalibration {
  std::vector<double> gamma;  // per agent, every agent of the graph
  double type1_target = 0.1;
  std::size_t runs = 0;
  std::uint64_t seed = 0;

  ResultTable table(const ScenarioSpec& spec) const;  // metric "gamma" at alpha 0
};

/// Per agent, the (1 - type1_target) type-7 quantile of D(w_k(n) || p0) over
/// `runs` H0 replicas seeded seed, seed + 1, ... Rejects runs < 10 / type1_target.
GammaCalibration calibrate_gamma_empirical(const ScenarioSpec& spec, std::size_t horizon, std::size_t runs,
                                           double type1_target, std::uint64_t seed, std::size_t workers = 1);

/// Fraction of H0 runs with D(w_k(n) || p0) >= gamma_k (metric "type1", alpha 0).
ResultTable run_type1_error(const ScenarioSpec& spec, const std::vector<double>& gamma, const RunOptions& opts);

/// Fraction of H1 runs with D(w_k(n) || p0) < gamma_k (metric "type2").
ResultTable run_type2_error(const ScenarioSpec& spec, const std::vector<double>& gamma, const RunOptions& opts);

/// Gaussian-model bounds for informed agents ("bound_lower", "bound_upper";
/// `runs` is the Monte Carlo count). beta_k comes from the combination matrix
/// of the true effective neighbors unless overridden.
ResultTable run_bounds_ia(const ScenarioSpec& spec, const RunOptions& opts, std::optional<double> beta_override = {});

/// Partially informed counterpart: "bound_lower", "bound_upper" (type-II
/// estimates) and the matching "gamma_lower", "gamma_upper".
ResultTable run_bounds_pia(const ScenarioSpec& spec, const RunOptions& opts, double type1_target,
                           std::optional<double> beta_override = {});

/// beta_k(A) of the scenario's true-clustering combination matrix.
BetaFactors scenario_beta(const ScenarioSpec& spec);

/// Fraction of steps in [from, to] at which each agent's decision matches the
/// hypothesis scheduled for its cluster, averaged over runs (metric "correct").
/// Informed scenarios only.
ResultTable run_tracking_accuracy(const ScenarioSpec& spec, const RunOptions& opts, std::size_t from,
                                  std::size_t to);

struct BetaFit {
  double beta = 0.0;
  double loss = 0.0;  // sum of squared differences to the empirical errors
};

/// Grid search over beta in [1/(2S), 1/2] for the lower-bound model that best
/// matches `empirical` (one value per entry of opts.alphas) at a single agent.
BetaFit fit_beta_ia(const ScenarioSpec& spec, AgentId agent, const std::vector<double>& empirical,
                    const RunOptions& opts, std::size_t grid_points = 25);

struct TheoryCheckConfig {
  double mu = 0.005;
  double self_weight = 0.5;
  std::size_t burn_in = 5000;
  std::vector<std::size_t> extra_snapshots = {1000, 2000, 3000};  // offsets after burn-in
  std::size_t seeds = 2000;
  std::uint64_t seed = 1;
  std::size_t alphabet = 3;
  std::size_t workers = 1;
};

struct TheoryCheckRow {
  AgentId agent = 0;
  std::size_t component = 0;
  double var_w = 0.0;
  double predicted_w = 0.0;
  double var_z = 0.0;
  double predicted_z = 0.0;
};

struct TheoryCheckResult {
  std::vector<TheoryCheckRow> rows;
  std::vector<double> beta;
  std::size_t samples = 0;  // per agent and component

  double max_relative_error_w() const;
  double max_relative_error_z() const;
  ResultTable table(std::uint64_t seed) const;
};

/// 10-agent single-cluster circulant graph (offsets 1, 2, 3) used by the steady-state check.
Graph theory_check_graph();

/// Partially informed agents under a uniform p_true with static true-clustering
/// combination weights: sample variances of w and z across seeds and snapshot
/// times against mu beta_k [Lambda]_mm and mu [Lambda]_mm / 2.
TheoryCheckResult theory_check(const Graph& graph, const TheoryCheckConfig& cfg);

}  // namespace mtdiff
