#pragma once

// JSON scenario files: graph, observation models as functions of alpha,
// schedules, engine settings and experiment defaults.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtdiff/diffusion.hpp"
#include "mtdiff/network.hpp"
#include "mtdiff/simplex.hpp"

namespace mtdiff {

/// p(alpha) = base + alpha * shift. With a floor, entries are clamped to it
/// and the vector renormalized, which keeps the family valid for every alpha.
struct PmfFamily {
  std::string name;
  std::vector<double> base;
  std::vector<double> shift;
  std::optional<double> floor;

  Pmf at(double alpha) const;
  bool depends_on_alpha() const;
};

/// One network-wide epoch of a partially-informed schedule. `alternatives`
/// maps cluster labels to PMF family names and is empty under H0.
struct PiaEpochSpec {
  std::size_t until = kForever;
  std::map<int, std::string> alternatives;
};

struct ExperimentDefaults {
  std::size_t horizon = 1000;
  std::size_t runs = 5000;
  std::size_t calibration_runs = 5000;
  std::size_t type2_runs = 500;
  double type1_target = 0.1;
  std::vector<double> alphas;
  std::vector<AgentId> agents;  // 0-based; empty means all
};

struct ScenarioSpec {
  explicit ScenarioSpec(Graph g) : graph(std::move(g)) {}

  std::string name;
  std::string description;
  Mode mode = Mode::informed;
  Graph graph;
  std::vector<std::string> warnings;
  std::map<std::string, PmfFamily> pmfs;
  std::vector<std::string> hypotheses;  // informed: H_1..H_H in order
  std::string null_pmf;                 // partially informed
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  EngineConfig engine;
  std::optional<IaSchedule> ia_schedule;
  std::vector<PiaEpochSpec> pia_schedule;
  std::map<int, std::size_t> steady_hypothesis;    // informed: cluster -> hypothesis (0-based)
  std::map<int, std::string> steady_alternative;   // partially informed: cluster -> PMF family
  ExperimentDefaults experiment;
  std::uint64_t seed = 1;
  std::uint64_t hash = 0;  // FNV-1a of the source text

  const PmfFamily& family(const std::string& name) const;
  std::vector<Pmf> hypotheses_at(double alpha) const;
  Pmf null_at() const;
  /// Hypothesis index an agent's cluster is under in the steady-state setup.
  std::size_t true_hypothesis(AgentId k) const;
  Pmf alternative_for(AgentId k, double alpha) const;
  void check_alpha(double alpha) const;
};

/// Parses and validates a scenario. Relative graph file paths resolve against
/// `base_dir`. Errors are ValidationError messages prefixed with the JSON path
/// of the offending field (or the line/column of a syntax error).
ScenarioSpec parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
ScenarioSpec load_scenario(const std::filesystem::path& path);

/// The scenario's own schedule, or the steady-state assignment over all time
/// when it declares none.
IaProblem ia_problem(const ScenarioSpec& spec, double alpha);
PiaProblem pia_problem(const ScenarioSpec& spec, double alpha);

/// Steady-state experiment setups: clusters under their steady-state
/// hypothesis (informed), H0 everywhere, or H1 everywhere (partially informed).
IaProblem steady_ia_problem(const ScenarioSpec& spec, double alpha);
PiaProblem null_pia_problem(const ScenarioSpec& spec);
PiaProblem alternative_pia_problem(const ScenarioSpec& spec, double alpha);

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace mtdiff
