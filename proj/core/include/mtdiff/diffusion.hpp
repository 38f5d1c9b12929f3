#pragma once

// LMS-for-decision recursion, synchronous ATC/CTA rounds, effective-neighbor
// estimation and the full informed (IA) / partially informed (PIA) loops.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "mtdiff/network.hpp"
#include "mtdiff/rng.hpp"
#include "mtdiff/simplex.hpp"

namespace mtdiff {

enum class Mode {
  informed,            // IA: H log-likelihood branches, argmax decision
  partially_informed,  // PIA: M indicator branches, Hoeffding-type test against p0
};

enum class ClusteringRule {
  isolated,  // IA: argmax agreement of the isolated iterates z; PIA: ||z_k - z_l|| < delta
  naive,     // same tests applied to the networked status w
  oracle,    // true effective neighbors E_k
  none,      // every neighbor, I_k
};

struct EngineConfig {
  double mu = 0.05;
  std::vector<double> self_weights;  // a_k per agent; empty means 0.5 everywhere
  Mode mode = Mode::informed;
  double delta = 0.2;  // PIA clustering threshold; +inf admits every neighbor
  double gamma = 0.0;  // PIA decision threshold in nats
  ClusteringRule rule = ClusteringRule::isolated;

  /// Throws ValidationError unless 0 < mu < 1, delta >= 0, gamma >= 0 and the
  /// self weights (if given) have one entry in (0, 1] per agent.
  void validate(std::size_t agents) const;
  std::vector<double> resolved_self_weights(std::size_t agents) const;
};

struct AgentState {
  std::vector<double> w;  // networked status
  std::vector<double> z;  // isolated status, driven by the agent's own data only
  std::vector<double> v;  // intermediate adapt-step output
  int last_decision = 0;
};

inline constexpr std::size_t kForever = std::numeric_limits<std::size_t>::max();

/// Piecewise-constant value over time: segment s covers steps up to and
/// including `until` (1-based), starting right after the previous segment.
struct Segment {
  std::size_t until = kForever;
  std::size_t value = 0;
};

/// Per-cluster hypothesis succession for informed agents (0-based hypothesis indices).
struct IaSchedule {
  std::map<int, std::vector<Segment>> clusters;

  std::size_t hypothesis(int cluster, std::size_t step) const;
  std::size_t covered_until() const;  // last step covered by every cluster
};

/// Network-wide H0 / H1 epochs for partially informed agents. During an H1
/// epoch each cluster observes its own alternative PMF.
struct PiaEpoch {
  std::size_t until = kForever;
  bool alternative = false;
  std::map<int, Pmf> alternatives;  // cluster -> PMF, used when `alternative`
};

struct PiaSchedule {
  std::vector<PiaEpoch> epochs;

  const PiaEpoch& epoch_at(std::size_t step) const;
  std::size_t covered_until() const;
};

struct IaProblem {
  Graph graph;
  std::vector<Pmf> hypotheses;
  IaSchedule schedule;
  EngineConfig config;
};

struct PiaProblem {
  Graph graph;
  Pmf null_pmf;
  PiaSchedule schedule;
  EngineConfig config;
};

struct RecordOptions {
  bool decisions = true;
  std::size_t state_stride = 0;              // 0 disables periodic state dumps
  std::vector<std::size_t> snapshot_steps;   // additional explicit dump times
};

struct StateSnapshot {
  std::size_t step = 0;
  std::vector<std::vector<double>> w;  // per agent
  std::vector<std::vector<double>> z;
};

struct Trajectory {
  std::size_t agents = 0;
  std::size_t horizon = 0;
  std::vector<int> decisions;  // step-major: decisions[(i - 1) * agents + k]
  std::vector<StateSnapshot> snapshots;
  std::vector<AgentState> final_states;

  int decision(std::size_t step, AgentId k) const { return decisions[(step - 1) * agents + k]; }
};

/// prev + mu (d - prev), i.e. the convex combination mu d + (1 - mu) prev.
inline double lms_step(double prev, double d, double mu) { return prev + mu * (d - prev); }

using StatRows = std::vector<std::span<const double>>;

/// Adapt-then-combine: v_k = LMS(w_k, d_k) for every agent, then
/// w_k = sum_l a_kl v_l. The combine phase reads only this round's v.
void atc_round(std::span<AgentState> states, const StatRows& stats, const CombinationMatrix& a, double mu);

/// Combine-then-adapt: v_k = sum_l a_kl w_l, then w_k = LMS(v_k, d_k).
void cta_round(std::span<AgentState> states, const StatRows& stats, const CombinationMatrix& a, double mu);

/// argmax_h w^(h); exact ties are broken uniformly with `tie_break`, which is
/// only advanced when a tie occurs.
std::size_t ia_decide(std::span<const double> w, Rng& tie_break);

enum class PiaDecision { h0 = 0, h1 = 1 };

/// H1 iff D(w || p0) >= gamma.
PiaDecision pia_decide(std::span<const double> w, const Pmf& p0, double gamma);

/// Estimated effective neighbors from per-agent argmax labels (isolated / naive
/// rules) or from the graph alone (oracle / none). Self is always a member.
NeighborSets estimate_effective_ia(std::span<const std::size_t> labels, const Graph& graph, ClusteringRule rule);

/// Same, starting from the status snapshots of time i-1 (z for the isolated rule,
/// w for the naive rule); argmax ties go through `tie_break`.
NeighborSets estimate_effective_ia(std::span<const std::vector<double>> snapshots, const Graph& graph,
                                   ClusteringRule rule, Rng& tie_break);

/// {l in I_k : ||z_k - z_l|| < delta} plus k itself.
NeighborSets estimate_effective_pia(std::span<const std::vector<double>> z, const Graph& graph, double delta);

/// Informed agents. Observations of agent k come from its own stream (seed, k + 1);
/// argmax tie-breaks use stream (seed, 0). Status starts at 0.
Trajectory run_ia(const IaProblem& problem, std::size_t horizon, std::uint64_t seed,
                  const RecordOptions& record = {});

/// Partially informed agents; status starts at the uniform PMF.
Trajectory run_pia(const PiaProblem& problem, std::size_t horizon, std::uint64_t seed,
                   const RecordOptions& record = {});

}  // namespace mtdiff
