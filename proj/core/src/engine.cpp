#include <algorithm>
#include <string>

#include "effective_sets.hpp"
#include "mtdiff/diffusion.hpp"
#include "mtdiff/error.hpp"

namespace mtdiff {

namespace {

// Shared iteration of Algorithms IA and PIA. The mode-specific parts are the
// statistic table, the initial status, where observations come from and how
// a status turns into a decision.
class Simulation {
 public:
  Simulation(const Graph& graph, const EngineConfig& config, const StatTable& table, double initial,
             std::size_t horizon, std::uint64_t seed, const RecordOptions& record)
      : graph_(graph),
        config_(config),
        table_(table),
        horizon_(horizon),
        record_(record),
        self_weights_(config.resolved_self_weights(graph.size())),
        states_(graph.size()),
        stats_(graph.size()),
        labels_(graph.size()),
        tie_break_(seed, 0) {
    config_.validate(graph.size());
    for (AgentState& s : states_) {
      s.w.assign(table.dim(), initial);
      s.z.assign(table.dim(), initial);
      s.v.assign(table.dim(), 0.0);
    }
    observers_.reserve(graph.size());
    for (AgentId k = 0; k < graph.size(); ++k) observers_.emplace_back(seed, k + 1);
    const auto clusters = graph.distinct_clusters();
    for (AgentId k = 0; k < graph.size(); ++k) {
      cluster_index_.push_back(static_cast<std::size_t>(
          std::lower_bound(clusters.begin(), clusters.end(), graph.cluster(k)) - clusters.begin()));
    }
    cluster_labels_ = clusters;
  }

  const std::vector<int>& cluster_labels() const { return cluster_labels_; }

  // pmf_at(cluster_label, step) -> const Pmf&; decide(w) -> int.
  template <class PmfAt, class Decide>
  Trajectory run(PmfAt&& pmf_at, Decide&& decide) {
    Trajectory out;
    out.agents = graph_.size();
    out.horizon = horizon_;
    if (record_.decisions) out.decisions.reserve(horizon_ * graph_.size());

    const bool static_matrix = config_.rule == ClusteringRule::oracle || config_.rule == ClusteringRule::none;
    if (static_matrix) {
      eff_ = config_.rule == ClusteringRule::oracle ? graph_.all_effective_neighbors() : graph_.all_neighbors();
      matrix_.assign_from_sets(graph_, eff_, self_weights_);
    }
    for (AgentState& s : states_) s.last_decision = decide(s.w);
    // Decisions feed the naive IA rule; otherwise they are only needed when
    // recorded and at the final step.
    const bool every_step = record_.decisions ||
                            (config_.mode == Mode::informed && config_.rule == ClusteringRule::naive);

    std::vector<const Pmf*> current(cluster_labels_.size());
    for (std::size_t i = 1; i <= horizon_; ++i) {
      if (!static_matrix && estimate_effective()) matrix_.assign_trusted(eff_, self_weights_);
      for (std::size_t c = 0; c < cluster_labels_.size(); ++c) current[c] = &pmf_at(cluster_labels_[c], i);
      for (AgentId k = 0; k < graph_.size(); ++k) {
        const Symbol x = current[cluster_index_[k]]->sample(observers_[k]);
        stats_[k] = table_.row(x);
        std::vector<double>& z = states_[k].z;
        for (std::size_t r = 0; r < z.size(); ++r) z[r] = lms_step(z[r], stats_[k][r], config_.mu);
      }
      atc_round(states_, stats_, matrix_, config_.mu);
      if (every_step || i == horizon_) {
        for (AgentState& s : states_) {
          s.last_decision = decide(s.w);
          if (record_.decisions) out.decisions.push_back(s.last_decision);
        }
      }
      if (wants_snapshot(i)) out.snapshots.push_back(snapshot(i));
    }
    out.final_states = states_;
    return out;
  }

  Rng& tie_break() { return tie_break_; }

 private:
  // Refreshes eff_ from the time i-1 status; returns whether it changed.
  bool estimate_effective() {
    if (config_.mode == Mode::informed) {
      bool changed = eff_.empty();
      for (AgentId k = 0; k < graph_.size(); ++k) {
        const std::size_t label = config_.rule == ClusteringRule::isolated
                                      ? ia_decide(states_[k].z, tie_break_)
                                      : static_cast<std::size_t>(states_[k].last_decision);
        changed = changed || label != labels_[k];
        labels_[k] = label;
      }
      if (changed) detail::fill_by_labels(labels_, graph_, eff_);
      return changed;
    }
    status_view_.resize(graph_.size());
    for (AgentId k = 0; k < graph_.size(); ++k) {
      status_view_[k] = config_.rule == ClusteringRule::isolated ? states_[k].z : states_[k].w;
    }
    detail::fill_by_distance(status_view_, graph_, config_.delta, next_eff_);
    if (next_eff_ == eff_) return false;
    std::swap(next_eff_, eff_);
    return true;
  }

  bool wants_snapshot(std::size_t i) const {
    if (record_.state_stride > 0 && i % record_.state_stride == 0) return true;
    return std::find(record_.snapshot_steps.begin(), record_.snapshot_steps.end(), i) !=
           record_.snapshot_steps.end();
  }

  StateSnapshot snapshot(std::size_t i) const {
    StateSnapshot snap{i, {}, {}};
    for (const AgentState& s : states_) {
      snap.w.push_back(s.w);
      snap.z.push_back(s.z);
    }
    return snap;
  }

  const Graph& graph_;
  const EngineConfig& config_;
  const StatTable& table_;
  std::size_t horizon_;
  const RecordOptions& record_;
  std::vector<double> self_weights_;
  std::vector<AgentState> states_;
  StatRows stats_;
  std::vector<std::size_t> labels_;
  std::vector<std::vector<double>> status_view_;
  NeighborSets eff_;
  NeighborSets next_eff_;
  CombinationMatrix matrix_;
  std::vector<Rng> observers_;
  Rng tie_break_;
  std::vector<std::size_t> cluster_index_;
  std::vector<int> cluster_labels_;
};

void check_clusters_scheduled(const Graph& graph, const std::vector<int>& scheduled) {
  for (int c : graph.distinct_clusters()) {
    if (std::find(scheduled.begin(), scheduled.end(), c) == scheduled.end()) {
      throw ValidationError("schedule has no entry for cluster " + std::to_string(c));
    }
  }
}

}  // namespace

Trajectory run_ia(const IaProblem& problem, std::size_t horizon, std::uint64_t seed, const RecordOptions& record) {
  if (problem.config.mode != Mode::informed) throw ValidationError("run_ia needs an informed-agent configuration");
  if (problem.hypotheses.size() < 2) throw ValidationError("informed agents need at least two hypotheses");
  if (problem.schedule.covered_until() < horizon) {
    throw ValidationError("schedule covers " + std::to_string(problem.schedule.covered_until()) +
                          " steps, horizon is " + std::to_string(horizon));
  }
  std::vector<int> scheduled;
  for (const auto& [c, segments] : problem.schedule.clusters) {
    scheduled.push_back(c);
    for (const Segment& s : segments) {
      if (s.value >= problem.hypotheses.size()) {
        throw ValidationError("schedule of cluster " + std::to_string(c) + " references hypothesis " +
                              std::to_string(s.value + 1) + " of " + std::to_string(problem.hypotheses.size()));
      }
    }
  }
  check_clusters_scheduled(problem.graph, scheduled);

  const StatTable table = StatTable::log_likelihood(problem.hypotheses);
  Simulation sim(problem.graph, problem.config, table, 0.0, horizon, seed, record);
  Rng& tie = sim.tie_break();
  return sim.run(
      [&](int cluster, std::size_t step) -> const Pmf& {
        return problem.hypotheses[problem.schedule.hypothesis(cluster, step)];
      },
      [&](const std::vector<double>& w) { return static_cast<int>(ia_decide(w, tie)); });
}

Trajectory run_pia(const PiaProblem& problem, std::size_t horizon, std::uint64_t seed, const RecordOptions& record) {
  if (problem.config.mode != Mode::partially_informed) {
    throw ValidationError("run_pia needs a partially-informed configuration");
  }
  if (problem.schedule.covered_until() < horizon) {
    throw ValidationError("schedule covers " + std::to_string(problem.schedule.covered_until()) +
                          " steps, horizon is " + std::to_string(horizon));
  }
  const std::size_t m = problem.null_pmf.size();
  for (const PiaEpoch& e : problem.schedule.epochs) {
    if (!e.alternative) continue;
    std::vector<int> scheduled;
    for (const auto& [c, pmf] : e.alternatives) {
      scheduled.push_back(c);
      if (pmf.size() != m) throw ValidationError("alternative PMF of cluster " + std::to_string(c) + " has wrong size");
    }
    check_clusters_scheduled(problem.graph, scheduled);
  }

  const StatTable table = StatTable::indicator(m);
  Simulation sim(problem.graph, problem.config, table, 1.0 / static_cast<double>(m), horizon, seed, record);
  return sim.run(
      [&](int cluster, std::size_t step) -> const Pmf& {
        const PiaEpoch& e = problem.schedule.epoch_at(step);
        return e.alternative ? e.alternatives.at(cluster) : problem.null_pmf;
      },
      [&](const std::vector<double>& w) {
        return static_cast<int>(pia_decide(w, problem.null_pmf, problem.config.gamma));
      });
}

}  // namespace mtdiff
