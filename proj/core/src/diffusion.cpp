#include "mtdiff/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "effective_sets.hpp"
#include "mtdiff/error.hpp"

namespace mtdiff {

void EngineConfig::validate(std::size_t agents) const {
  if (!(mu > 0.0 && mu < 1.0)) throw ValidationError("step-size mu must lie in (0, 1)");
  if (!(delta >= 0.0)) throw ValidationError("delta must be nonnegative");
  if (!(gamma >= 0.0) || std::isinf(gamma)) throw ValidationError("gamma must be finite and nonnegative");
  if (!self_weights.empty()) {
    if (self_weights.size() != agents) {
      throw ValidationError("expected " + std::to_string(agents) + " self weights, got " +
                            std::to_string(self_weights.size()));
    }
    for (double a : self_weights) {
      if (!(a > 0.0 && a <= 1.0)) throw ValidationError("self weights must lie in (0, 1]");
    }
  }
}

std::vector<double> EngineConfig::resolved_self_weights(std::size_t agents) const {
  return self_weights.empty() ? std::vector<double>(agents, 0.5) : self_weights;
}

std::size_t IaSchedule::hypothesis(int cluster, std::size_t step) const {
  const auto it = clusters.find(cluster);
  if (it == clusters.end()) throw ValidationError("no schedule for cluster " + std::to_string(cluster));
  for (const Segment& s : it->second) {
    if (step <= s.until) return s.value;
  }
  throw ValidationError("schedule of cluster " + std::to_string(cluster) + " ends before step " +
                        std::to_string(step));
}

std::size_t IaSchedule::covered_until() const {
  std::size_t covered = kForever;
  for (const auto& [cluster, segments] : clusters) {
    covered = std::min(covered, segments.empty() ? 0 : segments.back().until);
  }
  return clusters.empty() ? 0 : covered;
}

const PiaEpoch& PiaSchedule::epoch_at(std::size_t step) const {
  for (const PiaEpoch& e : epochs) {
    if (step <= e.until) return e;
  }
  throw ValidationError("PIA schedule ends before step " + std::to_string(step));
}

std::size_t PiaSchedule::covered_until() const { return epochs.empty() ? 0 : epochs.back().until; }

void atc_round(std::span<AgentState> states, const StatRows& stats, const CombinationMatrix& a, double mu) {
  if (stats.size() != states.size() || a.size() != states.size()) {
    throw ValidationError("atc_round: agent count mismatch");
  }
  for (std::size_t k = 0; k < states.size(); ++k) {
    AgentState& s = states[k];
    const std::size_t dim = s.w.size();
    if (stats[k].size() != dim) throw ValidationError("atc_round: statistic dimension mismatch");
    s.v.resize(dim);
    const double* w = s.w.data();
    const double* d = stats[k].data();
    double* v = s.v.data();
    for (std::size_t r = 0; r < dim; ++r) v[r] = lms_step(w[r], d[r], mu);
  }
  for (std::size_t k = 0; k < states.size(); ++k) {
    double* w = states[k].w.data();
    const std::size_t dim = states[k].w.size();
    std::fill(w, w + dim, 0.0);
    for (const auto& [l, weight] : a.row(k)) {
      const double* v = states[l].v.data();
      for (std::size_t r = 0; r < dim; ++r) w[r] += weight * v[r];
    }
  }
}

void cta_round(std::span<AgentState> states, const StatRows& stats, const CombinationMatrix& a, double mu) {
  if (stats.size() != states.size() || a.size() != states.size()) {
    throw ValidationError("cta_round: agent count mismatch");
  }
  for (std::size_t k = 0; k < states.size(); ++k) {
    AgentState& s = states[k];
    s.v.assign(s.w.size(), 0.0);
    for (const auto& [l, weight] : a.row(k)) {
      const std::vector<double>& w = states[l].w;
      for (std::size_t r = 0; r < s.v.size(); ++r) s.v[r] += weight * w[r];
    }
  }
  for (std::size_t k = 0; k < states.size(); ++k) {
    AgentState& s = states[k];
    if (stats[k].size() != s.w.size()) throw ValidationError("cta_round: statistic dimension mismatch");
    for (std::size_t r = 0; r < s.w.size(); ++r) s.w[r] = lms_step(s.v[r], stats[k][r], mu);
  }
}

std::size_t ia_decide(std::span<const double> w, Rng& tie_break) {
  if (w.empty()) throw ValidationError("ia_decide on an empty status");
  std::size_t best = 0;
  std::size_t ties = 1;
  for (std::size_t h = 1; h < w.size(); ++h) {
    if (w[h] > w[best]) {
      best = h;
      ties = 1;
    } else if (w[h] == w[best]) {
      ++ties;
    }
  }
  if (ties == 1) return best;
  std::size_t pick = tie_break.index(ties);
  for (std::size_t h = best; h < w.size(); ++h) {
    if (w[h] == w[best] && pick-- == 0) return h;
  }
  return best;
}

PiaDecision pia_decide(std::span<const double> w, const Pmf& p0, double gamma) {
  return kl_divergence(w, p0) >= gamma ? PiaDecision::h1 : PiaDecision::h0;
}

NeighborSets estimate_effective_ia(std::span<const std::size_t> labels, const Graph& graph, ClusteringRule rule) {
  switch (rule) {
    case ClusteringRule::oracle:
      return graph.all_effective_neighbors();
    case ClusteringRule::none:
      return graph.all_neighbors();
    case ClusteringRule::isolated:
    case ClusteringRule::naive:
      break;
  }
  if (labels.size() != graph.size()) throw ValidationError("one argmax label per agent required");
  NeighborSets sets;
  detail::fill_by_labels(labels, graph, sets);
  return sets;
}

NeighborSets estimate_effective_ia(std::span<const std::vector<double>> snapshots, const Graph& graph,
                                   ClusteringRule rule, Rng& tie_break) {
  if (rule == ClusteringRule::oracle || rule == ClusteringRule::none) {
    return estimate_effective_ia(std::span<const std::size_t>{}, graph, rule);
  }
  if (snapshots.size() != graph.size()) throw ValidationError("one status snapshot per agent required");
  std::vector<std::size_t> labels(snapshots.size());
  for (std::size_t k = 0; k < snapshots.size(); ++k) labels[k] = ia_decide(snapshots[k], tie_break);
  return estimate_effective_ia(labels, graph, rule);
}

NeighborSets estimate_effective_pia(std::span<const std::vector<double>> z, const Graph& graph, double delta) {
  if (z.size() != graph.size()) throw ValidationError("one status snapshot per agent required");
  NeighborSets sets;
  detail::fill_by_distance(z, graph, delta, sets);
  return sets;
}

namespace detail {

void fill_by_labels(std::span<const std::size_t> labels, const Graph& graph, NeighborSets& out) {
  out.resize(graph.size());
  for (AgentId k = 0; k < graph.size(); ++k) {
    out[k].clear();
    for (AgentId l : graph.neighbors(k)) {
      if (l == k || labels[l] == labels[k]) out[k].push_back(l);
    }
  }
}

void fill_by_distance(std::span<const std::vector<double>> status, const Graph& graph, double delta,
                      NeighborSets& out) {
  out.resize(graph.size());
  for (AgentId k = 0; k < graph.size(); ++k) {
    out[k].clear();
    for (AgentId l : graph.neighbors(k)) {
      if (l == k) {
        out[k].push_back(l);
        continue;
      }
      double dist2 = 0.0;
      for (std::size_t m = 0; m < status[k].size(); ++m) {
        const double diff = status[k][m] - status[l][m];
        dist2 += diff * diff;
      }
      if (std::sqrt(dist2) < delta) out[k].push_back(l);
    }
  }
}

}  // namespace detail

}  // namespace mtdiff
