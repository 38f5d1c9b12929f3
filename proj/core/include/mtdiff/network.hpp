#pragma once

// Agent graphs with cluster labels, combination matrices built from
// (estimated) effective-neighbor sets, and the variance-reduction factor.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace mtdiff {

using AgentId = std::size_t;
using NeighborSets = std::vector<std::vector<AgentId>>;

/// Undirected agent network. Every agent is implicitly its own neighbor, so
/// neighbors(k) always contains k. Cluster labels are positive integers.
class Graph {
 public:
  Graph(std::size_t agents, std::vector<int> clusters,
        std::span<const std::pair<AgentId, AgentId>> edges);

  std::size_t size() const { return neighbors_.size(); }
  int cluster(AgentId k) const { return clusters_[k]; }
  const std::vector<int>& clusters() const { return clusters_; }
  /// Sorted neighborhood I_k, self included.
  const std::vector<AgentId>& neighbors(AgentId k) const { return neighbors_[k]; }
  bool adjacent(AgentId k, AgentId l) const;
  /// Neighbors sharing k's cluster (E_k), self included.
  std::vector<AgentId> effective_neighbors(AgentId k) const;
  NeighborSets all_neighbors() const { return neighbors_; }
  NeighborSets all_effective_neighbors() const;
  /// Undirected edges (k < l), self-loops omitted.
  std::vector<std::pair<AgentId, AgentId>> edges() const;
  bool connected() const;
  std::vector<int> distinct_clusters() const;

 private:
  std::vector<int> clusters_;
  NeighborSets neighbors_;
};

struct EdgeListSpec {
  std::size_t agents = 0;
  std::vector<int> clusters;
  std::vector<std::pair<AgentId, AgentId>> edges;  // 0-based
};

/// Hub is agent 0, ring agents are 1..ring_size.
struct RingWithHubSpec {
  std::size_t ring_size = 0;
  int hub_cluster = 1;
  int ring_cluster = 2;
  bool ring_edges = true;  // connect each ring agent to its two ring neighbors
};

enum class GeometricClusterRule {
  single,  // everyone in cluster 1
  halves,  // x < 0.5 -> cluster 1, otherwise cluster 2
};

/// Agents placed uniformly in the unit square, linked when closer than `radius`.
struct RandomGeometricSpec {
  std::size_t agents = 0;
  double radius = 0.0;
  std::uint64_t seed = 0;
  GeometricClusterRule cluster_rule = GeometricClusterRule::single;
};

using GraphSpec = std::variant<EdgeListSpec, RingWithHubSpec, RandomGeometricSpec>;

struct GraphBuild {
  Graph graph;
  std::vector<std::string> warnings;
};

GraphBuild build_graph(const GraphSpec& spec);

/// Plain-text graph format: `S <count>`, one `C k <label>` per agent, one
/// `E k l` per undirected edge; 1-based, whitespace separated. Lines starting
/// with '#' are ignored on input.
GraphBuild read_graph(std::istream& in);
GraphBuild read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const Graph& graph);

/// Right-stochastic matrix with a strictly positive diagonal, stored by rows.
class CombinationMatrix {
 public:
  struct Entry {
    AgentId col;
    double weight;
  };

  CombinationMatrix() = default;
  /// Validates nonnegativity, unit row sums (1e-12) and the positive diagonal.
  static CombinationMatrix from_dense(const Eigen::MatrixXd& a);

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const Entry> row(AgentId k) const {
    return {entries_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }
  double operator()(AgentId k, AgentId l) const;
  Eigen::MatrixXd dense() const;

  /// In-place version of combination_from_sets for callers that rebuild the
  /// matrix every iteration.
  void assign_from_sets(const Graph& graph, const NeighborSets& eff, std::span<const double> self_weights);
  /// Same without validation, for sets known to be sub-neighborhoods that
  /// contain their agent and weights known to lie in (0, 1].
  void assign_trusted(const NeighborSets& eff, std::span<const double> self_weights);

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Entry> entries_;
};

/// Uniform rule: self weight a_k, the remaining 1 - a_k shared equally by the
/// other members of eff[k]; a lone agent keeps all the mass.
CombinationMatrix combination_from_sets(const Graph& graph, const NeighborSets& eff,
                                        std::span<const double> self_weights);

/// B(1..j_max) with B(j) = A^j.
std::vector<Eigen::MatrixXd> matrix_power_rows(const CombinationMatrix& a, std::size_t j_max);

struct BetaFactors {
  std::vector<double> beta;
  double mu_used = 0.0;           // smallest step-size entering the extrapolation
  std::size_t truncation_j = 0;   // series length at mu_used
};

/// beta_k(A) = lim_{mu->0} sum_j sum_l mu (1-mu)^(2j-2) b_kl(j)^2.
///
/// The series is evaluated for mu = 1e-2, 5e-3, 2.5e-3, ... (truncated once
/// the weight mu (1-mu)^(2j-2) drops below 1e-14) and Richardson-extrapolated
/// from the two smallest step-sizes. Halving continues while successive
/// extrapolations move by more than 1e-9; throws NumericalError when the last
/// two still differ by more than 1e-4.
BetaFactors beta_factor(const CombinationMatrix& a);

}  // namespace mtdiff
