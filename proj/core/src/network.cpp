#include "mtdiff/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "mtdiff/error.hpp"
#include "mtdiff/rng.hpp"

namespace mtdiff {

namespace {

constexpr double kRowSumTolerance = 1e-12;

}  // namespace

Graph::Graph(std::size_t agents, std::vector<int> clusters,
             std::span<const std::pair<AgentId, AgentId>> edges)
    : clusters_(std::move(clusters)), neighbors_(agents) {
  if (agents == 0) throw ValidationError("graph has no agents");
  if (clusters_.size() != agents) {
    throw ValidationError("graph has " + std::to_string(agents) + " agents but " +
                          std::to_string(clusters_.size()) + " cluster labels");
  }
  for (std::size_t k = 0; k < agents; ++k) {
    if (clusters_[k] <= 0) {
      throw ValidationError("agent " + std::to_string(k + 1) + " has non-positive cluster label");
    }
    neighbors_[k].push_back(k);
  }
  for (const auto& [k, l] : edges) {
    if (k >= agents || l >= agents) {
      throw ValidationError("edge " + std::to_string(k + 1) + "-" + std::to_string(l + 1) +
                            " references a missing agent");
    }
    if (k == l) throw ValidationError("explicit self-loop on agent " + std::to_string(k + 1));
    neighbors_[k].push_back(l);
    neighbors_[l].push_back(k);
  }
  for (auto& nb : neighbors_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

bool Graph::adjacent(AgentId k, AgentId l) const {
  return std::binary_search(neighbors_[k].begin(), neighbors_[k].end(), l);
}

std::vector<AgentId> Graph::effective_neighbors(AgentId k) const {
  std::vector<AgentId> eff;
  for (AgentId l : neighbors_[k]) {
    if (clusters_[l] == clusters_[k]) eff.push_back(l);
  }
  return eff;
}

NeighborSets Graph::all_effective_neighbors() const {
  NeighborSets sets(size());
  for (AgentId k = 0; k < size(); ++k) sets[k] = effective_neighbors(k);
  return sets;
}

std::vector<std::pair<AgentId, AgentId>> Graph::edges() const {
  std::vector<std::pair<AgentId, AgentId>> out;
  for (AgentId k = 0; k < size(); ++k) {
    for (AgentId l : neighbors_[k]) {
      if (l > k) out.emplace_back(k, l);
    }
  }
  return out;
}

bool Graph::connected() const {
  std::vector<bool> seen(size(), false);
  std::vector<AgentId> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const AgentId k = stack.back();
    stack.pop_back();
    for (AgentId l : neighbors_[k]) {
      if (!seen[l]) {
        seen[l] = true;
        ++count;
        stack.push_back(l);
      }
    }
  }
  return count == size();
}

std::vector<int> Graph::distinct_clusters() const {
  std::set<int> s(clusters_.begin(), clusters_.end());
  return {s.begin(), s.end()};
}

namespace {

Graph build(const EdgeListSpec& spec) { return Graph(spec.agents, spec.clusters, spec.edges); }

Graph build(const RingWithHubSpec& spec) {
  if (spec.ring_size < 3) throw ValidationError("ring_with_hub needs a ring of at least 3 agents");
  const std::size_t n = spec.ring_size + 1;
  std::vector<int> clusters(n, spec.ring_cluster);
  clusters[0] = spec.hub_cluster;
  std::vector<std::pair<AgentId, AgentId>> edges;
  for (AgentId r = 1; r <= spec.ring_size; ++r) {
    edges.emplace_back(0, r);
    if (spec.ring_edges) edges.emplace_back(r, r % spec.ring_size + 1);
  }
  return Graph(n, std::move(clusters), edges);
}

Graph build(const RandomGeometricSpec& spec) {
  if (spec.agents == 0) throw ValidationError("random_geometric needs at least one agent");
  if (!(spec.radius > 0.0)) throw ValidationError("random_geometric radius must be positive");
  Rng rng(spec.seed);
  std::vector<double> x(spec.agents), y(spec.agents);
  for (std::size_t k = 0; k < spec.agents; ++k) {
    x[k] = rng.uniform();
    y[k] = rng.uniform();
  }
  std::vector<int> clusters(spec.agents, 1);
  if (spec.cluster_rule == GeometricClusterRule::halves) {
    for (std::size_t k = 0; k < spec.agents; ++k) clusters[k] = x[k] < 0.5 ? 1 : 2;
  }
  std::vector<std::pair<AgentId, AgentId>> edges;
  for (AgentId k = 0; k < spec.agents; ++k) {
    for (AgentId l = k + 1; l < spec.agents; ++l) {
      if (std::hypot(x[k] - x[l], y[k] - y[l]) < spec.radius) edges.emplace_back(k, l);
    }
  }
  return Graph(spec.agents, std::move(clusters), edges);
}

GraphBuild with_diagnostics(Graph g) {
  GraphBuild out{std::move(g), {}};
  if (!out.graph.connected()) out.warnings.push_back("graph is disconnected");
  return out;
}

}  // namespace

GraphBuild build_graph(const GraphSpec& spec) {
  return with_diagnostics(std::visit([](const auto& s) { return build(s); }, spec));
}

GraphBuild read_graph(std::istream& in) {
  std::size_t agents = 0;
  bool have_size = false;
  std::vector<int> clusters;
  std::vector<bool> labeled;
  std::vector<std::pair<AgentId, AgentId>> edges;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ValidationError("graph line " + std::to_string(line_no) + ": " + what);
  };
  auto agent_index = [&](long long v) -> AgentId {
    if (v < 1 || static_cast<std::size_t>(v) > agents) fail("agent index " + std::to_string(v) + " out of range");
    return static_cast<AgentId>(v - 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "S") {
      long long s = 0;
      if (have_size || !(ls >> s) || s < 1) fail("bad or repeated 'S' record");
      agents = static_cast<std::size_t>(s);
      have_size = true;
      clusters.assign(agents, 0);
      labeled.assign(agents, false);
    } else if (!have_size) {
      fail("'S <count>' must come first");
    } else if (tag == "C") {
      long long k = 0, label = 0;
      if (!(ls >> k >> label)) fail("malformed 'C' record");
      const AgentId id = agent_index(k);
      if (label < 1) fail("cluster label must be positive");
      if (labeled[id]) fail("agent " + std::to_string(k) + " labeled twice");
      clusters[id] = static_cast<int>(label);
      labeled[id] = true;
    } else if (tag == "E") {
      long long k = 0, l = 0;
      if (!(ls >> k >> l)) fail("malformed 'E' record");
      if (k == l) fail("self-loops are implicit and must be omitted");
      edges.emplace_back(agent_index(k), agent_index(l));
    } else {
      fail("unknown record '" + tag + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing token '" + extra + "'");
  }
  if (!have_size) throw ValidationError("graph file has no 'S' record");
  for (std::size_t k = 0; k < agents; ++k) {
    if (!labeled[k]) throw ValidationError("agent " + std::to_string(k + 1) + " has no cluster label");
  }
  return with_diagnostics(Graph(agents, std::move(clusters), edges));
}

GraphBuild read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open graph file " + path);
  return read_graph(in);
}

void write_graph(std::ostream& out, const Graph& graph) {
  out << "S " << graph.size() << '\n';
  for (AgentId k = 0; k < graph.size(); ++k) out << "C " << k + 1 << ' ' << graph.cluster(k) << '\n';
  for (const auto& [k, l] : graph.edges()) out << "E " << k + 1 << ' ' << l + 1 << '\n';
}

CombinationMatrix CombinationMatrix::from_dense(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw ValidationError("combination matrix must be square");
  CombinationMatrix m;
  const auto n = static_cast<std::size_t>(a.rows());
  m.offsets_.assign(n + 1, 0);
  for (std::size_t k = 0; k < n; ++k) {
    double sum = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      const double w = a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
      if (w < 0.0 || !std::isfinite(w)) throw ValidationError("combination matrix has a negative entry");
      if (w > 0.0) m.entries_.push_back({l, w});
      sum += w;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw ValidationError("combination matrix row " + std::to_string(k + 1) + " sums to " + std::to_string(sum));
    }
    if (!(a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) > 0.0)) {
      throw ValidationError("combination matrix diagonal entry " + std::to_string(k + 1) + " is not positive");
    }
    m.offsets_[k + 1] = m.entries_.size();
  }
  return m;
}

double CombinationMatrix::operator()(AgentId k, AgentId l) const {
  for (const Entry& e : row(k)) {
    if (e.col == l) return e.weight;
  }
  return 0.0;
}

Eigen::MatrixXd CombinationMatrix::dense() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (AgentId k = 0; k < size(); ++k) {
    for (const Entry& e : row(k)) a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(e.col)) = e.weight;
  }
  return a;
}

void CombinationMatrix::assign_from_sets(const Graph& graph, const NeighborSets& eff,
                                         std::span<const double> self_weights) {
  const std::size_t n = graph.size();
  if (eff.size() != n || self_weights.size() != n) {
    throw ValidationError("effective sets / self weights do not match the graph size");
  }
  for (AgentId k = 0; k < n; ++k) {
    const auto& set = eff[k];
    if (!(self_weights[k] > 0.0 && self_weights[k] <= 1.0)) throw ValidationError("self weight must lie in (0, 1]");
    if (std::find(set.begin(), set.end(), k) == set.end()) {
      throw ValidationError("effective set of agent " + std::to_string(k + 1) + " does not contain the agent");
    }
    for (AgentId l : set) {
      if (l != k && (l >= n || !graph.adjacent(k, l))) {
        throw ValidationError("agent " + std::to_string(l + 1) + " is not a neighbor of agent " +
                              std::to_string(k + 1));
      }
    }
  }
  assign_trusted(eff, self_weights);
}

void CombinationMatrix::assign_trusted(const NeighborSets& eff, std::span<const double> self_weights) {
  const std::size_t n = eff.size();
  offsets_.resize(n + 1);
  offsets_[0] = 0;
  entries_.clear();
  for (AgentId k = 0; k < n; ++k) {
    const auto& set = eff[k];
    const double a_k = self_weights[k];
    if (set.size() == 1) {
      entries_.push_back({k, 1.0});
    } else {
      const double other = (1.0 - a_k) / static_cast<double>(set.size() - 1);
      for (AgentId l : set) entries_.push_back({l, l == k ? a_k : other});
    }
    offsets_[k + 1] = entries_.size();
  }
}

CombinationMatrix combination_from_sets(const Graph& graph, const NeighborSets& eff,
                                        std::span<const double> self_weights) {
  CombinationMatrix m;
  m.assign_from_sets(graph, eff, self_weights);
  return m;
}

std::vector<Eigen::MatrixXd> matrix_power_rows(const CombinationMatrix& a, std::size_t j_max) {
  if (j_max == 0) throw ValidationError("matrix_power_rows needs j_max >= 1");
  const Eigen::MatrixXd base = a.dense();
  std::vector<Eigen::MatrixXd> powers;
  powers.reserve(j_max);
  powers.push_back(base);
  for (std::size_t j = 1; j < j_max; ++j) powers.push_back(powers.back() * base);
  for (std::size_t j = 0; j < j_max; ++j) {
    const Eigen::VectorXd sums = powers[j].rowwise().sum();
    if ((sums.array() - 1.0).abs().maxCoeff() > 1e-9) {
      throw NumericalError("A^" + std::to_string(j + 1) + " lost row-stochasticity");
    }
  }
  return powers;
}

}  // namespace mtdiff
