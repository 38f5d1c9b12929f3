#include <algorithm>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "mtdiff/error.hpp"
#include "mtdiff/network.hpp"
#include "mtdiff/rng.hpp"

using namespace mtdiff;

namespace {

Eigen::MatrixXd random_stochastic(Rng& rng, std::size_t s) {
  Eigen::MatrixXd a(s, s);
  for (std::size_t k = 0; k < s; ++k) {
    double sum = 0.0;
    for (std::size_t l = 0; l < s; ++l) {
      // Sparse-ish rows with a guaranteed positive diagonal.
      a(k, l) = (l == k || rng.uniform() < 0.5) ? 0.05 + rng.uniform() : 0.0;
      sum += a(k, l);
    }
    a.row(k) /= sum;
  }
  return a;
}

// Abel limit of the beta series: half the squared norm of the limiting row.
double beta_oracle(const Eigen::MatrixXd& a, std::size_t k) {
  Eigen::MatrixXd p = a;
  for (int i = 0; i < 4000; ++i) p = p * a;
  return 0.5 * p.row(static_cast<Eigen::Index>(k)).squaredNorm();
}

}  // namespace

TEST(Graph, SelfIsAlwaysANeighbor) {
  const std::vector<std::pair<AgentId, AgentId>> e = {{0, 1}};
  const Graph g(2, {1, 1}, e);
  EXPECT_EQ(g.neighbors(0), (std::vector<AgentId>{0, 1}));
  EXPECT_EQ(g.neighbors(1), (std::vector<AgentId>{0, 1}));
  EXPECT_TRUE(g.adjacent(1, 1));
}

TEST(Graph, RejectsMalformedInput) {
  const std::vector<std::pair<AgentId, AgentId>> out_of_range = {{0, 2}};
  EXPECT_THROW(Graph(2, {1, 1}, out_of_range), ValidationError);
  const std::vector<std::pair<AgentId, AgentId>> loop = {{1, 1}};
  EXPECT_THROW(Graph(2, {1, 1}, loop), ValidationError);
  EXPECT_THROW(Graph(2, {1, 0}, {}), ValidationError);
  EXPECT_THROW(Graph(2, {1}, {}), ValidationError);
}

TEST(Graph, AdjacencyIsSymmetric) {
  const GraphBuild b = build_graph(RandomGeometricSpec{40, 0.25, 3, GeometricClusterRule::halves});
  for (AgentId k = 0; k < b.graph.size(); ++k) {
    for (AgentId l : b.graph.neighbors(k)) EXPECT_TRUE(b.graph.adjacent(l, k));
  }
}

TEST(BuildGraph, RingWithHub) {
  const GraphBuild b = build_graph(RingWithHubSpec{29, 1, 2, true});
  EXPECT_EQ(b.graph.size(), 30u);
  EXPECT_EQ(b.graph.neighbors(0).size(), 30u);
  for (AgentId k = 1; k < 30; ++k) EXPECT_EQ(b.graph.neighbors(k).size(), 4u);
  EXPECT_TRUE(b.warnings.empty());
  const GraphBuild bare = build_graph(RingWithHubSpec{29, 1, 2, false});
  EXPECT_EQ(bare.graph.neighbors(5).size(), 2u);
}

TEST(BuildGraph, RandomGeometricIsDeterministic) {
  const auto a = build_graph(RandomGeometricSpec{35, 0.3, 17, GeometricClusterRule::single});
  const auto b = build_graph(RandomGeometricSpec{35, 0.3, 17, GeometricClusterRule::single});
  EXPECT_EQ(a.graph.edges(), b.graph.edges());
}

TEST(BuildGraph, DisconnectedGraphIsFlagged) {
  const GraphBuild b = build_graph(EdgeListSpec{3, {1, 1, 2}, {{0, 1}}});
  EXPECT_FALSE(b.graph.connected());
  ASSERT_EQ(b.warnings.size(), 1u);
}

TEST(GraphFile, RoundTrip) {
  const GraphBuild b = build_graph(RingWithHubSpec{6, 1, 2, true});
  std::stringstream buf;
  write_graph(buf, b.graph);
  const GraphBuild r = read_graph(buf);
  EXPECT_EQ(r.graph.edges(), b.graph.edges());
  EXPECT_EQ(r.graph.clusters(), b.graph.clusters());
}

TEST(GraphFile, ReportsLineOfError) {
  std::stringstream in("S 2\nC 1 1\nC 2 1\nE 1 3\n");
  try {
    read_graph(in);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
}

TEST(CombinationFromSets, UniformRule) {
  const GraphBuild b = build_graph(RingWithHubSpec{4, 1, 2, true});
  const std::vector<double> a(5, 0.5);
  NeighborSets eff = {{0}, {0, 1, 2}, {1, 2}, {3}, {4}};
  const auto m = combination_from_sets(b.graph, eff, a);
  EXPECT_DOUBLE_EQ(m(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(m(1, 0), 0.25);
  EXPECT_DOUBLE_EQ(m(1, 2), 0.25);
  EXPECT_DOUBLE_EQ(m(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(m(2, 1), 0.5);
  EXPECT_DOUBLE_EQ(m(2, 2), 0.5);
}

TEST(CombinationFromSets, Errors) {
  const GraphBuild b = build_graph(RingWithHubSpec{4, 1, 2, false});
  const std::vector<double> a(5, 0.5);
  EXPECT_THROW(combination_from_sets(b.graph, {{1}, {1}, {2}, {3}, {4}}, a), ValidationError);
  EXPECT_THROW(combination_from_sets(b.graph, {{0}, {1, 2}, {2}, {3}, {4}}, a), ValidationError);
}

TEST(CombinationFromSets, RowsSumToOneAndVanishOutsideSets) {
  Rng rng(21);
  const GraphBuild b = build_graph(RandomGeometricSpec{30, 0.3, 5, GeometricClusterRule::halves});
  for (int trial = 0; trial < 50; ++trial) {
    NeighborSets eff(b.graph.size());
    std::vector<double> a(b.graph.size());
    for (AgentId k = 0; k < b.graph.size(); ++k) {
      a[k] = 0.05 + 0.95 * rng.uniform();
      for (AgentId l : b.graph.neighbors(k)) {
        if (l == k || rng.uniform() < 0.5) eff[k].push_back(l);
      }
    }
    const Eigen::MatrixXd d = combination_from_sets(b.graph, eff, a).dense();
    for (AgentId k = 0; k < b.graph.size(); ++k) {
      EXPECT_NEAR(d.row(static_cast<Eigen::Index>(k)).sum(), 1.0, 1e-12);
      for (AgentId l = 0; l < b.graph.size(); ++l) {
        if (std::find(eff[k].begin(), eff[k].end(), l) == eff[k].end()) {
          EXPECT_EQ(d(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)), 0.0);
        }
      }
    }
  }
}

TEST(CombinationMatrix, FromDenseValidates) {
  Eigen::MatrixXd a(2, 2);
  a << 0.5, 0.5, 1.0, 0.0;
  EXPECT_THROW(CombinationMatrix::from_dense(a), ValidationError);
  a << 0.5, 0.6, 0.5, 0.5;
  EXPECT_THROW(CombinationMatrix::from_dense(a), ValidationError);
}

TEST(MatrixPowerRows, ClosedFormCases) {
  const auto id = CombinationMatrix::from_dense(Eigen::MatrixXd::Identity(3, 3));
  for (const auto& b : matrix_power_rows(id, 5)) EXPECT_TRUE(b.isIdentity(0.0));
  const auto half = CombinationMatrix::from_dense(Eigen::MatrixXd::Constant(2, 2, 0.5));
  for (const auto& b : matrix_power_rows(half, 5)) EXPECT_TRUE(b.isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5)));
}

TEST(MatrixPowerRows, PreservesStochasticity) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = CombinationMatrix::from_dense(random_stochastic(rng, 2 + rng.index(9)));
    for (const auto& b : matrix_power_rows(a, 6)) {
      EXPECT_LT((b.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-9);
    }
  }
}

TEST(BetaFactor, ClosedFormCases) {
  for (std::size_t s : {1u, 4u, 35u}) {
    const auto b = beta_factor(CombinationMatrix::from_dense(Eigen::MatrixXd::Identity(s, s)));
    for (double x : b.beta) EXPECT_NEAR(x, 0.5, 1e-6);
  }
  const auto u = beta_factor(CombinationMatrix::from_dense(Eigen::MatrixXd::Constant(35, 35, 1.0 / 35)));
  for (double x : u.beta) EXPECT_NEAR(x, 1.0 / 70.0, 1e-6);
  const auto h = beta_factor(CombinationMatrix::from_dense(Eigen::MatrixXd::Constant(2, 2, 0.5)));
  for (double x : h.beta) EXPECT_NEAR(x, 0.25, 1e-6);
}

TEST(BetaFactor, MatchesLimitingRowOracle) {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = random_stochastic(rng, 2 + rng.index(9));
    const auto b = beta_factor(CombinationMatrix::from_dense(a));
    for (std::size_t k = 0; k < b.beta.size(); ++k) EXPECT_NEAR(b.beta[k], beta_oracle(a, k), 1e-6);
  }
}

TEST(BetaFactor, BoundsOnRandomMatrices) {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t s = 2 + rng.index(9);
    const auto b = beta_factor(CombinationMatrix::from_dense(random_stochastic(rng, s)));
    for (double x : b.beta) {
      EXPECT_GE(x, 0.5 / static_cast<double>(s) - 1e-6);
      EXPECT_LE(x, 0.5 + 1e-6);
    }
  }
}
