#include <vector>

#include <benchmark/benchmark.h>

#include "mtdiff/diffusion.hpp"
#include "mtdiff/network.hpp"

using namespace mtdiff;

namespace {

Graph geometric(std::size_t agents) {
  return build_graph(RandomGeometricSpec{agents, 0.3, 894, GeometricClusterRule::halves}).graph;
}

IaProblem two_cluster_problem(std::size_t agents, ClusteringRule rule) {
  EngineConfig cfg;
  cfg.rule = rule;
  IaSchedule sched;
  sched.clusters[1] = {Segment{kForever, 3}};
  sched.clusters[2] = {Segment{kForever, 0}};
  return IaProblem{geometric(agents),
                   {Pmf({0.34, 0.33, 0.33}), Pmf({0.53, 0.33, 0.14}), Pmf({0.14, 0.33, 0.53}), Pmf({0.24, 0.52, 0.24})},
                   sched,
                   cfg};
}

void BM_AtcRound(benchmark::State& state) {
  const auto agents = static_cast<std::size_t>(state.range(0));
  const Graph g = geometric(agents);
  const auto a = combination_from_sets(g, g.all_neighbors(), std::vector<double>(agents, 0.5));
  const auto table = StatTable::indicator(3);
  std::vector<AgentState> s(agents);
  for (auto& st : s) st.w = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  StatRows d;
  for (std::size_t k = 0; k < agents; ++k) d.push_back(table.row(k % 3));
  for (auto _ : state) {
    atc_round(s, d, a, 0.05);
    benchmark::DoNotOptimize(s.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_AtcRound)->Arg(35)->Arg(200)->Arg(1000);

void BM_BetaFactor(benchmark::State& state) {
  const auto agents = static_cast<std::size_t>(state.range(0));
  const Graph g = geometric(agents);
  const auto a = combination_from_sets(g, g.all_effective_neighbors(), std::vector<double>(agents, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(beta_factor(a));
}
BENCHMARK(BM_BetaFactor)->Arg(10)->Arg(35)->Unit(benchmark::kMillisecond);

void BM_RunIa(benchmark::State& state) {
  const auto rule = static_cast<ClusteringRule>(state.range(0));
  const IaProblem p = two_cluster_problem(35, rule);
  RecordOptions rec;
  rec.decisions = false;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_ia(p, 1000, ++seed, rec));
  state.SetItemsProcessed(state.iterations() * 35 * 1000);
}
BENCHMARK(BM_RunIa)
    ->Arg(static_cast<int>(ClusteringRule::isolated))
    ->Arg(static_cast<int>(ClusteringRule::oracle))
    ->Unit(benchmark::kMillisecond);

void BM_RunPia(benchmark::State& state) {
  EngineConfig cfg;
  cfg.mode = Mode::partially_informed;
  const PiaProblem p{geometric(35), Pmf({1.0 / 3, 1.0 / 3, 1.0 / 3}), PiaSchedule{{PiaEpoch{}}}, cfg};
  RecordOptions rec;
  rec.decisions = false;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_pia(p, 1000, ++seed, rec));
  state.SetItemsProcessed(state.iterations() * 35 * 1000);
}
BENCHMARK(BM_RunPia)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
