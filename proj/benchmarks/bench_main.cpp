#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "warnsim/dissemination/games.hpp"
#include "warnsim/radio/channel.hpp"
#include "warnsim/roadnet/mobility.hpp"
#include "warnsim/routing/gpsr.hpp"
#include "warnsim/routing/multimetric.hpp"
#include "warnsim/sim/simulator.hpp"

using namespace warnsim;

static void BM_EventQueue(benchmark::State& state) {
  const auto n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    sim::Simulator s;
    sim::RngStream rng(1, sim::StreamId::Mac);
    for (int i = 0; i < n; ++i) {
      s.schedule(rng.uniform(0.0, 100.0), sim::EventKind::TimerExpiry, 0, [](const sim::SimEvent&) {});
    }
    s.run_until(100.0);
    benchmark::DoNotOptimize(s.digest());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EventQueue)->Arg(1 << 10)->Arg(1 << 16);

static void BM_GreedyNext(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 500.0);
  std::vector<routing::NeighborEntry> nb(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < nb.size(); ++i) {
    nb[i].id = static_cast<NodeId>(i);
    nb[i].pos = {u(rng), u(rng)};
  }
  for (auto _ : state) benchmark::DoNotOptimize(routing::gpsr_greedy_next({250, 250}, nb, {2000, 250}));
}
BENCHMARK(BM_GreedyNext)->Arg(10)->Arg(100);

static void BM_DswUpdate(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<routing::MetricVector> snaps(20);
  for (auto& s : snaps) s = {u(rng), u(rng), 1.0, u(rng), u(rng)};
  auto w = routing::MetricWeights::equal();
  for (auto _ : state) {
    w = routing::dsw_update(snaps, w, 0.5, 0.05);
    benchmark::DoNotOptimize(w);
  }
}
BENCHMARK(BM_DswUpdate);

static void BM_ForwardingGame(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  std::vector<double> a(static_cast<std::size_t>(state.range(0)));
  for (auto& x : a) x = u(rng);
  const dissemination::GameConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(dissemination::forwarding_game_equilibrium(a, cfg));
}
BENCHMARK(BM_ForwardingGame)->Arg(3)->Arg(30);

static void BM_ChannelBroadcast(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 2500.0);
  std::vector<Point> pos(n);
  for (auto& p : pos) p = {u(rng), u(rng)};
  const std::vector<std::uint8_t> active(n, 1);
  radio::Channel ch({}, nullptr, n, 7);
  ch.set_positions(pos, active);
  double t = 0.0;
  NodeId s = 0;
  for (auto _ : state) {
    const auto tx = ch.begin(s, t, 1000);
    t = ch.end_time(tx);
    benchmark::DoNotOptimize(ch.end(tx));
    s = static_cast<NodeId>((s + 1) % n);
  }
}
BENCHMARK(BM_ChannelBroadcast)->Arg(250)->Arg(625);

static void BM_GenerateGrid(benchmark::State& state) {
  for (auto _ : state) {
    roadnet::GridSpec spec{2500, 2500, 250, 40, 1, 45.0};
    benchmark::DoNotOptimize(roadnet::generate_grid(spec));
  }
}
BENCHMARK(BM_GenerateGrid)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
