#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "trajmap/metrics.hpp"
#include "trajmap/refmap.hpp"
#include "trajmap/similarity.hpp"

using namespace trajmap;

namespace {

std::vector<int> random_sequence(std::mt19937_64& rng, int len, int alphabet) {
  std::vector<int> out(len);
  for (int& symbol : out) {
    symbol = static_cast<int>(rng() % alphabet);
  }
  return out;
}

/// Chain map: c0 -> c1 -> ... -> c(n-1), city types throughout.
LocationGraph chain_map(int n) {
  LocationGraph g;
  for (int i = 0; i < n; ++i) {
    LocationNode node;
    node.canonical_name = "c" + std::to_string(i);
    node.type = LocationType{LocationKind::City, ""};
    g.upsert_node(std::move(node));
  }
  for (int i = 0; i + 1 < n; ++i) {
    g.add_edge({"c" + std::to_string(i), "c" + std::to_string(i + 1), RelationKind::Inclusion});
  }
  return g;
}

Trajectory walk(const std::string& id, int n, int len, std::mt19937_64& rng) {
  Trajectory out;
  out.doc_id = id;
  int segment = 1;
  std::string last;
  for (int i = 0; i < len; ++i) {
    std::string name = "c" + std::to_string(rng() % n);
    if (name == last) {
      continue;
    }
    out.visits.push_back({name, {segment, segment}});
    last = std::move(name);
    ++segment;
  }
  if (!out.visits.empty()) {
    out.transports.assign(out.visits.size() - 1, std::nullopt);
  }
  return out;
}

void BM_EditDistance(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto a = random_sequence(rng, static_cast<int>(state.range(0)), 32);
  const auto b = random_sequence(rng, static_cast<int>(state.range(0)), 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(edit_distance(a, b));
  }
}
BENCHMARK(BM_EditDistance)->Arg(50)->Arg(200)->Arg(1000);

void BM_REditCost(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto a = random_sequence(rng, static_cast<int>(state.range(0)), 32);
  const auto b = random_sequence(rng, static_cast<int>(state.range(0)), 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(r_edit_cost(a, b));
  }
}
BENCHMARK(BM_REditCost)->Arg(50)->Arg(200)->Arg(1000);

void BM_WeightedEdit(benchmark::State& state) {
  const int n = 200;
  const LocationGraph map = chain_map(n);
  PointwiseDistanceConfig config;
  config.d_max = 16.0;
  const PointwiseDistance distance(map, config);
  std::mt19937_64 rng(3);
  const Trajectory a = walk("a", n, static_cast<int>(state.range(0)), rng);
  const Trajectory b = walk("b", n, static_cast<int>(state.range(0)), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(weighted_edit_distance(a, b, distance).cost);
  }
}
BENCHMARK(BM_WeightedEdit)->Arg(20)->Arg(50);

void BM_Dtw(benchmark::State& state) {
  const int n = 200;
  const LocationGraph map = chain_map(n);
  PointwiseDistanceConfig config;
  config.d_max = 16.0;
  const PointwiseDistance distance(map, config);
  std::mt19937_64 rng(4);
  const Trajectory a = walk("a", n, static_cast<int>(state.range(0)), rng);
  const Trajectory b = walk("b", n, static_cast<int>(state.range(0)), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dtw_distance(a, b, distance).cost);
  }
}
BENCHMARK(BM_Dtw)->Arg(20)->Arg(50);

void BM_BuildReferenceMap(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::vector<GisRecord> records = {{"Country", LocationKind::Country, 50.0, 0.0}};
  for (int i = 0; i < 10; ++i) {
    records.push_back({"county" + std::to_string(i), LocationKind::County,
                       50.0 + 0.1 * (rng() % 40), -3.0 + 0.1 * (rng() % 40)});
  }
  for (int i = 0; i < 100; ++i) {
    records.push_back({"city" + std::to_string(i), LocationKind::City,
                       50.0 + 0.1 * (rng() % 40), -3.0 + 0.1 * (rng() % 40)});
  }
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    records.push_back({"nat" + std::to_string(i), LocationKind::Natural,
                       50.0 + 0.1 * (rng() % 40), -3.0 + 0.1 * (rng() % 40)});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_reference_map(records));
  }
}
BENCHMARK(BM_BuildReferenceMap)->Arg(500)->Arg(2000);

void BM_PointwiseBfs(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const LocationGraph map = chain_map(n);
  for (auto _ : state) {
    PointwiseDistanceConfig config;
    config.d_max = static_cast<double>(n);
    const PointwiseDistance distance(map, config);
    benchmark::DoNotOptimize(distance("c0", "c" + std::to_string(n - 1)));
  }
}
BENCHMARK(BM_PointwiseBfs)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
