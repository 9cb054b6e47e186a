#include <benchmark/benchmark.h>

#include "doef/clustering.hpp"
#include "doef/database.hpp"
#include "doef/operations.hpp"
#include "doef/protocols.hpp"
#include "doef/store.hpp"

namespace {

const doef::Database& shared_db() {
  static const doef::Database db = [] {
    doef::DatabaseGenConfig cfg;
    cfg.seed = 7;
    return doef::generate_database(cfg);
  }();
  return db;
}

void BM_GenerateDatabase(benchmark::State& state) {
  doef::DatabaseGenConfig cfg;
  cfg.no = static_cast<std::uint32_t>(state.range(0));
  for (auto _ : state) {
    auto db = doef::generate_database(cfg);
    benchmark::DoNotOptimize(db.live_object_count());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateDatabase)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_Traversal(benchmark::State& state) {
  const auto& db = shared_db();
  doef::Traversal spec;
  spec.mode = static_cast<doef::TraversalMode>(state.range(0));
  spec.depth = 2;
  doef::Rng rng(1);
  std::size_t visited = 0;
  for (auto _ : state) {
    const auto trace = doef::traversal(db, db.random_object(rng), spec, 3);
    visited += trace.size();
  }
  state.counters["accesses/op"] =
      benchmark::Counter(static_cast<double>(visited), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_Traversal)->DenseRange(0, 3);

void BM_RegionSelect(benchmark::State& state) {
  std::vector<doef::ObjectId> candidates(100000);
  for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = static_cast<doef::ObjectId>(i);
  doef::RegionalProtocolConfig cfg;
  doef::Rng rng(5);
  auto regional = doef::init_moving_window(candidates, cfg, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(regional.regions().select(rng));
    regional.tick();
  }
}
BENCHMARK(BM_RegionSelect);

void BM_BufferTouch(benchmark::State& state) {
  const auto pages = static_cast<std::uint64_t>(state.range(0));
  doef::BufferPool pool(256);
  doef::Rng rng(9);
  for (auto _ : state) {
    const auto page = static_cast<doef::PageId>(rng.below(pages));
    benchmark::DoNotOptimize(pool.touch(page, doef::AccessMode::Read, doef::IoContext::Transaction));
  }
  state.counters["reads"] = static_cast<double>(pool.stats().reads);
}
BENCHMARK(BM_BufferTouch)->Arg(200)->Arg(1400);

void BM_CfcObserve(benchmark::State& state) {
  const auto& db = shared_db();
  doef::CfcPolicy policy;
  doef::Traversal spec;
  doef::Rng rng(11);
  std::vector<doef::AccessTrace> traces;
  for (int i = 0; i < 512; ++i) traces.push_back(doef::traversal(db, db.random_object(rng), spec));
  std::size_t i = 0;
  for (auto _ : state) {
    policy.observe(traces[i++ % traces.size()]);
  }
  state.counters["pairs"] = static_cast<double>(policy.tracked_pairs());
}
BENCHMARK(BM_CfcObserve);

}  // namespace
BENCHMARK_MAIN();
