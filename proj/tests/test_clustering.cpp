#include <gtest/gtest.h>

#include <set>

#include "doef/clustering.hpp"
#include "doef/error.hpp"
#include "doef/experiment.hpp"
#include "support.hpp"

using namespace doef;

namespace {

AccessTrace trace_of(std::initializer_list<ObjectId> ids) {
  AccessTrace t;
  for (ObjectId o : ids) t.accesses.push_back({o, AccessMode::Read});
  return t;
}

// `n` objects of `size` bytes, one class.
Database flat(std::size_t n, std::uint32_t size) { return test::make_graph(n, {}, {}, size); }

}  // namespace

TEST(CfcConfig, Validation) {
  CfcConfig c;
  EXPECT_NO_THROW(c.validate());
  c.badness_threshold = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.badness_threshold = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.stat_window = 0;
  EXPECT_THROW(CfcPolicy{c}, ConfigError);
  EXPECT_NO_THROW(CfcConfig::aggressive().validate());
}

TEST(Observe, EmptyTraceChangesNothing) {
  CfcPolicy p;
  p.observe(AccessTrace{});
  EXPECT_EQ(p.tracked_pairs(), 0u);
  EXPECT_EQ(p.heat(0), 0u);
}

TEST(Observe, ConsecutivePairsCount) {
  CfcPolicy p;
  p.observe(trace_of({1, 2}));
  EXPECT_EQ(p.co_access(1, 2), 1u);
  EXPECT_EQ(p.co_access(2, 1), 1u);
  EXPECT_EQ(p.heat(1), 1u);
  p.observe(trace_of({2, 1, 1, 3}));
  EXPECT_EQ(p.co_access(1, 2), 2u);
  EXPECT_EQ(p.co_access(1, 3), 1u);
  EXPECT_EQ(p.co_access(1, 1), 0u);
  EXPECT_EQ(p.heat(1), 3u);
}

TEST(Observe, WindowOfOneForgets) {
  CfcConfig c;
  c.stat_window = 1;
  CfcPolicy p(c);
  p.observe(trace_of({1, 2}));
  EXPECT_EQ(p.co_access(1, 2), 1u);
  p.observe(trace_of({3, 4}));
  EXPECT_EQ(p.co_access(1, 2), 0u);
  EXPECT_EQ(p.heat(1), 0u);
  EXPECT_EQ(p.co_access(3, 4), 1u);
  EXPECT_EQ(p.tracked_pairs(), 1u);
}

TEST(Observe, ReplayOracleForWindow) {
  // Counts must equal a recount over the last `w` traces.
  CfcConfig c;
  c.stat_window = 7;
  CfcPolicy p(c);
  Rng rng(3);
  std::vector<AccessTrace> history;
  for (int i = 0; i < 60; ++i) {
    AccessTrace t;
    const auto len = rng.below(6);
    for (std::uint64_t k = 0; k < len; ++k) {
      t.accesses.push_back({static_cast<ObjectId>(rng.below(5)), AccessMode::Read});
    }
    history.push_back(t);
    p.observe(t);
    for (ObjectId a = 0; a < 5; ++a) {
      std::uint32_t heat = 0;
      std::vector<std::uint32_t> pairs(5, 0);
      for (std::size_t h = history.size() > 7 ? history.size() - 7 : 0; h < history.size(); ++h) {
        const auto& acc = history[h].accesses;
        for (std::size_t j = 0; j < acc.size(); ++j) {
          heat += acc[j].oid == a;
          if (j > 0 && acc[j].oid != acc[j - 1].oid) {
            if (acc[j].oid == a) ++pairs[acc[j - 1].oid];
            if (acc[j - 1].oid == a) ++pairs[acc[j].oid];
          }
        }
      }
      ASSERT_EQ(p.heat(a), heat);
      for (ObjectId b = 0; b < 5; ++b) {
        if (b != a) ASSERT_EQ(p.co_access(a, b), pairs[b]) << a << "," << b;
      }
    }
  }
}

TEST(NoClustering, IsInert) {
  const auto db = flat(40, 500);
  auto store = place_sequential(db, {});
  BufferPool pool(4);
  auto policy = no_clustering();
  EXPECT_EQ(policy->name(), "none");
  for (int i = 0; i < 100; ++i) {
    policy->observe(trace_of({0, 39, 20}));
    EXPECT_EQ(policy->maybe_recluster(store, pool), 0u);
  }
  EXPECT_EQ(pool.stats(), IoStats{});
}

TEST(Recluster, ActsOnlyOnTriggerPeriod) {
  const auto db = flat(200, 200);
  auto store = place_sequential(db, {});
  BufferPool pool(64);
  CfcConfig c;
  c.trigger_period = 10;
  c.min_heat = 2;
  CfcPolicy p(c);
  std::size_t moved = 0;
  for (int i = 1; i <= 9; ++i) {
    p.observe(trace_of({0, 100, 199}));
    moved += p.maybe_recluster(store, pool);
  }
  EXPECT_EQ(moved, 0u);
  p.observe(trace_of({0, 100, 199}));
  EXPECT_GT(p.maybe_recluster(store, pool), 0u);
  EXPECT_EQ(store.placement(0).first, store.placement(100).first);
  EXPECT_EQ(store.placement(100).first, store.placement(199).first);
}

TEST(Recluster, HotSetIsPacked) {
  // 400 objects of 100 bytes (40 per page, 10 pages). A hot chain of 60
  // objects hopping across pages, revisited each transaction.
  const auto db = flat(400, 100);
  auto store = place_sequential(db, {});
  BufferPool pool(32);
  CfcConfig c;
  c.trigger_period = 20;
  c.min_heat = 5;
  c.max_pages_per_round = 0;
  CfcPolicy p(c);
  std::vector<ObjectId> hot;
  for (ObjectId i = 0; i < 57; ++i) hot.push_back((i * 41) % 400);  // a new page every step
  AccessTrace t;
  for (ObjectId o : hot) t.accesses.push_back({o, AccessMode::Read});
  for (int i = 0; i < 20; ++i) {
    p.observe(t);
    p.maybe_recluster(store, pool);
  }
  EXPECT_EQ(p.rounds(), 1u);
  std::set<PageId> pages;
  for (ObjectId o : hot) pages.insert(store.placement(o).first);
  const std::size_t bound = (hot.size() * 100 + 4095) / 4096 + 1;
  EXPECT_LE(pages.size(), bound);
  // Reorganization I/O landed on the clustering counters only.
  EXPECT_EQ(pool.stats().reads, 0u);
  EXPECT_GT(pool.stats().clustering_io(), 0u);
}

TEST(Recluster, UniformWorkloadMovesNothing) {
  DatabaseGenConfig dc;
  const auto db = generate_database(dc);
  auto store = place_sequential(db, {});
  BufferPool pool(200);
  CfcPolicy p;
  Rng rng(4);
  Traversal spec;
  std::size_t moved = 0;
  for (int i = 0; i < 10000; ++i) {
    p.observe(traversal(db, db.random_object(rng), spec));
    moved += p.maybe_recluster(store, pool);
  }
  EXPECT_EQ(moved, 0u);
  EXPECT_EQ(p.objects_moved(), 0u);
  EXPECT_EQ(pool.stats().clustering_io(), 0u);
}

TEST(Recluster, HugeTriggerPeriodBehavesAsNone) {
  ExperimentConfig base;
  base.database.no = 3000;
  base.cache_fraction = 1.0 / 6.0;
  base.workload.transactions = 2000;
  base.workload.regional.hr_size = 0.01;
  base.workload.regional.h = 1e-4;
  auto cfc = base;
  cfc.clustering.policy = PolicyKind::Cfc;
  cfc.clustering.cfc.trigger_period = 1000000;
  const auto a = run_experiment(base);
  const auto b = run_experiment(cfc);
  EXPECT_EQ(run_csv(a), run_csv(b));
  EXPECT_EQ(b.totals.clustering_io(), 0u);
}

TEST(Recluster, StoreInvariantsSurviveAggressiveRounds) {
  DatabaseGenConfig dc;
  dc.no = 4000;
  const auto db = generate_database(dc);
  auto store = place_sequential(db, {});
  BufferPool pool(40);
  CfcPolicy p(CfcConfig::aggressive());
  Rng rng(5);
  Traversal spec;
  for (int i = 0; i < 1000; ++i) {
    const auto t = traversal(db, db.random_object(rng), spec);
    for (const auto& a : t.accesses) access(store, pool, a.oid, a.mode);
    p.observe(t);
    p.maybe_recluster(store, pool);
  }
  EXPECT_GT(p.objects_moved(), 0u);
  for (ObjectId o : db.live_objects()) ASSERT_TRUE(store.is_mapped(o));
  for (PageId pg = 0; pg < store.page_count(); ++pg) ASSERT_LE(store.page_used(pg), 4096u);
  const auto s = pool.stats();
  EXPECT_EQ(s.total_io(), s.transaction_io() + s.clustering_io());
}
