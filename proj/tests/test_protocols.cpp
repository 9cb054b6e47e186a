#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "doef/error.hpp"
#include "doef/protocols.hpp"
#include "support.hpp"

using namespace doef;

namespace {

std::vector<ObjectId> iota_ids(std::size_t n) {
  std::vector<ObjectId> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

RegionalProtocolConfig window(double hr, double h = 1.0) {
  RegionalProtocolConfig c;
  c.kind = RegionalKind::MovingWindow;
  c.hr_size = hr;
  c.h = h;
  return c;
}

const Database& sample_db() {
  static const Database db = [] {
    DatabaseGenConfig c;
    c.no = 3000;
    c.nc = 20;
    c.drefs = 3;
    c.seed = 12;
    return generate_database(c);
  }();
  return db;
}

bool contains(const std::vector<ObjectId>& v, ObjectId o) {
  return std::find(v.begin(), v.end(), o) != v.end();
}

}  // namespace

TEST(MovingWindow, Initialization) {
  Rng rng(1);
  const auto s = init_moving_window(iota_ids(8), window(0.25), rng);
  ASSERT_EQ(s.regions().size(), 4u);
  EXPECT_EQ(s.regions().weights(), (std::vector<double>{0.80, 0.0006, 0.0006, 0.0006}));
  for (const auto& r : s.regions().regions()) {
    EXPECT_EQ(r.members.size(), 2u);
    EXPECT_EQ(r.dir, Direction::Down);
    EXPECT_DOUBLE_EQ(r.params.prob_w_incr_size, 0.80 - 0.0006);
  }
  EXPECT_EQ(s.window_index(), 0u);
  EXPECT_EQ(s.period(), 1u);
}

TEST(MovingWindow, ThreeHundredRegionsHotProbability) {
  Rng rng(2);
  const auto s = init_moving_window(iota_ids(100000), window(0.003), rng);
  EXPECT_EQ(s.regions().size(), 333u);
  EXPECT_NEAR(s.regions().access_probabilities()[0], 0.80 / 0.9992, 1e-12);
}

TEST(MovingWindow, TooFewCandidates) {
  Rng rng(3);
  EXPECT_THROW(init_moving_window(iota_ids(3), window(0.25), rng), ConfigError);
}

TEST(MovingWindow, OneMoveShiftsHotRegion) {
  Rng rng(4);
  auto s = init_moving_window(iota_ids(8), window(0.25), rng);
  regional_tick(s);
  EXPECT_EQ(s.regions().weights(), (std::vector<double>{0.0006, 0.80, 0.0006, 0.0006}));
  EXPECT_EQ(s.window_index(), 1u);
  for (int i = 0; i < 3; ++i) regional_tick(s);
  EXPECT_EQ(s.window_index(), 0u);
  EXPECT_EQ(s.regions().weights(), (std::vector<double>{0.80, 0.0006, 0.0006, 0.0006}));
}

TEST(MovingWindow, PeriodRounding) {
  EXPECT_EQ(window(0.25, 1.0).period(), 1u);
  EXPECT_EQ(window(0.25, 0.5).period(), 2u);
  EXPECT_EQ(window(0.25, 0.01).period(), 100u);
  EXPECT_EQ(window(0.25, 0.3).period(), 4u);
  EXPECT_EQ(window(0.25, 1e-4).period(), 10000u);
  Rng rng(5);
  auto s = init_moving_window(iota_ids(8), window(0.25, 0.5), rng);
  const auto w0 = s.regions().weights();
  regional_tick(s);
  EXPECT_EQ(s.regions().weights(), w0);
  regional_tick(s);
  EXPECT_NE(s.regions().weights(), w0);
}

TEST(RegionalConfig, Validation) {
  auto c = window(0.25, 0.0);
  EXPECT_THROW(c.validate(), ConfigError);
  c = window(0.25, 1.5);
  EXPECT_THROW(c.validate(), ConfigError);
  c.kind = RegionalKind::Cycles;
  c.h = 1;
  c.hr_size = 0.6;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(GradualMovingWindow, DepartedRegionDecays) {
  auto c = window(0.25);
  c.kind = RegionalKind::GradualMovingWindow;
  c.prob_w_incr_size = 0.02;
  Rng rng(6);
  auto s = init_gradual_moving_window(iota_ids(8), c, rng);
  std::vector<double> trajectory;
  for (int i = 0; i < 3; ++i) {
    regional_tick(s);
    trajectory.push_back(s.regions().region(0).weight);
  }
  EXPECT_DOUBLE_EQ(trajectory[0], 0.78);
  EXPECT_DOUBLE_EQ(trajectory[1], 0.76);
  EXPECT_DOUBLE_EQ(trajectory[2], 0.74);
  // Entered region 1 flipped Down -> Up and climbed by one increment.
  EXPECT_EQ(s.regions().region(1).dir, Direction::Up);
}

TEST(Cycles, SwapAndReturn) {
  RegionalProtocolConfig c;
  c.kind = RegionalKind::Cycles;
  c.hr_size = 0.25;
  c.h = 0.1;
  Rng rng(7);
  auto s = init_cycles(iota_ids(40), c, rng);
  ASSERT_EQ(s.regions().size(), 3u);
  EXPECT_EQ(s.regions().region(0).members.size(), 10u);
  EXPECT_EQ(s.regions().region(1).members.size(), 10u);
  EXPECT_EQ(s.regions().region(2).members.size(), 20u);
  EXPECT_EQ(s.regions().region(2).params.prob_w_incr_size, 0.0);
  const auto w0 = s.regions().weights();
  EXPECT_EQ(w0[0], 0.80);
  EXPECT_EQ(w0[1], 0.0006);
  const double third = s.regions().access_probabilities()[2];

  for (int i = 0; i < 9; ++i) regional_tick(s);
  EXPECT_EQ(s.regions().weights(), w0);
  regional_tick(s);
  EXPECT_EQ(s.regions().weights(), (std::vector<double>{0.0006, 0.80, w0[2]}));
  for (int i = 0; i < 10; ++i) regional_tick(s);
  EXPECT_EQ(s.regions().weights(), w0);
  for (int k = 0; k < 10; ++k) {
    for (int i = 0; i < 10; ++i) regional_tick(s);
    EXPECT_EQ(s.regions().access_probabilities()[2], third);
  }
}

TEST(DependencyConfig, ProbabilitiesMustSumToOne) {
  DependencyConfig d;
  d.probs.random = 0.5;
  EXPECT_THROW(d.validate(), ConfigError);
  d.probs.sref = 0.5;
  EXPECT_NO_THROW(d.validate());
  d.c = 0.0;
  EXPECT_THROW(d.validate(), ConfigError);
}

TEST(DepRandom, MembershipAndUniformity) {
  const auto one = test::make_graph(1, {});
  Rng rng(8);
  EXPECT_EQ(dep_random(one, rng), 0u);
  const auto db = test::make_graph(100, {});
  std::vector<std::uint64_t> counts(100, 0);
  for (int i = 0; i < 100000; ++i) ++counts[dep_random(db, rng)];
  EXPECT_LT(test::chi_square_uniform(counts), test::chi_square_critical_999(99));
}

TEST(DepRef, SingleTargetAndClosure) {
  const auto tiny = test::make_graph(3, {{0, 2}});
  Rng rng(9);
  EXPECT_EQ(dep_ref(tiny, 0, RefKind::S, rng), std::optional<ObjectId>(2));
  EXPECT_FALSE(dep_ref(tiny, 1, RefKind::S, rng).has_value());

  const auto& db = sample_db();
  for (int i = 0; i < 10000; ++i) {
    const ObjectId prev = db.random_object(rng);
    const auto s = dep_ref(db, prev, RefKind::S, rng);
    if (s) ASSERT_TRUE(contains(db.refset(prev, RefKind::S), *s));
    const auto d = dep_ref(db, prev, RefKind::D, rng);
    ASSERT_TRUE(d.has_value());
    ASSERT_TRUE(contains(db.refset(prev, RefKind::D), *d));
  }
}

TEST(DepTraversed, CandidatePrefix) {
  AccessTrace t;
  for (ObjectId o : {10u, 11u, 12u, 11u, 13u, 14u, 15u, 16u}) t.accesses.push_back({o, AccessMode::Read});
  EXPECT_EQ(traversed_candidates(t, 0.5), (std::vector<ObjectId>{10, 11, 12, 13}));
  EXPECT_EQ(traversed_candidates(t, 1e-9), std::vector<ObjectId>{10});
  EXPECT_EQ(traversed_candidates(t, 1.0).size(), 7u);
  Rng rng(10);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(dep_traversed(t, 1e-9, rng), std::optional<ObjectId>(10));
  EXPECT_FALSE(dep_traversed(AccessTrace{}, 0.5, rng).has_value());
}

TEST(DepClass, CyclicWindow) {
  // One class of ten objects: iterator [0..9].
  const auto db = test::make_graph(10, {});
  EXPECT_EQ(class_candidates(db, 8, 0.3), (std::vector<ObjectId>{8, 9, 0}));
  EXPECT_EQ(class_candidates(db, 3, 1.0).size(), 10u);
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto o = dep_class(db, 8, 0.3, rng);
    EXPECT_TRUE(o == 8 || o == 9 || o == 0);
  }
}

TEST(DepClass, MapIsInjective) {
  const auto db = test::make_graph(10, {});
  for (double u : {0.1, 0.3, 0.5, 0.9}) {
    std::set<std::vector<ObjectId>> seen;
    for (ObjectId prev = 0; prev < 10; ++prev) seen.insert(class_candidates(db, prev, u));
    EXPECT_EQ(seen.size(), 10u) << "u=" << u;
  }
}

TEST(Hybrid, ZeroRIsAlwaysRandomPhase) {
  Rng rng(12);
  const auto& db = sample_db();
  WorkloadState ws(init_moving_window(db.live_objects(), window(0.05), rng), {},
                   IntegrationMode::Hybrid, 1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(ws.next(db).phase, Phase::Random);
}

TEST(Hybrid, PhasePattern) {
  const auto& db = sample_db();
  for (std::uint32_t r : {1u, 2u, 5u}) {
    Rng rng(13);
    DependencyConfig d;
    d.r = r;
    d.probs = {0.0, 0.0, 0.0, 0.0, 1.0};
    WorkloadState ws(init_moving_window(db.live_objects(), window(0.05), rng), d,
                     IntegrationMode::Hybrid, 2);
    for (std::uint32_t i = 0; i < 60; ++i) {
      const auto s = ws.next(db);
      EXPECT_EQ(s.phase == Phase::Random, i % (r + 1) == 0) << "r=" << r << " i=" << i;
    }
  }
}

TEST(Hybrid, SRefAlternation) {
  const auto& db = sample_db();
  Rng rng(14);
  DependencyConfig d;
  d.r = 1;
  d.probs = {0.0, 1.0, 0.0, 0.0, 0.0};
  WorkloadState ws(init_moving_window(db.live_objects(), window(0.05), rng), d,
                   IntegrationMode::Hybrid, 3);
  ObjectId prev = kNoObject;
  for (int i = 0; i < 2000; ++i) {
    const auto s = ws.next(db);
    if (i % 2 == 1) {
      ASSERT_EQ(s.phase, Phase::Dependency);
      if (!s.fallback) ASSERT_TRUE(contains(db.refset(prev, RefKind::S), s.root));
    }
    prev = s.root;
  }
}

TEST(Integrated, SingleCandidate) {
  // 0 -> 1 only; S-ref dependency from 0 must yield 1 whatever the weights.
  const auto db = test::make_graph(8, {{0, 1}});
  Rng rng(15);
  DependencyConfig d;
  d.r = 1;
  d.probs = {0.0, 1.0, 0.0, 0.0, 0.0};
  const std::vector<ObjectId> only_zero{0};
  auto cfg = window(1.0);
  WorkloadState ws(init_moving_window(only_zero, cfg, rng), d, IntegrationMode::Integrated, 4);
  for (int i = 0; i < 10; ++i) {
    const auto s = ws.next(db);
    EXPECT_EQ(s.root, i % 2 == 0 ? 0u : 1u);
  }
}

TEST(Integrated, HotBlockFrequency) {
  // Objects 0..7 all reference 8..15, so every S-ref candidate set is the same
  // 8 objects, cut into 4 local regions of 2 carrying the global weights.
  std::vector<test::Edge> edges;
  for (ObjectId from = 0; from < 8; ++from) {
    for (ObjectId t = 8; t < 16; ++t) edges.push_back({from, t});
  }
  const auto db = test::make_graph(16, edges);
  DependencyConfig d;
  d.r = 1;
  d.probs = {0.0, 1.0, 0.0, 0.0, 0.0};
  auto cfg = window(0.25, 1e-6);
  cfg.highest_prob_w = 0.5;
  cfg.lowest_prob_w = 0.25;
  Rng rng(16);
  const std::vector<ObjectId> global{0, 1, 2, 3, 4, 5, 6, 7};
  WorkloadState ws(init_moving_window(global, cfg, rng), d, IntegrationMode::Integrated, 5);
  const double p_hot = 0.5 / (0.5 + 3 * 0.25);
  int hot = 0, steps = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto s = ws.next(db);
    if (s.phase != Phase::Dependency) {
      ASSERT_LT(s.root, 8u);
      continue;
    }
    ASSERT_FALSE(s.fallback);
    ASSERT_GE(s.root, 8u);
    ++steps;
    hot += s.region == 0;
  }
  EXPECT_EQ(steps, 10000);
  EXPECT_NEAR(static_cast<double>(hot) / steps, p_hot, 0.02);
}

TEST(Integrated, ReplayIsDeterministic) {
  const auto& db = sample_db();
  DependencyConfig d;
  d.r = 2;
  d.probs = {0.1, 0.3, 0.2, 0.2, 0.2};
  d.c = 0.5;
  d.u = 0.2;
  auto run = [&] {
    Rng rng(19);
    WorkloadState ws(init_moving_window(db.live_objects(), window(0.05, 0.1), rng), d,
                     IntegrationMode::Integrated, 6);
    std::vector<std::pair<ObjectId, std::ptrdiff_t>> out;
    for (int i = 0; i < 3000; ++i) {
      const auto s = ws.next(db);
      Traversal t;
      ws.record_trace(traversal(db, s.root, t));
      out.emplace_back(s.root, s.region);
    }
    return out;
  };
  EXPECT_EQ(run(), run());
}

TEST(Integrated, ClosureForEveryProtocol) {
  const auto& db = sample_db();
  for (int proto = 1; proto <= 4; ++proto) {
    DependencyConfig d;
    d.r = 1;
    d.c = 0.4;
    d.u = 0.3;
    d.probs = {0.0, 0.0, 0.0, 0.0, 0.0};
    double* slots[] = {&d.probs.random, &d.probs.sref, &d.probs.dref, &d.probs.traversed,
                       &d.probs.cls};
    *slots[proto] = 1.0;
    Rng rng(20);
    WorkloadState ws(init_moving_window(db.live_objects(), window(0.05, 0.01), rng), d,
                     IntegrationMode::Integrated, 7);
    std::optional<ObjectId> prev;
    std::optional<AccessTrace> prev_trace;
    for (int i = 0; i < 2000; ++i) {
      const auto s = ws.next(db);
      if (s.phase == Phase::Dependency && !s.fallback) {
        std::vector<ObjectId> cands;
        switch (static_cast<DependencyProtocol>(proto)) {
          case DependencyProtocol::SRef: cands = db.refset(*prev, RefKind::S); break;
          case DependencyProtocol::DRef: cands = db.refset(*prev, RefKind::D); break;
          case DependencyProtocol::Traversed: cands = traversed_candidates(*prev_trace, d.c); break;
          case DependencyProtocol::Class: cands = class_candidates(db, *prev, d.u); break;
          default: break;
        }
        ASSERT_TRUE(contains(cands, s.root)) << "protocol " << proto << " step " << i;
      }
      Traversal t;
      auto trace = traversal(db, s.root, t);
      prev_trace = trace;
      ws.record_trace(std::move(trace));
      prev = s.root;
    }
  }
}
