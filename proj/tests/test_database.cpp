#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "doef/database.hpp"
#include "doef/error.hpp"
#include "doef/operations.hpp"
#include "support.hpp"

using namespace doef;

namespace {

const Database& default_db() {
  static const Database db = generate_database(DatabaseGenConfig{});
  return db;
}

void expect_locality(const Database& db) {
  const auto ring_o = db.objects().size();
  const auto ring_c = db.classes().size();
  for (ObjectId oid : db.live_objects()) {
    for (const auto& r : db.object(oid).orefs) {
      ASSERT_LT(cyclic_distance(oid, r.target, ring_o), db.object_locality())
          << oid << " -> " << r.target;
    }
  }
  for (ClassId c : db.live_classes()) {
    for (const auto& r : db.class_spec(c).crefs) {
      ASSERT_LT(cyclic_distance(c, r.target, ring_c), db.class_locality());
    }
  }
}

}  // namespace

TEST(DatabaseConfig, RejectsBadBounds) {
  DatabaseGenConfig c;
  c.nc = 0;
  try {
    c.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("nc"), std::string::npos);
  }
  c = {};
  c.no = 10;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.maxnref = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.olocref = c.no + 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.clocref = c.nc + 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.basesize = 0;
  EXPECT_THROW(generate_database(c), ConfigError);
}

TEST(Schema, SmallestLegalSchema) {
  DatabaseGenConfig c;
  c.nc = 1;
  c.maxnref = 1;
  c.no = 1;
  const auto db = generate_database(c);
  ASSERT_EQ(db.live_class_count(), 1u);
  const auto& cls = db.class_spec(0);
  ASSERT_EQ(cls.crefs.size(), 1u);
  EXPECT_EQ(cls.crefs[0].target, 0u);
  // One object: its single oref resolves to itself.
  const auto& o = db.object(0);
  ASSERT_EQ(o.orefs.size(), 1u);
  EXPECT_EQ(o.orefs[0].target, 0u);
  EXPECT_TRUE(test::backrefs_symmetric(db));
}

TEST(Schema, DefaultsGiveFiftyClassesWithOneToTenRefs) {
  const auto& db = default_db();
  ASSERT_EQ(db.live_class_count(), 50u);
  std::set<std::size_t> counts;
  std::set<RefType> types;
  for (const auto& cls : db.classes()) {
    ASSERT_GE(cls.crefs.size(), 1u);
    ASSERT_LE(cls.crefs.size(), 10u);
    counts.insert(cls.crefs.size());
    for (const auto& r : cls.crefs) {
      ASSERT_LT(r.type, 4u);
      types.insert(r.type);
    }
    EXPECT_EQ(cls.instance_size % 50, 0u);
    EXPECT_GE(cls.instance_size, 50u);
    EXPECT_LE(cls.instance_size, 1600u);
  }
  EXPECT_GE(counts.size(), 6u);
  EXPECT_EQ(types.size(), 4u);
}

TEST(Database, DefaultsGiveTwentyThousandObjects) {
  const auto& db = default_db();
  EXPECT_EQ(db.live_object_count(), 20000u);
  std::vector<std::size_t> per_class(50, 0);
  for (ObjectId oid : db.live_objects()) ++per_class[db.object(oid).class_id];
  // 400 expected per class; uniform assignment keeps every class well populated.
  for (auto n : per_class) {
    EXPECT_GT(n, 300u);
    EXPECT_LT(n, 500u);
  }
}

TEST(Database, ObjectInvariants) {
  const auto& db = default_db();
  for (ObjectId oid : db.live_objects()) {
    const auto& o = db.object(oid);
    const auto& cls = db.class_spec(o.class_id);
    ASSERT_LE(o.orefs.size(), cls.crefs.size());
    ASSERT_EQ(o.filler_size, cls.instance_size);
    ASSERT_EQ(o.attributes.size(), db.config().attrange);
  }
  for (const auto& cls : db.classes()) {
    ASSERT_TRUE(std::is_sorted(cls.iterator.begin(), cls.iterator.end()));
    ASSERT_EQ(std::adjacent_find(cls.iterator.begin(), cls.iterator.end()), cls.iterator.end());
    for (ObjectId oid : cls.iterator) ASSERT_EQ(db.object(oid).class_id, cls.id);
  }
}

TEST(Database, BackRefSymmetryExhaustive) {
  EXPECT_TRUE(test::backrefs_symmetric(default_db()));
  DatabaseGenConfig c;
  c.no = 3000;
  c.olocref = 40;
  c.clocref = 7;
  c.drefs = 2;
  c.seed = 5;
  EXPECT_TRUE(test::backrefs_symmetric(generate_database(c)));
}

TEST(Database, LocalityWindows) {
  DatabaseGenConfig c;
  c.no = 5000;
  c.olocref = 25;
  c.clocref = 5;
  c.seed = 9;
  const auto db = generate_database(c);
  expect_locality(db);
  // Every object still gets its class's references.
  std::size_t refs = 0;
  for (ObjectId oid : db.live_objects()) refs += db.object(oid).orefs.size();
  EXPECT_GT(refs, 0u);
}

TEST(Database, DeterministicForSeed) {
  DatabaseGenConfig c;
  c.no = 4000;
  c.seed = 77;
  EXPECT_EQ(generate_database(c), generate_database(c));
  c.seed = 78;
  auto other = generate_database(c);
  c.seed = 77;
  EXPECT_FALSE(generate_database(c) == other);
}

TEST(SizeLaw, ClosedFormMeanMatchesCalibration) {
  // Independent oracle: E[size] = 50 * sum k^(1-s) / sum k^(-s) over k in [1, 32].
  double num = 0.0, den = 0.0;
  for (int k = 1; k <= 32; ++k) {
    num += std::pow(k, 1.0 - kCalibratedSizeSkew);
    den += std::pow(k, -kCalibratedSizeSkew);
  }
  EXPECT_NEAR(50.0 * num / den, 233.0, 0.5);
  const auto law = size_factor_law(32, kCalibratedSizeSkew);
  ASSERT_EQ(law.size(), 32u);
  EXPECT_NEAR(std::accumulate(law.begin(), law.end(), 0.0), 1.0, 1e-12);
  EXPECT_NEAR(law[0], 1.0 / den, 1e-12);
}

TEST(SizeLaw, LargeBaseMatchesProfile) {
  DatabaseGenConfig c;
  c.no = 100000;
  const auto db = generate_database(c);
  std::uint32_t lo = ~0u, hi = 0;
  double sum = 0.0;
  for (ObjectId oid : db.live_objects()) {
    const auto s = db.object(oid).filler_size;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    sum += s;
  }
  const double mean = sum / static_cast<double>(db.live_object_count());
  EXPECT_GE(lo, 50u);
  EXPECT_LE(hi, 1600u);
  EXPECT_NEAR(mean, 233.0, 23.3);
  EXPECT_EQ(db.total_bytes(), static_cast<std::uint64_t>(sum));
}

TEST(Refset, ReturnsStoredOrder) {
  const auto db = test::make_graph(4, {{0, 3}, {0, 1}, {0, 2}});
  EXPECT_EQ(refset(db, 0, RefKind::S), (std::vector<ObjectId>{3, 1, 2}));
  EXPECT_TRUE(refset(db, 0, RefKind::D).empty());
  EXPECT_THROW(refset(db, 9, RefKind::S), LookupError);
}

TEST(Refset, DrefsDrawnPerObject) {
  DatabaseGenConfig c;
  c.no = 2000;
  c.drefs = 3;
  const auto db = generate_database(c);
  for (ObjectId oid : db.live_objects()) {
    const auto d = refset(db, oid, RefKind::D);
    ASSERT_EQ(d.size(), 3u);
    for (ObjectId t : d) ASSERT_TRUE(db.contains(t));
    for (ObjectId t : refset(db, oid, RefKind::S)) ASSERT_TRUE(db.contains(t));
  }
  EXPECT_TRUE(refset(default_db(), 0, RefKind::D).empty());
}

TEST(Evolution, InsertObjectIntoOneClassBase) {
  DatabaseGenConfig c;
  c.nc = 1;
  c.no = 20;
  c.maxnref = 3;
  auto db = generate_database(c);
  Rng rng(4);
  const auto report = evolve(db, DatabaseEvolution{EvolutionAction::Insert}, rng);
  EXPECT_EQ(db.live_object_count(), 21u);
  EXPECT_TRUE(db.contains(report.id));
  EXPECT_EQ(db.object(report.id).class_id, 0u);
  EXPECT_TRUE(test::backrefs_symmetric(db));
  const auto& it = db.class_spec(0).iterator;
  EXPECT_EQ(std::count(it.begin(), it.end(), report.id), 1);
}

TEST(Evolution, DeleteOnlyObject) {
  DatabaseGenConfig c;
  c.nc = 1;
  c.no = 1;
  auto db = generate_database(c);
  Rng rng(1);
  const auto report = evolve(db, DatabaseEvolution{EvolutionAction::Delete}, rng);
  EXPECT_EQ(report.id, 0u);
  EXPECT_EQ(report.removed, std::vector<ObjectId>{0});
  EXPECT_EQ(db.live_object_count(), 0u);
  EXPECT_TRUE(db.class_spec(0).iterator.empty());
  EXPECT_THROW(evolve(db, DatabaseEvolution{EvolutionAction::Delete}, rng), StateError);
}

TEST(Evolution, InsertClassRespectsClassLocality) {
  DatabaseGenConfig c;
  c.nc = 20;
  c.no = 400;
  c.clocref = 3;
  auto db = generate_database(c);
  Rng rng(8);
  const auto report = evolve(db, SchemaEvolution{EvolutionAction::Insert}, rng);
  EXPECT_EQ(db.live_class_count(), 21u);
  EXPECT_EQ(report.id, 20u);
  EXPECT_GE(db.class_spec(report.id).crefs.size(), 1u);
  expect_locality(db);
}

TEST(Evolution, DeleteClassCascades) {
  DatabaseGenConfig c;
  c.nc = 10;
  c.no = 500;
  auto db = generate_database(c);
  Rng rng(2);
  const auto report = evolve(db, SchemaEvolution{EvolutionAction::Delete}, rng);
  EXPECT_EQ(db.live_class_count(), 9u);
  EXPECT_EQ(db.live_object_count(), 500u - report.objects_removed);
  for (ObjectId oid : report.removed) EXPECT_FALSE(db.contains(oid));
  for (ClassId cl : db.live_classes()) {
    for (const auto& r : db.class_spec(cl).crefs) EXPECT_NE(r.target, report.id);
  }
  EXPECT_TRUE(test::backrefs_symmetric(db));
}

TEST(Evolution, RandomSequenceKeepsInvariants) {
  DatabaseGenConfig c;
  c.nc = 12;
  c.no = 600;
  c.olocref = 30;
  c.clocref = 4;
  c.drefs = 1;
  auto db = generate_database(c);
  Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    const auto pick = rng.below(10);
    if (pick < 4) {
      evolve(db, DatabaseEvolution{EvolutionAction::Insert}, rng);
    } else if (pick < 8 && db.live_object_count() > 1) {
      evolve(db, DatabaseEvolution{EvolutionAction::Delete}, rng);
    } else if (pick == 8) {
      evolve(db, SchemaEvolution{EvolutionAction::Insert}, rng);
    } else if (db.live_class_count() > 2) {
      evolve(db, SchemaEvolution{EvolutionAction::Delete}, rng);
    }
    ASSERT_TRUE(test::backrefs_symmetric(db)) << "step " << i;
  }
  expect_locality(db);
  for (ObjectId oid : db.live_objects()) {
    for (ObjectId t : db.refset(oid, RefKind::D)) ASSERT_TRUE(db.contains(t));
    for (const auto& r : db.object(oid).orefs) ASSERT_TRUE(db.contains(r.target));
  }
}
