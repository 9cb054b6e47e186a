#include "doef/database.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "doef/error.hpp"

namespace doef {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("DatabaseGenConfig: " + what);
}

template <typename T>
void erase_one(std::vector<T>& items, const T& value) {
  auto it = std::find(items.begin(), items.end(), value);
  if (it != items.end()) items.erase(it);
}

template <typename T>
void erase_sorted(std::vector<T>& items, T value) {
  auto it = std::lower_bound(items.begin(), items.end(), value);
  if (it != items.end() && *it == value) items.erase(it);
}

// Inverse CDF of a discrete law given by probabilities, for u in [0, 1).
std::uint32_t invert_law(std::span<const double> law, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k < law.size(); ++k) {
    acc += law[k];
    if (u < acc) return static_cast<std::uint32_t>(k + 1);
  }
  return static_cast<std::uint32_t>(law.size());
}

// Ids within `window` positions (cyclic) of `centre` on a ring of `ring`,
// as at most two half-open ranges.
struct WindowRanges {
  std::uint64_t lo1, hi1, lo2, hi2;
};

WindowRanges window_ranges(std::uint64_t centre, std::uint64_t window, std::uint64_t ring) {
  if (2 * window - 1 >= ring) return {0, ring, 0, 0};
  const std::uint64_t reach = window - 1;
  if (centre >= reach && centre + reach < ring) return {centre - reach, centre + reach + 1, 0, 0};
  if (centre < reach) {
    return {0, centre + reach + 1, ring - (reach - centre), ring};
  }
  return {centre - reach, ring, 0, centre + reach + 1 - ring};
}

}  // namespace

void DatabaseGenConfig::validate() const {
  require(nc >= 1, "nc must be >= 1");
  require(no >= nc, "no must be >= nc");
  require(maxnref >= 1, "maxnref must be >= 1");
  require(nreft >= 1 && nreft <= 256, "nreft must be in [1, 256]");
  require(basesize > 0, "basesize must be > 0");
  require(size_factor_max >= 1, "size_factor_max must be >= 1");
  require(std::isfinite(size_skew) && size_skew >= 0.0, "size_skew must be finite and >= 0");
  require(clocref <= nc, "clocref must be in [1, nc] (0 = nc)");
  require(olocref <= no, "olocref must be in [1, no] (0 = no)");
  require(static_cast<std::uint64_t>(basesize) * size_factor_max <= 0xFFFFFFFFULL,
          "basesize * size_factor_max overflows");
}

std::vector<double> size_factor_law(std::uint32_t size_factor_max, double skew) {
  std::vector<double> law(size_factor_max);
  for (std::uint32_t k = 1; k <= size_factor_max; ++k) law[k - 1] = std::pow(k, -skew);
  const double total = std::accumulate(law.begin(), law.end(), 0.0);
  for (double& p : law) p /= total;
  return law;
}

// ---------------------------------------------------------------------------
// Database

Database::Database(DatabaseGenConfig config, std::vector<ClassSpec> classes,
                   std::vector<ObjectInstance> objects)
    : config_(config), classes_(std::move(classes)), objects_(std::move(objects)) {
  for (const auto& obj : objects_) {
    if (obj.live) live_objects_.push_back(obj.oid);
  }
  for (const auto& cls : classes_) {
    if (cls.live) live_classes_.push_back(cls.id);
  }
}

const ObjectInstance& Database::object(ObjectId oid) const {
  if (!contains(oid)) throw LookupError("unknown object id " + std::to_string(oid));
  return objects_[oid];
}

ObjectInstance& Database::mutable_object(ObjectId oid) {
  if (!contains(oid)) throw LookupError("unknown object id " + std::to_string(oid));
  return objects_[oid];
}

const ClassSpec& Database::class_spec(ClassId id) const {
  if (!contains_class(id)) throw LookupError("unknown class id " + std::to_string(id));
  return classes_[id];
}

ObjectId Database::random_object(Rng& rng) const {
  if (live_objects_.empty()) throw StateError("database has no live objects");
  return live_objects_[rng.below(live_objects_.size())];
}

std::uint32_t Database::class_locality() const {
  const auto ring = static_cast<std::uint32_t>(std::max<std::size_t>(classes_.size(), 1));
  return config_.clocref == 0 ? ring : config_.clocref;
}

std::uint32_t Database::object_locality() const {
  const auto ring = static_cast<std::uint32_t>(std::max<std::size_t>(objects_.size(), 1));
  return config_.olocref == 0 ? ring : config_.olocref;
}

std::vector<ObjectId> Database::refset(ObjectId oid, RefKind kind) const {
  const auto& obj = object(oid);
  std::vector<ObjectId> out;
  if (kind == RefKind::S) {
    out.reserve(obj.orefs.size());
    for (const auto& ref : obj.orefs) out.push_back(ref.target);
  } else {
    out = obj.drefs;
  }
  return out;
}

std::size_t Database::iterator_position(ObjectId oid) const {
  const auto& it = class_spec(object(oid).class_id).iterator;
  return static_cast<std::size_t>(std::lower_bound(it.begin(), it.end(), oid) - it.begin());
}

std::uint64_t Database::total_bytes() const {
  std::uint64_t total = 0;
  for (ObjectId oid : live_objects_) total += objects_[oid].filler_size;
  return total;
}

std::uint32_t Database::draw_instance_size(Rng& rng) const {
  const auto law = size_factor_law(config_.size_factor_max, config_.size_skew);
  return config_.basesize * invert_law(law, rng.unit());
}

void Database::draw_crefs(ClassSpec& cls, Rng& rng) const {
  const std::uint64_t ring = classes_.size();
  const auto window = window_ranges(cls.id, class_locality(), ring);
  std::vector<ClassId> candidates;
  auto collect = [&](std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t c = lo; c < hi; ++c) {
      if (c == cls.id || classes_[c].live) candidates.push_back(static_cast<ClassId>(c));
    }
  };
  collect(window.lo1, window.hi1);
  collect(window.lo2, window.hi2);

  const auto count = static_cast<std::uint32_t>(rng.between(1, config_.maxnref));
  cls.crefs.clear();
  for (std::uint32_t i = 0; i < count; ++i) {
    ClassRef ref;
    ref.target = candidates[rng.below(candidates.size())];
    ref.type = static_cast<RefType>(rng.below(config_.nreft));
    cls.crefs.push_back(ref);
  }
}

ObjectId Database::draw_local_instance(ClassId target_class, ObjectId source, Rng& rng) const {
  if (!contains_class(target_class)) return kNoObject;
  const auto& members = classes_[target_class].iterator;
  const auto window = window_ranges(source, object_locality(), objects_.size());
  auto range = [&](std::uint64_t lo, std::uint64_t hi) {
    auto first = std::lower_bound(members.begin(), members.end(), lo);
    auto last = std::lower_bound(members.begin(), members.end(), hi);
    return std::pair{first, last};
  };
  const auto [f1, l1] = range(window.lo1, window.hi1);
  const auto [f2, l2] = range(window.lo2, window.hi2);
  const auto n1 = static_cast<std::uint64_t>(l1 - f1);
  const auto n2 = static_cast<std::uint64_t>(l2 - f2);
  if (n1 + n2 == 0) return kNoObject;
  const std::uint64_t pick = rng.below(n1 + n2);
  return pick < n1 ? *(f1 + static_cast<std::ptrdiff_t>(pick))
                   : *(f2 + static_cast<std::ptrdiff_t>(pick - n1));
}

void Database::wire_object(ObjectInstance& obj, Rng& rng) {
  const auto& cls = classes_[obj.class_id];
  for (const auto& cref : cls.crefs) {
    const ObjectId target = draw_local_instance(cref.target, obj.oid, rng);
    if (target == kNoObject) continue;
    obj.orefs.push_back({target, cref.type});
    objects_[target].backrefs.push_back({obj.oid, cref.type});
  }
  if (!live_objects_.empty()) {
    for (std::uint32_t i = 0; i < config_.drefs; ++i) {
      obj.drefs.push_back(live_objects_[rng.below(live_objects_.size())]);
    }
  }
}

void Database::drop_oref_backlinks(ObjectInstance& obj) {
  for (const auto& ref : obj.orefs) {
    erase_one(objects_[ref.target].backrefs, ObjectRef{obj.oid, ref.type});
  }
  obj.orefs.clear();
}

void Database::repair_object_locality() {
  const std::uint64_t ring = objects_.size();
  const std::uint64_t window = object_locality();
  if (2 * window - 1 >= ring) return;
  // Only references that wrap across the ring boundary can have grown.
  Rng repair(derive_seed(config_.seed, ring));
  auto check = [&](ObjectId oid) {
    auto& obj = objects_[oid];
    if (!obj.live) return;
    for (std::size_t i = 0; i < obj.orefs.size();) {
      auto& ref = obj.orefs[i];
      if (cyclic_distance(oid, ref.target, ring) < window) {
        ++i;
        continue;
      }
      erase_one(objects_[ref.target].backrefs, ObjectRef{oid, ref.type});
      const ObjectId replacement =
          draw_local_instance(objects_[ref.target].class_id, oid, repair);
      if (replacement == kNoObject) {
        obj.orefs.erase(obj.orefs.begin() + static_cast<std::ptrdiff_t>(i));
        continue;
      }
      ref.target = replacement;
      objects_[replacement].backrefs.push_back({oid, ref.type});
      ++i;
    }
  };
  for (std::uint64_t oid = 0; oid < window && oid < ring; ++oid) check(static_cast<ObjectId>(oid));
  for (std::uint64_t oid = ring - window; oid < ring; ++oid) {
    if (oid >= window) check(static_cast<ObjectId>(oid));
  }
}

void Database::repair_class_locality() {
  const std::uint64_t ring = classes_.size();
  const std::uint64_t window = class_locality();
  if (2 * window - 1 >= ring) return;
  Rng repair(derive_seed(config_.seed, ring ^ 0xC1A55ULL));
  for (auto& cls : classes_) {
    if (!cls.live) continue;
    for (auto& ref : cls.crefs) {
      if (cyclic_distance(cls.id, ref.target, ring) < window) continue;
      // Pick a live class inside the window; the class itself always qualifies.
      const auto ranges = window_ranges(cls.id, window, ring);
      std::vector<ClassId> candidates;
      for (auto c = ranges.lo1; c < ranges.hi1; ++c) {
        if (classes_[c].live) candidates.push_back(static_cast<ClassId>(c));
      }
      for (auto c = ranges.lo2; c < ranges.hi2; ++c) {
        if (classes_[c].live) candidates.push_back(static_cast<ClassId>(c));
      }
      ref.target = candidates[repair.below(candidates.size())];
    }
  }
}

ObjectId Database::insert_object(Rng& rng) {
  if (live_classes_.empty()) throw StateError("cannot insert an object: no live class");
  const auto oid = static_cast<ObjectId>(objects_.size());
  ObjectInstance obj;
  obj.oid = oid;
  obj.class_id = live_classes_[rng.below(live_classes_.size())];
  obj.attributes.resize(config_.attrange);
  for (auto& a : obj.attributes) a = static_cast<std::int32_t>(rng.below(10000));
  obj.filler_size = classes_[obj.class_id].instance_size;
  objects_.push_back(std::move(obj));
  classes_[objects_.back().class_id].iterator.push_back(oid);
  live_objects_.push_back(oid);
  repair_object_locality();
  wire_object(objects_[oid], rng);
  return oid;
}

void Database::remove_live_object(ObjectId oid) { erase_sorted(live_objects_, oid); }
void Database::remove_live_class(ClassId id) { erase_sorted(live_classes_, id); }

void Database::erase_object(ObjectId oid) {
  auto& obj = mutable_object(oid);
  drop_oref_backlinks(obj);
  for (const auto& back : obj.backrefs) {
    if (back.target == oid) continue;
    erase_one(objects_[back.target].orefs, ObjectRef{oid, back.type});
  }
  obj.backrefs.clear();
  obj.drefs.clear();
  for (ObjectId other : live_objects_) {
    auto& drefs = objects_[other].drefs;
    drefs.erase(std::remove(drefs.begin(), drefs.end(), oid), drefs.end());
  }
  erase_sorted(classes_[obj.class_id].iterator, oid);
  obj.live = false;
  obj.attributes.clear();
  remove_live_object(oid);
}

ClassId Database::insert_class(Rng& rng) {
  const auto id = static_cast<ClassId>(classes_.size());
  ClassSpec cls;
  cls.id = id;
  cls.instance_size = draw_instance_size(rng);
  classes_.push_back(std::move(cls));
  live_classes_.push_back(id);
  repair_class_locality();
  draw_crefs(classes_[id], rng);
  return id;
}

void Database::erase_class(ClassId id) {
  const auto& cls = class_spec(id);
  const std::vector<ObjectId> members = cls.iterator;
  for (ObjectId oid : members) erase_object(oid);
  for (auto& other : classes_) {
    if (!other.live || other.id == id) continue;
    std::erase_if(other.crefs, [id](const ClassRef& r) { return r.target == id; });
  }
  classes_[id].live = false;
  classes_[id].crefs.clear();
  remove_live_class(id);
}

void Database::bump_attributes(ObjectId oid) {
  for (auto& a : mutable_object(oid).attributes) ++a;
}

// ---------------------------------------------------------------------------
// Generation

std::vector<ClassSpec> generate_schema(const DatabaseGenConfig& config, Rng& rng) {
  config.validate();
  // Build through a scratch Database so cref drawing shares the evolution path.
  std::vector<ClassSpec> classes(config.nc);
  for (ClassId i = 0; i < config.nc; ++i) classes[i].id = i;
  Database scratch(config, classes, {});
  std::vector<ClassSpec> out;
  out.reserve(config.nc);
  for (ClassId i = 0; i < config.nc; ++i) {
    ClassSpec cls;
    cls.id = i;
    scratch.draw_crefs(cls, rng);
    out.push_back(std::move(cls));
  }

  // Stratified size draw: class i takes one point in stratum strata[i] of the
  // size law, so the per-class marginal is the law while the base-wide mean
  // stays close to its expectation even with few classes.
  const auto law = size_factor_law(config.size_factor_max, config.size_skew);
  std::vector<std::uint32_t> strata(config.nc);
  std::iota(strata.begin(), strata.end(), 0U);
  rng.shuffle(std::span(strata));
  for (ClassId i = 0; i < config.nc; ++i) {
    const double u = (strata[i] + rng.unit()) / config.nc;
    out[i].instance_size = config.basesize * invert_law(law, u);
  }
  return out;
}

Database instantiate_database(std::vector<ClassSpec> schema, const DatabaseGenConfig& config,
                              Rng& rng) {
  config.validate();
  if (schema.size() != config.nc) throw ConfigError("schema size does not match nc");
  std::vector<ObjectInstance> objects(config.no);
  for (ObjectId oid = 0; oid < config.no; ++oid) {
    auto& obj = objects[oid];
    obj.oid = oid;
    obj.class_id = static_cast<ClassId>(rng.below(config.nc));
    obj.attributes.resize(config.attrange);
    for (auto& a : obj.attributes) a = static_cast<std::int32_t>(rng.below(10000));
    obj.filler_size = schema[obj.class_id].instance_size;
    schema[obj.class_id].iterator.push_back(oid);
  }
  Database db(config, std::move(schema), std::move(objects));
  for (ObjectId oid = 0; oid < config.no; ++oid) db.wire_object(db.objects_[oid], rng);
  return db;
}

Database generate_database(const DatabaseGenConfig& config) {
  Rng rng(config.seed);
  auto schema = generate_schema(config, rng);
  return instantiate_database(std::move(schema), config, rng);
}

std::vector<ObjectId> refset(const Database& db, ObjectId oid, RefKind kind) {
  return db.refset(oid, kind);
}

}  // namespace doef
