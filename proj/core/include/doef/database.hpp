#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "doef/rng.hpp"

namespace doef {

using ObjectId = std::uint32_t;
using ClassId = std::uint32_t;
using RefType = std::uint8_t;

inline constexpr ObjectId kNoObject = std::numeric_limits<ObjectId>::max();
inline constexpr ClassId kNoClass = std::numeric_limits<ClassId>::max();

// Exponent of the truncated Zipf law over k in [1, 32] whose mean is 4.66,
// i.e. a mean instance size of 233 bytes with BASESIZE = 50.
inline constexpr double kCalibratedSizeSkew = 1.4517;

/// Parameters of the generated object base. Defaults follow the classic OCB
/// defaults (50 classes, 10 references, 50-byte base size, 20000 objects,
/// 4 reference types, 1 attribute, no locality restriction).
struct DatabaseGenConfig {
  std::uint32_t nc = 50;        // classes
  std::uint32_t maxnref = 10;   // max class references per class
  std::uint32_t basesize = 50;  // bytes per size unit
  std::uint32_t no = 20000;     // objects
  std::uint32_t nreft = 4;      // reference types
  std::uint32_t attrange = 1;   // integer attributes per object
  std::uint32_t clocref = 0;    // class locality window; 0 = nc (unrestricted)
  std::uint32_t olocref = 0;    // object locality window; 0 = no (unrestricted)
  std::uint32_t size_factor_max = 32;
  double size_skew = kCalibratedSizeSkew;
  std::uint32_t drefs = 0;  // D-references per object
  std::uint64_t seed = 1;

  // Throws ConfigError naming the violated bound.
  void validate() const;
  friend bool operator==(const DatabaseGenConfig&, const DatabaseGenConfig&) = default;
};

struct ClassRef {
  ClassId target = kNoClass;
  RefType type = 0;
  friend bool operator==(const ClassRef&, const ClassRef&) = default;
};

struct ObjectRef {
  ObjectId target = kNoObject;
  RefType type = 0;
  friend bool operator==(const ObjectRef&, const ObjectRef&) = default;
};

struct ClassSpec {
  ClassId id = kNoClass;
  bool live = true;
  std::vector<ClassRef> crefs;
  std::uint32_t instance_size = 0;
  // Live instances, kept sorted by oid.
  std::vector<ObjectId> iterator;
  friend bool operator==(const ClassSpec&, const ClassSpec&) = default;
};

struct ObjectInstance {
  ObjectId oid = kNoObject;
  ClassId class_id = kNoClass;
  bool live = true;
  std::vector<std::int32_t> attributes;
  std::vector<ObjectRef> orefs;
  // One entry per incoming oref; the type mirrors the oref's type.
  std::vector<ObjectRef> backrefs;
  std::vector<ObjectId> drefs;
  std::uint32_t filler_size = 0;
  friend bool operator==(const ObjectInstance&, const ObjectInstance&) = default;
};

enum class RefKind { S, D };

class Database;

// Schema: NC classes with crefs, reference types and instance sizes.
std::vector<ClassSpec> generate_schema(const DatabaseGenConfig& config, Rng& rng);

// Populates the schema with NO objects and wires ORefs, BackRefs and drefs.
Database instantiate_database(std::vector<ClassSpec> schema,
                              const DatabaseGenConfig& config, Rng& rng);

/// The generated object graph.
///
/// Object and class ids are dense ordinals that are never reused: deleting an
/// object leaves a tombstone so that placements and locality windows keep
/// their meaning. `objects()` and `classes()` include tombstones; use the
/// `live_*` accessors for the current population.
class Database {
 public:
  Database() = default;
  Database(DatabaseGenConfig config, std::vector<ClassSpec> classes,
           std::vector<ObjectInstance> objects);

  const DatabaseGenConfig& config() const { return config_; }
  std::span<const ClassSpec> classes() const { return classes_; }
  std::span<const ObjectInstance> objects() const { return objects_; }

  // Throws LookupError for unknown or deleted ids.
  const ObjectInstance& object(ObjectId oid) const;
  const ClassSpec& class_spec(ClassId id) const;

  bool contains(ObjectId oid) const {
    return oid < objects_.size() && objects_[oid].live;
  }
  bool contains_class(ClassId id) const {
    return id < classes_.size() && classes_[id].live;
  }

  std::size_t live_object_count() const { return live_objects_.size(); }
  std::size_t live_class_count() const { return live_classes_.size(); }
  std::span<const ObjectId> live_objects() const { return live_objects_; }
  std::span<const ClassId> live_classes() const { return live_classes_; }

  // Uniform draw over live objects. Throws StateError when empty.
  ObjectId random_object(Rng& rng) const;

  // Locality windows resolved against the current id space.
  std::uint32_t class_locality() const;
  std::uint32_t object_locality() const;

  // Stored orefs (S) or drefs (D) of `oid`, in stored order.
  std::vector<ObjectId> refset(ObjectId oid, RefKind kind) const;

  // Position of `oid` within its class iterator.
  std::size_t iterator_position(ObjectId oid) const;

  std::uint64_t total_bytes() const;

  // Mutations; each keeps BackRef symmetry and the locality windows.
  ObjectId insert_object(Rng& rng);
  void erase_object(ObjectId oid);
  ClassId insert_class(Rng& rng);
  // Deletes the class, its instances and every cref that targets it.
  void erase_class(ClassId id);
  void bump_attributes(ObjectId oid);

  friend bool operator==(const Database&, const Database&) = default;

 private:
  friend class SnapshotAccess;
  friend std::vector<ClassSpec> generate_schema(const DatabaseGenConfig&, Rng&);
  friend Database instantiate_database(std::vector<ClassSpec>, const DatabaseGenConfig&, Rng&);

  ObjectInstance& mutable_object(ObjectId oid);
  void wire_object(ObjectInstance& obj, Rng& rng);
  ObjectId draw_local_instance(ClassId target_class, ObjectId source, Rng& rng) const;
  void draw_crefs(ClassSpec& cls, Rng& rng) const;
  std::uint32_t draw_instance_size(Rng& rng) const;
  void drop_oref_backlinks(ObjectInstance& obj);
  void repair_object_locality();
  void repair_class_locality();
  void remove_live_object(ObjectId oid);
  void remove_live_class(ClassId id);

  DatabaseGenConfig config_;
  std::vector<ClassSpec> classes_;
  std::vector<ObjectInstance> objects_;
  std::vector<ObjectId> live_objects_;
  std::vector<ClassId> live_classes_;
};

// Cyclic ordinal distance on a ring of `ring` positions.
constexpr std::uint64_t cyclic_distance(std::uint64_t a, std::uint64_t b,
                                        std::uint64_t ring) noexcept {
  const std::uint64_t d = a > b ? a - b : b - a;
  return d < ring - d ? d : ring - d;
}

// generate_schema + instantiate_database with an Rng seeded from config.seed.
Database generate_database(const DatabaseGenConfig& config);

std::vector<ObjectId> refset(const Database& db, ObjectId oid, RefKind kind);

// Probability of size factor k (1-based) under the truncated Zipf size law.
std::vector<double> size_factor_law(std::uint32_t size_factor_max, double skew);

}  // namespace doef
