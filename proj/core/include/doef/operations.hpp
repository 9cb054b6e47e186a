#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "doef/database.hpp"
#include "doef/rng.hpp"

namespace doef {

enum class AccessMode : std::uint8_t { Read, Write };

struct Access {
  ObjectId oid = kNoObject;
  AccessMode mode = AccessMode::Read;
  friend bool operator==(const Access&, const Access&) = default;
};

enum class TraversalMode { SetOriented, Simple, Hierarchical, Stochastic };
enum class EvolutionAction { Insert, Delete };

struct RandomAccess {
  std::uint32_t nrnd = 1;
};
struct SequentialScan {
  ClassId cls = kNoClass;
};
struct RangeLookup {
  ClassId cls = kNoClass;
  std::uint32_t ntest = 1;
};
struct Traversal {
  TraversalMode mode = TraversalMode::Simple;
  std::uint32_t depth = 2;
  bool reversed = false;
  RefType ref_type = 0;  // Hierarchical only
};
struct SchemaEvolution {
  EvolutionAction action = EvolutionAction::Insert;
};
struct DatabaseEvolution {
  EvolutionAction action = EvolutionAction::Insert;
};
struct AttributeUpdate {
  std::uint32_t nupdt = 1;
};
struct SequentialUpdate {
  ClassId cls = kNoClass;
};

using OperationKind = std::variant<RandomAccess, SequentialScan, RangeLookup, Traversal,
                                   SchemaEvolution, DatabaseEvolution, AttributeUpdate,
                                   SequentialUpdate>;

/// Ordered object accesses produced by one operation.
struct AccessTrace {
  ObjectId root = kNoObject;
  OperationKind kind;
  std::vector<Access> accesses;
  // Attribute predicates evaluated by range lookups (CPU only, no I/O).
  std::uint64_t predicate_evaluations = 0;

  std::size_t size() const { return accesses.size(); }
  bool empty() const { return accesses.empty(); }
  // Objects in first-visit order, duplicates removed.
  std::vector<ObjectId> distinct_objects() const;
};

AccessTrace random_access(const Database& db, std::uint32_t nrnd, Rng& rng);

// Reads every instance of `cls` in iterator order. With `ntest`, each read
// also evaluates ntest attribute predicates (range lookup).
AccessTrace scan(const Database& db, ClassId cls, std::optional<std::uint32_t> ntest = {});

/// Traversal from `root` up to `spec.depth` levels.
///
/// SetOriented is breadth-first, Simple depth-first, Hierarchical depth-first
/// over edges of `spec.ref_type` only. An object met again is recorded but not
/// expanded again. Stochastic walks one uniformly chosen link per level with an
/// Rng seeded from (traversal_seed, root), so it is a pure function of its
/// arguments. `reversed` follows BackRefs instead of ORefs.
AccessTrace traversal(const Database& db, ObjectId root, const Traversal& spec,
                      std::uint64_t traversal_seed = 0);

struct MutationReport {
  bool schema = false;
  EvolutionAction action = EvolutionAction::Insert;
  std::uint32_t id = 0;  // class id (schema) or oid (database)
  std::size_t objects_removed = 0;
  std::vector<ObjectId> removed;
};

MutationReport evolve(Database& db, const SchemaEvolution& op, Rng& rng);
MutationReport evolve(Database& db, const DatabaseEvolution& op, Rng& rng);

// Writes nupdt uniformly chosen objects (with replacement).
AccessTrace update(Database& db, const AttributeUpdate& op, Rng& rng);
// Writes every instance of the class in iterator order.
AccessTrace update(Database& db, const SequentialUpdate& op, Rng& rng);

}  // namespace doef
