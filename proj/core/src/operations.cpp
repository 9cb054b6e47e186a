#include "doef/operations.hpp"

#include <deque>
#include <string>
#include <unordered_set>

#include "doef/error.hpp"

namespace doef {

namespace {

const std::vector<ObjectRef>& links(const ObjectInstance& obj, bool reversed) {
  return reversed ? obj.backrefs : obj.orefs;
}

class DepthFirst {
 public:
  DepthFirst(const Database& db, const Traversal& spec, AccessTrace& trace)
      : db_(db), spec_(spec), trace_(trace) {}

  void visit(ObjectId oid, std::uint32_t level) {
    trace_.accesses.push_back({oid, AccessMode::Read});
    if (!seen_.insert(oid).second) return;
    if (level == spec_.depth) return;
    for (const auto& ref : links(db_.object(oid), spec_.reversed)) {
      if (spec_.mode == TraversalMode::Hierarchical && ref.type != spec_.ref_type) continue;
      visit(ref.target, level + 1);
    }
  }

 private:
  const Database& db_;
  const Traversal& spec_;
  AccessTrace& trace_;
  std::unordered_set<ObjectId> seen_;
};

void breadth_first(const Database& db, ObjectId root, const Traversal& spec, AccessTrace& trace) {
  std::unordered_set<ObjectId> seen{root};
  std::deque<std::pair<ObjectId, std::uint32_t>> frontier{{root, 0}};
  trace.accesses.push_back({root, AccessMode::Read});
  while (!frontier.empty()) {
    const auto [oid, level] = frontier.front();
    frontier.pop_front();
    if (level == spec.depth) continue;
    for (const auto& ref : links(db.object(oid), spec.reversed)) {
      trace.accesses.push_back({ref.target, AccessMode::Read});
      if (seen.insert(ref.target).second) frontier.emplace_back(ref.target, level + 1);
    }
  }
}

void stochastic_walk(const Database& db, ObjectId root, const Traversal& spec,
                     std::uint64_t traversal_seed, AccessTrace& trace) {
  Rng rng(derive_seed(traversal_seed, static_cast<std::uint64_t>(root)));
  ObjectId current = root;
  trace.accesses.push_back({current, AccessMode::Read});
  for (std::uint32_t step = 0; step < spec.depth; ++step) {
    const auto& out = links(db.object(current), spec.reversed);
    if (out.empty()) break;
    current = out[rng.below(out.size())].target;
    trace.accesses.push_back({current, AccessMode::Read});
  }
}

}  // namespace

std::vector<ObjectId> AccessTrace::distinct_objects() const {
  std::vector<ObjectId> out;
  std::unordered_set<ObjectId> seen;
  for (const auto& a : accesses) {
    if (seen.insert(a.oid).second) out.push_back(a.oid);
  }
  return out;
}

AccessTrace random_access(const Database& db, std::uint32_t nrnd, Rng& rng) {
  if (nrnd == 0) throw ConfigError("random_access: nrnd must be >= 1");
  if (db.live_object_count() == 0) throw StateError("random_access: empty database");
  AccessTrace trace;
  trace.kind = RandomAccess{nrnd};
  trace.accesses.reserve(nrnd);
  for (std::uint32_t i = 0; i < nrnd; ++i) {
    trace.accesses.push_back({db.random_object(rng), AccessMode::Read});
  }
  trace.root = trace.accesses.front().oid;
  return trace;
}

AccessTrace scan(const Database& db, ClassId cls, std::optional<std::uint32_t> ntest) {
  const auto& spec = db.class_spec(cls);
  AccessTrace trace;
  if (ntest) {
    if (*ntest == 0) throw ConfigError("range lookup: ntest must be >= 1");
    trace.kind = RangeLookup{cls, *ntest};
  } else {
    trace.kind = SequentialScan{cls};
  }
  trace.accesses.reserve(spec.iterator.size());
  for (ObjectId oid : spec.iterator) {
    trace.accesses.push_back({oid, AccessMode::Read});
    if (ntest) {
      // The predicate result is not used; only the evaluation count matters.
      const auto& attrs = db.object(oid).attributes;
      for (std::uint32_t t = 0; t < *ntest && !attrs.empty(); ++t) {
        [[maybe_unused]] const bool pass = attrs[t % attrs.size()] >= 5000;
        ++trace.predicate_evaluations;
      }
    }
  }
  if (!trace.accesses.empty()) trace.root = trace.accesses.front().oid;
  return trace;
}

AccessTrace traversal(const Database& db, ObjectId root, const Traversal& spec,
                      std::uint64_t traversal_seed) {
  if (!db.contains(root)) throw LookupError("traversal: unknown root " + std::to_string(root));
  AccessTrace trace;
  trace.root = root;
  trace.kind = spec;
  switch (spec.mode) {
    case TraversalMode::SetOriented:
      breadth_first(db, root, spec, trace);
      break;
    case TraversalMode::Simple:
    case TraversalMode::Hierarchical:
      DepthFirst(db, spec, trace).visit(root, 0);
      break;
    case TraversalMode::Stochastic:
      stochastic_walk(db, root, spec, traversal_seed, trace);
      break;
  }
  return trace;
}

MutationReport evolve(Database& db, const SchemaEvolution& op, Rng& rng) {
  MutationReport report;
  report.schema = true;
  report.action = op.action;
  if (op.action == EvolutionAction::Insert) {
    report.id = db.insert_class(rng);
    return report;
  }
  if (db.live_class_count() == 0) throw StateError("schema evolution: no class to delete");
  const auto classes = db.live_classes();
  const ClassId victim = classes[rng.below(classes.size())];
  report.id = victim;
  report.removed = db.class_spec(victim).iterator;
  report.objects_removed = report.removed.size();
  db.erase_class(victim);
  return report;
}

MutationReport evolve(Database& db, const DatabaseEvolution& op, Rng& rng) {
  MutationReport report;
  report.action = op.action;
  if (op.action == EvolutionAction::Insert) {
    report.id = db.insert_object(rng);
    return report;
  }
  if (db.live_object_count() == 0) throw StateError("database evolution: no object to delete");
  const ObjectId victim = db.random_object(rng);
  report.id = victim;
  report.objects_removed = 1;
  report.removed.push_back(victim);
  db.erase_object(victim);
  return report;
}

AccessTrace update(Database& db, const AttributeUpdate& op, Rng& rng) {
  if (op.nupdt == 0) throw ConfigError("attribute update: nupdt must be >= 1");
  if (db.live_object_count() == 0) throw StateError("attribute update: empty database");
  AccessTrace trace;
  trace.kind = op;
  for (std::uint32_t i = 0; i < op.nupdt; ++i) {
    const ObjectId oid = db.random_object(rng);
    db.bump_attributes(oid);
    trace.accesses.push_back({oid, AccessMode::Write});
  }
  trace.root = trace.accesses.front().oid;
  return trace;
}

AccessTrace update(Database& db, const SequentialUpdate& op, Rng& /*rng*/) {
  const std::vector<ObjectId> members = db.class_spec(op.cls).iterator;
  AccessTrace trace;
  trace.kind = op;
  for (ObjectId oid : members) {
    db.bump_attributes(oid);
    trace.accesses.push_back({oid, AccessMode::Write});
  }
  if (!members.empty()) trace.root = members.front();
  return trace;
}

}  // namespace doef
