#include "doef/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>

#include "doef/config_file.hpp"
#include "doef/error.hpp"
#include "doef/rng.hpp"

namespace doef {

void ExperimentConfig::validate() const {
  database.validate();
  store.validate();
  if (!(cache_fraction >= 0.0 && cache_fraction <= 1.0)) {
    throw ConfigError("store.cache_fraction must be in [0, 1]");
  }
  if (workload.transactions == 0) throw ConfigError("workload.transactions must be >= 1");
  if (workload.nrnd == 0) throw ConfigError("workload.nrnd must be >= 1");
  if (workload.nupdt == 0) throw ConfigError("workload.nupdt must be >= 1");
  if (workload.operation == OperationType::Traversal &&
      workload.traversal.mode == TraversalMode::Hierarchical &&
      workload.traversal.ref_type >= database.nreft) {
    throw ConfigError("workload.ref_type must be < db.nreft");
  }
  workload.regional.validate();
  workload.dependency.validate();
  if (clustering.policy == PolicyKind::Cfc) clustering.cfc.validate();
}

IoStats RunResult::column_sums() const {
  IoStats s;
  for (const auto& r : rows) {
    s.reads += r.reads;
    s.writes += r.writes;
    s.clustering_reads += r.c_reads;
    s.clustering_writes += r.c_writes;
  }
  return s;
}

std::uint64_t stream_seed(std::uint64_t master, std::string_view stream) {
  return derive_seed(master, stream);
}

DatabaseGenConfig generation_config(const ExperimentConfig& config) {
  DatabaseGenConfig gen = config.database;
  gen.drefs = std::max(gen.drefs, config.workload.dependency.d);
  gen.seed = stream_seed(config.seed, "generation");
  return gen;
}

std::unique_ptr<ClusteringPolicy> make_policy(const ClusteringConfig& config) {
  if (config.policy == PolicyKind::Cfc) return std::make_unique<CfcPolicy>(config.cfc);
  return no_clustering();
}

namespace {

AccessTrace empty_trace(ObjectId root) {
  AccessTrace t;
  t.root = root;
  return t;
}

void unmap_all(PageStore& store, const std::vector<ObjectId>& removed) {
  for (ObjectId oid : removed) {
    if (store.is_mapped(oid)) store.unmap(oid);
  }
}

AccessTrace execute(Database& db, PageStore& store, const WorkloadConfig& w, ObjectId root,
                    Rng& rng, std::uint64_t traversal_seed) {
  const bool live_root = db.contains(root);
  switch (w.operation) {
    case OperationType::RandomAccess:
      return random_access(db, w.nrnd, rng);
    case OperationType::Scan:
      if (!live_root) return empty_trace(root);
      return scan(db, db.object(root).class_id);
    case OperationType::RangeLookup:
      if (!live_root) return empty_trace(root);
      return scan(db, db.object(root).class_id, w.ntest);
    case OperationType::Traversal:
      if (!live_root) return empty_trace(root);
      return traversal(db, root, w.traversal, traversal_seed);
    case OperationType::AttributeUpdate:
      return update(db, AttributeUpdate{w.nupdt}, rng);
    case OperationType::SequentialUpdate:
      if (!live_root) return empty_trace(root);
      return update(db, SequentialUpdate{db.object(root).class_id}, rng);
    case OperationType::SchemaEvolution: {
      const auto report = evolve(db, SchemaEvolution{w.evolution}, rng);
      unmap_all(store, report.removed);
      auto t = empty_trace(root);
      t.kind = SchemaEvolution{w.evolution};
      return t;
    }
    case OperationType::DatabaseEvolution: {
      const auto report = evolve(db, DatabaseEvolution{w.evolution}, rng);
      auto t = empty_trace(root);
      t.kind = DatabaseEvolution{w.evolution};
      if (w.evolution == EvolutionAction::Insert) {
        store.append(report.id, db.object(report.id).filler_size);
        t.root = report.id;
        t.accesses.push_back({report.id, AccessMode::Write});
      } else {
        unmap_all(store, report.removed);
      }
      return t;
    }
  }
  throw StateError("unknown operation");
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();

  Database db = generate_database(generation_config(config));

  PageStore store = place_sequential(db, config.store);
  RunResult result;
  result.placed_pages = store.page_count();
  result.cache_pages =
      config.cache_fraction > 0.0
          ? std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(
                                         config.cache_fraction *
                                         static_cast<double>(store.page_count()))))
          : config.store.cache_pages();
  BufferPool buffer(result.cache_pages);

  Rng protocol_rng(stream_seed(config.seed, "protocol"));
  const ClassLookup class_of = [&db](ObjectId oid) { return db.object(oid).class_id; };
  WorkloadState state(
      init_regional(db.live_objects(), config.workload.regional, protocol_rng, class_of),
      config.workload.dependency, config.workload.mode, stream_seed(config.seed, "workload"));
  Rng op_rng(stream_seed(config.seed, "operations"));
  const std::uint64_t traversal_seed = stream_seed(config.seed, "traversal");
  auto policy = make_policy(config.clustering);

  result.rows.reserve(config.workload.transactions);
  for (std::uint64_t t = 0; t < config.workload.transactions; ++t) {
    const IoStats before = buffer.stats();
    const Selection sel = state.next(db);
    AccessTrace trace = execute(db, store, config.workload, sel.root, op_rng, traversal_seed);
    for (const Access& a : trace.accesses) {
      if (store.is_mapped(a.oid)) access(store, buffer, a.oid, a.mode);
    }
    policy->observe(trace);
    result.reclustered_pages += policy->maybe_recluster(store, buffer);
    state.record_trace(std::move(trace));

    const IoStats& after = buffer.stats();
    result.rows.push_back({t, after.reads - before.reads, after.writes - before.writes,
                           after.clustering_reads - before.clustering_reads,
                           after.clustering_writes - before.clustering_writes, sel.root,
                           sel.region});
  }

  const IoStats before_flush = buffer.stats();
  const IoStats final_stats = flush_and_report(buffer);
  auto& last = result.rows.back();
  last.writes += final_stats.writes - before_flush.writes;
  last.c_writes += final_stats.clustering_writes - before_flush.clustering_writes;

  result.totals = final_stats;
  result.fallbacks = state.fallbacks();
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

void write_run_csv(std::ostream& out, const RunResult& result) {
  out << kRunCsvHeader << '\n';
  for (const auto& r : result.rows) {
    out << r.txn << ',' << r.reads << ',' << r.writes << ',' << r.c_reads << ',' << r.c_writes
        << ',' << r.root << ',' << r.region << '\n';
  }
}

std::string run_csv(const RunResult& result) {
  std::ostringstream out;
  write_run_csv(out, result);
  return out.str();
}

std::uint64_t sweep_seed(std::uint64_t master, std::size_t index) {
  return master + static_cast<std::uint64_t>(index) * 0x9E3779B97F4A7C15ULL;
}

std::vector<SweepPoint> sweep(const ExperimentConfig& base, std::string_view key,
                              std::span<const std::string> values, unsigned threads) {
  if (values.empty()) throw ConfigError("sweep: no values for " + std::string(key));

  // Resolve every config up front so a bad value fails before any run starts.
  std::vector<ExperimentConfig> configs;
  configs.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig c = base;
    apply_setting(c, key, values[i]);
    c.seed = sweep_seed(base.seed, i);
    c.validate();
    configs.push_back(std::move(c));
  }

  std::vector<SweepPoint> points(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        points[i] = {values[i], run_experiment(configs[i])};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(configs.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return points;
}

void write_summary_csv(std::ostream& out, std::span<const SweepPoint> points) {
  out << kSummaryCsvHeader << '\n';
  for (const auto& p : points) {
    const auto& s = p.result.totals;
    out << p.value << ',' << s.total_io() << ',' << s.transaction_io() << ',' << s.clustering_io()
        << '\n';
  }
}

}  // namespace doef
