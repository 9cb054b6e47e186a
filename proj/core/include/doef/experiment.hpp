#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "doef/clustering.hpp"
#include "doef/database.hpp"
#include "doef/operations.hpp"
#include "doef/protocols.hpp"
#include "doef/store.hpp"

namespace doef {

enum class OperationType {
  RandomAccess,
  Scan,
  RangeLookup,
  Traversal,
  SchemaEvolution,
  DatabaseEvolution,
  AttributeUpdate,
  SequentialUpdate,
};

enum class PolicyKind { None, Cfc };

struct WorkloadConfig {
  OperationType operation = OperationType::Traversal;
  Traversal traversal;
  std::uint32_t nrnd = 1;
  std::uint32_t ntest = 1;
  std::uint32_t nupdt = 1;
  EvolutionAction evolution = EvolutionAction::Insert;
  std::uint64_t transactions = 10000;
  RegionalProtocolConfig regional;
  DependencyConfig dependency;
  IntegrationMode mode = IntegrationMode::Hybrid;
};

struct ClusteringConfig {
  PolicyKind policy = PolicyKind::None;
  CfcConfig cfc;
};

struct ExperimentConfig {
  DatabaseGenConfig database;
  StoreConfig store;
  // When > 0 the cache holds this fraction of the initially placed pages and
  // store.cache_size is ignored.
  double cache_fraction = 0.0;
  WorkloadConfig workload;
  ClusteringConfig clustering;
  std::uint64_t seed = 1;
  std::string output;

  void validate() const;
};

struct TxnRecord {
  std::uint64_t txn = 0;
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t c_reads = 0;
  std::uint64_t c_writes = 0;
  ObjectId root = kNoObject;
  std::ptrdiff_t region = -1;
};

struct RunResult {
  std::vector<TxnRecord> rows;
  IoStats totals;
  std::size_t placed_pages = 0;
  std::size_t cache_pages = 0;
  std::uint64_t reclustered_pages = 0;
  std::uint64_t fallbacks = 0;
  double wall_seconds = 0.0;

  // Totals recomputed from the rows.
  IoStats column_sums() const;
};

inline constexpr std::string_view kRunCsvHeader = "txn,reads,writes,c_reads,c_writes,root,region";
inline constexpr std::string_view kSummaryCsvHeader = "param,total_io,txn_io,clust_io";

// Named seed streams split from the master seed.
std::uint64_t stream_seed(std::uint64_t master, std::string_view stream);

// Database generation settings used by run_experiment for this config.
DatabaseGenConfig generation_config(const ExperimentConfig& config);

std::unique_ptr<ClusteringPolicy> make_policy(const ClusteringConfig& config);

/// Builds the database, places it, then runs one operation per transaction.
///
/// Each transaction selects a root, executes the operation, replays its
/// accesses against the buffer pool and lets the policy observe and
/// recluster. The final flush is added to the last row. Output is a pure
/// function of the config (wall_seconds aside).
RunResult run_experiment(const ExperimentConfig& config);

void write_run_csv(std::ostream& out, const RunResult& result);
std::string run_csv(const RunResult& result);

struct SweepPoint {
  std::string value;
  RunResult result;
};

// Seed for sweep run i; run 0 keeps the base seed.
std::uint64_t sweep_seed(std::uint64_t master, std::size_t index);

/// Runs the base config once per value of `key`, in parallel.
/// `threads` = 0 picks the hardware concurrency. Throws ConfigError on an
/// empty value list or a bad key/value.
std::vector<SweepPoint> sweep(const ExperimentConfig& base, std::string_view key,
                              std::span<const std::string> values, unsigned threads = 0);

void write_summary_csv(std::ostream& out, std::span<const SweepPoint> points);

}  // namespace doef
