#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "doef/database.hpp"
#include "doef/operations.hpp"
#include "doef/regions.hpp"
#include "doef/rng.hpp"

namespace doef {

// ---------------------------------------------------------------------------
// Regional protocols

enum class RegionalKind { Static, MovingWindow, GradualMovingWindow, Cycles };

struct RegionalProtocolConfig {
  RegionalKind kind = RegionalKind::MovingWindow;
  double h = 1.0;  // change rate: one move event per ceil(1/h) root selections
  double hr_size = 0.003;
  double lowest_prob_w = 0.0006;
  double highest_prob_w = 0.80;
  // Gradual moving window only; the other protocols use highest - lowest.
  double prob_w_incr_size = 0.02;
  AssignMethod object_assign_method = AssignMethod::Random;

  void validate() const;
  std::uint64_t period() const;
};

/// Live state of a regional protocol over a RegionSet.
class RegionalState {
 public:
  RegionalState(RegionalProtocolConfig config, RegionSet regions, std::size_t window_index = 0);

  const RegionalProtocolConfig& config() const { return config_; }
  const RegionSet& regions() const { return regions_; }
  std::size_t window_index() const { return window_index_; }
  std::uint64_t selections_since_move() const { return since_move_; }
  std::uint64_t period() const { return period_; }
  std::uint64_t move_events() const { return move_events_; }

  // Region parameters (sizes, bounds) used to project the protocol onto
  // other candidate sets.
  std::vector<HRegionParams> region_params() const;

  // Call after every root selection; fires a move event every period().
  void tick();

 private:
  void move_event();

  RegionalProtocolConfig config_;
  RegionSet regions_;
  std::size_t window_index_ = 0;
  std::uint64_t since_move_ = 0;
  std::uint64_t period_ = 1;
  std::uint64_t move_events_ = 0;
};

// N = round(1/hr_size) equal regions; region 0 at highest, the rest at lowest,
// increment = highest - lowest, every direction Down.
RegionalState init_moving_window(std::span<const ObjectId> candidates,
                                 const RegionalProtocolConfig& config, Rng& rng,
                                 const ClassLookup& class_of = {});
// As the moving window, with the user increment config.prob_w_incr_size.
RegionalState init_gradual_moving_window(std::span<const ObjectId> candidates,
                                         const RegionalProtocolConfig& config, Rng& rng,
                                         const ClassLookup& class_of = {});
// Two cycling regions of hr_size (highest/Down, lowest/Up) and a static
// remainder region with increment 0.
RegionalState init_cycles(std::span<const ObjectId> candidates,
                          const RegionalProtocolConfig& config, Rng& rng,
                          const ClassLookup& class_of = {});
// Single region holding every candidate; ticks never change anything.
RegionalState init_static(std::span<const ObjectId> candidates);

RegionalState init_regional(std::span<const ObjectId> candidates,
                            const RegionalProtocolConfig& config, Rng& rng,
                            const ClassLookup& class_of = {});

void regional_tick(RegionalState& state);

// ---------------------------------------------------------------------------
// Dependency protocols

enum class DependencyProtocol { Random, SRef, DRef, Traversed, Class };

struct DependencyProbs {
  double random = 1.0;
  double sref = 0.0;
  double dref = 0.0;
  double traversed = 0.0;
  double cls = 0.0;
};

struct DependencyConfig {
  std::uint32_t d = 0;  // D-references per object
  double c = 1.0;       // traversed-set fraction
  double u = 1.0;       // class-subset fraction
  std::uint32_t r = 0;  // dependency selections after each random one
  DependencyProbs probs;

  void validate() const;
};

// Draws an index in [0, n); used as RAND1..RAND4. Empty means uniform.
using IndexLaw = std::function<std::size_t(Rng&, std::size_t)>;

// Candidate sets defining each protocol.
std::vector<ObjectId> ref_candidates(const Database& db, ObjectId prev, RefKind kind);
// First ceil(c * |distinct(trace)|) distinct objects in visit order.
std::vector<ObjectId> traversed_candidates(const AccessTrace& prev_trace, double c);
// ceil(u * n) consecutive iterator entries of prev's class, starting at prev's
// own position and wrapping around.
std::vector<ObjectId> class_candidates(const Database& db, ObjectId prev, double u);

ObjectId dep_random(const Database& db, Rng& rng, const IndexLaw& law = {});
// Empty when the reference set is empty.
std::optional<ObjectId> dep_ref(const Database& db, ObjectId prev, RefKind kind, Rng& rng,
                                const IndexLaw& law = {});
std::optional<ObjectId> dep_traversed(const AccessTrace& prev_trace, double c, Rng& rng,
                                      const IndexLaw& law = {});
ObjectId dep_class(const Database& db, ObjectId prev, double u, Rng& rng,
                   const IndexLaw& law = {});

// ---------------------------------------------------------------------------
// Hybrid selection and integration

enum class IntegrationMode { Hybrid, Integrated };
enum class Phase { Random, Dependency };

struct Selection {
  ObjectId root = kNoObject;
  std::ptrdiff_t region = -1;  // region of the root in the set it was drawn from
  Phase phase = Phase::Random;
  std::optional<DependencyProtocol> protocol;
  bool fallback = false;  // dependency candidate set was empty
};

/// Root-selection state machine for one workload stream.
///
/// A random-phase selection draws from the global RegionSet; it is followed
/// by r dependency-phase selections, each using a protocol drawn from the
/// configured probabilities. In integrated mode the protocol's candidate set
/// is itself partitioned into H-regions carrying the global weights. The
/// regional protocol ticks after every selection.
class WorkloadState {
 public:
  WorkloadState(RegionalState regional, DependencyConfig dependency, IntegrationMode mode,
                std::uint64_t seed);

  Phase phase() const { return phase_; }
  std::uint32_t steps_done() const { return steps_done_; }
  std::optional<ObjectId> prev_root() const { return prev_root_; }
  const std::optional<AccessTrace>& prev_trace() const { return prev_trace_; }
  const RegionalState& regional() const { return regional_; }
  const DependencyConfig& dependency() const { return dependency_; }
  IntegrationMode mode() const { return mode_; }
  std::uint64_t selections() const { return selections_; }
  std::uint64_t fallbacks() const { return fallbacks_; }

  // Supplies the trace of the operation run from the last selected root.
  void record_trace(AccessTrace trace) { prev_trace_ = std::move(trace); }

  void set_index_law(IndexLaw law) { law_ = std::move(law); }

  Selection next(const Database& db);

 private:
  friend Selection hybrid_next(WorkloadState& state, const Database& db);
  friend Selection integrated_next(WorkloadState& state, const Database& db);

  Selection select_random_phase();
  Selection select_dependency(const Database& db, bool integrated);
  std::vector<ObjectId> candidates_for(DependencyProtocol protocol, const Database& db) const;
  Selection finish(Selection s);

  RegionalState regional_;
  std::vector<HRegionParams> region_params_;
  DependencyConfig dependency_;
  IntegrationMode mode_;
  Rng rng_;
  std::uint64_t partition_seed_;
  IndexLaw law_;

  Phase phase_ = Phase::Random;
  std::uint32_t steps_done_ = 0;
  std::optional<ObjectId> prev_root_;
  std::optional<AccessTrace> prev_trace_;
  std::uint64_t selections_ = 0;
  std::uint64_t fallbacks_ = 0;
};

// Hybrid selection; dependency steps draw directly from the candidate set.
Selection hybrid_next(WorkloadState& state, const Database& db);
// Hybrid selection with regional weights applied inside dependency candidate sets.
Selection integrated_next(WorkloadState& state, const Database& db);

}  // namespace doef
