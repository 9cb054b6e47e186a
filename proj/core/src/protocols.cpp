#include "doef/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "doef/error.hpp"

namespace doef {

namespace {

constexpr double kEpsilon = 1e-9;

// ceil(fraction * n) clamped to [1, n]; the epsilon absorbs products such as
// 0.3 * 10 = 3.0000000000000004.
std::size_t fraction_count(double fraction, std::size_t n) {
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - kEpsilon));
  return std::clamp<std::size_t>(k, 1, n);
}

std::size_t draw_index(Rng& rng, std::size_t n, const IndexLaw& law) {
  if (law) {
    const std::size_t i = law(rng, n);
    if (i >= n) throw StateError("index law returned an out-of-range index");
    return i;
  }
  return static_cast<std::size_t>(rng.below(n));
}

RegionalState init_window(std::span<const ObjectId> candidates,
                          const RegionalProtocolConfig& config, double incr, Rng& rng,
                          const ClassLookup& class_of) {
  config.validate();
  const auto n = static_cast<std::size_t>(std::llround(1.0 / config.hr_size));
  if (n == 0 || config.hr_size > 1.0) throw ConfigError("moving window: hr_size must be <= 1");
  if (candidates.size() < n) {
    throw ConfigError("moving window: " + std::to_string(candidates.size()) +
                      " candidates cannot fill " + std::to_string(n) + " regions");
  }
  std::vector<HRegionParams> params(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = params[i];
    p.hr_size = std::min(config.hr_size, 1.0 / static_cast<double>(n));
    p.lowest_prob_w = config.lowest_prob_w;
    p.highest_prob_w = config.highest_prob_w;
    p.init_prob_w = i == 0 ? config.highest_prob_w : config.lowest_prob_w;
    p.prob_w_incr_size = incr;
    p.object_assign_method = config.object_assign_method;
    p.init_dir = Direction::Down;
  }
  auto rs = RegionSet::partition(candidates, params, config.object_assign_method, rng, class_of);
  return RegionalState(config, std::move(rs), 0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Regional

void RegionalProtocolConfig::validate() const {
  if (!(h > 0.0 && h <= 1.0)) throw ConfigError("regional protocol: h must be in (0, 1]");
  if (kind == RegionalKind::Static) return;
  if (!(hr_size > 0.0 && hr_size <= 1.0)) {
    throw ConfigError("regional protocol: hr_size must be in (0, 1]");
  }
  if (!(lowest_prob_w >= 0.0 && lowest_prob_w <= highest_prob_w && highest_prob_w > 0.0)) {
    throw ConfigError("regional protocol: need 0 <= lowest_prob_w <= highest_prob_w, highest > 0");
  }
  if (prob_w_incr_size < 0.0) throw ConfigError("regional protocol: prob_w_incr_size must be >= 0");
  if (kind == RegionalKind::Cycles && 2.0 * hr_size > 1.0 + kEpsilon) {
    throw ConfigError("cycles: 2 * hr_size must be <= 1");
  }
}

std::uint64_t RegionalProtocolConfig::period() const {
  const double p = std::ceil(1.0 / h - kEpsilon);
  return p < 1.0 ? 1 : static_cast<std::uint64_t>(p);
}

RegionalState::RegionalState(RegionalProtocolConfig config, RegionSet regions,
                             std::size_t window_index)
    : config_(config),
      regions_(std::move(regions)),
      window_index_(window_index),
      period_(config.period()) {}

std::vector<HRegionParams> RegionalState::region_params() const {
  std::vector<HRegionParams> out;
  out.reserve(regions_.size());
  for (const auto& r : regions_.regions()) out.push_back(r.params);
  return out;
}

void RegionalState::tick() {
  if (++since_move_ < period_) return;
  since_move_ = 0;
  move_event();
}

void RegionalState::move_event() {
  const std::size_t n = regions_.size();
  ++move_events_;
  switch (config_.kind) {
    case RegionalKind::Static:
      return;
    case RegionalKind::MovingWindow: {
      const std::size_t next = (window_index_ + 1) % n;
      regions_.set_dir(window_index_, Direction::Down);
      regions_.set_dir(next, Direction::Up);
      window_index_ = next;
      regions_.step_all();
      return;
    }
    case RegionalKind::GradualMovingWindow: {
      // The departed region keeps its direction; the entered one flips.
      const std::size_t next = (window_index_ + 1) % n;
      const Direction entered = regions_.region(next).dir;
      regions_.set_dir(next, entered == Direction::Up ? Direction::Down : Direction::Up);
      window_index_ = next;
      regions_.step_all();
      return;
    }
    case RegionalKind::Cycles: {
      for (std::size_t i = 0; i < 2; ++i) {
        regions_.step(i);
        const auto& r = regions_.region(i);
        if (r.weight >= r.params.highest_prob_w) regions_.set_dir(i, Direction::Down);
        if (r.weight <= r.params.lowest_prob_w) regions_.set_dir(i, Direction::Up);
      }
      window_index_ = regions_.region(1).weight > regions_.region(0).weight ? 1 : 0;
      return;
    }
  }
}

RegionalState init_moving_window(std::span<const ObjectId> candidates,
                                 const RegionalProtocolConfig& config, Rng& rng,
                                 const ClassLookup& class_of) {
  auto cfg = config;
  cfg.kind = RegionalKind::MovingWindow;
  return init_window(candidates, cfg, cfg.highest_prob_w - cfg.lowest_prob_w, rng, class_of);
}

RegionalState init_gradual_moving_window(std::span<const ObjectId> candidates,
                                         const RegionalProtocolConfig& config, Rng& rng,
                                         const ClassLookup& class_of) {
  auto cfg = config;
  cfg.kind = RegionalKind::GradualMovingWindow;
  return init_window(candidates, cfg, cfg.prob_w_incr_size, rng, class_of);
}

RegionalState init_cycles(std::span<const ObjectId> candidates,
                          const RegionalProtocolConfig& config, Rng& rng,
                          const ClassLookup& class_of) {
  auto cfg = config;
  cfg.kind = RegionalKind::Cycles;
  cfg.validate();
  const double incr = cfg.highest_prob_w - cfg.lowest_prob_w;
  std::vector<HRegionParams> params(3);
  for (std::size_t i = 0; i < 3; ++i) {
    auto& p = params[i];
    p.lowest_prob_w = cfg.lowest_prob_w;
    p.highest_prob_w = cfg.highest_prob_w;
    p.object_assign_method = cfg.object_assign_method;
  }
  params[0].hr_size = cfg.hr_size;
  params[0].init_prob_w = cfg.highest_prob_w;
  params[0].prob_w_incr_size = incr;
  params[0].init_dir = Direction::Down;
  params[1].hr_size = cfg.hr_size;
  params[1].init_prob_w = cfg.lowest_prob_w;
  params[1].prob_w_incr_size = incr;
  params[1].init_dir = Direction::Up;
  // The remainder region never changes.
  params[2].hr_size = std::max(1.0 - 2.0 * cfg.hr_size, 1e-12);
  params[2].init_prob_w = cfg.lowest_prob_w;
  params[2].prob_w_incr_size = 0.0;
  params[2].init_dir = Direction::Down;
  auto rs = RegionSet::partition(candidates, params, cfg.object_assign_method, rng, class_of);
  return RegionalState(cfg, std::move(rs), 0);
}

RegionalState init_static(std::span<const ObjectId> candidates) {
  RegionalProtocolConfig cfg;
  cfg.kind = RegionalKind::Static;
  HRegionParams p;
  p.hr_size = 1.0;
  p.init_prob_w = 1.0;
  p.lowest_prob_w = 1.0;
  p.highest_prob_w = 1.0;
  Rng unused(0);
  // ByClass keeps candidate order without consuming randomness.
  std::vector<HRegionParams> params{p};
  auto rs = RegionSet::partition(candidates, params, AssignMethod::ByClass, unused,
                                 [](ObjectId) { return ClassId{0}; });
  return RegionalState(cfg, std::move(rs), 0);
}

RegionalState init_regional(std::span<const ObjectId> candidates,
                            const RegionalProtocolConfig& config, Rng& rng,
                            const ClassLookup& class_of) {
  switch (config.kind) {
    case RegionalKind::Static: {
      config.validate();
      auto state = init_static(candidates);
      auto cfg = config;
      return RegionalState(cfg, state.regions(), 0);
    }
    case RegionalKind::MovingWindow:
      return init_moving_window(candidates, config, rng, class_of);
    case RegionalKind::GradualMovingWindow:
      return init_gradual_moving_window(candidates, config, rng, class_of);
    case RegionalKind::Cycles:
      return init_cycles(candidates, config, rng, class_of);
  }
  throw ConfigError("unknown regional protocol");
}

void regional_tick(RegionalState& state) { state.tick(); }

// ---------------------------------------------------------------------------
// Dependency

void DependencyConfig::validate() const {
  const auto& p = probs;
  for (double x : {p.random, p.sref, p.dref, p.traversed, p.cls}) {
    if (!(x >= 0.0)) throw ConfigError("dependency: protocol probabilities must be >= 0");
  }
  const double total = p.random + p.sref + p.dref + p.traversed + p.cls;
  if (std::abs(total - 1.0) > kEpsilon) {
    throw ConfigError("dependency: protocol probabilities must sum to 1, got " +
                      std::to_string(total));
  }
  if (!(c > 0.0 && c <= 1.0)) throw ConfigError("dependency: c must be in (0, 1]");
  if (!(u > 0.0 && u <= 1.0)) throw ConfigError("dependency: u must be in (0, 1]");
}

std::vector<ObjectId> ref_candidates(const Database& db, ObjectId prev, RefKind kind) {
  return db.refset(prev, kind);
}

std::vector<ObjectId> traversed_candidates(const AccessTrace& prev_trace, double c) {
  auto distinct = prev_trace.distinct_objects();
  if (distinct.empty()) return distinct;
  distinct.resize(fraction_count(c, distinct.size()));
  return distinct;
}

std::vector<ObjectId> class_candidates(const Database& db, ObjectId prev, double u) {
  const auto& members = db.class_spec(db.object(prev).class_id).iterator;
  const std::size_t n = members.size();
  const std::size_t k = fraction_count(u, n);
  const std::size_t offset = db.iterator_position(prev);
  std::vector<ObjectId> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(members[(offset + i) % n]);
  return out;
}

ObjectId dep_random(const Database& db, Rng& rng, const IndexLaw& law) {
  const auto live = db.live_objects();
  if (live.empty()) throw StateError("dep_random: empty database");
  return live[draw_index(rng, live.size(), law)];
}

std::optional<ObjectId> dep_ref(const Database& db, ObjectId prev, RefKind kind, Rng& rng,
                                const IndexLaw& law) {
  const auto refs = ref_candidates(db, prev, kind);
  if (refs.empty()) return std::nullopt;
  return refs[draw_index(rng, refs.size(), law)];
}

std::optional<ObjectId> dep_traversed(const AccessTrace& prev_trace, double c, Rng& rng,
                                      const IndexLaw& law) {
  const auto cands = traversed_candidates(prev_trace, c);
  if (cands.empty()) return std::nullopt;
  return cands[draw_index(rng, cands.size(), law)];
}

ObjectId dep_class(const Database& db, ObjectId prev, double u, Rng& rng, const IndexLaw& law) {
  const auto cands = class_candidates(db, prev, u);
  return cands[draw_index(rng, cands.size(), law)];
}

// ---------------------------------------------------------------------------
// Workload state machine

WorkloadState::WorkloadState(RegionalState regional, DependencyConfig dependency,
                             IntegrationMode mode, std::uint64_t seed)
    : regional_(std::move(regional)),
      region_params_(regional_.region_params()),
      dependency_(dependency),
      mode_(mode),
      rng_(derive_seed(seed, "selection")),
      partition_seed_(derive_seed(seed, "integration-partition")) {
  dependency_.validate();
}

Selection WorkloadState::finish(Selection s) {
  regional_.tick();
  prev_root_ = s.root;
  ++selections_;
  if (s.phase == Phase::Random) {
    if (dependency_.r > 0) {
      phase_ = Phase::Dependency;
      steps_done_ = 0;
    }
  } else if (++steps_done_ >= dependency_.r) {
    phase_ = Phase::Random;
    steps_done_ = 0;
  }
  return s;
}

Selection WorkloadState::select_random_phase() {
  const auto draw = regional_.regions().select(rng_);
  Selection s;
  s.root = draw.oid;
  s.region = static_cast<std::ptrdiff_t>(draw.region);
  s.phase = Phase::Random;
  return s;
}

std::vector<ObjectId> WorkloadState::candidates_for(DependencyProtocol protocol,
                                                    const Database& db) const {
  const ObjectId prev = *prev_root_;
  switch (protocol) {
    case DependencyProtocol::Random:
      return {db.live_objects().begin(), db.live_objects().end()};
    case DependencyProtocol::SRef:
      return db.contains(prev) ? ref_candidates(db, prev, RefKind::S) : std::vector<ObjectId>{};
    case DependencyProtocol::DRef:
      return db.contains(prev) ? ref_candidates(db, prev, RefKind::D) : std::vector<ObjectId>{};
    case DependencyProtocol::Traversed: {
      if (!prev_trace_ || prev_trace_->empty()) return {};
      auto cands = traversed_candidates(*prev_trace_, dependency_.c);
      std::erase_if(cands, [&db](ObjectId o) { return !db.contains(o); });
      return cands;
    }
    case DependencyProtocol::Class:
      return db.contains(prev) ? class_candidates(db, prev, dependency_.u)
                               : std::vector<ObjectId>{};
  }
  return {};
}

Selection WorkloadState::select_dependency(const Database& db, bool integrated) {
  const auto& p = dependency_.probs;
  const std::vector<double> weights{p.random, p.sref, p.dref, p.traversed, p.cls};
  const auto protocol = static_cast<DependencyProtocol>(pick_weighted(rng_, weights));

  Selection s;
  s.phase = Phase::Dependency;
  s.protocol = protocol;

  if (protocol == DependencyProtocol::Random) {
    if (integrated) {
      // The candidate set is the whole base: the global partition applies.
      const auto draw = regional_.regions().select(rng_);
      s.root = draw.oid;
      s.region = static_cast<std::ptrdiff_t>(draw.region);
    } else {
      s.root = dep_random(db, rng_, law_);
    }
    return s;
  }

  const auto cands = candidates_for(protocol, db);
  if (cands.empty()) {
    ++fallbacks_;
    auto global = select_random_phase();
    s.root = global.root;
    s.region = global.region;
    s.fallback = true;
    return s;
  }

  if (!integrated) {
    s.root = cands[draw_index(rng_, cands.size(), law_)];
    return s;
  }

  // Partition is a pure function of (prev root, protocol) so that the same
  // previous root always yields the same regions.
  Rng partition_rng(derive_seed(partition_seed_, (static_cast<std::uint64_t>(*prev_root_) << 3) |
                                                     static_cast<std::uint64_t>(protocol)));
  auto local = RegionSet::partition(
      cands, region_params_, regional_.config().object_assign_method, partition_rng,
      [&db](ObjectId o) { return db.object(o).class_id; });
  const auto& global = regional_.regions();
  for (std::size_t i = 0; i < local.size(); ++i) local.set_weight(i, global.region(i).weight);
  if (!local.selectable()) {
    ++fallbacks_;
    auto fallback = select_random_phase();
    s.root = fallback.root;
    s.region = fallback.region;
    s.fallback = true;
    return s;
  }
  const auto draw = local.select(rng_);
  s.root = draw.oid;
  s.region = static_cast<std::ptrdiff_t>(draw.region);
  return s;
}

Selection WorkloadState::next(const Database& db) {
  return mode_ == IntegrationMode::Integrated ? integrated_next(*this, db) : hybrid_next(*this, db);
}

Selection hybrid_next(WorkloadState& state, const Database& db) {
  if (state.phase_ == Phase::Random || !state.prev_root_) {
    return state.finish(state.select_random_phase());
  }
  return state.finish(state.select_dependency(db, false));
}

Selection integrated_next(WorkloadState& state, const Database& db) {
  if (state.phase_ == Phase::Random || !state.prev_root_) {
    return state.finish(state.select_random_phase());
  }
  return state.finish(state.select_dependency(db, true));
}

}  // namespace doef
