#include "doef/config_file.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <sstream>
#include <utility>

#include "doef/error.hpp"

namespace doef {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError(std::string(key) + ": expected " + std::string(want) + ", got '" +
                    std::string(value) + "'");
}

std::uint64_t parse_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
    bad_value(key, v, "a non-negative integer");
  }
  return out;
}

std::uint32_t parse_u32(std::string_view key, std::string_view v) {
  const auto x = parse_u64(key, v);
  if (x > std::numeric_limits<std::uint32_t>::max()) bad_value(key, v, "a 32-bit integer");
  return static_cast<std::uint32_t>(x);
}

double parse_plain_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  const auto slash = v.find('/');
  if (slash == std::string_view::npos) return parse_plain_double(key, v);
  const double num = parse_plain_double(key, trim(v.substr(0, slash)));
  const double den = parse_plain_double(key, trim(v.substr(slash + 1)));
  if (den == 0.0) bad_value(key, v, "a nonzero denominator");
  return num / den;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true or false");
}

template <class E, std::size_t N>
E parse_enum(std::string_view key, std::string_view v,
             const std::array<std::pair<std::string_view, E>, N>& names) {
  for (const auto& [name, e] : names) {
    if (name == v) return e;
  }
  std::string want = "one of";
  for (const auto& [name, e] : names) want += " " + std::string(name);
  bad_value(key, v, want);
}

template <class E, std::size_t N>
std::string enum_name(E e, const std::array<std::pair<std::string_view, E>, N>& names) {
  for (const auto& [name, x] : names) {
    if (x == e) return std::string(name);
  }
  return "?";
}

std::string fmt_double(double x) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

constexpr std::array<std::pair<std::string_view, OperationType>, 8> kOperations{{
    {"random_access", OperationType::RandomAccess},
    {"scan", OperationType::Scan},
    {"range_lookup", OperationType::RangeLookup},
    {"traversal", OperationType::Traversal},
    {"schema_evolution", OperationType::SchemaEvolution},
    {"database_evolution", OperationType::DatabaseEvolution},
    {"attribute_update", OperationType::AttributeUpdate},
    {"sequential_update", OperationType::SequentialUpdate},
}};
constexpr std::array<std::pair<std::string_view, TraversalMode>, 4> kTraversals{{
    {"set_oriented", TraversalMode::SetOriented},
    {"simple", TraversalMode::Simple},
    {"hierarchical", TraversalMode::Hierarchical},
    {"stochastic", TraversalMode::Stochastic},
}};
constexpr std::array<std::pair<std::string_view, EvolutionAction>, 2> kActions{{
    {"insert", EvolutionAction::Insert},
    {"delete", EvolutionAction::Delete},
}};
constexpr std::array<std::pair<std::string_view, RegionalKind>, 4> kProtocols{{
    {"static", RegionalKind::Static},
    {"moving_window", RegionalKind::MovingWindow},
    {"gradual_moving_window", RegionalKind::GradualMovingWindow},
    {"cycles", RegionalKind::Cycles},
}};
constexpr std::array<std::pair<std::string_view, AssignMethod>, 2> kAssign{{
    {"random", AssignMethod::Random},
    {"by_class", AssignMethod::ByClass},
}};
constexpr std::array<std::pair<std::string_view, IntegrationMode>, 2> kModes{{
    {"hybrid", IntegrationMode::Hybrid},
    {"integrated", IntegrationMode::Integrated},
}};

using Setter = std::function<void(ExperimentConfig&, std::string_view key, std::string_view v)>;
using Getter = std::function<std::string(const ExperimentConfig&)>;

struct Field {
  std::string_view key;
  Setter set;
  Getter get;
};

#define U32_FIELD(KEY, MEMBER)                                                                   \
  Field {                                                                                        \
    KEY, [](ExperimentConfig& c, std::string_view k, std::string_view v) {                       \
      c.MEMBER = parse_u32(k, v);                                                                \
    },                                                                                           \
        [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); }                       \
  }
#define U64_FIELD(KEY, MEMBER)                                                                   \
  Field {                                                                                        \
    KEY, [](ExperimentConfig& c, std::string_view k, std::string_view v) {                       \
      c.MEMBER = parse_u64(k, v);                                                                \
    },                                                                                           \
        [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); }                       \
  }
#define DOUBLE_FIELD(KEY, MEMBER)                                                                \
  Field {                                                                                        \
    KEY, [](ExperimentConfig& c, std::string_view k, std::string_view v) {                       \
      c.MEMBER = parse_double(k, v);                                                             \
    },                                                                                           \
        [](const ExperimentConfig& c) { return fmt_double(c.MEMBER); }                           \
  }
#define ENUM_FIELD(KEY, MEMBER, TABLE)                                                           \
  Field {                                                                                        \
    KEY, [](ExperimentConfig& c, std::string_view k, std::string_view v) {                       \
      c.MEMBER = parse_enum(k, v, TABLE);                                                        \
    },                                                                                           \
        [](const ExperimentConfig& c) { return enum_name(c.MEMBER, TABLE); }                     \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      U64_FIELD("seed", seed),
      Field{"output.path",
            [](ExperimentConfig& c, std::string_view, std::string_view v) { c.output = v; },
            [](const ExperimentConfig& c) { return c.output; }},

      U32_FIELD("db.nc", database.nc),
      U32_FIELD("db.maxnref", database.maxnref),
      U32_FIELD("db.basesize", database.basesize),
      U32_FIELD("db.no", database.no),
      U32_FIELD("db.nreft", database.nreft),
      U32_FIELD("db.attrange", database.attrange),
      U32_FIELD("db.clocref", database.clocref),
      U32_FIELD("db.olocref", database.olocref),
      U32_FIELD("db.size_factor_max", database.size_factor_max),
      DOUBLE_FIELD("db.size_skew", database.size_skew),
      U32_FIELD("db.drefs", database.drefs),

      U32_FIELD("store.page_size", store.page_size),
      U64_FIELD("store.cache_size", store.cache_size),
      DOUBLE_FIELD("store.cache_fraction", cache_fraction),

      ENUM_FIELD("workload.operation", workload.operation, kOperations),
      ENUM_FIELD("workload.traversal", workload.traversal.mode, kTraversals),
      U32_FIELD("workload.depth", workload.traversal.depth),
      Field{"workload.reversed",
            [](ExperimentConfig& c, std::string_view k, std::string_view v) {
              c.workload.traversal.reversed = parse_bool(k, v);
            },
            [](const ExperimentConfig& c) {
              return std::string(c.workload.traversal.reversed ? "true" : "false");
            }},
      Field{"workload.ref_type",
            [](ExperimentConfig& c, std::string_view k, std::string_view v) {
              const auto x = parse_u32(k, v);
              if (x > std::numeric_limits<RefType>::max()) bad_value(k, v, "a reference type");
              c.workload.traversal.ref_type = static_cast<RefType>(x);
            },
            [](const ExperimentConfig& c) {
              return std::to_string(static_cast<unsigned>(c.workload.traversal.ref_type));
            }},
      U32_FIELD("workload.nrnd", workload.nrnd),
      U32_FIELD("workload.ntest", workload.ntest),
      U32_FIELD("workload.nupdt", workload.nupdt),
      ENUM_FIELD("workload.evolution", workload.evolution, kActions),
      U64_FIELD("workload.transactions", workload.transactions),

      ENUM_FIELD("doef.protocol", workload.regional.kind, kProtocols),
      DOUBLE_FIELD("doef.h", workload.regional.h),
      DOUBLE_FIELD("doef.hr_size", workload.regional.hr_size),
      DOUBLE_FIELD("doef.highest_prob_w", workload.regional.highest_prob_w),
      DOUBLE_FIELD("doef.lowest_prob_w", workload.regional.lowest_prob_w),
      DOUBLE_FIELD("doef.prob_w_incr_size", workload.regional.prob_w_incr_size),
      ENUM_FIELD("doef.object_assign_method", workload.regional.object_assign_method, kAssign),

      ENUM_FIELD("dep.mode", workload.mode, kModes),
      U32_FIELD("dep.d", workload.dependency.d),
      DOUBLE_FIELD("dep.c", workload.dependency.c),
      DOUBLE_FIELD("dep.u", workload.dependency.u),
      U32_FIELD("dep.r", workload.dependency.r),
      DOUBLE_FIELD("dep.random_prob", workload.dependency.probs.random),
      DOUBLE_FIELD("dep.sref_prob", workload.dependency.probs.sref),
      DOUBLE_FIELD("dep.dref_prob", workload.dependency.probs.dref),
      DOUBLE_FIELD("dep.traversed_prob", workload.dependency.probs.traversed),
      DOUBLE_FIELD("dep.class_prob", workload.dependency.probs.cls),

      Field{"clustering.policy",
            [](ExperimentConfig& c, std::string_view k, std::string_view v) {
              if (v == "none") {
                c.clustering.policy = PolicyKind::None;
              } else if (v == "cfc") {
                c.clustering.policy = PolicyKind::Cfc;
              } else if (v == "aggressive") {
                c.clustering.policy = PolicyKind::Cfc;
                c.clustering.cfc = CfcConfig::aggressive();
              } else {
                bad_value(k, v, "one of none cfc aggressive");
              }
            },
            [](const ExperimentConfig& c) {
              return std::string(c.clustering.policy == PolicyKind::Cfc ? "cfc" : "none");
            }},
      U32_FIELD("clustering.stat_window", clustering.cfc.stat_window),
      U32_FIELD("clustering.trigger_period", clustering.cfc.trigger_period),
      U32_FIELD("clustering.min_heat", clustering.cfc.min_heat),
      DOUBLE_FIELD("clustering.badness_threshold", clustering.cfc.badness_threshold),
      U32_FIELD("clustering.max_pages_per_round", clustering.cfc.max_pages_per_round),
  };
  return table;
}

#undef U32_FIELD
#undef U64_FIELD
#undef DOUBLE_FIELD
#undef ENUM_FIELD

}  // namespace

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown key '" + std::string(key) + "'");
}

void apply_assignment(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
  }
  apply_setting(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

ExperimentConfig parse_config(std::istream& in, std::string_view source, ExperimentConfig base) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) continue;
    try {
      apply_assignment(base, view);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(source) + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in, path.string(), std::move(base));
}

std::string format_config(const ExperimentConfig& config) {
  std::ostringstream out;
  for (const auto& f : fields()) out << f.key << '=' << f.get(config) << '\n';
  return out.str();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

}  // namespace doef
