#include "doef/snapshot.hpp"

#include <array>
#include <bit>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "doef/error.hpp"

namespace doef {

namespace {

constexpr std::array<char, 8> kMagic = {'O', 'C', 'B', 'S', 'N', 'A', 'P', '\0'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void put(T value) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.put(static_cast<char>(u & 0xFF));
      if constexpr (sizeof(T) > 1) u = static_cast<U>(u >> 8);
    }
  }
  void put(double value) { put(std::bit_cast<std::uint64_t>(value)); }
  void put(bool value) { put(static_cast<std::uint8_t>(value ? 1 : 0)); }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get() {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) throw ConfigError("snapshot: truncated input");
      u = static_cast<U>(u | (static_cast<U>(static_cast<unsigned char>(c)) << (8 * i)));
    }
    return static_cast<T>(u);
  }
  double get_double() { return std::bit_cast<double>(get<std::uint64_t>()); }
  bool get_bool() { return get<std::uint8_t>() != 0; }

  // Bounded length prefix, so a corrupt file cannot request huge allocations.
  std::uint32_t get_count(std::uint32_t limit) {
    const auto n = get<std::uint32_t>();
    if (n > limit) throw ConfigError("snapshot: corrupt length field");
    return n;
  }

 private:
  std::istream& in_;
};

constexpr std::uint32_t kMaxCount = 1U << 28;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

// Reaches Database internals for (de)serialization.
class SnapshotAccess {
 public:
  static Database make(DatabaseGenConfig config, std::vector<ClassSpec> classes,
                       std::vector<ObjectInstance> objects) {
    return Database(config, std::move(classes), std::move(objects));
  }
};

void save_snapshot(const Database& db, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  Writer w(out);
  w.put(kSnapshotVersion);

  const auto& c = db.config();
  w.put(c.nc);
  w.put(c.maxnref);
  w.put(c.basesize);
  w.put(c.no);
  w.put(c.nreft);
  w.put(c.attrange);
  w.put(c.clocref);
  w.put(c.olocref);
  w.put(c.size_factor_max);
  w.put(c.size_skew);
  w.put(c.drefs);
  w.put(c.seed);

  w.put(static_cast<std::uint32_t>(db.classes().size()));
  for (const auto& cls : db.classes()) {
    w.put(cls.live);
    w.put(cls.instance_size);
    w.put(static_cast<std::uint32_t>(cls.crefs.size()));
    for (const auto& ref : cls.crefs) {
      w.put(ref.target);
      w.put(ref.type);
    }
    w.put(static_cast<std::uint32_t>(cls.iterator.size()));
    for (ObjectId oid : cls.iterator) w.put(oid);
  }

  w.put(static_cast<std::uint32_t>(db.objects().size()));
  for (const auto& obj : db.objects()) {
    w.put(obj.live);
    w.put(obj.class_id);
    w.put(obj.filler_size);
    w.put(static_cast<std::uint32_t>(obj.attributes.size()));
    for (auto a : obj.attributes) w.put(a);
    auto put_refs = [&](const std::vector<ObjectRef>& refs) {
      w.put(static_cast<std::uint32_t>(refs.size()));
      for (const auto& ref : refs) {
        w.put(ref.target);
        w.put(ref.type);
      }
    };
    put_refs(obj.orefs);
    put_refs(obj.backrefs);
    w.put(static_cast<std::uint32_t>(obj.drefs.size()));
    for (ObjectId d : obj.drefs) w.put(d);
  }
  if (!out) throw StateError("snapshot: write failed");
}

Database load_snapshot(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ConfigError("snapshot: bad magic");
  Reader r(in);
  const auto version = r.get<std::uint32_t>();
  if (version != kSnapshotVersion) {
    throw ConfigError("snapshot: unsupported version " + std::to_string(version));
  }

  DatabaseGenConfig c;
  c.nc = r.get<std::uint32_t>();
  c.maxnref = r.get<std::uint32_t>();
  c.basesize = r.get<std::uint32_t>();
  c.no = r.get<std::uint32_t>();
  c.nreft = r.get<std::uint32_t>();
  c.attrange = r.get<std::uint32_t>();
  c.clocref = r.get<std::uint32_t>();
  c.olocref = r.get<std::uint32_t>();
  c.size_factor_max = r.get<std::uint32_t>();
  c.size_skew = r.get_double();
  c.drefs = r.get<std::uint32_t>();
  c.seed = r.get<std::uint64_t>();

  std::vector<ClassSpec> classes(r.get_count(kMaxCount));
  for (ClassId id = 0; id < classes.size(); ++id) {
    auto& cls = classes[id];
    cls.id = id;
    cls.live = r.get_bool();
    cls.instance_size = r.get<std::uint32_t>();
    cls.crefs.resize(r.get_count(kMaxCount));
    for (auto& ref : cls.crefs) {
      ref.target = r.get<ClassId>();
      ref.type = r.get<RefType>();
    }
    cls.iterator.resize(r.get_count(kMaxCount));
    for (auto& oid : cls.iterator) oid = r.get<ObjectId>();
  }

  std::vector<ObjectInstance> objects(r.get_count(kMaxCount));
  for (ObjectId oid = 0; oid < objects.size(); ++oid) {
    auto& obj = objects[oid];
    obj.oid = oid;
    obj.live = r.get_bool();
    obj.class_id = r.get<ClassId>();
    obj.filler_size = r.get<std::uint32_t>();
    obj.attributes.resize(r.get_count(kMaxCount));
    for (auto& a : obj.attributes) a = r.get<std::int32_t>();
    auto get_refs = [&](std::vector<ObjectRef>& refs) {
      refs.resize(r.get_count(kMaxCount));
      for (auto& ref : refs) {
        ref.target = r.get<ObjectId>();
        ref.type = r.get<RefType>();
      }
    };
    get_refs(obj.orefs);
    get_refs(obj.backrefs);
    obj.drefs.resize(r.get_count(kMaxCount));
    for (auto& d : obj.drefs) d = r.get<ObjectId>();
  }
  return SnapshotAccess::make(c, std::move(classes), std::move(objects));
}

std::uint64_t snapshot_checksum(const Database& db) {
  std::ostringstream os(std::ios::binary);
  save_snapshot(db, os);
  return fnv1a(os.str());
}

std::string snapshot_manifest(const Database& db) {
  const auto& c = db.config();
  std::uint64_t crefs = 0;
  for (const auto& cls : db.classes()) crefs += cls.crefs.size();
  std::uint64_t orefs = 0;
  for (const auto& obj : db.objects()) orefs += obj.orefs.size();

  nlohmann::ordered_json j;
  j["format"] = "ocb-snapshot";
  j["version"] = kSnapshotVersion;
  j["config"] = {{"nc", c.nc},
                 {"maxnref", c.maxnref},
                 {"basesize", c.basesize},
                 {"no", c.no},
                 {"nreft", c.nreft},
                 {"attrange", c.attrange},
                 {"clocref", c.clocref},
                 {"olocref", c.olocref},
                 {"size_factor_max", c.size_factor_max},
                 {"size_skew", c.size_skew},
                 {"drefs", c.drefs},
                 {"seed", c.seed}};
  j["counts"] = {{"classes", db.classes().size()},
                 {"live_classes", db.live_class_count()},
                 {"objects", db.objects().size()},
                 {"live_objects", db.live_object_count()},
                 {"crefs", crefs},
                 {"orefs", orefs},
                 {"total_bytes", db.total_bytes()}};
  j["checksum_fnv1a64"] = hex64(snapshot_checksum(db));
  return j.dump(2) + "\n";
}

void write_snapshot_files(const Database& db, const std::string& path) {
  std::ofstream bin(path, std::ios::binary | std::ios::trunc);
  if (!bin) throw StateError("cannot open " + path + " for writing");
  save_snapshot(db, bin);
  std::ofstream manifest(path + ".json", std::ios::trunc);
  if (!manifest) throw StateError("cannot open " + path + ".json for writing");
  manifest << snapshot_manifest(db);
}

Database read_snapshot_files(const std::string& path) {
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw LookupError("cannot open snapshot " + path);
  Database db = load_snapshot(bin);
  const std::string manifest_path = path + ".json";
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream mf(manifest_path);
    const auto j = nlohmann::json::parse(mf, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.contains("checksum_fnv1a64")) {
      throw ConfigError("snapshot manifest " + manifest_path + " is malformed");
    }
    if (j["checksum_fnv1a64"].get<std::string>() != hex64(snapshot_checksum(db))) {
      throw ConfigError("snapshot checksum mismatch against " + manifest_path);
    }
  }
  return db;
}

}  // namespace doef
