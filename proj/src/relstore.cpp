#include "cardmix/relstore.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "cardmix/rng.hpp"

namespace cardmix {

using nlohmann::json;

const char* to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::NumericInteger: return "numeric-integer";
    case ColumnKind::CategoricalInteger: return "categorical-integer";
  }
  throw ContractViolation("unknown ColumnKind");
}

ColumnKind column_kind_from_string(std::string_view s) {
  if (s == "numeric-integer") return ColumnKind::NumericInteger;
  if (s == "categorical-integer") return ColumnKind::CategoricalInteger;
  throw DataError("unknown column kind: " + std::string(s));
}

size_t TableDef::column_index(std::string_view col) const {
  auto idx = find_column(col);
  if (!idx) throw DataError("table " + name + " has no column " + std::string(col));
  return *idx;
}

std::optional<size_t> TableDef::find_column(std::string_view col) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == col) return i;
  }
  return std::nullopt;
}

void TableDef::validate() const {
  if (name.empty()) throw DataError("table with empty name");
  std::set<std::string> seen;
  for (const auto& c : columns) {
    if (c.lo > c.hi) {
      throw DataError("column " + name + "." + c.name + ": lo > hi");
    }
    if (!seen.insert(c.name).second) {
      throw DataError("table " + name + ": duplicate column " + c.name);
    }
  }
  if (!find_column(primary_key)) {
    throw DataError("table " + name + ": primary key " + primary_key +
                    " is not a column");
  }
}

ColumnRef ColumnRef::parse(std::string_view text) {
  const auto dot = text.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == text.size()) {
    throw DataError("expected t.c column reference, got: " + std::string(text));
  }
  return ColumnRef{std::string(text.substr(0, dot)),
                   std::string(text.substr(dot + 1))};
}

bool Schema::has_table(std::string_view name) const {
  for (const auto& t : tables) {
    if (t.name == name) return true;
  }
  return false;
}

size_t Schema::table_index(std::string_view name) const {
  for (size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].name == name) return i;
  }
  throw DataError("unknown table: " + std::string(name));
}

const TableDef& Schema::table(std::string_view name) const {
  return tables[table_index(name)];
}

std::optional<ForeignKey> Schema::find_fk(const ColumnRef& a,
                                          const ColumnRef& b) const {
  for (const auto& fk : fks) {
    if ((fk.child == a && fk.parent == b) || (fk.child == b && fk.parent == a)) {
      return fk;
    }
  }
  return std::nullopt;
}

void Schema::validate() const {
  std::set<std::string> names;
  for (const auto& t : tables) {
    t.validate();
    if (!names.insert(t.name).second) {
      throw DataError("duplicate table name: " + t.name);
    }
  }
  for (const auto& fk : fks) {
    if (fk.child.table == fk.parent.table) {
      throw DataError("self-loop FK on table " + fk.child.table);
    }
    const TableDef& child = table(fk.child.table);
    const TableDef& parent = table(fk.parent.table);
    child.column_index(fk.child.column);
    parent.column_index(fk.parent.column);
    if (parent.primary_key != fk.parent.column) {
      throw DataError("FK " + fk.child.str() + " -> " + fk.parent.str() +
                      ": parent column is not the primary key");
    }
  }
}

void Relation::validate() const {
  def.validate();
  const size_t ncols = def.columns.size();
  if (ncols == 0) throw DataError("relation " + def.name + " has no columns");
  if (values.size() % ncols != 0) {
    throw DataError("relation " + def.name + ": ragged value matrix");
  }
  const size_t n = row_count();
  const size_t pk = def.column_index(def.primary_key);
  std::unordered_set<int64_t> pk_seen;
  pk_seen.reserve(n * 2);
  for (size_t r = 0; r < n; ++r) {
    for (size_t c = 0; c < ncols; ++c) {
      const int64_t v = at(r, c);
      if (v < def.columns[c].lo || v > def.columns[c].hi) {
        throw DataError("relation " + def.name + ": value " + std::to_string(v) +
                        " outside domain of column " + def.columns[c].name);
      }
    }
    if (!pk_seen.insert(at(r, pk)).second) {
      throw DataError("relation " + def.name + ": duplicate primary key " +
                      std::to_string(at(r, pk)));
    }
  }
}

void check_referential_integrity(const Schema& schema,
                                 const std::vector<Relation>& relations) {
  auto find_rel = [&](const std::string& name) -> const Relation& {
    for (const auto& r : relations) {
      if (r.def.name == name) return r;
    }
    throw DataError("missing relation for table " + name);
  };
  for (const auto& fk : schema.fks) {
    const Relation& child = find_rel(fk.child.table);
    const Relation& parent = find_rel(fk.parent.table);
    const size_t cc = child.def.column_index(fk.child.column);
    const size_t pc = parent.def.column_index(fk.parent.column);
    std::unordered_set<int64_t> keys;
    keys.reserve(parent.row_count() * 2);
    for (size_t r = 0; r < parent.row_count(); ++r) keys.insert(parent.at(r, pc));
    for (size_t r = 0; r < child.row_count(); ++r) {
      if (!keys.contains(child.at(r, cc))) {
        throw DataError("referential integrity violated: " + fk.child.str() +
                        " value " + std::to_string(child.at(r, cc)) +
                        " not present in " + fk.parent.str());
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

namespace {

ColumnStats column_stats_from_sorted(std::vector<int64_t>& sorted, uint64_t h) {
  ColumnStats st;
  st.row_count = sorted.size();
  if (sorted.empty()) return st;
  st.min = sorted.front();
  st.max = sorted.back();
  st.ndv = 1;
  for (size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] != sorted[i - 1]) ++st.ndv;
  }
  const size_t n = sorted.size();
  size_t pos = 0;
  for (uint64_t b = 1; b <= h && pos < n; ++b) {
    size_t end = static_cast<size_t>((static_cast<unsigned __int128>(n) * b) / h);
    if (end <= pos) continue;
    // never split a run of equal values across buckets
    while (end < n && sorted[end] == sorted[end - 1]) ++end;
    st.buckets.push_back({sorted[end - 1], static_cast<uint64_t>(end - pos)});
    pos = end;
  }
  return st;
}

}  // namespace

double ColumnStats::cumulative_le(int64_t v) const {
  if (row_count == 0) return 0.0;
  if (v < min) return 0.0;
  if (v >= max) return 1.0;
  double cum = 0.0;
  int64_t lower = min - 1;  // exclusive lower edge of the current bucket
  for (const auto& b : buckets) {
    if (v >= b.upper_bound) {
      cum += static_cast<double>(b.count);
    } else {
      if (v > lower) {
        const double width = static_cast<double>(b.upper_bound - lower);
        cum += static_cast<double>(b.count) *
               (static_cast<double>(v - lower) / width);
      }
      break;
    }
    lower = b.upper_bound;
  }
  return cum / static_cast<double>(row_count);
}

TableStats compute_stats(const Relation& rel, uint64_t buckets) {
  if (buckets < 1) throw ConfigError("histogram bucket count must be >= 1");
  TableStats ts;
  ts.row_count = rel.row_count();
  const size_t ncols = rel.def.columns.size();
  std::vector<int64_t> scratch;
  for (size_t c = 0; c < ncols; ++c) {
    scratch.clear();
    scratch.reserve(ts.row_count);
    for (size_t r = 0; r < ts.row_count; ++r) scratch.push_back(rel.at(r, c));
    std::sort(scratch.begin(), scratch.end());
    ts.columns[rel.def.columns[c].name] = column_stats_from_sorted(scratch, buckets);
  }
  return ts;
}

SchemaStats compute_schema_stats(const Schema& schema,
                                 const std::vector<Relation>& relations,
                                 uint64_t buckets) {
  SchemaStats ss;
  for (const auto& rel : relations) {
    ss.tables[rel.def.name] = compute_stats(rel, buckets);
  }
  for (const auto& fk : schema.fks) {
    const auto child_it = ss.tables.find(fk.child.table);
    const auto parent_it = ss.tables.find(fk.parent.table);
    if (child_it == ss.tables.end() || parent_it == ss.tables.end()) {
      throw DataError("stats: missing relation for FK " + fk.child.str());
    }
    const ColumnStats& pk_stats = [&]() -> const ColumnStats& {
      auto it = parent_it->second.columns.find(fk.parent.column);
      if (it == parent_it->second.columns.end()) {
        throw DataError("stats: missing column " + fk.parent.str());
      }
      return it->second;
    }();
    const double parent_ndv = static_cast<double>(std::max<uint64_t>(pk_stats.ndv, 1));
    ss.fk_fanout[fk.child.str()] =
        static_cast<double>(child_it->second.row_count) / parent_ndv;
  }
  return ss;
}

uint64_t SchemaStats::table_rows(std::string_view table) const {
  auto it = tables.find(std::string(table));
  if (it == tables.end()) throw DataError("stats: unknown table " + std::string(table));
  return it->second.row_count;
}

const ColumnStats& SchemaStats::column(const ColumnRef& ref) const {
  auto t = tables.find(ref.table);
  if (t == tables.end()) throw DataError("stats: unknown table " + ref.table);
  auto c = t->second.columns.find(ref.column);
  if (c == t->second.columns.end()) throw DataError("stats: unknown column " + ref.str());
  return c->second;
}

double SchemaStats::fanout(const ForeignKey& fk) const {
  auto it = fk_fanout.find(fk.child.str());
  if (it == fk_fanout.end()) throw DataError("stats: unknown FK " + fk.child.str());
  return it->second;
}

// ---------------------------------------------------------------------------
// Synthetic data generation
// ---------------------------------------------------------------------------

const char* to_string(FkTopology t) {
  switch (t) {
    case FkTopology::Star: return "star";
    case FkTopology::Snowflake: return "snowflake";
    case FkTopology::Chain: return "chain";
  }
  throw ContractViolation("unknown FkTopology");
}

FkTopology fk_topology_from_string(std::string_view s) {
  if (s == "star") return FkTopology::Star;
  if (s == "snowflake") return FkTopology::Snowflake;
  if (s == "chain") return FkTopology::Chain;
  throw ConfigError("unknown topology: " + std::string(s));
}

void GeneratorConfig::validate() const {
  if (table_count < 2 || table_count > 8) {
    throw ConfigError("table_count must be in [2, 8]");
  }
  if (rows_min < 10 || rows_max > 100000 || rows_min > rows_max) {
    throw ConfigError("rows per table must satisfy 10 <= rows_min <= rows_max <= 100000");
  }
  if (payload_min > payload_max) throw ConfigError("payload_min > payload_max");
  if (domain_width_min < 1 || domain_width_min > domain_width_max) {
    throw ConfigError("domain widths must satisfy 1 <= min <= max");
  }
  if (zipf_s <= 0 || fk_zipf_s <= 0) throw ConfigError("zipf exponents must be > 0");
  for (double share : {zipf_share, correlated_share, categorical_share,
                       fk_zipf_share, correlated_noise}) {
    if (share < 0.0 || share > 1.0) throw ConfigError("shares must lie in [0, 1]");
  }
  for (auto [child, parent] : custom_fks) {
    if (child >= table_count || parent >= table_count) {
      throw ConfigError("custom FK references nonexistent table index " +
                        std::to_string(std::max(child, parent)));
    }
    if (child == parent) throw ConfigError("custom FK is a self-loop");
  }
}

namespace {

/// Draws ranks in [1, k] with P(rank = r) proportional to r^-s.
class ZipfSampler {
 public:
  ZipfSampler(uint64_t k, double s) : cum_(k) {
    double acc = 0.0;
    for (uint64_t i = 0; i < k; ++i) {
      acc += std::pow(static_cast<double>(i + 1), -s);
      cum_[i] = acc;
    }
  }
  uint64_t draw(Rng& rng) const {
    const double u = rng.uniform_double() * cum_.back();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    return static_cast<uint64_t>(it - cum_.begin());  // 0-based rank
  }

 private:
  std::vector<double> cum_;
};

std::vector<std::pair<uint32_t, uint32_t>> topology_edges(const GeneratorConfig& cfg) {
  if (!cfg.custom_fks.empty()) return cfg.custom_fks;
  std::vector<std::pair<uint32_t, uint32_t>> edges;  // (child, parent)
  switch (cfg.topology) {
    case FkTopology::Star:
      for (uint32_t i = 1; i < cfg.table_count; ++i) edges.emplace_back(i, 0);
      break;
    case FkTopology::Snowflake:
      for (uint32_t i = 1; i < cfg.table_count; ++i) edges.emplace_back(i, (i - 1) / 2);
      break;
    case FkTopology::Chain:
      for (uint32_t i = 1; i < cfg.table_count; ++i) edges.emplace_back(i, i - 1);
      break;
  }
  return edges;
}

}  // namespace

Dataset gen_synthetic(const GeneratorConfig& cfg, uint64_t seed) {
  cfg.validate();
  const Rng root(seed);
  const auto edges = topology_edges(cfg);

  Dataset ds;
  const uint32_t n = cfg.table_count;

  // Row counts first: parents must exist before FK columns can be filled.
  std::vector<uint64_t> rows(n);
  for (uint32_t i = 0; i < n; ++i) {
    Rng r = root.fork("rows:" + std::to_string(i));
    rows[i] = static_cast<uint64_t>(
        r.uniform_int(static_cast<int64_t>(cfg.rows_min),
                      static_cast<int64_t>(cfg.rows_max)));
  }

  // Table definitions.
  for (uint32_t i = 0; i < n; ++i) {
    Rng shape = root.fork("shape:" + std::to_string(i));
    TableDef def;
    def.name = cfg.table_prefix + std::to_string(i);
    def.primary_key = "id";
    def.columns.push_back({"id", ColumnKind::NumericInteger, 0,
                           static_cast<int64_t>(rows[i]) - 1});
    for (const auto& [child, parent] : edges) {
      if (child == i) {
        def.columns.push_back({cfg.table_prefix + std::to_string(parent) + "_fk",
                               ColumnKind::NumericInteger, 0,
                               static_cast<int64_t>(rows[parent]) - 1});
      }
    }
    const uint32_t payload = static_cast<uint32_t>(
        shape.uniform_int(cfg.payload_min, cfg.payload_max));
    for (uint32_t p = 0; p < payload; ++p) {
      ColumnDef col;
      col.name = "c" + std::to_string(p);
      const bool categorical = shape.uniform_double() < cfg.categorical_share;
      uint64_t width;
      if (categorical) {
        col.kind = ColumnKind::CategoricalInteger;
        const uint64_t cap = std::min<uint64_t>(cfg.domain_width_max, 64);
        width = static_cast<uint64_t>(
            shape.uniform_int(4, static_cast<int64_t>(std::max<uint64_t>(cap, 4))));
        col.lo = 0;
      } else {
        col.kind = ColumnKind::NumericInteger;
        width = static_cast<uint64_t>(
            shape.uniform_int(static_cast<int64_t>(cfg.domain_width_min),
                              static_cast<int64_t>(cfg.domain_width_max)));
        col.lo = shape.uniform_int(-500, 500);
      }
      col.hi = col.lo + static_cast<int64_t>(width) - 1;
      def.columns.push_back(col);
    }
    ds.schema.tables.push_back(std::move(def));
  }
  for (const auto& [child, parent] : edges) {
    ds.schema.fks.push_back(
        {ColumnRef{ds.schema.tables[child].name,
                   cfg.table_prefix + std::to_string(parent) + "_fk"},
         ColumnRef{ds.schema.tables[parent].name, "id"}});
  }
  ds.schema.validate();

  // Values.
  for (uint32_t i = 0; i < n; ++i) {
    const TableDef& def = ds.schema.tables[i];
    Relation rel;
    rel.def = def;
    const size_t ncols = def.columns.size();
    const size_t nrows = rows[i];
    rel.values.assign(nrows * ncols, 0);

    // Column-at-a-time so correlated columns can read their source.
    for (size_t c = 0; c < ncols; ++c) {
      const ColumnDef& col = def.columns[c];
      Rng r = root.fork("values:" + std::to_string(i) + ":" + col.name);
      auto cell = [&](size_t row) -> int64_t& {
        return rel.values[row * ncols + c];
      };
      if (col.name == "id") {
        for (size_t row = 0; row < nrows; ++row) cell(row) = static_cast<int64_t>(row);
        continue;
      }
      if (col.name.size() > 3 && col.name.ends_with("_fk")) {
        const uint64_t parent_rows = static_cast<uint64_t>(col.hi) + 1;
        if (r.uniform_double() < cfg.fk_zipf_share) {
          ZipfSampler zipf(parent_rows, cfg.fk_zipf_s);
          // Shuffled rank->key map so the hot keys are not always the low ids.
          std::vector<uint64_t> keys(parent_rows);
          for (uint64_t kk = 0; kk < parent_rows; ++kk) keys[kk] = kk;
          r.shuffle(keys);
          for (size_t row = 0; row < nrows; ++row) {
            cell(row) = static_cast<int64_t>(keys[zipf.draw(r)]);
          }
        } else {
          for (size_t row = 0; row < nrows; ++row) {
            cell(row) = r.uniform_int(0, col.hi);
          }
        }
        continue;
      }
      // Payload column.
      const uint64_t width = static_cast<uint64_t>(col.hi - col.lo) + 1;
      const double pick = r.uniform_double();
      if (pick < cfg.zipf_share) {
        ZipfSampler zipf(width, cfg.zipf_s);
        for (size_t row = 0; row < nrows; ++row) {
          cell(row) = col.lo + static_cast<int64_t>(zipf.draw(r));
        }
      } else if (pick < cfg.zipf_share + cfg.correlated_share && c > 0 &&
                 def.columns[c - 1].name != "id" &&
                 !def.columns[c - 1].name.ends_with("_fk")) {
        // Linear map of the previous payload column plus bounded jitter.
        const ColumnDef& src = def.columns[c - 1];
        const double src_width =
            static_cast<double>(src.hi - src.lo) + 1.0;
        const int64_t jitter = std::max<int64_t>(
            1, static_cast<int64_t>(cfg.correlated_noise * static_cast<double>(width)));
        for (size_t row = 0; row < nrows; ++row) {
          const double frac =
              (static_cast<double>(rel.values[row * ncols + (c - 1)] - src.lo) + 0.5) /
              src_width;
          int64_t v = col.lo + static_cast<int64_t>(frac * static_cast<double>(width));
          v += r.uniform_int(-jitter, jitter);
          cell(row) = std::clamp(v, col.lo, col.hi);
        }
      } else {
        for (size_t row = 0; row < nrows; ++row) {
          cell(row) = r.uniform_int(col.lo, col.hi);
        }
      }
    }
    rel.validate();
    ds.relations.push_back(std::move(rel));
  }
  check_referential_integrity(ds.schema, ds.relations);
  return ds;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

int64_t parse_int_cell(std::string_view cell, const std::string& path, size_t line) {
  int64_t v = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw DataError(path + ":" + std::to_string(line) + ": non-integer cell '" +
                    std::string(cell) + "'");
  }
  return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> cells;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

}  // namespace

Relation load_csv(const std::string& path, const TableDef& def) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::string expected;
    for (size_t i = 0; i < def.columns.size(); ++i) {
      if (i) expected += ',';
      expected += def.columns[i].name;
    }
    if (line != expected) {
      throw DataError(path + ":1: header '" + line + "' does not match table " +
                      def.name + " ('" + expected + "')");
    }
  }
  Relation rel;
  rel.def = def;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    const auto cells = split_csv_line(line);
    if (cells.size() != def.columns.size()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(def.columns.size()) + " cells, got " +
                      std::to_string(cells.size()));
    }
    for (const auto& cell : cells) {
      rel.values.push_back(parse_int_cell(cell, path, lineno));
    }
  }
  rel.validate();
  return rel;
}

void save_csv(const Relation& rel, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  const size_t ncols = rel.def.columns.size();
  for (size_t i = 0; i < ncols; ++i) {
    if (i) out << ',';
    out << rel.def.columns[i].name;
  }
  out << '\n';
  for (size_t r = 0; r < rel.row_count(); ++r) {
    for (size_t c = 0; c < ncols; ++c) {
      if (c) out << ',';
      out << rel.at(r, c);
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Schema / stats JSON
// ---------------------------------------------------------------------------

Schema load_schema_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  Schema schema;
  try {
    for (const auto& jt : j.at("tables")) {
      TableDef def;
      def.name = jt.at("name").get<std::string>();
      def.primary_key = jt.at("pk").get<std::string>();
      for (const auto& jc : jt.at("columns")) {
        def.columns.push_back({jc.at("name").get<std::string>(),
                               column_kind_from_string(jc.at("kind").get<std::string>()),
                               jc.at("lo").get<int64_t>(), jc.at("hi").get<int64_t>()});
      }
      schema.tables.push_back(std::move(def));
    }
    for (const auto& jf : j.at("fks")) {
      schema.fks.push_back({ColumnRef::parse(jf.at("child").get<std::string>()),
                            ColumnRef::parse(jf.at("parent").get<std::string>())});
    }
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  schema.validate();
  return schema;
}

void save_schema_json(const Schema& schema, const std::string& path) {
  json j;
  j["tables"] = json::array();
  for (const auto& t : schema.tables) {
    json jt;
    jt["name"] = t.name;
    jt["pk"] = t.primary_key;
    jt["columns"] = json::array();
    for (const auto& c : t.columns) {
      jt["columns"].push_back({{"name", c.name},
                               {"kind", to_string(c.kind)},
                               {"lo", c.lo},
                               {"hi", c.hi}});
    }
    j["tables"].push_back(std::move(jt));
  }
  j["fks"] = json::array();
  for (const auto& fk : schema.fks) {
    j["fks"].push_back({{"child", fk.child.str()}, {"parent", fk.parent.str()}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

void save_stats_json(const SchemaStats& stats, const std::string& path) {
  json j;
  for (const auto& [tname, ts] : stats.tables) {
    json jt;
    jt["row_count"] = ts.row_count;
    for (const auto& [cname, cs] : ts.columns) {
      json jc;
      jc["row_count"] = cs.row_count;
      jc["min"] = cs.min;
      jc["max"] = cs.max;
      jc["ndv"] = cs.ndv;
      json hist = json::array();
      for (const auto& b : cs.buckets) hist.push_back({b.upper_bound, b.count});
      jc["histogram"] = std::move(hist);
      jt["columns"][cname] = std::move(jc);
    }
    j["tables"][tname] = std::move(jt);
  }
  for (const auto& [child, fanout] : stats.fk_fanout) {
    j["fanout"][child] = fanout;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace cardmix
