#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cardmix/common.hpp"

namespace cardmix {

enum class ColumnKind { NumericInteger, CategoricalInteger };

const char* to_string(ColumnKind kind);
ColumnKind column_kind_from_string(std::string_view s);

/// Integer column with a closed declared domain [lo, hi]. Categorical
/// values are dictionary-encoded to integers at generation/ingestion time.
struct ColumnDef {
  std::string name;
  ColumnKind kind = ColumnKind::NumericInteger;
  int64_t lo = 0;
  int64_t hi = 0;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
  std::string primary_key;

  size_t column_index(std::string_view col) const;
  std::optional<size_t> find_column(std::string_view col) const;
  void validate() const;
};

struct ColumnRef {
  std::string table;
  std::string column;

  auto operator<=>(const ColumnRef&) const = default;
  std::string str() const { return table + "." + column; }
  static ColumnRef parse(std::string_view text);  // "t.c"
};

struct ForeignKey {
  ColumnRef child;
  ColumnRef parent;

  auto operator<=>(const ForeignKey&) const = default;
};

struct Schema {
  std::vector<TableDef> tables;
  std::vector<ForeignKey> fks;

  bool has_table(std::string_view name) const;
  size_t table_index(std::string_view name) const;
  const TableDef& table(std::string_view name) const;
  /// The declared FK matching {a, b} in either operand order, if any.
  std::optional<ForeignKey> find_fk(const ColumnRef& a, const ColumnRef& b) const;
  void validate() const;
};

/// Immutable in-memory table: row-major integer matrix over def.columns.
struct Relation {
  TableDef def;
  std::vector<int64_t> values;  // row_count * def.columns.size()

  size_t row_count() const {
    return def.columns.empty() ? 0 : values.size() / def.columns.size();
  }
  int64_t at(size_t row, size_t col) const {
    return values[row * def.columns.size() + col];
  }
  /// PK distinct, every value inside its declared domain.
  void validate() const;
};

/// Child FK value sets must be subsets of the parent PK value sets.
void check_referential_integrity(const Schema& schema,
                                 const std::vector<Relation>& relations);

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct HistogramBucket {
  int64_t upper_bound;
  uint64_t count;
};

/// Equi-depth histogram plus basic aggregates. Equal values are never split
/// across buckets, so bucket boundaries identify value runs deterministically.
struct ColumnStats {
  uint64_t row_count = 0;
  int64_t min = 0;
  int64_t max = 0;
  uint64_t ndv = 0;
  std::vector<HistogramBucket> buckets;

  /// Fraction of rows with value <= v, linearly interpolated inside buckets.
  double cumulative_le(int64_t v) const;
};

struct TableStats {
  uint64_t row_count = 0;
  std::map<std::string, ColumnStats> columns;
};

struct SchemaStats {
  std::map<std::string, TableStats> tables;
  /// Average child rows per parent key, keyed by child column "t.c".
  std::map<std::string, double> fk_fanout;

  uint64_t table_rows(std::string_view table) const;
  const ColumnStats& column(const ColumnRef& ref) const;
  double fanout(const ForeignKey& fk) const;
};

inline constexpr uint64_t kDefaultHistogramBuckets = 16;

TableStats compute_stats(const Relation& rel,
                         uint64_t buckets = kDefaultHistogramBuckets);
SchemaStats compute_schema_stats(const Schema& schema,
                                 const std::vector<Relation>& relations,
                                 uint64_t buckets = kDefaultHistogramBuckets);

// ---------------------------------------------------------------------------
// Synthetic data generation
// ---------------------------------------------------------------------------

enum class FkTopology { Star, Snowflake, Chain };

const char* to_string(FkTopology t);
FkTopology fk_topology_from_string(std::string_view s);

/// Everything the generator needs; identical (config, seed) pairs yield
/// byte-identical datasets.
struct GeneratorConfig {
  std::string table_prefix = "t";
  uint32_t table_count = 3;  // 2..8
  uint64_t rows_min = 100;   // 10..100000 per table
  uint64_t rows_max = 1000;
  FkTopology topology = FkTopology::Chain;
  /// When non-empty, explicit (child table index, parent table index) edges
  /// replace the named topology.
  std::vector<std::pair<uint32_t, uint32_t>> custom_fks;

  uint32_t payload_min = 1;  // non-key columns per table
  uint32_t payload_max = 3;
  double zipf_share = 0.25;
  double zipf_s = 1.2;
  double correlated_share = 0.15;
  double correlated_noise = 0.15;
  double categorical_share = 0.3;
  uint64_t domain_width_min = 8;
  uint64_t domain_width_max = 512;
  double fk_zipf_share = 0.3;  // fraction of FK columns with skewed fanout
  double fk_zipf_s = 1.1;

  void validate() const;
};

struct Dataset {
  Schema schema;
  std::vector<Relation> relations;  // same order as schema.tables
};

Dataset gen_synthetic(const GeneratorConfig& config, uint64_t seed);

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// CSV: UTF-8, header row of column names, integer cells, LF line endings.
Relation load_csv(const std::string& path, const TableDef& def);
void save_csv(const Relation& rel, const std::string& path);

/// Schema JSON: {tables: [{name, columns: [{name, kind, lo, hi}], pk}],
///               fks: [{child: "t.c", parent: "t.c"}]}.
Schema load_schema_json(const std::string& path);
void save_schema_json(const Schema& schema, const std::string& path);

/// Stats JSON dump (diagnostic artifact).
void save_stats_json(const SchemaStats& stats, const std::string& path);

}  // namespace cardmix
