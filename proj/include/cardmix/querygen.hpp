#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cardmix/relstore.hpp"

namespace cardmix {

enum class FilterOp { EQ, LT, GT, LE, GE };
inline constexpr size_t kFilterOpCount = 5;

const char* to_sql(FilterOp op);

struct FilterPred {
  ColumnRef column;
  FilterOp op = FilterOp::EQ;
  int64_t value = 0;

  auto operator<=>(const FilterPred&) const = default;
};

/// PK-FK equijoin, stored in declared FK orientation (child = parent).
struct JoinPred {
  ColumnRef child;
  ColumnRef parent;

  auto operator<=>(const JoinPred&) const = default;
};

/// Conjunctive select-project-join count query: tables sorted and unique,
/// joins sorted, filters in declaration order.
struct SpjQuery {
  std::vector<std::string> tables;
  std::vector<JoinPred> joins;
  std::vector<FilterPred> filters;

  bool operator==(const SpjQuery&) const = default;

  bool has_table(std::string_view name) const;
  /// Sorts tables and joins into canonical order.
  void normalize();
  /// Table/column membership, FK matching, connectivity of (tables, joins).
  void validate(const Schema& schema) const;
  /// Connectivity of the join graph alone (no schema needed).
  bool connected() const;
};

struct WorkloadConfig {
  uint32_t max_tables = 4;
  uint32_t max_filters = 3;
  /// Weights for EQ, LT, GT, LE, GE; normalized internally.
  std::array<double, kFilterOpCount> op_mix = {0.30, 0.175, 0.175, 0.175, 0.175};

  void validate() const;
};

std::vector<SpjQuery> gen_workload(const Schema& schema, const SchemaStats& stats,
                                   size_t n, const WorkloadConfig& cfg,
                                   uint64_t seed);

/// Canonical rendering: sorted tables, sorted joins (child = parent form),
/// then filters in declaration order; no WHERE when both are empty.
std::string to_sql(const SpjQuery& q);

/// Accepts any grammar-conformant SQL: SELECT COUNT(*) FROM t (, t)*
/// (WHERE conj (AND conj)*)? with conj either "t.c = t.c" or "t.c op INT".
/// Keywords are case-insensitive. Joins are matched to declared FKs
/// regardless of written operand order.
SpjQuery parse_sql(std::string_view text, const Schema& schema);

// ---------------------------------------------------------------------------
// Labeled workloads (labels produced by the oracle module)
// ---------------------------------------------------------------------------

struct LabeledExample {
  SpjQuery query;
  uint64_t cardinality = 0;
};

struct WorkloadGroup {
  std::string group_name;
  std::string schema_ref;
  std::vector<LabeledExample> examples;
};

/// JSON Lines entry: {"group": str, "sql": str, "card": int}. "card" is
/// omitted for unlabeled workloads.
struct WorkloadFileEntry {
  std::string group;
  std::string sql;
  std::optional<uint64_t> card;
};

std::vector<WorkloadFileEntry> read_workload_jsonl(const std::string& path);
void write_workload_jsonl(const std::vector<WorkloadFileEntry>& entries,
                          const std::string& path);

}  // namespace cardmix
