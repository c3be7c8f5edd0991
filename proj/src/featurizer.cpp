#include "cardmix/featurizer.hpp"

#include <algorithm>
#include <cmath>

namespace cardmix {

double filter_selectivity(const ColumnStats& stats, FilterOp op, int64_t value) {
  if (stats.row_count == 0) return 1.0;
  const double floor_sel = 1.0 / static_cast<double>(stats.row_count);
  double sel;
  switch (op) {
    case FilterOp::EQ:
      sel = (value >= stats.min && value <= stats.max)
                ? 1.0 / static_cast<double>(std::max<uint64_t>(stats.ndv, 1))
                : 0.0;
      break;
    case FilterOp::LE:
      sel = stats.cumulative_le(value);
      break;
    case FilterOp::LT:
      sel = stats.cumulative_le(value - 1);
      break;
    case FilterOp::GE:
      sel = 1.0 - stats.cumulative_le(value - 1);
      break;
    case FilterOp::GT:
      sel = 1.0 - stats.cumulative_le(value);
      break;
    default:
      throw ContractViolation("unknown FilterOp");
  }
  return std::clamp(sel, floor_sel, 1.0);
}

double avi_estimate(const SpjQuery& q, const SchemaStats& stats) {
  double estimate = 1.0;
  for (const auto& t : q.tables) {
    estimate *= static_cast<double>(stats.table_rows(t));
  }
  if (estimate == 0.0) return 0.0;
  for (const auto& f : q.filters) {
    estimate *= filter_selectivity(stats.column(f.column), f.op, f.value);
  }
  for (const auto& j : q.joins) {
    const ColumnStats& pk = stats.column(j.parent);
    estimate /= static_cast<double>(std::max<uint64_t>(pk.ndv, 1));
  }
  return estimate;
}

namespace {

struct Pooled {
  double min, mean, max;
};

Pooled pool(const std::vector<double>& values, double empty_value) {
  if (values.empty()) return {empty_value, empty_value, empty_value};
  double lo = values[0], hi = values[0], sum = 0.0;
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  return {lo, sum / static_cast<double>(values.size()), hi};
}

}  // namespace

FeatureVector encode(const SpjQuery& q, const SchemaStats& stats) {
  FeatureVector v{};

  v[0] = static_cast<double>(q.tables.size()) / 8.0;
  v[1] = static_cast<double>(q.joins.size()) / 8.0;
  v[2] = static_cast<double>(q.filters.size()) / 8.0;

  double row_product = 1.0;
  std::vector<double> log_rows;
  for (const auto& t : q.tables) {
    const double rows = static_cast<double>(stats.table_rows(t));
    row_product *= rows;
    log_rows.push_back(std::log1p(rows) / 64.0);
  }
  v[3] = std::log1p(row_product) / 64.0;
  v[4] = std::log1p(avi_estimate(q, stats)) / 64.0;

  size_t op_counts[kFilterOpCount] = {};
  std::vector<double> sels, log_ndvs;
  for (const auto& f : q.filters) {
    op_counts[static_cast<size_t>(f.op)]++;
    const ColumnStats& cs = stats.column(f.column);
    sels.push_back(filter_selectivity(cs, f.op, f.value));
    log_ndvs.push_back(std::log1p(static_cast<double>(cs.ndv)) / 32.0);
  }
  for (size_t i = 0; i < kFilterOpCount; ++i) {
    v[5 + i] = static_cast<double>(op_counts[i]) / 8.0;
  }

  const Pooled sel_pool = pool(sels, 1.0);
  v[10] = sel_pool.min;
  v[11] = sel_pool.mean;
  v[12] = sel_pool.max;

  const Pooled ndv_pool = pool(log_ndvs, 0.0);
  v[13] = ndv_pool.min;
  v[14] = ndv_pool.mean;
  v[15] = ndv_pool.max;

  const Pooled rows_pool = pool(log_rows, 0.0);
  v[16] = rows_pool.min;
  v[17] = rows_pool.mean;
  v[18] = rows_pool.max;

  std::vector<double> log_fanouts;
  for (const auto& j : q.joins) {
    log_fanouts.push_back(std::log1p(stats.fanout({j.child, j.parent})) / 32.0);
  }
  const Pooled fan_pool = pool(log_fanouts, 0.0);
  v[19] = fan_pool.min;
  v[20] = fan_pool.mean;
  v[21] = fan_pool.max;

  v[22] = q.filters.empty() ? 0.0
                            : static_cast<double>(op_counts[0]) /
                                  static_cast<double>(q.filters.size());
  v[23] = q.joins.empty() ? 0.0 : 1.0;
  // slots 24..31 reserved, always 0

  for (double x : v) {
    if (!std::isfinite(x)) throw ContractViolation("non-finite feature slot");
  }
  return v;
}

}  // namespace cardmix
