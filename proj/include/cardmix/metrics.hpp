#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cardmix/estimator.hpp"
#include "cardmix/oracle.hpp"
#include "cardmix/plancost.hpp"

namespace cardmix {

/// max(est/truth, truth/est); both inputs must be positive.
double q_error(double est, double truth);

/// Nearest-rank percentile: the sorted value at 1-based index
/// ceil(p/100 * n). 0 < p <= 100, values non-empty.
double percentile(std::vector<double> values, double p);

struct PercentileRow {
  double p50 = 0, p80 = 0, p90 = 0, p95 = 0, p99 = 0;
};

PercentileRow percentile_row(const std::vector<double>& values);

/// Raw per-query metric values for one workload. Queries with true
/// cardinality 0 are excluded from both metrics and counted.
struct WorkloadEval {
  std::string workload;
  std::vector<double> q_errors;
  std::vector<double> p_errors;
  size_t excluded_zero_card = 0;
};

WorkloadEval eval_workload(const MlpParams& model,
                           const std::vector<Relation>& relations,
                           const WorkloadGroup& group, const SchemaStats& stats,
                           const CostParams& cp);

/// One CSV row of the report: workload, metric,
/// p50, p80, p90, p95, p99, n, excluded_zero_card, train_minutes.
struct ReportRow {
  std::string workload;
  std::string metric;
  PercentileRow pct;
  size_t n = 0;
  size_t excluded_zero_card = 0;
  double train_minutes = 0.0;
};

void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path);

}  // namespace cardmix
