#include "cardmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cardmix {

double q_error(double est, double truth) {
  if (!(truth > 0.0)) {
    throw ContractViolation("q_error: true cardinality must be positive "
                            "(zero-cardinality queries are excluded upstream)");
  }
  if (!(est > 0.0)) throw ContractViolation("q_error: estimate must be positive");
  return std::max(est / truth, truth / est);
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ContractViolation("percentile of an empty list");
  if (!(p > 0.0) || p > 100.0) throw ContractViolation("percentile p must be in (0, 100]");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  const size_t rank = static_cast<size_t>(
      std::ceil(p / 100.0 * static_cast<double>(n)));
  return values[std::max<size_t>(rank, 1) - 1];
}

PercentileRow percentile_row(const std::vector<double>& values) {
  PercentileRow row;
  row.p50 = percentile(values, 50);
  row.p80 = percentile(values, 80);
  row.p90 = percentile(values, 90);
  row.p95 = percentile(values, 95);
  row.p99 = percentile(values, 99);
  return row;
}

WorkloadEval eval_workload(const MlpParams& model,
                           const std::vector<Relation>& relations,
                           const WorkloadGroup& group, const SchemaStats& stats,
                           const CostParams& cp) {
  WorkloadEval eval;
  eval.workload = group.group_name;
  for (size_t qi = 0; qi < group.examples.size(); ++qi) {
    const auto& ex = group.examples[qi];
    try {
      if (ex.cardinality == 0) {
        ++eval.excluded_zero_card;
        continue;
      }
      eval.q_errors.push_back(q_error(predict_card(model, ex.query, stats),
                                      static_cast<double>(ex.cardinality)));

      // C_T exactly; C_E from the model under evaluation, per subquery.
      const CardinalitySet truth = subquery_cards(relations, ex.query);
      CardinalitySet est(ex.query.tables);
      for (uint32_t mask : enumerate_connected_subsets(ex.query)) {
        SpjQuery sub;
        for (size_t i = 0; i < ex.query.tables.size(); ++i) {
          if (mask & (1u << i)) sub.tables.push_back(ex.query.tables[i]);
        }
        for (const auto& j : ex.query.joins) {
          if (sub.has_table(j.child.table) && sub.has_table(j.parent.table)) {
            sub.joins.push_back(j);
          }
        }
        for (const auto& f : ex.query.filters) {
          if (sub.has_table(f.column.table)) sub.filters.push_back(f);
        }
        est.set(mask, predict_card(model, sub, stats));
      }
      eval.p_errors.push_back(p_error(ex.query, est, truth, cp, stats));
    } catch (const std::exception& e) {
      throw DataError("workload " + group.group_name + ", query #" +
                      std::to_string(qi) + ": " + e.what());
    }
  }
  return eval;
}

void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "workload,metric,p50,p80,p90,p95,p99,n,excluded_zero_card,train_minutes\n";
  out.precision(6);
  out << std::fixed;
  for (const auto& r : rows) {
    out << r.workload << ',' << r.metric << ',' << r.pct.p50 << ',' << r.pct.p80
        << ',' << r.pct.p90 << ',' << r.pct.p95 << ',' << r.pct.p99 << ',' << r.n
        << ',' << r.excluded_zero_card << ',' << r.train_minutes << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace cardmix
