#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cardmix/plancost.hpp"
#include "cardmix/querygen.hpp"
#include "cardmix/relstore.hpp"

namespace cardmix {

/// Exact COUNT(*) of a conjunctive SPJ query: base tables are filtered,
/// then joined left-deep with hash tables in ascending filtered-size order.
/// The count is independent of the join order.
uint64_t true_cardinality(const std::vector<Relation>& relations, const SpjQuery& q);

WorkloadGroup label_workload(const std::vector<Relation>& relations,
                             std::span<const SpjQuery> queries,
                             const std::string& group_name,
                             const std::string& schema_ref);

/// Exact cardinality of every connected non-empty subset of q.tables,
/// with joins and filters restricted to the subset.
CardinalitySet subquery_cards(const std::vector<Relation>& relations,
                              const SpjQuery& q);

}  // namespace cardmix
