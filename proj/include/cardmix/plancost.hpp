#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cardmix/querygen.hpp"
#include "cardmix/relstore.hpp"

namespace cardmix {

inline constexpr size_t kMaxPlanTables = 8;

/// Cardinalities for every connected table subset of one query. Subsets are
/// bitmasks over the query's sorted table list; canonical keys are the
/// comma-joined sorted table names.
struct CardinalitySet {
  std::vector<std::string> tables;  // sorted; bit i = tables[i]
  std::vector<double> values;       // indexed by mask; NaN marks absent

  explicit CardinalitySet(std::vector<std::string> sorted_tables);
  CardinalitySet() = default;

  uint32_t full_mask() const {
    return static_cast<uint32_t>((1u << tables.size()) - 1);
  }
  bool contains(uint32_t mask) const;
  double at(uint32_t mask) const;  // throws on missing subset
  void set(uint32_t mask, double value);
  uint32_t mask_of(const std::vector<std::string>& subset) const;
  std::string key_name(uint32_t mask) const;
};

struct CostParams {
  double scan = 1.0;
  double build = 1.0;
  double probe = 1.0;
  double out = 1.0;

  void validate() const;
};

/// Binary join tree; children are stored in a flat arena. Leaves carry a
/// single-bit subset, internal nodes the union of their children.
struct PlanTree {
  struct Node {
    uint32_t subset = 0;
    int32_t left = -1;   // -1 for leaves
    int32_t right = -1;
  };
  std::vector<std::string> tables;  // bit order context
  std::vector<Node> nodes;
  int32_t root = -1;

  const Node& node(int32_t id) const { return nodes[static_cast<size_t>(id)]; }
  /// Canonical nested form, e.g. "((a b) c)".
  std::string serialize() const;
  /// Structural invariants against the query: distinct leaves, root covers
  /// all tables, children disjoint, connected, and FK-linked.
  void validate(const SpjQuery& q) const;
};

/// All non-empty connected subsets of q.tables with respect to q.joins,
/// ascending by (size, canonical key).
std::vector<uint32_t> enumerate_connected_subsets(const SpjQuery& q);

/// Dynamic programming over connected subsets; minimizes ppc under C.
/// Equal-cost ties pick the smaller left-child bitmask.
PlanTree optimal_plan(const SpjQuery& q, const CardinalitySet& cards,
                      const CostParams& cp);

/// Plan cost: Leaf(T) = scan * base_rows(T) + out * C[{T}];
/// Join(L, R) = ppc(L) + ppc(R) + build * C[R] + probe * C[L] + out * C[L+R].
double ppc(const PlanTree& plan, const CardinalitySet& cards, const CostParams& cp,
           const SchemaStats& stats);

/// PPC(P(C_E), C_T) / PPC(P(C_T), C_T); >= 1 whenever both sets are complete.
double p_error(const SpjQuery& q, const CardinalitySet& estimated,
               const CardinalitySet& truth, const CostParams& cp,
               const SchemaStats& stats);

}  // namespace cardmix
