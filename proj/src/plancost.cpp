#include "cardmix/plancost.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace cardmix {

CardinalitySet::CardinalitySet(std::vector<std::string> sorted_tables)
    : tables(std::move(sorted_tables)) {
  if (tables.size() > kMaxPlanTables) {
    throw DataError("capacity: cardinality sets support at most " +
                    std::to_string(kMaxPlanTables) + " tables");
  }
  if (!std::is_sorted(tables.begin(), tables.end())) {
    throw ContractViolation("CardinalitySet tables must be sorted");
  }
  values.assign(size_t{1} << tables.size(), std::numeric_limits<double>::quiet_NaN());
}

bool CardinalitySet::contains(uint32_t mask) const {
  return mask < values.size() && !std::isnan(values[mask]);
}

double CardinalitySet::at(uint32_t mask) const {
  if (!contains(mask)) {
    throw ContractViolation("incomplete cardinality set: missing subset " +
                            key_name(mask));
  }
  return values[mask];
}

void CardinalitySet::set(uint32_t mask, double value) {
  if (mask == 0 || mask >= values.size()) {
    throw ContractViolation("cardinality subset mask out of range");
  }
  if (value < 0.0 || !std::isfinite(value)) {
    throw ContractViolation("cardinalities must be finite and >= 0");
  }
  values[mask] = value;
}

uint32_t CardinalitySet::mask_of(const std::vector<std::string>& subset) const {
  uint32_t mask = 0;
  for (const auto& t : subset) {
    const auto it = std::lower_bound(tables.begin(), tables.end(), t);
    if (it == tables.end() || *it != t) {
      throw ContractViolation("table " + t + " not in cardinality set");
    }
    mask |= 1u << (it - tables.begin());
  }
  return mask;
}

std::string CardinalitySet::key_name(uint32_t mask) const {
  std::string key;
  for (size_t i = 0; i < tables.size(); ++i) {
    if (mask & (1u << i)) {
      if (!key.empty()) key += ',';
      key += tables[i];
    }
  }
  return key;
}

void CostParams::validate() const {
  for (double v : {scan, build, probe, out}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError("cost parameters must be positive");
    }
  }
}

// ---------------------------------------------------------------------------
// Connectivity over the query join graph
// ---------------------------------------------------------------------------

namespace {

/// adjacency[i] = bitmask of tables joined to table i.
std::vector<uint32_t> join_adjacency(const SpjQuery& q) {
  std::vector<uint32_t> adj(q.tables.size(), 0);
  auto index_of = [&](const std::string& t) {
    const auto it = std::lower_bound(q.tables.begin(), q.tables.end(), t);
    if (it == q.tables.end() || *it != t) {
      throw ContractViolation("join endpoint not among query tables: " + t);
    }
    return static_cast<size_t>(it - q.tables.begin());
  };
  for (const auto& j : q.joins) {
    const size_t a = index_of(j.child.table);
    const size_t b = index_of(j.parent.table);
    adj[a] |= 1u << b;
    adj[b] |= 1u << a;
  }
  return adj;
}

bool mask_connected(uint32_t mask, const std::vector<uint32_t>& adj) {
  if (mask == 0) return false;
  const uint32_t start = mask & (~mask + 1);  // lowest set bit
  uint32_t reached = start;
  uint32_t frontier = start;
  while (frontier != 0) {
    uint32_t next = 0;
    uint32_t f = frontier;
    while (f != 0) {
      const int i = std::countr_zero(f);
      f &= f - 1;
      next |= adj[static_cast<size_t>(i)] & mask & ~reached;
    }
    reached |= next;
    frontier = next;
  }
  return reached == mask;
}

bool masks_linked(uint32_t a, uint32_t b, const std::vector<uint32_t>& adj) {
  uint32_t m = a;
  while (m != 0) {
    const int i = std::countr_zero(m);
    m &= m - 1;
    if (adj[static_cast<size_t>(i)] & b) return true;
  }
  return false;
}

}  // namespace

std::vector<uint32_t> enumerate_connected_subsets(const SpjQuery& q) {
  if (q.tables.empty()) throw DataError("query has no tables");
  if (q.tables.size() > kMaxPlanTables) {
    throw DataError("capacity: at most " + std::to_string(kMaxPlanTables) +
                    " tables per query, got " + std::to_string(q.tables.size()));
  }
  const auto adj = join_adjacency(q);
  const uint32_t full = static_cast<uint32_t>((1u << q.tables.size()) - 1);
  std::vector<uint32_t> subsets;
  for (uint32_t mask = 1; mask <= full; ++mask) {
    if (mask_connected(mask, adj)) subsets.push_back(mask);
  }
  // Ascending (size, canonical key). The canonical key is the comma-joined
  // sorted table tuple, which is not mask order in general.
  auto key = [&](uint32_t mask) {
    std::string k;
    for (size_t i = 0; i < q.tables.size(); ++i) {
      if (mask & (1u << i)) {
        if (!k.empty()) k += ',';
        k += q.tables[i];
      }
    }
    return k;
  };
  std::sort(subsets.begin(), subsets.end(), [&](uint32_t a, uint32_t b) {
    const int pa = std::popcount(a), pb = std::popcount(b);
    if (pa != pb) return pa < pb;
    return key(a) < key(b);
  });
  return subsets;
}

// ---------------------------------------------------------------------------
// Plan tree
// ---------------------------------------------------------------------------

namespace {

void serialize_node(const PlanTree& plan, int32_t id, std::string& out) {
  const auto& nd = plan.node(id);
  if (nd.left < 0) {
    out += plan.tables[static_cast<size_t>(std::countr_zero(nd.subset))];
    return;
  }
  out += '(';
  serialize_node(plan, nd.left, out);
  out += ' ';
  serialize_node(plan, nd.right, out);
  out += ')';
}

}  // namespace

std::string PlanTree::serialize() const {
  if (root < 0) return "";
  std::string out;
  serialize_node(*this, root, out);
  return out;
}

void PlanTree::validate(const SpjQuery& q) const {
  if (root < 0) throw ContractViolation("empty plan");
  if (tables != q.tables) throw ContractViolation("plan tables do not match query");
  const auto adj = join_adjacency(q);
  uint32_t leaves_seen = 0;
  auto walk = [&](auto&& self, int32_t id) -> uint32_t {
    const Node& nd = node(id);
    if (nd.left < 0) {
      if (std::popcount(nd.subset) != 1) {
        throw ContractViolation("leaf subset must have exactly one table");
      }
      if (leaves_seen & nd.subset) throw ContractViolation("duplicate leaf in plan");
      leaves_seen |= nd.subset;
      return nd.subset;
    }
    const uint32_t left = self(self, nd.left);
    const uint32_t right = self(self, nd.right);
    if (left & right) throw ContractViolation("plan children overlap");
    if ((left | right) != nd.subset) throw ContractViolation("plan subset mismatch");
    if (!mask_connected(left, adj) || !mask_connected(right, adj)) {
      throw ContractViolation("plan child subset is disconnected");
    }
    if (!masks_linked(left, right, adj)) {
      throw ContractViolation("plan joins unlinked subsets (cartesian product)");
    }
    return nd.subset;
  };
  const uint32_t covered = walk(walk, root);
  const uint32_t full = static_cast<uint32_t>((1u << q.tables.size()) - 1);
  if (covered != full) throw ContractViolation("plan does not cover all tables");
}

// ---------------------------------------------------------------------------
// DP planner and the cost recurrence
// ---------------------------------------------------------------------------

namespace {

double leaf_cost(uint32_t mask, const CardinalitySet& cards, const CostParams& cp,
                 const SchemaStats& stats, const std::vector<std::string>& tables) {
  const auto& name = tables[static_cast<size_t>(std::countr_zero(mask))];
  const double base = static_cast<double>(stats.table_rows(name));
  if (base < 1.0) {
    throw ContractViolation("base_rows >= 1 required for costing, table " + name);
  }
  return cp.scan * base + cp.out * cards.at(mask);
}

}  // namespace

PlanTree optimal_plan(const SpjQuery& q, const CardinalitySet& cards,
                      const CostParams& cp) {
  cp.validate();
  if (cards.tables != q.tables) {
    throw ContractViolation("cardinality set does not match query tables");
  }
  const auto adj = join_adjacency(q);
  const auto subsets = enumerate_connected_subsets(q);

  struct Entry {
    double cost = std::numeric_limits<double>::infinity();
    uint32_t left = 0;  // 0 marks a leaf
    bool known = false;
  };
  std::vector<Entry> dp(cards.values.size());

  for (uint32_t mask : subsets) {
    Entry best;
    if (std::popcount(mask) == 1) {
      best.cost = 0.0;  // leaf scan costs are added by ppc at the leaves
      best.known = true;
      dp[mask] = best;
      continue;
    }
    const double out_term = cp.out * cards.at(mask);
    // Enumerate proper submask splits (left, right = mask ^ left).
    for (uint32_t left = (mask - 1) & mask; left != 0; left = (left - 1) & mask) {
      const uint32_t right = mask ^ left;
      if (!dp[left].known || !dp[right].known) continue;
      if (!masks_linked(left, right, adj)) continue;
      const double cost = dp[left].cost + dp[right].cost + cp.build * cards.at(right) +
                          cp.probe * cards.at(left) + out_term;
      if (cost < best.cost || (cost == best.cost && left < best.left)) {
        best.cost = cost;
        best.left = left;
        best.known = true;
      }
    }
    if (!best.known) {
      throw ContractViolation("no valid split for subset " + cards.key_name(mask));
    }
    dp[mask] = best;
  }

  // dp costs exclude leaf scan terms; they are order-independent constants.
  PlanTree plan;
  plan.tables = q.tables;
  auto build = [&](auto&& self, uint32_t mask) -> int32_t {
    PlanTree::Node nd;
    nd.subset = mask;
    if (std::popcount(mask) > 1) {
      const uint32_t left = dp[mask].left;
      nd.left = self(self, left);
      nd.right = self(self, mask ^ left);
    }
    plan.nodes.push_back(nd);
    return static_cast<int32_t>(plan.nodes.size() - 1);
  };
  const uint32_t full = static_cast<uint32_t>((1u << q.tables.size()) - 1);
  if (!dp[full].known) {
    throw ContractViolation("query join graph is disconnected; no plan covers it");
  }
  plan.root = build(build, full);
  plan.validate(q);
  return plan;
}

double ppc(const PlanTree& plan, const CardinalitySet& cards, const CostParams& cp,
           const SchemaStats& stats) {
  cp.validate();
  if (plan.root < 0) throw ContractViolation("empty plan");
  auto cost = [&](auto&& self, int32_t id) -> double {
    const auto& nd = plan.node(id);
    if (nd.left < 0) return leaf_cost(nd.subset, cards, cp, stats, plan.tables);
    const auto& l = plan.node(nd.left);
    const auto& r = plan.node(nd.right);
    return self(self, nd.left) + self(self, nd.right) + cp.build * cards.at(r.subset) +
           cp.probe * cards.at(l.subset) + cp.out * cards.at(nd.subset);
  };
  return cost(cost, plan.root);
}

double p_error(const SpjQuery& q, const CardinalitySet& estimated,
               const CardinalitySet& truth, const CostParams& cp,
               const SchemaStats& stats) {
  const PlanTree est_plan = optimal_plan(q, estimated, cp);
  const PlanTree true_plan = optimal_plan(q, truth, cp);
  const double est_cost = ppc(est_plan, truth, cp, stats);
  const double true_cost = ppc(true_plan, truth, cp, stats);
  if (!(true_cost > 0.0)) {
    throw ContractViolation("PPC of the true-cardinality plan must be positive");
  }
  return est_cost / true_cost;
}

}  // namespace cardmix
