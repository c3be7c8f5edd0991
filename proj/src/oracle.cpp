#include "cardmix/oracle.hpp"

#include <algorithm>
#include <unordered_map>

namespace cardmix {

namespace {

struct VecHash {
  size_t operator()(const std::vector<int64_t>& v) const {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (int64_t x : v) {
      h ^= static_cast<uint64_t>(x);
      h *= 0x100000001B3ULL;
      h ^= h >> 29;
    }
    return static_cast<size_t>(h);
  }
};

using GroupCounts = std::unordered_map<std::vector<int64_t>, uint64_t, VecHash>;

uint64_t checked_add(uint64_t a, uint64_t b) {
  uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw DataError("cardinality overflow");
  return r;
}

uint64_t checked_mul(uint64_t a, uint64_t b) {
  uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw DataError("cardinality overflow");
  return r;
}

bool filter_matches(FilterOp op, int64_t v, int64_t rhs) {
  switch (op) {
    case FilterOp::EQ: return v == rhs;
    case FilterOp::LT: return v < rhs;
    case FilterOp::GT: return v > rhs;
    case FilterOp::LE: return v <= rhs;
    case FilterOp::GE: return v >= rhs;
  }
  throw ContractViolation("unknown FilterOp");
}

const Relation& relation_for(const std::vector<Relation>& relations,
                             const std::string& table) {
  for (const auto& r : relations) {
    if (r.def.name == table) return r;
  }
  throw DataError("no relation loaded for table " + table);
}

}  // namespace

uint64_t true_cardinality(const std::vector<Relation>& relations, const SpjQuery& q) {
  if (q.tables.empty()) throw DataError("query has no tables");

  struct Base {
    const Relation* rel;
    std::vector<size_t> rows;  // row ids surviving the table's filters
  };
  std::unordered_map<std::string, Base> bases;
  for (const auto& t : q.tables) {
    const Relation& rel = relation_for(relations, t);
    Base base{&rel, {}};
    std::vector<const FilterPred*> filters;
    for (const auto& f : q.filters) {
      if (f.column.table == t) filters.push_back(&f);
    }
    for (size_t r = 0; r < rel.row_count(); ++r) {
      bool ok = true;
      for (const FilterPred* f : filters) {
        const size_t c = rel.def.column_index(f->column.column);
        if (!filter_matches(f->op, rel.at(r, c), f->value)) {
          ok = false;
          break;
        }
      }
      if (ok) base.rows.push_back(r);
    }
    bases.emplace(t, std::move(base));
  }

  // Left-deep order: ascending (filtered size, name), each joined table must
  // connect to the tables already bound.
  std::vector<std::string> remaining = q.tables;
  std::sort(remaining.begin(), remaining.end(),
            [&](const std::string& a, const std::string& b) {
              const size_t sa = bases.at(a).rows.size();
              const size_t sb = bases.at(b).rows.size();
              if (sa != sb) return sa < sb;
              return a < b;
            });

  auto joined = [&](const std::string& a, const std::string& b) {
    for (const auto& j : q.joins) {
      if ((j.child.table == a && j.parent.table == b) ||
          (j.child.table == b && j.parent.table == a)) {
        return true;
      }
    }
    return false;
  };

  std::vector<std::string> order;
  std::vector<std::string> bound;
  order.push_back(remaining.front());
  bound.push_back(remaining.front());
  remaining.erase(remaining.begin());
  while (!remaining.empty()) {
    bool advanced = false;
    for (size_t i = 0; i < remaining.size(); ++i) {
      const bool connected = std::any_of(bound.begin(), bound.end(),
                                         [&](const std::string& b) {
                                           return joined(remaining[i], b);
                                         });
      if (connected) {
        order.push_back(remaining[i]);
        bound.push_back(remaining[i]);
        remaining.erase(remaining.begin() + static_cast<ptrdiff_t>(i));
        advanced = true;
        break;
      }
    }
    if (!advanced) throw DataError("query join graph is disconnected");
  }

  // live key layout: columns of bound tables still needed by joins to
  // unbound tables, in a fixed (table, column) order.
  auto live_layout = [&](size_t bound_upto) {
    std::vector<ColumnRef> live;
    for (size_t bi = 0; bi < bound_upto; ++bi) {
      const std::string& t = order[bi];
      for (const auto& j : q.joins) {
        for (const ColumnRef* side : {&j.child, &j.parent}) {
          const ColumnRef& other = (side == &j.child) ? j.parent : j.child;
          if (side->table != t) continue;
          const bool other_unbound =
              std::find(order.begin(), order.begin() + static_cast<ptrdiff_t>(bound_upto),
                        other.table) == order.begin() + static_cast<ptrdiff_t>(bound_upto);
          if (other_unbound) live.push_back(*side);
        }
      }
    }
    std::sort(live.begin(), live.end());
    live.erase(std::unique(live.begin(), live.end()), live.end());
    return live;
  };

  // Seed with the first table, grouped by its live columns.
  GroupCounts state;
  {
    const Base& base = bases.at(order[0]);
    const auto live = live_layout(1);
    std::vector<size_t> cols;
    for (const auto& ref : live) cols.push_back(base.rel->def.column_index(ref.column));
    std::vector<int64_t> key(cols.size());
    for (size_t r : base.rows) {
      for (size_t i = 0; i < cols.size(); ++i) key[i] = base.rel->at(r, cols[i]);
      auto [it, fresh] = state.emplace(key, 0);
      it->second = checked_add(it->second, 1);
    }
  }

  auto prev_live = live_layout(1);
  for (size_t step = 1; step < order.size(); ++step) {
    const std::string& t = order[step];
    const Base& base = bases.at(t);
    const auto next_live = live_layout(step + 1);

    // Join predicates between t and already-bound tables, as column pairs
    // (bound-side key position, t-side column index).
    std::vector<std::pair<size_t, size_t>> links;
    for (const auto& j : q.joins) {
      const ColumnRef* t_side = nullptr;
      const ColumnRef* b_side = nullptr;
      if (j.child.table == t) {
        t_side = &j.child;
        b_side = &j.parent;
      } else if (j.parent.table == t) {
        t_side = &j.parent;
        b_side = &j.child;
      } else {
        continue;
      }
      const auto bound_it = std::find(prev_live.begin(), prev_live.end(), *b_side);
      if (bound_it == prev_live.end()) continue;  // join to a not-yet-bound table
      links.emplace_back(static_cast<size_t>(bound_it - prev_live.begin()),
                         base.rel->def.column_index(t_side->column));
    }
    if (links.empty()) throw DataError("query join graph is disconnected");

    // Positions in next_live fed from the previous key vs from t's columns.
    std::vector<std::pair<size_t, size_t>> carry;  // (next pos, prev pos)
    std::vector<std::pair<size_t, size_t>> fresh;  // (next pos, t column idx)
    for (size_t i = 0; i < next_live.size(); ++i) {
      const ColumnRef& ref = next_live[i];
      if (ref.table == t) {
        fresh.emplace_back(i, base.rel->def.column_index(ref.column));
      } else {
        const auto it = std::find(prev_live.begin(), prev_live.end(), ref);
        if (it == prev_live.end()) {
          throw ContractViolation("live column lost during join: " + ref.str());
        }
        carry.emplace_back(i, static_cast<size_t>(it - prev_live.begin()));
      }
    }

    // Group t's filtered rows by (join key, forwarded live columns).
    GroupCounts row_groups;
    {
      std::vector<int64_t> key(links.size() + fresh.size());
      for (size_t r : base.rows) {
        for (size_t i = 0; i < links.size(); ++i) {
          key[i] = base.rel->at(r, links[i].second);
        }
        for (size_t i = 0; i < fresh.size(); ++i) {
          key[links.size() + i] = base.rel->at(r, fresh[i].second);
        }
        auto [it, ins] = row_groups.emplace(key, 0);
        it->second = checked_add(it->second, 1);
      }
    }

    // Hash the bound state by its join-key projection, then probe.
    std::unordered_map<std::vector<int64_t>,
                       std::vector<std::pair<const std::vector<int64_t>*, uint64_t>>,
                       VecHash>
        by_join_key;
    for (const auto& [key, count] : state) {
      std::vector<int64_t> jk(links.size());
      for (size_t i = 0; i < links.size(); ++i) jk[i] = key[links[i].first];
      by_join_key[jk].emplace_back(&key, count);
    }

    GroupCounts next_state;
    std::vector<int64_t> out_key(next_live.size());
    for (const auto& [rk, rcount] : row_groups) {
      const std::vector<int64_t> jk(rk.begin(),
                                    rk.begin() + static_cast<ptrdiff_t>(links.size()));
      const auto hit = by_join_key.find(jk);
      if (hit == by_join_key.end()) continue;
      for (const auto& [prev_key, pcount] : hit->second) {
        for (const auto& [next_pos, prev_pos] : carry) {
          out_key[next_pos] = (*prev_key)[prev_pos];
        }
        for (size_t i = 0; i < fresh.size(); ++i) {
          out_key[fresh[i].first] = rk[links.size() + i];
        }
        auto [it, ins] = next_state.emplace(out_key, 0);
        it->second = checked_add(it->second, checked_mul(pcount, rcount));
      }
    }
    state = std::move(next_state);
    prev_live = next_live;
  }

  uint64_t total = 0;
  for (const auto& [key, count] : state) total = checked_add(total, count);
  return total;
}

WorkloadGroup label_workload(const std::vector<Relation>& relations,
                             std::span<const SpjQuery> queries,
                             const std::string& group_name,
                             const std::string& schema_ref) {
  WorkloadGroup group;
  group.group_name = group_name;
  group.schema_ref = schema_ref;
  group.examples.reserve(queries.size());
  for (size_t i = 0; i < queries.size(); ++i) {
    try {
      group.examples.push_back({queries[i], true_cardinality(relations, queries[i])});
    } catch (const std::exception& e) {
      throw DataError("query #" + std::to_string(i) + ": " + e.what());
    }
  }
  return group;
}

CardinalitySet subquery_cards(const std::vector<Relation>& relations,
                              const SpjQuery& q) {
  const auto subsets = enumerate_connected_subsets(q);  // enforces the table cap
  CardinalitySet cards(q.tables);
  for (uint32_t mask : subsets) {
    SpjQuery sub;
    for (size_t i = 0; i < q.tables.size(); ++i) {
      if (mask & (1u << i)) sub.tables.push_back(q.tables[i]);
    }
    for (const auto& j : q.joins) {
      if (sub.has_table(j.child.table) && sub.has_table(j.parent.table)) {
        sub.joins.push_back(j);
      }
    }
    for (const auto& f : q.filters) {
      if (sub.has_table(f.column.table)) sub.filters.push_back(f);
    }
    cards.set(mask, static_cast<double>(true_cardinality(relations, sub)));
  }
  return cards;
}

}  // namespace cardmix
