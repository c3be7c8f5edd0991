#include "cardmix/querygen.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cardmix/rng.hpp"

namespace cardmix {

using nlohmann::json;

const char* to_sql(FilterOp op) {
  switch (op) {
    case FilterOp::EQ: return "=";
    case FilterOp::LT: return "<";
    case FilterOp::GT: return ">";
    case FilterOp::LE: return "<=";
    case FilterOp::GE: return ">=";
  }
  throw ContractViolation("unknown FilterOp");
}

bool SpjQuery::has_table(std::string_view name) const {
  return std::binary_search(tables.begin(), tables.end(), name);
}

void SpjQuery::normalize() {
  std::sort(tables.begin(), tables.end());
  tables.erase(std::unique(tables.begin(), tables.end()), tables.end());
  std::sort(joins.begin(), joins.end());
  joins.erase(std::unique(joins.begin(), joins.end()), joins.end());
}

bool SpjQuery::connected() const {
  if (tables.empty()) return false;
  std::map<std::string_view, size_t> index;
  for (size_t i = 0; i < tables.size(); ++i) index[tables[i]] = i;
  std::vector<std::vector<size_t>> adj(tables.size());
  for (const auto& j : joins) {
    auto a = index.find(j.child.table);
    auto b = index.find(j.parent.table);
    if (a == index.end() || b == index.end()) return false;
    adj[a->second].push_back(b->second);
    adj[b->second].push_back(a->second);
  }
  std::vector<bool> seen(tables.size(), false);
  std::vector<size_t> stack{0};
  seen[0] = true;
  size_t visited = 1;
  while (!stack.empty()) {
    const size_t u = stack.back();
    stack.pop_back();
    for (size_t v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++visited;
        stack.push_back(v);
      }
    }
  }
  return visited == tables.size();
}

void SpjQuery::validate(const Schema& schema) const {
  if (tables.empty()) throw DataError("query with no tables");
  if (!std::is_sorted(tables.begin(), tables.end()) ||
      std::adjacent_find(tables.begin(), tables.end()) != tables.end()) {
    throw ContractViolation("query tables not in canonical sorted order");
  }
  if (!std::is_sorted(joins.begin(), joins.end())) {
    throw ContractViolation("query joins not in canonical sorted order");
  }
  for (const auto& t : tables) schema.table(t);
  for (const auto& j : joins) {
    if (!has_table(j.child.table) || !has_table(j.parent.table)) {
      throw DataError("join endpoint outside the query tables: " + j.child.str() +
                      " = " + j.parent.str());
    }
    auto fk = schema.find_fk(j.child, j.parent);
    if (!fk || fk->child != j.child || fk->parent != j.parent) {
      throw DataError("join is not a declared FK: " + j.child.str() + " = " +
                      j.parent.str());
    }
  }
  for (const auto& f : filters) {
    if (!has_table(f.column.table)) {
      throw DataError("filter column outside the query tables: " + f.column.str());
    }
    const TableDef& def = schema.table(f.column.table);
    const ColumnDef& col = def.columns[def.column_index(f.column.column)];
    if (f.value < col.lo || f.value > col.hi) {
      throw DataError("filter value " + std::to_string(f.value) +
                      " outside declared domain of " + f.column.str());
    }
  }
  if (!connected()) throw DataError("query join graph is disconnected");
}

void WorkloadConfig::validate() const {
  if (max_tables < 1 || max_tables > 8) throw ConfigError("max_tables must be in [1, 8]");
  double total = 0.0;
  for (double w : op_mix) {
    if (w < 0.0) throw ConfigError("op_mix weights must be >= 0");
    total += w;
  }
  if (total <= 0.0) throw ConfigError("op_mix weights must not all be 0");
}

// ---------------------------------------------------------------------------
// Workload generation
// ---------------------------------------------------------------------------

namespace {

std::vector<size_t> component_sizes(size_t n,
                                    const std::vector<std::vector<size_t>>& adj,
                                    std::vector<size_t>& comp_of) {
  comp_of.assign(n, SIZE_MAX);
  std::vector<size_t> sizes;
  for (size_t s = 0; s < n; ++s) {
    if (comp_of[s] != SIZE_MAX) continue;
    const size_t c = sizes.size();
    size_t count = 0;
    std::vector<size_t> stack{s};
    comp_of[s] = c;
    while (!stack.empty()) {
      const size_t u = stack.back();
      stack.pop_back();
      ++count;
      for (size_t v : adj[u]) {
        if (comp_of[v] == SIZE_MAX) {
          comp_of[v] = c;
          stack.push_back(v);
        }
      }
    }
    sizes.push_back(count);
  }
  return sizes;
}

}  // namespace

std::vector<SpjQuery> gen_workload(const Schema& schema, const SchemaStats& stats,
                                   size_t n, const WorkloadConfig& cfg,
                                   uint64_t seed) {
  cfg.validate();
  if (n < 1) throw ConfigError("workload size must be >= 1");
  if (cfg.max_tables > schema.tables.size()) {
    throw ConfigError("max_tables exceeds the schema table count");
  }

  const size_t nt = schema.tables.size();
  std::vector<std::vector<size_t>> adj(nt);
  for (const auto& fk : schema.fks) {
    const size_t a = schema.table_index(fk.child.table);
    const size_t b = schema.table_index(fk.parent.table);
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<size_t> comp_of;
  const auto comp_sizes = component_sizes(nt, adj, comp_of);
  const size_t largest = *std::max_element(comp_sizes.begin(), comp_sizes.end());
  if (cfg.max_tables > largest) {
    throw ConfigError("join graph is disconnected: max_tables " +
                      std::to_string(cfg.max_tables) +
                      " exceeds the largest connected component (" +
                      std::to_string(largest) + ")");
  }

  std::vector<double> op_weights(cfg.op_mix.begin(), cfg.op_mix.end());
  const Rng root(seed);
  std::vector<SpjQuery> out;
  out.reserve(n);

  for (size_t qi = 0; qi < n; ++qi) {
    Rng rng = root.fork(qi);
    const size_t size =
        static_cast<size_t>(rng.uniform_int(1, static_cast<int64_t>(cfg.max_tables)));

    // Start from a uniformly chosen table in a component large enough.
    std::vector<size_t> starts;
    for (size_t t = 0; t < nt; ++t) {
      if (comp_sizes[comp_of[t]] >= size) starts.push_back(t);
    }
    std::vector<size_t> members{starts[rng.below(starts.size())]};
    std::vector<bool> in_set(nt, false);
    in_set[members[0]] = true;
    while (members.size() < size) {
      // Uniform over frontier edges (u in set, v outside).
      std::vector<size_t> frontier;
      for (size_t u : members) {
        for (size_t v : adj[u]) {
          if (!in_set[v]) frontier.push_back(v);
        }
      }
      const size_t v = frontier[rng.below(frontier.size())];
      in_set[v] = true;
      members.push_back(v);
    }

    SpjQuery q;
    for (size_t t : members) q.tables.push_back(schema.tables[t].name);
    for (const auto& fk : schema.fks) {
      if (in_set[schema.table_index(fk.child.table)] &&
          in_set[schema.table_index(fk.parent.table)]) {
        q.joins.push_back({fk.child, fk.parent});
      }
    }
    q.normalize();

    const size_t nfilters =
        static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(cfg.max_filters)));
    for (size_t f = 0; f < nfilters; ++f) {
      const std::string& tname = q.tables[rng.below(q.tables.size())];
      const TableDef& def = schema.table(tname);
      const ColumnDef& col = def.columns[rng.below(def.columns.size())];
      const ColumnStats& cs = stats.column({tname, col.name});
      const auto op = static_cast<FilterOp>(rng.weighted_choice(op_weights));
      // Values from the observed range; declared domain when no rows exist.
      const int64_t lo = cs.row_count > 0 ? cs.min : col.lo;
      const int64_t hi = cs.row_count > 0 ? cs.max : col.hi;
      q.filters.push_back({{tname, col.name}, op, rng.uniform_int(lo, hi)});
    }
    q.validate(schema);
    out.push_back(std::move(q));
  }
  return out;
}

// ---------------------------------------------------------------------------
// SQL emission
// ---------------------------------------------------------------------------

std::string to_sql(const SpjQuery& q) {
  std::string sql = "SELECT COUNT(*) FROM ";
  for (size_t i = 0; i < q.tables.size(); ++i) {
    if (i) sql += ", ";
    sql += q.tables[i];
  }
  if (q.joins.empty() && q.filters.empty()) return sql;
  sql += " WHERE ";
  bool first = true;
  for (const auto& j : q.joins) {
    if (!first) sql += " AND ";
    first = false;
    sql += j.child.str() + " = " + j.parent.str();
  }
  for (const auto& f : q.filters) {
    if (!first) sql += " AND ";
    first = false;
    sql += f.column.str() + " " + to_sql(f.op) + " " + std::to_string(f.value);
  }
  return sql;
}

// ---------------------------------------------------------------------------
// SQL parsing
// ---------------------------------------------------------------------------

namespace {

enum class TokKind { Ident, Int, Comma, Dot, LParen, RParen, Star, Op, End };

struct Token {
  TokKind kind;
  std::string text;  // identifier (as written), integer literal, or operator
  size_t pos = 0;    // character offset into the input
};

[[noreturn]] void parse_fail(size_t pos, const std::string& msg) {
  throw DataError("parse error at offset " + std::to_string(pos) + ": " + msg);
}

[[noreturn]] void resolve_fail(size_t pos, const std::string& msg) {
  throw DataError("resolution error at offset " + std::to_string(pos) + ": " + msg);
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> toks;
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) ++i;
      toks.push_back({TokKind::Ident, std::string(text.substr(start, i - start)), start});
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '-' && i + 1 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      ++i;
      while (i < n && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      toks.push_back({TokKind::Int, std::string(text.substr(start, i - start)), start});
    } else if (c == ',') {
      toks.push_back({TokKind::Comma, ",", start});
      ++i;
    } else if (c == '.') {
      toks.push_back({TokKind::Dot, ".", start});
      ++i;
    } else if (c == '(') {
      toks.push_back({TokKind::LParen, "(", start});
      ++i;
    } else if (c == ')') {
      toks.push_back({TokKind::RParen, ")", start});
      ++i;
    } else if (c == '*') {
      toks.push_back({TokKind::Star, "*", start});
      ++i;
    } else if (c == '<' || c == '>') {
      if (i + 1 < n && text[i + 1] == '=') {
        toks.push_back({TokKind::Op, std::string(text.substr(start, 2)), start});
        i += 2;
      } else {
        toks.push_back({TokKind::Op, std::string(1, c), start});
        ++i;
      }
    } else if (c == '=') {
      toks.push_back({TokKind::Op, "=", start});
      ++i;
    } else {
      parse_fail(start, std::string("unexpected character '") + c + "'");
    }
  }
  toks.push_back({TokKind::End, "", n});
  return toks;
}

std::string upper(std::string_view s) {
  std::string u(s);
  for (auto& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return u;
}

class Parser {
 public:
  Parser(std::string_view text, const Schema& schema)
      : schema_(schema), toks_(tokenize(text)) {}

  SpjQuery run() {
    expect_keyword("SELECT");
    expect_keyword("COUNT");
    expect(TokKind::LParen, "(");
    expect(TokKind::Star, "*");
    expect(TokKind::RParen, ")");
    expect_keyword("FROM");

    SpjQuery q;
    std::set<std::string> seen;
    while (true) {
      const Token& t = expect(TokKind::Ident, "table name");
      if (!schema_.has_table(t.text)) resolve_fail(t.pos, "unknown table '" + t.text + "'");
      if (!seen.insert(t.text).second) {
        resolve_fail(t.pos, "duplicate table '" + t.text + "' in FROM");
      }
      q.tables.push_back(t.text);
      if (peek().kind == TokKind::Comma) {
        advance();
        continue;
      }
      break;
    }
    std::sort(q.tables.begin(), q.tables.end());

    if (peek().kind == TokKind::Ident && upper(peek().text) == "WHERE") {
      advance();
      while (true) {
        parse_conjunct(q);
        if (peek().kind == TokKind::Ident && upper(peek().text) == "AND") {
          advance();
          continue;
        }
        break;
      }
    }
    if (peek().kind != TokKind::End) {
      parse_fail(peek().pos, "unexpected trailing input '" + peek().text + "'");
    }

    q.normalize();
    if (!q.connected()) {
      throw DataError("connectivity error: query tables do not form a connected join graph");
    }
    q.validate(schema_);
    return q;
  }

 private:
  const Token& peek() const { return toks_[cursor_]; }
  const Token& advance() { return toks_[cursor_++]; }

  const Token& expect(TokKind kind, const std::string& what) {
    if (peek().kind != kind) {
      parse_fail(peek().pos, "expected " + what + ", got '" + peek().text + "'");
    }
    return advance();
  }

  void expect_keyword(const std::string& kw) {
    if (peek().kind != TokKind::Ident || upper(peek().text) != kw) {
      parse_fail(peek().pos, "expected " + kw + ", got '" + peek().text + "'");
    }
    advance();
  }

  /// Resolves "t.c"; the table must be listed in FROM.
  std::pair<ColumnRef, size_t> parse_column(const SpjQuery& q) {
    const Token& t = expect(TokKind::Ident, "column reference");
    expect(TokKind::Dot, ".");
    const Token& col = expect(TokKind::Ident, "column name");
    if (!schema_.has_table(t.text)) resolve_fail(t.pos, "unknown table '" + t.text + "'");
    const TableDef& def = schema_.table(t.text);
    if (!def.find_column(col.text)) {
      resolve_fail(col.pos, "unknown column '" + t.text + "." + col.text + "'");
    }
    if (std::find(q.tables.begin(), q.tables.end(), t.text) == q.tables.end()) {
      resolve_fail(t.pos, "table '" + t.text + "' not listed in FROM");
    }
    return {ColumnRef{t.text, col.text}, t.pos};
  }

  void parse_conjunct(SpjQuery& q) {
    auto [lhs, lhs_pos] = parse_column(q);
    const Token& op_tok = expect(TokKind::Op, "comparison operator");
    if (peek().kind == TokKind::Ident) {
      if (op_tok.text != "=") {
        parse_fail(op_tok.pos, "only equality joins between columns are supported");
      }
      auto [rhs, rhs_pos] = parse_column(q);
      auto fk = schema_.find_fk(lhs, rhs);
      if (!fk) {
        throw DataError("unsupported join at offset " + std::to_string(lhs_pos) +
                        ": " + lhs.str() + " = " + rhs.str() +
                        " is not a declared PK-FK edge");
      }
      q.joins.push_back({fk->child, fk->parent});
      return;
    }
    const Token& val = expect(TokKind::Int, "integer literal");
    FilterOp op;
    if (op_tok.text == "=") op = FilterOp::EQ;
    else if (op_tok.text == "<") op = FilterOp::LT;
    else if (op_tok.text == ">") op = FilterOp::GT;
    else if (op_tok.text == "<=") op = FilterOp::LE;
    else op = FilterOp::GE;
    int64_t v = 0;
    try {
      v = std::stoll(val.text);
    } catch (const std::exception&) {
      parse_fail(val.pos, "integer literal out of range: " + val.text);
    }
    const TableDef& def = schema_.table(lhs.table);
    const ColumnDef& col = def.columns[def.column_index(lhs.column)];
    if (v < col.lo || v > col.hi) {
      resolve_fail(val.pos, "value " + val.text + " outside declared domain of " +
                              lhs.str());
    }
    q.filters.push_back({lhs, op, v});
  }

  const Schema& schema_;
  std::vector<Token> toks_;
  size_t cursor_ = 0;
};

}  // namespace

SpjQuery parse_sql(std::string_view text, const Schema& schema) {
  return Parser(text, schema).run();
}

// ---------------------------------------------------------------------------
// Workload JSONL
// ---------------------------------------------------------------------------

std::vector<WorkloadFileEntry> read_workload_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<WorkloadFileEntry> entries;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      WorkloadFileEntry e;
      e.group = j.at("group").get<std::string>();
      e.sql = j.at("sql").get<std::string>();
      if (j.contains("card")) e.card = j.at("card").get<uint64_t>();
      entries.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return entries;
}

void write_workload_jsonl(const std::vector<WorkloadFileEntry>& entries,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (const auto& e : entries) {
    json j;
    j["group"] = e.group;
    j["sql"] = e.sql;
    if (e.card) j["card"] = *e.card;
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace cardmix
