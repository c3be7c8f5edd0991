#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "cardmix/querygen.hpp"
#include "support/oracles.hpp"

using namespace cardmix;

namespace {

Dataset chain4() {
  GeneratorConfig cfg;
  cfg.table_count = 4;
  cfg.topology = FkTopology::Chain;
  cfg.rows_min = 50;
  cfg.rows_max = 120;
  return gen_synthetic(cfg, 41);
}

}  // namespace

TEST_CASE("single-table query renders without WHERE") {
  SpjQuery q;
  q.tables = {"t1"};
  CHECK(to_sql(q) == "SELECT COUNT(*) FROM t1");
}

TEST_CASE("canonical rendering orders tables and joins") {
  SpjQuery q;
  q.tables = {"a", "b"};
  q.joins = {{{"b", "aid"}, {"a", "id"}}};
  q.filters = {{{"a", "v"}, FilterOp::GE, 5}};
  CHECK(to_sql(q) == "SELECT COUNT(*) FROM a, b WHERE b.aid = a.id AND a.v >= 5");
}

TEST_CASE("parse_sql handles a bare single-table query") {
  const auto d = testing::make_tiny_join();
  const SpjQuery q = parse_sql("SELECT COUNT(*) FROM a", d.schema);
  CHECK(q.tables == std::vector<std::string>{"a"});
  CHECK(q.joins.empty());
  CHECK(q.filters.empty());
}

TEST_CASE("parse_sql normalizes join orientation and keywords") {
  const auto d = testing::make_tiny_join();
  const SpjQuery q = parse_sql(
      "select count(*) from a, b where a.id = b.a_fk and b.w < 3", d.schema);
  REQUIRE(q.joins.size() == 1);
  CHECK(q.joins[0].child.str() == "b.a_fk");
  CHECK(q.joins[0].parent.str() == "a.id");
  REQUIRE(q.filters.size() == 1);
  CHECK(q.filters[0].op == FilterOp::LT);
  CHECK(q.filters[0].value == 3);
}

TEST_CASE("parse_sql rejects unknown columns with a position") {
  const auto d = testing::make_tiny_join();
  try {
    parse_sql("SELECT COUNT(*) FROM a WHERE a.nope = 1", d.schema);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("nope") != std::string::npos);
    CHECK(msg.find("offset") != std::string::npos);
  }
}

TEST_CASE("parse_sql rejects non-FK column equality") {
  const auto d = testing::make_tiny_join();
  CHECK_THROWS_AS(parse_sql("SELECT COUNT(*) FROM a, b WHERE a.v = b.w", d.schema),
                  DataError);
}

TEST_CASE("parse_sql rejects disconnected table sets") {
  GeneratorConfig cfg;
  cfg.table_count = 3;
  cfg.custom_fks = {{1, 0}};  // t2 is isolated
  const Dataset ds = gen_synthetic(cfg, 8);
  CHECK_THROWS_AS(parse_sql("SELECT COUNT(*) FROM t0, t2", ds.schema), DataError);
}

TEST_CASE("parse_sql flags syntax errors with their position") {
  const auto d = testing::make_tiny_join();
  CHECK_THROWS_AS(parse_sql("SELECT COUNT(*) FROM", d.schema), DataError);
  CHECK_THROWS_AS(parse_sql("SELECT COUNT(*) FROM a WHERE", d.schema), DataError);
  CHECK_THROWS_AS(parse_sql("FROM a", d.schema), DataError);
  CHECK_THROWS_AS(parse_sql("SELECT COUNT(*) FROM a extra", d.schema), DataError);
}

TEST_CASE("gen_workload: single-table queries have no joins") {
  const Dataset ds = chain4();
  const SchemaStats stats = compute_schema_stats(ds.schema, ds.relations);
  WorkloadConfig cfg;
  cfg.max_tables = 1;
  const auto qs = gen_workload(ds.schema, stats, 1, cfg, 9);
  REQUIRE(qs.size() == 1);
  CHECK(qs[0].tables.size() == 1);
  CHECK(qs[0].joins.empty());
}

TEST_CASE("gen_workload output satisfies the query invariants") {
  const Dataset ds = chain4();
  const SchemaStats stats = compute_schema_stats(ds.schema, ds.relations);
  WorkloadConfig cfg;
  cfg.max_tables = 4;
  cfg.max_filters = 3;
  const auto qs = gen_workload(ds.schema, stats, 500, cfg, 20);
  CHECK(qs.size() == 500);
  bool has_three_joins = false;
  for (const auto& q : qs) {
    q.validate(ds.schema);  // throws on violation
    has_three_joins = has_three_joins || q.joins.size() == 3;
  }
  // Verified once on this pinned seed: the full 4-table chain shows up.
  CHECK(has_three_joins);
}

TEST_CASE("gen_workload is deterministic per seed") {
  const Dataset ds = chain4();
  const SchemaStats stats = compute_schema_stats(ds.schema, ds.relations);
  WorkloadConfig cfg;
  const auto a = gen_workload(ds.schema, stats, 50, cfg, 77);
  const auto b = gen_workload(ds.schema, stats, 50, cfg, 77);
  CHECK(a == b);
}

TEST_CASE("gen_workload errors when max_tables exceeds the largest component") {
  GeneratorConfig gcfg;
  gcfg.table_count = 4;
  gcfg.custom_fks = {{1, 0}};  // components {t0,t1}, {t2}, {t3}
  const Dataset ds = gen_synthetic(gcfg, 4);
  const SchemaStats stats = compute_schema_stats(ds.schema, ds.relations);
  WorkloadConfig cfg;
  cfg.max_tables = 3;
  CHECK_THROWS_AS(gen_workload(ds.schema, stats, 10, cfg, 1), ConfigError);
}

TEST_CASE("sql round trip: parse(to_sql(q)) == q for 1000 generated queries") {
  GeneratorConfig gcfg;
  gcfg.table_count = 5;
  gcfg.topology = FkTopology::Snowflake;
  const Dataset ds = gen_synthetic(gcfg, 31);
  const SchemaStats stats = compute_schema_stats(ds.schema, ds.relations);
  WorkloadConfig cfg;
  cfg.max_tables = 5;
  cfg.max_filters = 4;
  const auto qs = gen_workload(ds.schema, stats, 1000, cfg, 13);
  for (const auto& q : qs) {
    const SpjQuery back = parse_sql(to_sql(q), ds.schema);
    CHECK(back == q);
  }
}

TEST_CASE("canonical idempotence of emit(parse(.))") {
  const auto d = testing::make_tiny_join();
  const std::string messy =
      "select   COUNT( * )  from b , a WHERE a.id=b.a_fk AND b.w<=10 and a.v>2";
  const std::string once = to_sql(parse_sql(messy, d.schema));
  const std::string twice = to_sql(parse_sql(once, d.schema));
  CHECK(once == twice);
}

TEST_CASE("workload jsonl round trip, with and without labels") {
  namespace fs = std::filesystem;
  const auto path = (fs::temp_directory_path() / "cardmix_wl.jsonl").string();
  std::vector<WorkloadFileEntry> entries = {
      {"g1", "SELECT COUNT(*) FROM a", std::nullopt},
      {"g1", "SELECT COUNT(*) FROM a WHERE a.v >= 5", 42},
  };
  write_workload_jsonl(entries, path);
  const auto back = read_workload_jsonl(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].group == "g1");
  CHECK(!back[0].card.has_value());
  CHECK(back[1].card == 42);
  CHECK(back[1].sql == entries[1].sql);
  fs::remove(path);
}
