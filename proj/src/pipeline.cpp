#include "cardmix/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include <json.hpp>

#include "cardmix/oracle.hpp"
#include "cardmix/rng.hpp"

namespace cardmix {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

uint64_t derive_seed(uint64_t master, const std::string& tag) {
  return splitmix64(master + 0x9E3779B97F4A7C15ULL * (hash_name(tag) + 1));
}

double minutes_since(std::chrono::steady_clock::time_point start) {
  const auto elapsed = std::chrono::steady_clock::now() - start;
  return std::chrono::duration<double>(elapsed).count() / 60.0;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

std::vector<const GroupSpec*> ExperimentConfig::training_groups() const {
  std::vector<const GroupSpec*> out;
  for (const auto& g : groups) {
    if (!g.held_out) out.push_back(&g);
  }
  return out;
}

std::vector<const GroupSpec*> ExperimentConfig::held_out_groups() const {
  std::vector<const GroupSpec*> out;
  for (const auto& g : groups) {
    if (g.held_out) out.push_back(&g);
  }
  return out;
}

const GroupSpec& ExperimentConfig::group(const std::string& name) const {
  for (const auto& g : groups) {
    if (g.name == name) return g;
  }
  throw ConfigError("unknown group: " + name);
}

void ExperimentConfig::validate() const {
  if (config_version != 1) {
    throw ConfigError("unsupported config_version " + std::to_string(config_version));
  }
  if (out_dir.empty()) throw ConfigError("out_dir must be set");
  if (groups.empty()) throw ConfigError("config declares no groups");
  if (histogram_buckets < 1) throw ConfigError("histogram_buckets must be >= 1");
  std::set<std::string> names;
  for (const auto& g : groups) {
    if (g.name.empty()) throw ConfigError("group with empty name");
    if (!names.insert(g.name).second) throw ConfigError("duplicate group " + g.name);
    if (g.workload_size < 1) {
      throw ConfigError("group " + g.name + ": workload_size must be >= 1");
    }
    g.generator.validate();
    g.workload.validate();
    if (g.workload.max_tables > g.generator.table_count) {
      throw ConfigError("group " + g.name +
                        ": workload max_tables exceeds the table count");
    }
  }
  if (training_groups().empty()) throw ConfigError("no training groups configured");
  train.validate();
  dro.validate(training_groups().size());
  cost.validate();
  if (budget < training_groups().size()) {
    throw ConfigError("budget must be at least the training group count");
  }
}

namespace {

GeneratorConfig generator_from_json(const json& j) {
  GeneratorConfig g;
  g.table_prefix = get_or<std::string>(j, "table_prefix", g.table_prefix);
  g.table_count = get_or<uint32_t>(j, "table_count", g.table_count);
  g.rows_min = get_or<uint64_t>(j, "rows_min", g.rows_min);
  g.rows_max = get_or<uint64_t>(j, "rows_max", g.rows_max);
  if (j.contains("topology")) {
    g.topology = fk_topology_from_string(j.at("topology").get<std::string>());
  }
  if (j.contains("custom_fks")) {
    for (const auto& e : j.at("custom_fks")) {
      g.custom_fks.emplace_back(e.at(0).get<uint32_t>(), e.at(1).get<uint32_t>());
    }
  }
  g.payload_min = get_or<uint32_t>(j, "payload_min", g.payload_min);
  g.payload_max = get_or<uint32_t>(j, "payload_max", g.payload_max);
  g.zipf_share = get_or<double>(j, "zipf_share", g.zipf_share);
  g.zipf_s = get_or<double>(j, "zipf_s", g.zipf_s);
  g.correlated_share = get_or<double>(j, "correlated_share", g.correlated_share);
  g.correlated_noise = get_or<double>(j, "correlated_noise", g.correlated_noise);
  g.categorical_share = get_or<double>(j, "categorical_share", g.categorical_share);
  g.domain_width_min = get_or<uint64_t>(j, "domain_width_min", g.domain_width_min);
  g.domain_width_max = get_or<uint64_t>(j, "domain_width_max", g.domain_width_max);
  g.fk_zipf_share = get_or<double>(j, "fk_zipf_share", g.fk_zipf_share);
  g.fk_zipf_s = get_or<double>(j, "fk_zipf_s", g.fk_zipf_s);
  return g;
}

WorkloadConfig workload_from_json(const json& j) {
  WorkloadConfig w;
  w.max_tables = get_or<uint32_t>(j, "max_tables", w.max_tables);
  w.max_filters = get_or<uint32_t>(j, "max_filters", w.max_filters);
  if (j.contains("op_mix")) {
    const auto mix = j.at("op_mix").get<std::vector<double>>();
    if (mix.size() != kFilterOpCount) {
      throw ConfigError("op_mix must list exactly 5 weights (EQ, LT, GT, LE, GE)");
    }
    std::copy(mix.begin(), mix.end(), w.op_mix.begin());
  }
  return w;
}

TrainConfig train_from_json(const json& j) {
  TrainConfig t;
  t.learning_rate = get_or<double>(j, "learning_rate", t.learning_rate);
  t.epochs = get_or<size_t>(j, "epochs", t.epochs);
  t.batch_size = get_or<size_t>(j, "batch_size", t.batch_size);
  t.seed = get_or<uint64_t>(j, "seed", t.seed);
  if (j.contains("loss_space")) {
    t.loss_space = loss_space_from_string(j.at("loss_space").get<std::string>());
  }
  return t;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(std::string("config parse: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg.config_version = j.at("config_version").get<int>();
    cfg.seed = get_or<uint64_t>(j, "seed", 0);
    cfg.out_dir = j.at("out_dir").get<std::string>();
    cfg.histogram_buckets =
        get_or<uint64_t>(j, "histogram_buckets", kDefaultHistogramBuckets);
    cfg.budget = get_or<size_t>(j, "budget", cfg.budget);
    if (j.contains("train")) cfg.train = train_from_json(j.at("train"));
    if (j.contains("dro")) {
      const json& d = j.at("dro");
      cfg.dro.steps = get_or<size_t>(d, "steps", cfg.dro.steps);
      cfg.dro.batch_size = get_or<size_t>(d, "batch_size", cfg.dro.batch_size);
      cfg.dro.eta_alpha = get_or<double>(d, "eta_alpha", cfg.dro.eta_alpha);
      cfg.dro.smoothing = get_or<double>(d, "smoothing", cfg.dro.smoothing);
      cfg.dro.seed = get_or<uint64_t>(d, "seed", cfg.dro.seed);
      if (d.contains("proxy")) cfg.dro.proxy_train = train_from_json(d.at("proxy"));
    }
    if (j.contains("cost")) {
      const json& c = j.at("cost");
      cfg.cost.scan = get_or<double>(c, "scan", 1.0);
      cfg.cost.build = get_or<double>(c, "build", 1.0);
      cfg.cost.probe = get_or<double>(c, "probe", 1.0);
      cfg.cost.out = get_or<double>(c, "out", 1.0);
    }
    for (const auto& jg : j.at("groups")) {
      GroupSpec spec;
      spec.name = jg.at("name").get<std::string>();
      spec.held_out = get_or<bool>(jg, "held_out", false);
      spec.workload_size = get_or<size_t>(jg, "workload_size", spec.workload_size);
      if (jg.contains("generator")) spec.generator = generator_from_json(jg.at("generator"));
      if (jg.contains("workload")) spec.workload = workload_from_json(jg.at("workload"));
      cfg.groups.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

std::string path_schema(const ExperimentConfig& cfg, const std::string& group) {
  return (fs::path(cfg.out_dir) / ("schema_" + group + ".json")).string();
}
std::string path_data_dir(const ExperimentConfig& cfg, const std::string& group) {
  return (fs::path(cfg.out_dir) / ("data_" + group)).string();
}
std::string path_workload(const ExperimentConfig& cfg, const std::string& group) {
  return (fs::path(cfg.out_dir) / ("workload_" + group + ".jsonl")).string();
}
std::string path_stats(const ExperimentConfig& cfg, const std::string& group) {
  return (fs::path(cfg.out_dir) / ("stats_" + group + ".json")).string();
}
std::string path_model_ref(const ExperimentConfig& cfg) {
  return (fs::path(cfg.out_dir) / "model_ref.json").string();
}
std::string path_model_simplified(const ExperimentConfig& cfg) {
  return (fs::path(cfg.out_dir) / "model_simplified.json").string();
}
std::string path_dro_weights(const ExperimentConfig& cfg) {
  return (fs::path(cfg.out_dir) / "dro_weights.json").string();
}
std::string path_dro_trace(const ExperimentConfig& cfg) {
  return (fs::path(cfg.out_dir) / "dro_trace.jsonl").string();
}
std::string path_simplified_workload(const ExperimentConfig& cfg) {
  return (fs::path(cfg.out_dir) / "simplified.jsonl").string();
}
std::string path_timings(const ExperimentConfig& cfg) {
  return (fs::path(cfg.out_dir) / "timings.json").string();
}
std::string path_report(const ExperimentConfig& cfg) {
  return (fs::path(cfg.out_dir) / "report.csv").string();
}
std::string path_report_meta(const ExperimentConfig& cfg) {
  return (fs::path(cfg.out_dir) / "report_meta.json").string();
}

// ---------------------------------------------------------------------------
// Loading stage artifacts
// ---------------------------------------------------------------------------

LoadedGroup load_group(const ExperimentConfig& cfg, const GroupSpec& spec) {
  LoadedGroup lg;
  lg.schema = load_schema_json(path_schema(cfg, spec.name));
  for (const auto& t : lg.schema.tables) {
    const auto csv = (fs::path(path_data_dir(cfg, spec.name)) / (t.name + ".csv")).string();
    lg.relations.push_back(load_csv(csv, t));
  }
  check_referential_integrity(lg.schema, lg.relations);
  lg.stats = compute_schema_stats(lg.schema, lg.relations, cfg.histogram_buckets);
  return lg;
}

WorkloadGroup load_labeled_workload(const ExperimentConfig& cfg,
                                    const GroupSpec& spec, const Schema& schema) {
  const auto entries = read_workload_jsonl(path_workload(cfg, spec.name));
  WorkloadGroup group;
  group.group_name = spec.name;
  group.schema_ref = spec.name;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].card) {
      throw DataError(path_workload(cfg, spec.name) + ": entry " +
                      std::to_string(i) + " is unlabeled; run the label stage");
    }
    group.examples.push_back({parse_sql(entries[i].sql, schema), *entries[i].card});
  }
  return group;
}

namespace {

void write_timing(const ExperimentConfig& cfg, const std::string& key, double minutes) {
  json j = json::object();
  std::ifstream in(path_timings(cfg));
  if (in) {
    try {
      in >> j;
    } catch (const json::exception&) {
      j = json::object();
    }
  }
  j[key] = minutes;
  std::ofstream out(path_timings(cfg), std::ios::binary);
  if (!out) throw DataError("cannot write " + path_timings(cfg));
  out << j.dump(2) << '\n';
}

double read_timing(const ExperimentConfig& cfg, const std::string& key) {
  std::ifstream in(path_timings(cfg));
  if (!in) return 0.0;
  json j;
  try {
    in >> j;
  } catch (const json::exception&) {
    return 0.0;
  }
  return get_or<double>(j, key.c_str(), 0.0);
}

/// Training corpus plus raw workloads for the training groups, in config order.
struct TrainingData {
  std::vector<WorkloadGroup> workloads;
  MixtureCorpus corpus;
};

TrainingData load_training_data(const ExperimentConfig& cfg) {
  TrainingData td;
  std::map<std::string, SchemaStats> stats;
  for (const GroupSpec* spec : cfg.training_groups()) {
    LoadedGroup lg = load_group(cfg, *spec);
    td.workloads.push_back(load_labeled_workload(cfg, *spec, lg.schema));
    stats.emplace(spec->name, std::move(lg.stats));
  }
  td.corpus = build_corpus(td.workloads, stats);
  return td;
}

}  // namespace

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

void cmd_gen(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  for (const auto& spec : cfg.groups) {
    log_info("gen: group " + spec.name);
    const Dataset ds = gen_synthetic(spec.generator, derive_seed(cfg.seed, "gen:" + spec.name));
    save_schema_json(ds.schema, path_schema(cfg, spec.name));
    fs::create_directories(path_data_dir(cfg, spec.name));
    for (size_t i = 0; i < ds.relations.size(); ++i) {
      const auto csv =
          (fs::path(path_data_dir(cfg, spec.name)) / (ds.schema.tables[i].name + ".csv"))
              .string();
      save_csv(ds.relations[i], csv);
    }
    const SchemaStats stats =
        compute_schema_stats(ds.schema, ds.relations, cfg.histogram_buckets);
    const auto queries =
        gen_workload(ds.schema, stats, spec.workload_size, spec.workload,
                     derive_seed(cfg.seed, "workload:" + spec.name));
    std::vector<WorkloadFileEntry> entries;
    entries.reserve(queries.size());
    for (const auto& q : queries) {
      entries.push_back({spec.name, to_sql(q), std::nullopt});
    }
    write_workload_jsonl(entries, path_workload(cfg, spec.name));
  }
}

void cmd_label(const ExperimentConfig& cfg) {
  for (const auto& spec : cfg.groups) {
    log_info("label: group " + spec.name);
    const LoadedGroup lg = load_group(cfg, spec);
    const auto entries = read_workload_jsonl(path_workload(cfg, spec.name));
    std::vector<SpjQuery> queries;
    queries.reserve(entries.size());
    for (const auto& e : entries) queries.push_back(parse_sql(e.sql, lg.schema));
    const WorkloadGroup labeled =
        label_workload(lg.relations, queries, spec.name, spec.name);
    std::vector<WorkloadFileEntry> out;
    out.reserve(entries.size());
    for (const auto& ex : labeled.examples) {
      out.push_back({spec.name, to_sql(ex.query), ex.cardinality});
    }
    write_workload_jsonl(out, path_workload(cfg, spec.name));
  }
}

void cmd_stats(const ExperimentConfig& cfg) {
  for (const auto& spec : cfg.groups) {
    const LoadedGroup lg = load_group(cfg, spec);
    save_stats_json(lg.stats, path_stats(cfg, spec.name));
  }
}

double cmd_train_ref(const ExperimentConfig& cfg) {
  const TrainingData td = load_training_data(cfg);
  const DomainWeights uniform = uniform_weights(td.corpus);
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, "train-ref:" + std::to_string(cfg.train.seed));
  log_info("train-ref: " + std::to_string(td.corpus.total_size()) + " examples");
  if (log_level() >= LogLevel::Debug) {
    // feature dump next to the checkpoints, one JSON record per example
    const auto path = (fs::path(cfg.out_dir) / "features_debug.jsonl").string();
    std::ofstream out(path, std::ios::binary);
    for (const auto& group : td.corpus.groups) {
      for (const auto& ex : group.examples) {
        json j;
        j["group"] = group.name;
        j["card"] = ex.cardinality;
        j["features"] = ex.features;
        out << j.dump() << '\n';
      }
    }
    log_debug("wrote " + path);
  }
  const auto start = std::chrono::steady_clock::now();
  const MlpParams model = train(td.corpus, uniform, tc);
  const double minutes = minutes_since(start);
  save_checkpoint(model, tc.loss_space, path_model_ref(cfg));
  write_timing(cfg, "train_ref_minutes", minutes);
  return minutes;
}

void cmd_dro(const ExperimentConfig& cfg) {
  const TrainingData td = load_training_data(cfg);
  const Checkpoint ref = load_checkpoint(path_model_ref(cfg));
  DroConfig dc = cfg.dro;
  dc.seed = derive_seed(cfg.seed, "dro:" + std::to_string(cfg.dro.seed));
  dc.proxy_train.seed =
      derive_seed(cfg.seed, "dro-proxy:" + std::to_string(cfg.dro.proxy_train.seed));
  dc.proxy_train.loss_space = ref.loss_space;
  log_info("dro: " + std::to_string(dc.steps) + " steps, batch " +
           std::to_string(dc.batch_size));
  const DroResult result = run_dro(td.corpus, ref.params, dc);
  save_weights(result.average_weights, dc, path_dro_weights(cfg));
  save_trace(result.trace, path_dro_trace(cfg));
}

void cmd_sample(const ExperimentConfig& cfg) {
  const DomainWeights weights = load_weights(path_dro_weights(cfg));
  std::vector<WorkloadGroup> workloads;
  std::vector<size_t> sizes;
  for (const GroupSpec* spec : cfg.training_groups()) {
    const LoadedGroup lg = load_group(cfg, *spec);
    workloads.push_back(load_labeled_workload(cfg, *spec, lg.schema));
    sizes.push_back(workloads.back().examples.size());
  }
  if (weights.names.size() != workloads.size()) {
    throw ConfigError("dro weights do not match the training group count");
  }
  for (size_t g = 0; g < workloads.size(); ++g) {
    if (weights.names[g] != workloads[g].group_name) {
      throw ConfigError("dro weight names do not match the training group order");
    }
  }
  const auto picks = simplified_sample_indices(
      sizes, weights.alpha, cfg.budget, derive_seed(cfg.seed, "sample"));
  std::vector<WorkloadFileEntry> out;
  for (size_t g = 0; g < workloads.size(); ++g) {
    for (size_t i : picks[g]) {
      const auto& ex = workloads[g].examples[i];
      out.push_back({workloads[g].group_name, to_sql(ex.query), ex.cardinality});
    }
  }
  log_info("sample: " + std::to_string(out.size()) + " examples at budget " +
           std::to_string(cfg.budget));
  write_workload_jsonl(out, path_simplified_workload(cfg));
}

double cmd_train_simplified(const ExperimentConfig& cfg) {
  const auto entries = read_workload_jsonl(path_simplified_workload(cfg));
  if (entries.empty()) throw DataError("simplified workload is empty");

  // Group the sampled rows back by group, keeping first-appearance order.
  std::vector<WorkloadGroup> workloads;
  std::map<std::string, size_t> index;
  std::map<std::string, SchemaStats> stats;
  std::map<std::string, Schema> schemas;
  for (const auto& e : entries) {
    auto it = index.find(e.group);
    if (it == index.end()) {
      const GroupSpec& spec = cfg.group(e.group);
      LoadedGroup lg = load_group(cfg, spec);
      schemas.emplace(e.group, lg.schema);
      stats.emplace(e.group, std::move(lg.stats));
      index.emplace(e.group, workloads.size());
      workloads.push_back({e.group, e.group, {}});
      it = index.find(e.group);
    }
    if (!e.card) throw DataError("simplified workload has unlabeled entries");
    workloads[it->second].examples.push_back(
        {parse_sql(e.sql, schemas.at(e.group)), *e.card});
  }
  MixtureCorpus corpus = build_corpus(workloads, stats);

  // The resampled proportions are the mixture: plain example-mean training.
  DomainWeights weights;
  const double total = static_cast<double>(corpus.total_size());
  for (const auto& g : corpus.groups) {
    weights.names.push_back(g.name);
    weights.alpha.push_back(static_cast<double>(g.examples.size()) / total);
  }

  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, "train-simplified:" + std::to_string(cfg.train.seed));
  log_info("train-simplified: " + std::to_string(corpus.total_size()) + " examples");
  const auto start = std::chrono::steady_clock::now();
  const MlpParams model = train(corpus, weights, tc);
  const double minutes = minutes_since(start);
  save_checkpoint(model, tc.loss_space, path_model_simplified(cfg));
  write_timing(cfg, "train_simplified_minutes", minutes);
  return minutes;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

std::vector<double> ModelEval::pooled_q() const {
  std::vector<double> out;
  for (const auto& w : per_group) {
    out.insert(out.end(), w.q_errors.begin(), w.q_errors.end());
  }
  return out;
}

std::vector<double> ModelEval::pooled_p() const {
  std::vector<double> out;
  for (const auto& w : per_group) {
    out.insert(out.end(), w.p_errors.begin(), w.p_errors.end());
  }
  return out;
}

namespace {

ModelEval eval_model_on_heldout(const ExperimentConfig& cfg, const MlpParams& model,
                                const std::string& model_name) {
  ModelEval me;
  me.model = model_name;
  for (const GroupSpec* spec : cfg.held_out_groups()) {
    const LoadedGroup lg = load_group(cfg, *spec);
    const WorkloadGroup wg = load_labeled_workload(cfg, *spec, lg.schema);
    me.per_group.push_back(eval_workload(model, lg.relations, wg, lg.stats, cfg.cost));
  }
  return me;
}

void append_rows(std::vector<ReportRow>& rows, const ModelEval& me,
                 const std::string& suffix, double minutes) {
  for (const auto& w : me.per_group) {
    rows.push_back({w.workload, "q_error" + suffix, percentile_row(w.q_errors),
                    w.q_errors.size(), w.excluded_zero_card, minutes});
    rows.push_back({w.workload, "p_error" + suffix, percentile_row(w.p_errors),
                    w.p_errors.size(), w.excluded_zero_card, minutes});
  }
}

}  // namespace

EvalOutcome cmd_eval(const ExperimentConfig& cfg) {
  if (cfg.held_out_groups().empty()) {
    throw ConfigError("eval requires at least one held-out group");
  }
  const Checkpoint ref = load_checkpoint(path_model_ref(cfg));
  const Checkpoint simplified = load_checkpoint(path_model_simplified(cfg));

  EvalOutcome outcome;
  outcome.full = eval_model_on_heldout(cfg, ref.params, "full");
  outcome.simplified = eval_model_on_heldout(cfg, simplified.params, "simplified");

  const double ref_min = read_timing(cfg, "train_ref_minutes");
  const double simp_min = read_timing(cfg, "train_simplified_minutes");
  std::vector<ReportRow> rows;
  append_rows(rows, outcome.full, "_full", ref_min);
  append_rows(rows, outcome.simplified, "_simplified", simp_min);
  std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.workload != b.workload) return a.workload < b.workload;
    return a.metric < b.metric;
  });
  write_report_csv(rows, path_report(cfg));

  json meta;
  meta["training_groups"] = json::array();
  for (const GroupSpec* g : cfg.training_groups()) meta["training_groups"].push_back(g->name);
  meta["held_out_groups"] = json::array();
  for (const GroupSpec* g : cfg.held_out_groups()) meta["held_out_groups"].push_back(g->name);
  meta["seed"] = cfg.seed;
  meta["train_ref_minutes"] = ref_min;
  meta["train_simplified_minutes"] = simp_min;
  std::ofstream out(path_report_meta(cfg), std::ios::binary);
  if (!out) throw DataError("cannot write " + path_report_meta(cfg));
  out << meta.dump(2) << '\n';
  return outcome;
}

ModelEval cmd_ablate(const ExperimentConfig& cfg, AblateMode mode,
                     const std::string& group) {
  const auto training = cfg.training_groups();
  const bool known = std::any_of(training.begin(), training.end(),
                                 [&](const GroupSpec* g) { return g->name == group; });
  if (!known) throw ConfigError("ablate: unknown training group " + group);

  TrainingData td;
  std::map<std::string, SchemaStats> stats;
  for (const GroupSpec* spec : training) {
    const bool include =
        (mode == AblateMode::Only) ? (spec->name == group) : (spec->name != group);
    if (!include) continue;
    LoadedGroup lg = load_group(cfg, *spec);
    td.workloads.push_back(load_labeled_workload(cfg, *spec, lg.schema));
    stats.emplace(spec->name, std::move(lg.stats));
  }
  if (td.workloads.empty()) {
    throw ConfigError("ablate: the restricted mixture is empty");
  }
  td.corpus = build_corpus(td.workloads, stats);

  const std::string tag = (mode == AblateMode::Only ? "only_" : "exclude_") + group;
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, "train-ablate-" + tag + ":" + std::to_string(cfg.train.seed));
  log_info("ablate " + tag + ": " + std::to_string(td.corpus.total_size()) + " examples");
  const auto start = std::chrono::steady_clock::now();
  const MlpParams model = train(td.corpus, uniform_weights(td.corpus), tc);
  const double minutes = minutes_since(start);
  save_checkpoint(model, tc.loss_space,
                  (fs::path(cfg.out_dir) / ("model_ablate_" + tag + ".json")).string());

  ModelEval me = eval_model_on_heldout(cfg, model, tag);
  std::vector<ReportRow> rows;
  append_rows(rows, me, "", minutes);
  const auto report =
      (fs::path(cfg.out_dir) / ("report_ablate_" + tag + ".csv")).string();
  write_report_csv(rows, report);

  json meta;
  meta["mode"] = mode == AblateMode::Only ? "only" : "exclude";
  meta["group"] = group;
  meta["training_groups"] = json::array();
  for (const auto& w : td.workloads) meta["training_groups"].push_back(w.group_name);
  meta["train_minutes"] = minutes;
  const auto meta_path =
      (fs::path(cfg.out_dir) / ("report_ablate_" + tag + "_meta.json")).string();
  std::ofstream out(meta_path, std::ios::binary);
  if (!out) throw DataError("cannot write " + meta_path);
  out << meta.dump(2) << '\n';
  return me;
}

PipelineOutcome cmd_pipeline(const ExperimentConfig& cfg) {
  PipelineOutcome outcome;
  struct Stage {
    const char* name;
    std::function<void()> run;
  };
  const std::vector<Stage> stages = {
      {"gen", [&] { cmd_gen(cfg); }},
      {"label", [&] { cmd_label(cfg); }},
      {"stats", [&] { cmd_stats(cfg); }},
      {"train-ref", [&] { outcome.ref_minutes = cmd_train_ref(cfg); }},
      {"dro", [&] { cmd_dro(cfg); }},
      {"sample", [&] { cmd_sample(cfg); }},
      {"train", [&] { outcome.simplified_minutes = cmd_train_simplified(cfg); }},
      {"eval", [&] { outcome.eval = cmd_eval(cfg); }},
  };
  for (const auto& stage : stages) {
    const std::string prefix = std::string("pipeline stage '") + stage.name + "' failed: ";
    try {
      stage.run();
    } catch (const ConfigError& e) {
      throw ConfigError(prefix + e.what());
    } catch (const ContractViolation& e) {
      throw ContractViolation(prefix + e.what());
    } catch (const std::exception& e) {
      throw DataError(prefix + e.what());
    }
  }
  outcome.weights = load_weights(path_dro_weights(cfg));
  for (const GroupSpec* spec : cfg.training_groups()) {
    const auto entries = read_workload_jsonl(path_workload(cfg, spec->name));
    outcome.full_corpus_size += entries.size();
  }
  outcome.simplified_size = read_workload_jsonl(path_simplified_workload(cfg)).size();
  return outcome;
}

}  // namespace cardmix
