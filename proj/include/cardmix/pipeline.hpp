#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cardmix/dromixer.hpp"
#include "cardmix/estimator.hpp"
#include "cardmix/metrics.hpp"
#include "cardmix/mixture.hpp"
#include "cardmix/plancost.hpp"
#include "cardmix/querygen.hpp"
#include "cardmix/relstore.hpp"

namespace cardmix {

struct GroupSpec {
  std::string name;
  bool held_out = false;
  size_t workload_size = 1000;
  GeneratorConfig generator;
  WorkloadConfig workload;
};

/// The experiment: schema/workload specs per group, a train/test split of
/// groups (held-out schemas are evaluated zero-shot), training and DRO
/// settings, the simplified-set budget, and one master seed from which all
/// stage seeds derive.
struct ExperimentConfig {
  int config_version = 1;
  uint64_t seed = 0;
  std::string out_dir;
  uint64_t histogram_buckets = kDefaultHistogramBuckets;
  size_t budget = 5000;
  TrainConfig train;
  DroConfig dro;
  CostParams cost;
  std::vector<GroupSpec> groups;

  std::vector<const GroupSpec*> training_groups() const;
  std::vector<const GroupSpec*> held_out_groups() const;
  const GroupSpec& group(const std::string& name) const;
  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

// Artifact paths under cfg.out_dir.
std::string path_schema(const ExperimentConfig& cfg, const std::string& group);
std::string path_data_dir(const ExperimentConfig& cfg, const std::string& group);
std::string path_workload(const ExperimentConfig& cfg, const std::string& group);
std::string path_stats(const ExperimentConfig& cfg, const std::string& group);
std::string path_model_ref(const ExperimentConfig& cfg);
std::string path_model_simplified(const ExperimentConfig& cfg);
std::string path_dro_weights(const ExperimentConfig& cfg);
std::string path_dro_trace(const ExperimentConfig& cfg);
std::string path_simplified_workload(const ExperimentConfig& cfg);
std::string path_timings(const ExperimentConfig& cfg);
std::string path_report(const ExperimentConfig& cfg);
std::string path_report_meta(const ExperimentConfig& cfg);

/// Dataset + statistics for one group, loaded back from stage artifacts.
struct LoadedGroup {
  Schema schema;
  std::vector<Relation> relations;
  SchemaStats stats;
};

LoadedGroup load_group(const ExperimentConfig& cfg, const GroupSpec& spec);
WorkloadGroup load_labeled_workload(const ExperimentConfig& cfg,
                                    const GroupSpec& spec, const Schema& schema);

// Stage entry points. Every artifact is deterministic under (config, seed)
// except measured wall-clock fields (timings.json, the train_minutes report
// column, and report metadata).
void cmd_gen(const ExperimentConfig& cfg);
void cmd_label(const ExperimentConfig& cfg);
void cmd_stats(const ExperimentConfig& cfg);
double cmd_train_ref(const ExperimentConfig& cfg);         // minutes spent
void cmd_dro(const ExperimentConfig& cfg);
void cmd_sample(const ExperimentConfig& cfg);
double cmd_train_simplified(const ExperimentConfig& cfg);  // minutes spent

struct ModelEval {
  std::string model;
  std::vector<WorkloadEval> per_group;

  std::vector<double> pooled_q() const;
  std::vector<double> pooled_p() const;
};

struct EvalOutcome {
  ModelEval full;
  ModelEval simplified;
};

/// Evaluates the full-mixture and simplified models on the held-out groups
/// and writes the comparison report.
EvalOutcome cmd_eval(const ExperimentConfig& cfg);

enum class AblateMode { Only, Exclude };

/// Trains on the restricted mixture (uniform over the included training
/// groups) and evaluates on the held-out groups.
ModelEval cmd_ablate(const ExperimentConfig& cfg, AblateMode mode,
                     const std::string& group);

struct PipelineOutcome {
  DomainWeights weights;
  size_t full_corpus_size = 0;
  size_t simplified_size = 0;
  double ref_minutes = 0.0;
  double simplified_minutes = 0.0;
  EvalOutcome eval;
};

/// gen -> label -> stats -> train-ref -> dro -> sample -> train -> eval.
PipelineOutcome cmd_pipeline(const ExperimentConfig& cfg);

}  // namespace cardmix
