// cardmix: workbench for pretraining cardinality estimators over grouped
// workloads, reweighting the groups with Group DRO, and resampling a
// simplified training set that matches the full mixture on unseen schemas.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cardmix/common.hpp"
#include "cardmix/metrics.hpp"
#include "cardmix/pipeline.hpp"

namespace {

using namespace cardmix;

ExperimentConfig load_config(const std::string& config_path,
                             const std::optional<uint64_t>& seed,
                             const std::string& out_dir) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (seed) cfg.seed = *seed;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  return cfg;
}

void print_summary(const PipelineOutcome& outcome) {
  std::cout << "pipeline complete\n";
  std::cout << "  full corpus:        " << outcome.full_corpus_size << " examples\n";
  std::cout << "  simplified corpus:  " << outcome.simplified_size << " examples\n";
  std::cout << "  train-ref:          " << outcome.ref_minutes << " min\n";
  std::cout << "  train-simplified:   " << outcome.simplified_minutes << " min\n";
  const auto qf = outcome.eval.full.pooled_q();
  const auto qs = outcome.eval.simplified.pooled_q();
  if (!qf.empty() && !qs.empty()) {
    std::cout << "  held-out median q-error: full " << percentile(qf, 50)
              << ", simplified " << percentile(qs, 50) << "\n";
  }
  std::cout << "  weights:\n";
  for (size_t i = 0; i < outcome.weights.size(); ++i) {
    std::cout << "    " << outcome.weights.names[i] << ": "
              << outcome.weights.alpha[i] << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cardinality-estimation mixture workbench"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<uint64_t> seed;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config JSON")->required();
    cmd->add_option("--seed", seed, "override the config seed");
    cmd->add_option("--out", out_dir, "override the config output directory");
  };

  CLI::App* c_gen = app.add_subcommand("gen", "generate schemas, data, and workloads");
  CLI::App* c_label = app.add_subcommand("label", "fill workload cardinalities");
  CLI::App* c_stats = app.add_subcommand("stats", "write per-group statistics dumps");
  CLI::App* c_train_ref =
      app.add_subcommand("train-ref", "train the full-mixture reference model");
  CLI::App* c_dro = app.add_subcommand("dro", "optimize the domain weights");
  CLI::App* c_sample = app.add_subcommand("sample", "resample the simplified set");
  CLI::App* c_train =
      app.add_subcommand("train", "train the model on the simplified set");
  CLI::App* c_eval = app.add_subcommand("eval", "evaluate both models on held-out groups");
  CLI::App* c_ablate = app.add_subcommand("ablate", "only-/exclude-group training run");
  CLI::App* c_pipeline = app.add_subcommand("pipeline", "run every stage in order");
  for (CLI::App* cmd : {c_gen, c_label, c_stats, c_train_ref, c_dro, c_sample,
                        c_train, c_eval, c_ablate, c_pipeline}) {
    add_common(cmd);
  }

  std::string ablate_mode;
  std::string ablate_group;
  c_ablate->add_option("--mode", ablate_mode, "only | exclude")->required();
  c_ablate->add_option("--group", ablate_group, "training group name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = load_config(config_path, seed, out_dir);
    if (c_gen->parsed()) {
      cmd_gen(cfg);
    } else if (c_label->parsed()) {
      cmd_label(cfg);
    } else if (c_stats->parsed()) {
      cmd_stats(cfg);
    } else if (c_train_ref->parsed()) {
      cmd_train_ref(cfg);
    } else if (c_dro->parsed()) {
      cmd_dro(cfg);
    } else if (c_sample->parsed()) {
      cmd_sample(cfg);
    } else if (c_train->parsed()) {
      cmd_train_simplified(cfg);
    } else if (c_eval->parsed()) {
      cmd_eval(cfg);
    } else if (c_ablate->parsed()) {
      AblateMode mode;
      if (ablate_mode == "only") {
        mode = AblateMode::Only;
      } else if (ablate_mode == "exclude") {
        mode = AblateMode::Exclude;
      } else {
        throw ConfigError("ablate --mode must be 'only' or 'exclude'");
      }
      cmd_ablate(cfg, mode, ablate_group);
    } else if (c_pipeline->parsed()) {
      print_summary(cmd_pipeline(cfg));
    }
  } catch (const ConfigError& e) {
    log_error(std::string("config error: ") + e.what());
    return 2;
  } catch (const DataError& e) {
    log_error(std::string("data error: ") + e.what());
    return 3;
  } catch (const ContractViolation& e) {
    log_error(std::string("contract violation: ") + e.what());
    return 4;
  } catch (const std::exception& e) {
    log_error(e.what());
    return 3;
  }
  return 0;
}
