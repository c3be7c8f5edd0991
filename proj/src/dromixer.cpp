#include "cardmix/dromixer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cardmix/rng.hpp"

namespace cardmix {

using nlohmann::json;

void DroConfig::validate(size_t group_count) const {
  if (steps == 0) throw ConfigError("dro steps must be >= 1");
  if (batch_size < 1) throw ConfigError("dro batch_size must be >= 1");
  if (!(eta_alpha > 0.0)) throw ConfigError("eta_alpha must be > 0");
  if (smoothing < 0.0 || smoothing >= 1.0) {
    throw ConfigError("smoothing must lie in [0, 1)");
  }
  proxy_train.validate();
  if (batch_size < group_count) {
    log_info("dro batch_size " + std::to_string(batch_size) +
             " is smaller than the group count " + std::to_string(group_count) +
             "; excess estimates will be sparse");
  }
}

ExcessLossReport excess_losses(const MlpParams& proxy, const MlpParams& reference,
                               std::span<const BatchItem> batch, size_t group_count,
                               LossSpace space) {
  ExcessLossReport report;
  report.excess.assign(group_count, 0.0);
  report.counts.assign(group_count, 0);
  for (const auto& [g, ex] : batch) {
    if (g >= group_count) throw ContractViolation("batch group index out of range");
    const double lp = example_loss(proxy, ex->features, ex->cardinality, space);
    const double lr = example_loss(reference, ex->features, ex->cardinality, space);
    report.excess[g] += std::max(lp - lr, 0.0);
    report.counts[g] += 1;
  }
  for (size_t g = 0; g < group_count; ++g) {
    if (report.counts[g] > 0) {
      report.excess[g] /= static_cast<double>(report.counts[g]);
    }
  }
  return report;
}

DomainWeights update_weights(const DomainWeights& alpha,
                             const ExcessLossReport& report, double eta, double c) {
  alpha.validate(1e-6);
  if (report.excess.size() != alpha.size()) {
    throw ContractViolation("excess report size does not match weight count");
  }
  const size_t k = alpha.size();
  DomainWeights out;
  out.names = alpha.names;
  out.alpha.resize(k);
  double sum = 0.0;
  for (size_t i = 0; i < k; ++i) {
    if (report.excess[i] < 0.0) {
      throw ContractViolation("excess losses must be clipped at 0");
    }
    out.alpha[i] = alpha.alpha[i] * std::exp(eta * report.excess[i]);
    sum += out.alpha[i];
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw ContractViolation("weight renormalization failed (sum " +
                            std::to_string(sum) + ")");
  }
  if (sum != 1.0) {
    for (auto& a : out.alpha) a /= sum;
  }
  if (c > 0.0) {
    const double u = 1.0 / static_cast<double>(k);
    for (auto& a : out.alpha) a = (1.0 - c) * a + c * u;
  }
  out.validate(1e-9);
  return out;
}

DroResult run_dro(const MixtureCorpus& corpus, const MlpParams& reference,
                  const DroConfig& cfg) {
  corpus.validate();
  reference.validate();
  const size_t k = corpus.groups.size();
  cfg.validate(k);

  // Pooled index: cumulative sizes map a draw in [0, total) to (group, row).
  std::vector<size_t> cum(k + 1, 0);
  for (size_t g = 0; g < k; ++g) {
    cum[g + 1] = cum[g] + corpus.groups[g].examples.size();
  }
  const size_t total = cum[k];

  // Reference losses are fixed; compute them once.
  std::vector<std::vector<double>> ref_loss(k);
  for (size_t g = 0; g < k; ++g) {
    ref_loss[g].reserve(corpus.groups[g].examples.size());
    for (const auto& ex : corpus.groups[g].examples) {
      ref_loss[g].push_back(example_loss(reference, ex.features, ex.cardinality,
                                         cfg.proxy_train.loss_space));
    }
  }

  MlpParams proxy = init_params(cfg.proxy_train.seed);
  AdamOptimizer adam(proxy, cfg.proxy_train.learning_rate);
  Rng rng = Rng(cfg.seed).fork("dro");

  DomainWeights alpha;
  for (const auto& g : corpus.groups) alpha.names.push_back(g.name);
  alpha.alpha.assign(k, 1.0 / static_cast<double>(k));

  DroResult result;
  result.trace.reserve(cfg.steps);
  std::vector<double> alpha_sum(k, 0.0);

  std::vector<std::pair<size_t, size_t>> batch_ids(cfg.batch_size);
  std::vector<WeightedExample> grad_batch;
  grad_batch.reserve(cfg.batch_size);

  for (size_t step = 1; step <= cfg.steps; ++step) {
    for (auto& [g, i] : batch_ids) {
      const size_t pick = rng.below(total);
      const size_t gi =
          static_cast<size_t>(std::upper_bound(cum.begin(), cum.end(), pick) -
                              cum.begin()) -
          1;
      g = gi;
      i = pick - cum[gi];
    }

    // Clipped excess per group over this batch.
    ExcessLossReport report;
    report.excess.assign(k, 0.0);
    report.counts.assign(k, 0);
    std::vector<double> proxy_losses(cfg.batch_size);
    for (size_t b = 0; b < cfg.batch_size; ++b) {
      const auto [g, i] = batch_ids[b];
      const auto& ex = corpus.groups[g].examples[i];
      proxy_losses[b] =
          example_loss(proxy, ex.features, ex.cardinality, cfg.proxy_train.loss_space);
      report.excess[g] += std::max(proxy_losses[b] - ref_loss[g][i], 0.0);
      report.counts[g] += 1;
    }
    for (size_t g = 0; g < k; ++g) {
      if (report.counts[g] > 0) {
        report.excess[g] /= static_cast<double>(report.counts[g]);
      }
    }

    alpha = update_weights(alpha, report, cfg.eta_alpha, cfg.smoothing);

    // One Adam step on sum_g alpha_g * (group batch mean loss).
    grad_batch.clear();
    for (size_t b = 0; b < cfg.batch_size; ++b) {
      const auto [g, i] = batch_ids[b];
      if (report.counts[g] == 0) continue;
      const auto& ex = corpus.groups[g].examples[i];
      grad_batch.push_back(
          {&ex.features, ex.cardinality,
           alpha.alpha[g] / static_cast<double>(report.counts[g])});
    }
    const MlpParams g = grad(proxy, grad_batch, cfg.proxy_train.loss_space);
    adam.step(proxy, g);

    for (size_t gi = 0; gi < k; ++gi) alpha_sum[gi] += alpha.alpha[gi];
    result.trace.push_back({alpha.alpha, report.excess});
  }

  DomainWeights avg;
  avg.names = alpha.names;
  avg.alpha.resize(k);
  double total_avg = 0.0;
  for (size_t g = 0; g < k; ++g) {
    avg.alpha[g] = alpha_sum[g] / static_cast<double>(cfg.steps);
    total_avg += avg.alpha[g];
  }
  for (auto& a : avg.alpha) a /= total_avg;  // keep the simplex exact
  avg.validate(1e-9);

  result.average_weights = std::move(avg);
  result.proxy = std::move(proxy);
  return result;
}

std::vector<size_t> simplified_counts(std::span<const double> alpha, size_t budget) {
  std::vector<size_t> counts(alpha.size(), 0);
  for (size_t i = 0; i < alpha.size(); ++i) {
    if (!(alpha[i] >= 0.0) || !std::isfinite(alpha[i])) {
      throw ContractViolation("weights must be finite and >= 0");
    }
    const double scaled = alpha[i] * static_cast<double>(budget);
    size_t n = static_cast<size_t>(std::floor(scaled + 0.5));  // round half up
    if (alpha[i] > 0.0 && n == 0) n = 1;
    counts[i] = n;
  }
  return counts;
}

std::vector<std::vector<size_t>> simplified_sample_indices(
    const std::vector<size_t>& group_sizes, std::span<const double> alpha,
    size_t budget, uint64_t seed) {
  if (group_sizes.size() != alpha.size()) {
    throw ContractViolation("group size list does not match weight count");
  }
  size_t positive = 0;
  for (double a : alpha) {
    if (a > 0.0) ++positive;
  }
  if (budget < positive) {
    throw ConfigError("budget " + std::to_string(budget) +
                      " is smaller than the number of positive-weight groups (" +
                      std::to_string(positive) + ")");
  }
  const auto counts = simplified_counts(alpha, budget);
  const Rng root(seed);
  std::vector<std::vector<size_t>> picks(alpha.size());
  for (size_t g = 0; g < alpha.size(); ++g) {
    if (counts[g] == 0) continue;
    if (counts[g] >= group_sizes[g]) {
      if (counts[g] > group_sizes[g]) {
        log_info("group " + std::to_string(g) + " quota " +
                 std::to_string(counts[g]) + " exceeds its size " +
                 std::to_string(group_sizes[g]) + "; taking all rows");
      }
      picks[g].resize(group_sizes[g]);
      for (size_t i = 0; i < group_sizes[g]; ++i) picks[g][i] = i;
      continue;
    }
    Rng rng = root.fork(g);
    picks[g] = rng.sample_indices(group_sizes[g], counts[g]);
  }
  return picks;
}

MixtureCorpus sample_simplified(const MixtureCorpus& corpus,
                                const DomainWeights& weights, size_t budget,
                                uint64_t seed) {
  corpus.validate();
  weights.validate(1e-6);
  if (weights.size() != corpus.groups.size()) {
    throw ConfigError("weight count does not match group count");
  }
  std::vector<size_t> sizes;
  for (const auto& g : corpus.groups) sizes.push_back(g.examples.size());
  const auto picks = simplified_sample_indices(sizes, weights.alpha, budget, seed);

  MixtureCorpus out;
  for (size_t g = 0; g < corpus.groups.size(); ++g) {
    if (picks[g].empty()) continue;
    CorpusGroup group;
    group.name = corpus.groups[g].name;
    for (size_t i : picks[g]) group.examples.push_back(corpus.groups[g].examples[i]);
    out.groups.push_back(std::move(group));
  }
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

void save_weights(const DomainWeights& weights, const DroConfig& cfg,
                  const std::string& path) {
  weights.validate(1e-6);
  json j;
  j["names"] = weights.names;
  j["alpha"] = weights.alpha;
  j["steps"] = cfg.steps;
  j["eta"] = cfg.eta_alpha;
  j["smoothing"] = cfg.smoothing;
  j["seed"] = cfg.seed;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

DomainWeights load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  DomainWeights w;
  try {
    w.names = j.at("names").get<std::vector<std::string>>();
    w.alpha = j.at("alpha").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  w.validate(1e-6);
  return w;
}

void save_trace(const std::vector<DroStep>& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  for (size_t t = 0; t < trace.size(); ++t) {
    json j;
    j["step"] = t + 1;
    j["alpha"] = trace[t].alpha;
    j["excess"] = trace[t].excess;
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace cardmix
