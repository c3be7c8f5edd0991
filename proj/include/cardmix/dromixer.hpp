#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cardmix/estimator.hpp"
#include "cardmix/mixture.hpp"

namespace cardmix {

struct DroConfig {
  size_t steps = 1000;
  size_t batch_size = 2000;
  double eta_alpha = 0.1;
  double smoothing = 1e-3;  // c in [0, 1): mix toward uniform after each update
  TrainConfig proxy_train;  // learning rate / seed / loss space for the proxy
  uint64_t seed = 0;

  void validate(size_t group_count) const;
};

/// Per-group mean clipped excess loss over one batch. Groups absent from
/// the batch carry excess 0 and count 0.
struct ExcessLossReport {
  std::vector<double> excess;
  std::vector<uint64_t> counts;
};

/// Batch member: (group index, example).
using BatchItem = std::pair<size_t, const CorpusExample*>;

/// mean over the group's batch members of max(loss_proxy - loss_reference, 0).
ExcessLossReport excess_losses(const MlpParams& proxy, const MlpParams& reference,
                               std::span<const BatchItem> batch, size_t group_count,
                               LossSpace space);

/// Exponentiated-gradient ascent on the simplex:
/// alpha'' proportional to alpha * exp(eta * excess), then
/// alpha_out = (1 - c) * alpha'' + c * uniform.
DomainWeights update_weights(const DomainWeights& alpha,
                             const ExcessLossReport& report, double eta, double c);

struct DroStep {
  std::vector<double> alpha;
  std::vector<double> excess;
};

struct DroResult {
  DomainWeights average_weights;  // time average over all steps
  MlpParams proxy;
  std::vector<DroStep> trace;
};

/// The minimax loop: per step, draw a uniform batch from the pooled corpus,
/// update the domain weights from the clipped excess report, then take one
/// Adam step on the proxy under the alpha-weighted per-group batch means.
DroResult run_dro(const MixtureCorpus& corpus, const MlpParams& reference,
                  const DroConfig& cfg);

/// Per-group sample counts: round-half-up of alpha_i * budget, with a
/// minimum of one whenever alpha_i > 0.
std::vector<size_t> simplified_counts(std::span<const double> alpha, size_t budget);

/// Index selection shared by corpus- and workload-level sampling: uniform
/// without replacement within each group (all rows when the group is
/// smaller than its quota), ascending within each group.
std::vector<std::vector<size_t>> simplified_sample_indices(
    const std::vector<size_t>& group_sizes, std::span<const double> alpha,
    size_t budget, uint64_t seed);

/// The resampled corpus; groups with a zero quota are dropped, group
/// identity is preserved for the rest.
MixtureCorpus sample_simplified(const MixtureCorpus& corpus,
                                const DomainWeights& weights, size_t budget,
                                uint64_t seed);

// Weights file: {names, alpha, steps, eta, smoothing, seed}.
void save_weights(const DomainWeights& weights, const DroConfig& cfg,
                  const std::string& path);
DomainWeights load_weights(const std::string& path);

// Trace file: JSON Lines, one {step, alpha, excess} record per step.
void save_trace(const std::vector<DroStep>& trace, const std::string& path);

}  // namespace cardmix
