#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cardmix/featurizer.hpp"
#include "cardmix/mixture.hpp"

namespace cardmix {

enum class LossSpace { Log, Raw };

const char* to_string(LossSpace space);
LossSpace loss_space_from_string(std::string_view s);

/// Fully-connected net, ReLU hidden layers, linear output. The same type
/// serves the reference model, the proxy, and the final estimator. The
/// output is interpreted as the predicted log-cardinality ln(1 + card).
struct MlpParams {
  std::vector<size_t> layer_dims;            // e.g. {32, 64, 64, 1}
  std::vector<std::vector<double>> weights;  // [layer][out * in], row-major
  std::vector<std::vector<double>> biases;   // [layer][out]

  size_t layer_count() const { return weights.size(); }
  void validate() const;
  static MlpParams zeros(std::vector<size_t> dims);
};

inline const std::vector<size_t> kDefaultLayerDims = {kFeatureDim, 64, 64, 1};

/// Glorot-uniform weights, zero biases; bit-identical per seed.
MlpParams init_params(uint64_t seed,
                      const std::vector<size_t>& dims = kDefaultLayerDims);

double forward(const MlpParams& p, const FeatureVector& v);

/// Log space: (forward - ln(1+card))^2; raw space: (expm1(forward) - card)^2.
double example_loss(const MlpParams& p, const FeatureVector& v, double card,
                    LossSpace space);

struct WeightedExample {
  const FeatureVector* features;
  double card;
  double weight;  // >= 0
};

/// Exact backpropagation gradient of sum_i weight_i * example_loss_i.
MlpParams grad(const MlpParams& p, std::span<const WeightedExample> batch,
               LossSpace space);

class AdamOptimizer {
 public:
  AdamOptimizer(const MlpParams& shape, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);
  void step(MlpParams& params, const MlpParams& gradient);

 private:
  double lr_, beta1_, beta2_, eps_;
  uint64_t t_ = 0;
  MlpParams m_, v_;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  size_t epochs = 40;
  size_t batch_size = 256;
  uint64_t seed = 0;
  LossSpace loss_space = LossSpace::Log;

  void validate() const;
};

/// Adam on sum_i alpha_i * (mean loss over group i), minibatched with
/// seeded per-epoch shuffling; deterministic per (inputs, config).
MlpParams train(const MixtureCorpus& corpus, const DomainWeights& weights,
                const TrainConfig& cfg);

/// The alpha-weighted group-mean objective over the whole corpus.
double mean_weighted_loss(const MlpParams& p, const MixtureCorpus& corpus,
                          const DomainWeights& weights, LossSpace space);

/// max(expm1(forward), 1): clamped so q-error is always well-defined.
double predict_card(const MlpParams& p, const FeatureVector& v);
double predict_card(const MlpParams& p, const SpjQuery& q, const SchemaStats& stats);

// Checkpoint JSON: {version, layer_dims, weights, biases, loss_space}.
// Doubles round-trip losslessly (shortest-representation encoding).
struct Checkpoint {
  MlpParams params;
  LossSpace loss_space = LossSpace::Log;
};

void save_checkpoint(const MlpParams& params, LossSpace space,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace cardmix
