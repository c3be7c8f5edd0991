#include "cardmix/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cardmix/rng.hpp"

namespace cardmix {

using nlohmann::json;

const char* to_string(LossSpace space) {
  return space == LossSpace::Log ? "log" : "raw";
}

LossSpace loss_space_from_string(std::string_view s) {
  if (s == "log") return LossSpace::Log;
  if (s == "raw") return LossSpace::Raw;
  throw ConfigError("unknown loss space: " + std::string(s));
}

void MlpParams::validate() const {
  if (layer_dims.size() < 2) throw DataError("checkpoint: need at least two layer dims");
  const size_t layers = layer_dims.size() - 1;
  if (weights.size() != layers || biases.size() != layers) {
    throw DataError("checkpoint: dimension mismatch between layer_dims and matrices");
  }
  for (size_t l = 0; l < layers; ++l) {
    const size_t in = layer_dims[l], out = layer_dims[l + 1];
    if (weights[l].size() != in * out || biases[l].size() != out) {
      throw DataError("checkpoint: dimension mismatch in layer " + std::to_string(l));
    }
    for (double w : weights[l]) {
      if (!std::isfinite(w)) throw DataError("checkpoint: non-finite weight");
    }
    for (double b : biases[l]) {
      if (!std::isfinite(b)) throw DataError("checkpoint: non-finite bias");
    }
  }
}

MlpParams MlpParams::zeros(std::vector<size_t> dims) {
  MlpParams p;
  p.layer_dims = std::move(dims);
  for (size_t l = 0; l + 1 < p.layer_dims.size(); ++l) {
    p.weights.emplace_back(p.layer_dims[l] * p.layer_dims[l + 1], 0.0);
    p.biases.emplace_back(p.layer_dims[l + 1], 0.0);
  }
  return p;
}

MlpParams init_params(uint64_t seed, const std::vector<size_t>& dims) {
  MlpParams p = MlpParams::zeros(dims);
  Rng rng(seed);
  for (size_t l = 0; l < p.layer_count(); ++l) {
    const double fan_in = static_cast<double>(dims[l]);
    const double fan_out = static_cast<double>(dims[l + 1]);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& w : p.weights[l]) {
      w = (rng.uniform_double() * 2.0 - 1.0) * bound;
    }
  }
  return p;
}

namespace {

/// Reusable per-layer activation/delta buffers.
struct Scratch {
  std::vector<std::vector<double>> pre;   // pre-activation per layer
  std::vector<std::vector<double>> act;   // post-activation (act[0] = input)
  std::vector<std::vector<double>> delta;

  explicit Scratch(const std::vector<size_t>& dims) {
    act.emplace_back(dims[0]);
    for (size_t l = 1; l < dims.size(); ++l) {
      pre.emplace_back(dims[l]);
      act.emplace_back(dims[l]);
      delta.emplace_back(dims[l]);
    }
  }
};

double forward_into(const MlpParams& p, const FeatureVector& v, Scratch& s) {
  std::copy(v.begin(), v.end(), s.act[0].begin());
  const size_t layers = p.layer_count();
  for (size_t l = 0; l < layers; ++l) {
    const size_t in = p.layer_dims[l], out = p.layer_dims[l + 1];
    const double* w = p.weights[l].data();
    const double* x = s.act[l].data();
    for (size_t o = 0; o < out; ++o) {
      double acc = p.biases[l][o];
      const double* row = w + o * in;
      for (size_t i = 0; i < in; ++i) acc += row[i] * x[i];
      s.pre[l][o] = acc;
      s.act[l + 1][o] = (l + 1 < layers) ? std::max(acc, 0.0) : acc;
    }
  }
  return s.pre[layers - 1][0];
}

double loss_from_output(double f, double card, LossSpace space) {
  if (space == LossSpace::Log) {
    const double d = f - std::log1p(card);
    return d * d;
  }
  const double d = std::expm1(f) - card;
  return d * d;
}

/// dL/df for one example.
double output_grad(double f, double card, LossSpace space) {
  if (space == LossSpace::Log) {
    return 2.0 * (f - std::log1p(card));
  }
  return 2.0 * (std::expm1(f) - card) * std::exp(f);
}

}  // namespace

double forward(const MlpParams& p, const FeatureVector& v) {
  if (p.layer_dims.empty() || p.layer_dims[0] != kFeatureDim) {
    throw ContractViolation("model input width does not match the feature dim");
  }
  Scratch s(p.layer_dims);
  return forward_into(p, v, s);
}

double example_loss(const MlpParams& p, const FeatureVector& v, double card,
                    LossSpace space) {
  return loss_from_output(forward(p, v), card, space);
}

MlpParams grad(const MlpParams& p, std::span<const WeightedExample> batch,
               LossSpace space) {
  MlpParams g = MlpParams::zeros(p.layer_dims);
  Scratch s(p.layer_dims);
  const size_t layers = p.layer_count();
  for (const auto& ex : batch) {
    if (ex.weight < 0.0) throw ContractViolation("example weights must be >= 0");
    if (ex.weight == 0.0) continue;
    const double f = forward_into(p, *ex.features, s);
    s.delta[layers - 1][0] = ex.weight * output_grad(f, ex.card, space);
    for (size_t l = layers; l-- > 0;) {
      const size_t in = p.layer_dims[l], out = p.layer_dims[l + 1];
      const double* d = s.delta[l].data();
      const double* x = s.act[l].data();
      double* gw = g.weights[l].data();
      for (size_t o = 0; o < out; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        double* row = gw + o * in;
        for (size_t i = 0; i < in; ++i) row[i] += dv * x[i];
        g.biases[l][o] += dv;
      }
      if (l == 0) break;
      // delta_{l-1} = (W_l^T delta_l) * relu'(pre_{l-1})
      double* dprev = s.delta[l - 1].data();
      std::fill(dprev, dprev + in, 0.0);
      const double* w = p.weights[l].data();
      for (size_t o = 0; o < out; ++o) {
        const double dv = d[o];
        if (dv == 0.0) continue;
        const double* row = w + o * in;
        for (size_t i = 0; i < in; ++i) dprev[i] += row[i] * dv;
      }
      for (size_t i = 0; i < in; ++i) {
        if (s.pre[l - 1][i] <= 0.0) dprev[i] = 0.0;
      }
    }
  }
  return g;
}

AdamOptimizer::AdamOptimizer(const MlpParams& shape, double learning_rate,
                             double beta1, double beta2, double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(MlpParams::zeros(shape.layer_dims)),
      v_(MlpParams::zeros(shape.layer_dims)) {}

void AdamOptimizer::step(MlpParams& params, const MlpParams& gradient) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                    std::vector<double>& m, std::vector<double>& v) {
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  };
  for (size_t l = 0; l < params.layer_count(); ++l) {
    update(params.weights[l], gradient.weights[l], m_.weights[l], v_.weights[l]);
    update(params.biases[l], gradient.biases[l], m_.biases[l], v_.biases[l]);
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

MlpParams train(const MixtureCorpus& corpus, const DomainWeights& weights,
                const TrainConfig& cfg) {
  cfg.validate();
  corpus.validate();
  weights.validate(1e-6);
  if (weights.size() != corpus.groups.size()) {
    throw ConfigError("weight count does not match group count");
  }
  for (size_t g = 0; g < corpus.groups.size(); ++g) {
    if (weights.names[g] != corpus.groups[g].name) {
      throw ConfigError("weight names do not match corpus group order");
    }
    if (weights.alpha[g] > 0.0 && corpus.groups[g].examples.empty()) {
      throw ConfigError("group " + corpus.groups[g].name +
                        " has positive weight but no examples");
    }
  }

  // Per-example weight alpha_g / |X_g| makes the epoch sum equal the
  // group-mean objective.
  struct Flat {
    const FeatureVector* features;
    double card;
    double weight;
  };
  std::vector<Flat> flat;
  for (size_t g = 0; g < corpus.groups.size(); ++g) {
    const auto& group = corpus.groups[g];
    const double w =
        weights.alpha[g] / static_cast<double>(group.examples.size());
    for (const auto& ex : group.examples) {
      flat.push_back({&ex.features, ex.cardinality, w});
    }
  }
  const size_t n = flat.size();

  MlpParams params = init_params(cfg.seed);
  AdamOptimizer adam(params, cfg.learning_rate);
  Rng shuffle_rng = Rng(cfg.seed).fork("shuffle");

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<WeightedExample> batch;
  batch.reserve(cfg.batch_size);

  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (size_t start = 0; start < n; start += cfg.batch_size) {
      const size_t end = std::min(n, start + cfg.batch_size);
      const double scale =
          static_cast<double>(n) / static_cast<double>(end - start);
      batch.clear();
      for (size_t i = start; i < end; ++i) {
        const Flat& f = flat[order[i]];
        batch.push_back({f.features, f.card, f.weight * scale});
      }
      const MlpParams g = grad(params, batch, cfg.loss_space);
      adam.step(params, g);
    }
  }
  return params;
}

double mean_weighted_loss(const MlpParams& p, const MixtureCorpus& corpus,
                          const DomainWeights& weights, LossSpace space) {
  double total = 0.0;
  Scratch s(p.layer_dims);
  for (size_t g = 0; g < corpus.groups.size(); ++g) {
    const auto& group = corpus.groups[g];
    double group_sum = 0.0;
    for (const auto& ex : group.examples) {
      group_sum += loss_from_output(forward_into(p, ex.features, s),
                                    ex.cardinality, space);
    }
    total += weights.alpha[g] * group_sum / static_cast<double>(group.examples.size());
  }
  return total;
}

double predict_card(const MlpParams& p, const FeatureVector& v) {
  return std::max(std::expm1(forward(p, v)), 1.0);
}

double predict_card(const MlpParams& p, const SpjQuery& q, const SchemaStats& stats) {
  return predict_card(p, encode(q, stats));
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {
constexpr int kCheckpointVersion = 1;
}

void save_checkpoint(const MlpParams& params, LossSpace space,
                     const std::string& path) {
  params.validate();
  json j;
  j["version"] = kCheckpointVersion;
  j["layer_dims"] = params.layer_dims;
  j["weights"] = params.weights;
  j["biases"] = params.biases;
  j["loss_space"] = to_string(space);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump() << '\n';
  if (!out) throw DataError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("checkpoint " + path + ": " + e.what());
  }
  Checkpoint ck;
  try {
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw DataError("checkpoint " + path + ": version mismatch");
    }
    ck.params.layer_dims = j.at("layer_dims").get<std::vector<size_t>>();
    ck.params.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    ck.params.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    ck.loss_space = loss_space_from_string(j.at("loss_space").get<std::string>());
  } catch (const json::exception& e) {
    throw DataError("checkpoint " + path + ": " + e.what());
  }
  ck.params.validate();
  return ck;
}

}  // namespace cardmix
