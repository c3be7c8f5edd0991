#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cardmix/featurizer.hpp"
#include "cardmix/querygen.hpp"

namespace cardmix {

/// One training example with its feature encoding precomputed.
struct CorpusExample {
  FeatureVector features;
  double cardinality = 0.0;
};

struct CorpusGroup {
  std::string name;
  std::vector<CorpusExample> examples;
};

/// k workload groups, each non-empty, features already encoded against the
/// group's own schema statistics.
struct MixtureCorpus {
  std::vector<CorpusGroup> groups;

  size_t total_size() const;
  size_t group_index(std::string_view name) const;
  void validate() const;
};

MixtureCorpus build_corpus(const std::vector<WorkloadGroup>& workloads,
                           const std::map<std::string, SchemaStats>& stats_by_group);

/// Simplex weights over the corpus groups.
struct DomainWeights {
  std::vector<std::string> names;
  std::vector<double> alpha;

  size_t size() const { return alpha.size(); }
  /// Non-negative, distinct names, sum within tol of 1.
  void validate(double tol = 1e-9) const;
};

DomainWeights uniform_weights(const MixtureCorpus& corpus);

}  // namespace cardmix
