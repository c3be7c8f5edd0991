#include "cardmix/mixture.hpp"

#include <cmath>
#include <set>

namespace cardmix {

size_t MixtureCorpus::total_size() const {
  size_t n = 0;
  for (const auto& g : groups) n += g.examples.size();
  return n;
}

size_t MixtureCorpus::group_index(std::string_view name) const {
  for (size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].name == name) return i;
  }
  throw ConfigError("unknown group: " + std::string(name));
}

void MixtureCorpus::validate() const {
  if (groups.empty()) throw ConfigError("corpus must contain at least one group");
  std::set<std::string> names;
  for (const auto& g : groups) {
    if (g.examples.empty()) throw ConfigError("group " + g.name + " is empty");
    if (!names.insert(g.name).second) {
      throw ConfigError("duplicate group name: " + g.name);
    }
  }
}

MixtureCorpus build_corpus(const std::vector<WorkloadGroup>& workloads,
                           const std::map<std::string, SchemaStats>& stats_by_group) {
  MixtureCorpus corpus;
  for (const auto& wg : workloads) {
    const auto it = stats_by_group.find(wg.group_name);
    if (it == stats_by_group.end()) {
      throw ConfigError("no statistics for group " + wg.group_name);
    }
    CorpusGroup group;
    group.name = wg.group_name;
    group.examples.reserve(wg.examples.size());
    for (const auto& ex : wg.examples) {
      group.examples.push_back({encode(ex.query, it->second),
                                static_cast<double>(ex.cardinality)});
    }
    corpus.groups.push_back(std::move(group));
  }
  corpus.validate();
  return corpus;
}

void DomainWeights::validate(double tol) const {
  if (alpha.size() != names.size()) {
    throw ContractViolation("weight/name count mismatch");
  }
  if (alpha.empty()) throw ContractViolation("empty weight vector");
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw ContractViolation("duplicate group name: " + n);
  }
  double sum = 0.0;
  for (double a : alpha) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw ContractViolation("weights must be finite and >= 0");
    }
    sum += a;
  }
  if (std::abs(sum - 1.0) > tol) {
    throw ContractViolation("weights sum to " + std::to_string(sum) +
                            ", expected 1 within tolerance");
  }
}

DomainWeights uniform_weights(const MixtureCorpus& corpus) {
  corpus.validate();
  DomainWeights w;
  const size_t k = corpus.groups.size();
  for (const auto& g : corpus.groups) w.names.push_back(g.name);
  w.alpha.assign(k, 1.0 / static_cast<double>(k));
  return w;
}

}  // namespace cardmix
