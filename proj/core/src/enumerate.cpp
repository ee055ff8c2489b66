#include "cnf/enumerate.hpp"

#include <algorithm>
#include <unordered_set>

#include "cnf/canonical.hpp"
#include "cnf/error.hpp"
#include "cnf/smiles.hpp"

namespace cnf {

TraversalOrder random_order(const MolGraph& graph, Rng& rng) {
  TraversalOrder order = default_order(graph);
  order.start = uniform_index(rng, graph.atom_count());
  for (auto& perm : order.neighbor_perm) shuffle(perm, rng);
  return order;
}

std::string random_smiles(const MolGraph& graph, Rng& rng) { return write_smiles(graph, random_order(graph, rng)); }

Enumeration enumerate_smiles(const MolGraph& graph, const EnumerationPolicy& policy) {
  if (policy.count == 0) throw Error(ErrorCode::InvalidConfig, "enumeration count must be at least 1");
  Rng rng(policy.seed);
  Enumeration result;
  result.smiles.reserve(policy.count);
  std::unordered_set<std::string> seen;

  if (policy.include_canonical) {
    result.smiles.push_back(canonical_smiles(graph));
    seen.insert(result.smiles.back());
  }
  while (result.smiles.size() < policy.count) {
    std::string s = random_smiles(graph, rng);
    ++result.stats.draws;
    if (policy.dedup) {
      std::size_t attempts = 1;
      while (seen.count(s) && attempts < kDedupRetries) {
        s = random_smiles(graph, rng);
        ++result.stats.draws;
        ++attempts;
      }
      if (seen.count(s)) ++result.stats.duplicates_accepted;
      seen.insert(s);
    }
    result.smiles.push_back(std::move(s));
  }
  return result;
}

}  // namespace cnf
